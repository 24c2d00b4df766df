#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace nlstab {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column index by name; throws ConfigError when absent.
  std::size_t column(std::string_view name) const;
};

/// Numeric CSV with a single header line. Throws ConfigError on malformed input.
CsvTable read_csv(const std::string& path);

/// Shortest-safe text for a double: 17 significant digits, `.` separator,
/// locale independent. Non-finite values print as nan / inf / -inf.
std::string format_double(double value);

/// Writes header + rows with LF line endings. Cells are preformatted strings.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string join(const std::vector<std::string>& cells, char sep);

}  // namespace nlstab
