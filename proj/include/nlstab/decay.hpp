#pragma once

#include <optional>
#include <vector>

namespace nlstab {

/// Least-squares fit of log(series) = log(c) - alpha t over a window that
/// skips the initial transient.
struct DecayFit {
  double alpha = 0.0;
  double c = 0.0;
  double r_squared = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  int points = 0;
  /// Set instead of a fit when the series reaches zero inside the window.
  std::optional<double> extinction_time;

  bool extinct() const { return extinction_time.has_value(); }
};

inline constexpr double kDefaultTransient = 0.1;

/// Throws ConfigError for mismatched or too short series.
DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& series,
                        double transient_fraction = kDefaultTransient);

}  // namespace nlstab
