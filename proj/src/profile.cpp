#include "nlstab/profile.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "nlstab/csv.hpp"
#include "nlstab/error.hpp"

namespace nlstab {

using std::numbers::pi;

DensityField sample_cell_averages(const Profile& rho0, int n_cells) {
  if (n_cells < 1) throw ConfigError("n_cells must be positive");
  static constexpr double node = 0.7745966692414834;  // sqrt(3/5)
  static constexpr double w_outer = 5.0 / 18.0;
  static constexpr double w_mid = 8.0 / 18.0;
  const double dx = 1.0 / n_cells;
  DensityField f;
  f.cells.resize(n_cells);
  for (int i = 0; i < n_cells; ++i) {
    const double c = (i + 0.5) * dx;
    const double h = 0.5 * dx;
    f.cells[i] = w_outer * rho0(c - node * h) + w_mid * rho0(c) + w_outer * rho0(c + node * h);
  }
  if (!f.all_finite()) throw ConfigError("initial profile produced non-finite values");
  return f;
}

Profile bump_profile(double center, double width, double height) {
  if (!(width > 0.0)) throw ConfigError("bump width must be positive");
  return [=](double x) {
    const double z = (x - center) / width;
    if (std::abs(z) >= 0.5) return 0.0;
    const double c = std::cos(pi * z);
    return height * c * c;
  };
}

PerturbationShape parse_shape(const std::string& name) {
  if (name == "sine") return PerturbationShape::Sine;
  if (name == "cosine") return PerturbationShape::Cosine;
  if (name == "compatible") return PerturbationShape::Compatible;
  if (name == "bump") return PerturbationShape::Bump;
  if (name == "random") return PerturbationShape::Random;
  throw ConfigError("unknown perturbation shape '" + name + "'");
}

std::string to_string(PerturbationShape shape) {
  switch (shape) {
    case PerturbationShape::Sine:
      return "sine";
    case PerturbationShape::Cosine:
      return "cosine";
    case PerturbationShape::Compatible:
      return "compatible";
    case PerturbationShape::Bump:
      return "bump";
    case PerturbationShape::Random:
      return "random";
  }
  return "unknown";
}

Profile perturbation_profile(double rho_bar, PerturbationShape shape, double amplitude,
                             std::uint64_t seed) {
  switch (shape) {
    case PerturbationShape::Sine:
      return [=](double x) { return rho_bar + amplitude * std::sin(2 * pi * x); };
    case PerturbationShape::Cosine:
      return [=](double x) { return rho_bar + amplitude * std::cos(pi * x); };
    case PerturbationShape::Compatible:
      return [=](double x) {
        const double s = std::sin(pi * x);
        return rho_bar + amplitude * std::sin(2 * pi * x) * s * s;
      };
    case PerturbationShape::Bump: {
      auto b = bump_profile(0.5, 0.5, 1.0);
      return [=](double x) { return rho_bar + amplitude * b(x); };
    }
    case PerturbationShape::Random: {
      // Raw engine bits only: std distributions are not portable across libraries.
      std::mt19937_64 gen(seed);
      auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
      constexpr int modes = 6;
      std::vector<double> a(modes), b(modes);
      for (int m = 0; m < modes; ++m) {
        a[m] = (2 * uniform() - 1) / (m + 1);
        b[m] = (2 * uniform() - 1) / (m + 1);
      }
      auto raw = [a, b](double x) {
        double s = 0;
        for (int m = 0; m < modes; ++m) {
          s += a[m] * std::cos(2 * pi * (m + 1) * x) + b[m] * std::sin(2 * pi * (m + 1) * x);
        }
        return s;
      };
      double peak = 0;
      for (int i = 0; i <= 1000; ++i) peak = std::max(peak, std::abs(raw(i / 1000.0)));
      if (peak == 0) peak = 1;
      return [=](double x) { return rho_bar + amplitude * raw(x) / peak; };
    }
  }
  throw ConfigError("unknown perturbation shape");
}

DensityField read_snapshot_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t col = table.column("rho");
  if (table.rows.size() < 2) throw ConfigError(path + ": need at least two cells");
  DensityField f;
  f.cells.resize(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) f.cells[static_cast<Eigen::Index>(i)] = table.rows[i][col];
  if (!f.all_finite()) throw ConfigError(path + ": non-finite density");
  return f;
}

}  // namespace nlstab
