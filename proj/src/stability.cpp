#include "nlstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nlstab/error.hpp"

namespace nlstab {

namespace {
// Exact parameter equalities are what make mu = 0 a root; compare with a
// rounding-level tolerance so grid values like 1.0000000000000002 count.
constexpr double kDegenerateTol = 1e-12;
}  // namespace

void SpectralProblem::validate() const {
  if (!(time_scale > 0.0)) throw ConfigError("spectral time scale lambda(rho_bar) must be positive");
  if (!std::isfinite(d) || !std::isfinite(k)) throw ConfigError("d and k must be finite");
}

Window abscissa_window(double k, int n_modes) {
  const double R = k != 0.0 ? std::max(3.0, std::abs(std::log(std::abs(k))) + 2.0) : 3.0;
  const double H = 2.0 * std::numbers::pi * (n_modes + 1);
  return {-R, R, -H, H};
}

AbscissaEstimate spectral_abscissa(double d, double k, int n_modes) {
  if (n_modes < 1) throw ConfigError("n_modes must be >= 1");
  AbscissaEstimate est;
  est.asymptote = k != 0.0 ? std::log(std::abs(k)) : -std::numeric_limits<double>::infinity();
  if (std::abs(k - 1.0) < kDegenerateTol || std::abs(d + 1.0) < kDegenerateTol) {
    est.degenerate = true;
    est.s_est = 0.0;
    return est;
  }
  est.roots = find_roots(abscissa_window(k, n_modes), d, k);
  est.s_est = est.asymptote;
  for (const Root& r : est.roots.roots) {
    if (!r.converged) {
      est.low_confidence = true;
      continue;
    }
    ++est.roots_used;
    est.s_est = std::max(est.s_est, r.value.real());
  }
  if (!est.roots.certified) est.low_confidence = true;
  return est;
}

StabilityVerdict classify_stability(double d, double k, int n_modes) {
  const AbscissaEstimate est = spectral_abscissa(d, k, n_modes);
  StabilityVerdict v;
  v.s_est = est.s_est;
  v.stable = est.s_est < -kStabilityMargin;
  v.by_theorem = theorem_predicts_stable(d, k);
  v.degenerate = est.degenerate;
  v.low_confidence = est.low_confidence;
  return v;
}

}  // namespace nlstab
