#include "nlstab/decay.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "nlstab/error.hpp"

namespace nlstab {

DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& series,
                        double transient_fraction) {
  if (t.size() != series.size()) throw ConfigError("decay fit: series length mismatch");
  if (t.size() < 3) throw ConfigError("decay fit: need at least three samples");
  if (!(transient_fraction >= 0.0 && transient_fraction < 1.0)) {
    throw ConfigError("decay fit: transient fraction must lie in [0, 1)");
  }
  DecayFit fit;
  fit.t_start = t.front() + transient_fraction * (t.back() - t.front());
  fit.t_end = t.back();

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < fit.t_start) continue;
    if (!(series[i] > 0.0) || !std::isfinite(std::log(series[i]))) {
      fit.extinction_time = t[i];
      return fit;
    }
    idx.push_back(i);
  }
  if (idx.size() < 2) throw ConfigError("decay fit: fewer than two samples in the fit window");

  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    design(r, 0) = 1.0;
    design(r, 1) = t[idx[static_cast<std::size_t>(r)]] - fit.t_start;
    rhs[r] = std::log(series[idx[static_cast<std::size_t>(r)]]);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd resid = rhs - design * coef;
  const double ss_res = resid.squaredNorm();
  const double ss_tot = (rhs.array() - rhs.mean()).square().sum();

  fit.alpha = -coef[1];
  // intercept shifted back to absolute time
  fit.c = std::exp(coef[0] - coef[1] * fit.t_start);
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  fit.points = static_cast<int>(m);
  return fit;
}

}  // namespace nlstab
