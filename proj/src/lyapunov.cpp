#include "nlstab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlstab/error.hpp"

namespace nlstab {

bool mass_weight_admissible(double beta, double a) { return a > -beta / std::expm1(beta); }

bool boundary_weight_admissible(double beta, double k) { return std::exp(-beta) > k * k; }

double decay_margin(double beta, double d) {
  const double q = std::expm1(beta) / beta;
  return 1.0 - d * d * q * q * std::exp(-beta);
}

double mass_weight(double beta, double d, double k) { return (std::exp(-beta) - k) * d / (1.0 - k); }

LyapunovCaseSmallD select_beta(double d, double k) {
  if (!(std::abs(d) < 1.0) || !(std::abs(k) < 1.0)) {
    throw DomainError("weighted L2 functional needs |d| < 1 and |k| < 1");
  }
  LyapunovCaseSmallD c;
  for (double beta = 1.0; beta > 1e-12; beta *= 0.5) {
    const double a = mass_weight(beta, d, k);
    if (mass_weight_admissible(beta, a) && boundary_weight_admissible(beta, k) && decay_margin(beta, d) > 0.0) {
      c.beta = beta;
      c.a = a;
      c.valid = true;
      c.c3 = 1.0 + std::max(a, 0.0) * std::expm1(beta) / beta;
      c.rate = beta * decay_margin(beta, d) / c.c3;
      return c;
    }
  }
  throw NumericalError("no admissible beta found");
}

Coercivity small_d_coercivity(double beta, double a) {
  Coercivity c;
  c.c1 = std::exp(-beta) * std::min(1.0, 1.0 + a * continuous_mass_bound(beta));
  c.c4 = 1.0 + std::max(a, 0.0);
  return c;
}

double constant_A(double d, double k) {
  if (!(std::abs(k) < 1.0)) throw DomainError("constant A needs |k| < 1");
  const double one_minus_k = 1.0 - k;
  return std::max(1e-6, k * k + 2.0 * d * d * one_minus_k * one_minus_k * (-std::expm1(-1.0)));
}

LyapunovCaseLargeD large_d_case(double d, double k) {
  LyapunovCaseLargeD c;
  c.A = constant_A(d, k);
  c.v1_weight = 2.0 * c.A / (1.0 - k * k);
  c.d = d;
  c.k = k;
  return c;
}

Equivalence large_d_equivalence(double d, double k) {
  if (d < 0.0) throw DomainError("large-d equivalence constants need d >= 0");
  const LyapunovCaseLargeD c = large_d_case(d, k);
  Equivalence e;
  e.b1 = std::exp(-1.0);
  e.b2 = 1.0;
  e.b3 = 1.0 + c.v1_weight * (1.0 + d) * std::exp(1.0);
  e.b4 = e.b3 * (1.0 + d) * (1.0 + d);
  return e;
}

double lyap_L(const DensityField& f, double rho_bar, double beta, double a) {
  if (beta < 0.0) throw DomainError("beta must be nonnegative");
  const Eigen::VectorXd w = exponential_weights(f.size(), beta);
  const Eigen::ArrayXd dev = f.cells.array() - rho_bar;
  const double dW = total_mass(f) - rho_bar;
  return (w.array() * dev.square()).sum() + a * dW * dW;
}

DensityField xi_field(const DensityField& f, double rho_bar, double d) {
  DensityField xi;
  xi.t = f.t;
  const double dW = total_mass(f) - rho_bar;
  xi.cells = (f.cells.array() - rho_bar + d * dW).matrix();
  return xi;
}

double lyap_V1(const DensityField& f, double rho_bar, double d) {
  const double dW = total_mass(f) - rho_bar;
  return l2_norm(deviation(f, rho_bar)) * l2_norm(deviation(f, rho_bar)) + d * dW * dW;
}

double lyap_V2(const DensityField& f, double rho_bar, double d) {
  const DensityField xi = xi_field(f, rho_bar, d);
  return exponential_weights(f.size(), 1.0).dot(xi.cells.cwiseAbs2());
}

double lyap_V(const DensityField& f, double rho_bar, double d, double k, double A) {
  if (!(std::abs(k) < 1.0)) throw DomainError("V needs |k| < 1");
  if (!(A > 0.0)) throw DomainError("V needs A > 0");
  return 2.0 * A / (1.0 - k * k) * lyap_V1(f, rho_bar, d) + lyap_V2(f, rho_bar, d);
}

double discrete_mass_bound(Eigen::Index n_cells, double beta) {
  const Eigen::VectorXd w = exponential_weights(n_cells, beta);
  const double dx = 1.0 / static_cast<double>(n_cells);
  return (dx * dx) * w.cwiseInverse().sum();
}

MonitorCase MonitorCase::small_d(double rho_bar, double d, double k) {
  const LyapunovCaseSmallD s = select_beta(d, k);
  MonitorCase c;
  c.kind = FunctionalKind::SmallD;
  c.rho_bar = rho_bar;
  c.d = d;
  c.k = k;
  c.beta = s.beta;
  c.a = s.a;
  return c;
}

MonitorCase MonitorCase::large_d(double rho_bar, double d, double k) {
  MonitorCase c;
  c.kind = FunctionalKind::LargeD;
  c.rho_bar = rho_bar;
  c.d = d;
  c.k = k;
  c.A = constant_A(d, k);
  return c;
}

double MonitorCase::evaluate(const DensityField& f) const {
  return kind == FunctionalKind::SmallD ? lyap_L(f, rho_bar, beta, a) : lyap_V(f, rho_bar, d, k, A);
}

std::string MonitorCase::name() const { return kind == FunctionalKind::SmallD ? "L" : "V"; }

MonitorSeries monitor(const TrajectoryRecord& traj, const MonitorCase& c) {
  if (!traj.has_snapshots()) throw ConfigError("Lyapunov monitor needs a snapshot at every recorded time");
  MonitorSeries m;
  m.t = traj.times;
  m.functional.reserve(traj.size());
  for (const auto& snap : traj.snapshots) m.functional.push_back(c.evaluate(snap));
  m.initial = m.functional.front();
  m.ratio.assign(traj.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double prev = m.functional[i - 1];
    const double cur = m.functional[i];
    m.max_increase = std::max(m.max_increase, cur - prev);
    if (prev > 0.0 && cur > 0.0) m.ratio[i] = std::log(cur / prev) / (m.t[i] - m.t[i - 1]);
  }
  return m;
}

}  // namespace nlstab
