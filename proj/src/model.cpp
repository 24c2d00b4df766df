#include "nlstab/model.hpp"

#include <cmath>
#include <sstream>

#include "nlstab/error.hpp"

namespace nlstab {

void ClosedLoopConfig::validate() const {
  if (!std::isfinite(rho_bar) || !velocity.valid_range().contains(rho_bar)) {
    std::ostringstream os;
    os << "rho_bar = " << rho_bar << " outside the speed law's valid range";
    throw ConfigError(os.str());
  }
  if (!std::isfinite(k)) throw ConfigError("gain k must be finite");
  if (n_cells < 2) throw ConfigError("n_cells must be >= 2");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be > 0");
  if (record_every < 1) throw ConfigError("record_every must be >= 1");
  if (linear_d && !std::isfinite(*linear_d)) throw ConfigError("linear_d must be finite");
  if (!(velocity(rho_bar) > 0.0)) throw ConfigError("lambda(rho_bar) must be positive");
}

double ClosedLoopConfig::effective_d() const {
  if (freeze_velocity && linear_d) return *linear_d;
  return equilibrium_summary(rho_bar, velocity).d;
}

EquilibriumSummary equilibrium_summary(double rho_bar, const VelocityModel& v) {
  if (!v.valid_range().contains(rho_bar)) {
    throw DomainError("rho_bar outside the speed law's valid range");
  }
  EquilibriumSummary s;
  s.rho_bar = rho_bar;
  s.lambda_bar = v(rho_bar);
  if (!(s.lambda_bar > 0.0)) throw NumericalError("lambda(rho_bar) <= 0: degenerate equilibrium");
  s.lambda_prime_bar = v.derivative(rho_bar);
  s.d = rho_bar * s.lambda_prime_bar / s.lambda_bar;
  s.flux_bar = rho_bar * s.lambda_bar;
  return s;
}

double feedback_influx(double y, double k, double equilibrium_flux) {
  return equilibrium_flux + k * (y - equilibrium_flux);
}

double feedback_influx(double y, const ClosedLoopConfig& cfg) {
  return feedback_influx(y, cfg.k, cfg.rho_bar * cfg.velocity(cfg.rho_bar));
}

CompatibilityReport check_c1_compatibility(const BoundaryData& rho0, const ClosedLoopConfig& cfg,
                                           double tolerance) {
  const double lam = cfg.velocity(rho0.integral);
  const double lam_prime = cfg.velocity.derivative(rho0.integral);
  const double flux_bar = cfg.rho_bar * cfg.velocity(cfg.rho_bar);
  const double k = cfg.k;
  const double inflow_gap = rho0.value0 - k * rho0.value1;

  CompatibilityReport r;
  r.order0_residual = std::abs(lam * inflow_gap - (1.0 - k) * flux_bar);
  r.order1_residual = std::abs(lam * (rho0.slope0 - k * rho0.slope1) -
                               lam_prime * (rho0.value0 - rho0.value1) * inflow_gap);
  r.pass = r.order0_residual <= tolerance && r.order1_residual <= tolerance;
  return r;
}

}  // namespace nlstab

namespace nlstab {

ClosedLoopLaw::ClosedLoopLaw(const ClosedLoopConfig& cfg)
    : velocity_(cfg.velocity),
      eq_(equilibrium_summary(cfg.rho_bar, cfg.velocity)),
      d_(cfg.effective_d()),
      k_(cfg.k),
      frozen_(cfg.freeze_velocity) {}

double ClosedLoopLaw::speed(double W) const {
  if (frozen_) return eq_.lambda_bar;
  const double s = velocity_(W);
  if (!(s > 0.0)) throw NumericalError("nonpositive transport speed lambda(W)");
  return s;
}

double ClosedLoopLaw::inflow_density(double outflow_density, double W) const {
  const double rb = eq_.rho_bar;
  if (frozen_) return rb + k_ * (outflow_density - rb) + (k_ - 1.0) * d_ * (W - rb);
  return k_ * outflow_density + (1.0 - k_) * eq_.flux_bar / speed(W);
}

double ClosedLoopLaw::influx(double y, double W) const {
  if (frozen_) return eq_.lambda_bar * inflow_density(y / eq_.lambda_bar, W);
  return feedback_influx(y, k_, eq_.flux_bar);
}

}  // namespace nlstab
