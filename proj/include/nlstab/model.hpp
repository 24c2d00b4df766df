#pragma once

#include <optional>

#include "nlstab/velocity.hpp"

namespace nlstab {

enum class SolverMethod { Upwind, Characteristic };

/// Closed-loop setup: equilibrium, gain, speed law and discretisation.
struct ClosedLoopConfig {
  double rho_bar = 0.0;
  double k = 0.0;
  VelocityModel velocity = VelocityModel::reciprocal_around(0.0);
  int n_cells = 200;
  double cfl = 0.9;
  double t_final = 10.0;
  int record_every = 1;
  bool store_snapshots = true;
  SolverMethod method = SolverMethod::Upwind;

  /// Replace lambda(W) by lambda(rho_bar) and the inflow law by its
  /// linearisation rho(0) - rho_bar = k (rho(1) - rho_bar) + (k-1) d (W - rho_bar).
  bool freeze_velocity = false;
  /// Overrides d in frozen mode so (d, k) can be chosen independently of the
  /// speed law. Ignored unless freeze_velocity is set.
  std::optional<double> linear_d;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  double dx() const { return 1.0 / n_cells; }
  /// d used by the (possibly linearised) boundary law.
  double effective_d() const;
};

struct EquilibriumSummary {
  double rho_bar = 0.0;
  double lambda_bar = 0.0;
  double lambda_prime_bar = 0.0;
  double d = 0.0;
  double flux_bar = 0.0;
};

/// d = rho_bar lambda'(rho_bar) / lambda(rho_bar). Throws DomainError outside
/// the valid range and NumericalError when lambda(rho_bar) <= 0.
EquilibriumSummary equilibrium_summary(double rho_bar, const VelocityModel& v);

/// Output feedback u = F + k (y - F), F = rho_bar lambda(rho_bar).
double feedback_influx(double y, const ClosedLoopConfig& cfg);
double feedback_influx(double y, double k, double equilibrium_flux);

struct BoundaryData {
  double value0 = 0.0;    // rho0(0)
  double value1 = 0.0;    // rho0(1)
  double slope0 = 0.0;    // rho0'(0)
  double slope1 = 0.0;    // rho0'(1)
  double integral = 0.0;  // int_0^1 rho0
};

struct CompatibilityReport {
  double order0_residual = 0.0;
  double order1_residual = 0.0;
  bool pass = false;
};

/// Evaluates the zeroth- and first-order C^1 corner conditions that a smooth
/// initial profile must meet for the classical solution to exist.
CompatibilityReport check_c1_compatibility(const BoundaryData& rho0, const ClosedLoopConfig& cfg,
                                           double tolerance = 1e-10);

/// Boundary law and transport speed of a configured closed loop, in the
/// nonlinear or frozen (linearised) flavour.
class ClosedLoopLaw {
 public:
  explicit ClosedLoopLaw(const ClosedLoopConfig& cfg);

  /// Transport speed at total mass W: lambda(W), or lambda(rho_bar) when frozen.
  double speed(double W) const;
  /// Density entering at x = 0 given the density leaving at x = 1.
  double inflow_density(double outflow_density, double W) const;
  /// Influx u for measured outflux y.
  double influx(double y, double W) const;

  const EquilibriumSummary& equilibrium() const { return eq_; }
  double d() const { return d_; }
  double k() const { return k_; }
  bool frozen() const { return frozen_; }

 private:
  VelocityModel velocity_;
  EquilibriumSummary eq_;
  double d_;
  double k_;
  bool frozen_;
};

}  // namespace nlstab
