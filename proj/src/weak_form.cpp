#include "nlstab/weak_form.hpp"

#include <algorithm>
#include <cmath>

#include "nlstab/error.hpp"

namespace nlstab {

TestFunction linear_test_function(double tau) {
  TestFunction phi;
  phi.tau = tau;
  phi.value = [tau](double t, double x) { return (tau - t) * (1.0 - x); };
  phi.dt = [](double, double x) { return -(1.0 - x); };
  phi.dx = [tau](double t, double) { return -(tau - t); };
  return phi;
}

TestFunction zero_test_function(double tau) {
  TestFunction phi;
  phi.tau = tau;
  phi.value = [](double, double) { return 0.0; };
  phi.dt = phi.value;
  phi.dx = phi.value;
  return phi;
}

namespace {

void check_constraints(const TestFunction& phi) {
  constexpr int samples = 64;
  constexpr double tol = 1e-12;
  double scale = 1.0;
  for (int i = 0; i <= samples; ++i) {
    for (int j = 0; j <= samples; ++j) {
      scale = std::max(scale, std::abs(phi.value(phi.tau * i / samples, static_cast<double>(j) / samples)));
    }
  }
  for (int i = 0; i <= samples; ++i) {
    const double s = static_cast<double>(i) / samples;
    if (std::abs(phi.value(phi.tau, s)) > tol * scale) {
      throw ConfigError("test function must vanish at the terminal time");
    }
    if (std::abs(phi.value(phi.tau * s, 1.0)) > tol * scale) {
      throw ConfigError("test function must vanish on the outflow boundary x = 1");
    }
  }
}

}  // namespace

double weak_residual(const TrajectoryRecord& traj, const ClosedLoopConfig& cfg, const TestFunction& phi) {
  if (!phi.value || !phi.dt || !phi.dx) throw ConfigError("test function is incomplete");
  if (!(phi.tau > 0.0)) throw ConfigError("test function horizon must be positive");
  check_constraints(phi);
  if (cfg.freeze_velocity) throw ConfigError("weak residual is defined for the nonlinear closed loop");
  if (!traj.has_snapshots()) throw ConfigError("weak residual needs a snapshot at every recorded time");
  if (traj.times.back() < phi.tau * (1.0 - 1e-12)) {
    throw ConfigError("trajectory does not reach the test function horizon");
  }

  const EquilibriumSummary eq = equilibrium_summary(cfg.rho_bar, cfg.velocity);
  const double k = cfg.k;
  const Eigen::Index n = traj.snapshots.front().size();
  const Eigen::VectorXd x = cell_centers(n);
  const double dx = 1.0 / static_cast<double>(n);
  const double t0 = traj.times.front();

  double interior = 0.0;
  double boundary = 0.0;
  for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
    const double a = traj.times[j] - t0;
    if (a >= phi.tau) break;
    const double b = std::min(traj.times[j + 1] - t0, phi.tau);
    const double h = b - a;
    const double tm = 0.5 * (a + b);
    const auto& rho = traj.snapshots[j].cells;
    const double speed = cfg.velocity(traj.W[j]);
    double space = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) space += rho[i] * (phi.dt(tm, x[i]) + speed * phi.dx(tm, x[i]));
    interior += h * dx * space;
    const double y = traj.y[j];
    boundary += h * (y * phi.value(tm, 1.0) - (k * y + (1.0 - k) * eq.flux_bar) * phi.value(tm, 0.0));
  }

  const auto& rho0 = traj.snapshots.front().cells;
  double initial = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) initial += dx * rho0[i] * phi.value(0.0, x[i]);

  return std::abs(-interior - initial + boundary);
}

}  // namespace nlstab
