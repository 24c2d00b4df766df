#pragma once

#include <functional>

#include "nlstab/model.hpp"
#include "nlstab/simulate.hpp"

namespace nlstab {

/// C^1 test function on [0, tau] x [0, 1] with phi(tau, .) = 0 and phi(., 1) = 0.
struct TestFunction {
  double tau = 1.0;
  std::function<double(double, double)> value;  // phi(t, x)
  std::function<double(double, double)> dt;     // phi_t
  std::function<double(double, double)> dx;     // phi_x
};

/// phi(t, x) = (tau - t)(1 - x).
TestFunction linear_test_function(double tau);
/// phi = 0.
TestFunction zero_test_function(double tau);

/// |residual| of the integral identity defining weak solutions of the
/// closed loop, evaluated on the recorded snapshots: on each recorded interval
/// the state is frozen at its left end, phi is sampled at the interval
/// midpoint in time and at cell centres in space. Requires snapshots covering
/// [0, tau]; throws ConfigError if phi violates its terminal/outflow
/// constraints or the trajectory is frozen.
double weak_residual(const TrajectoryRecord& traj, const ClosedLoopConfig& cfg, const TestFunction& phi);

}  // namespace nlstab
