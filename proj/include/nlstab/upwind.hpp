#pragma once

#include <limits>

#include "nlstab/field.hpp"
#include "nlstab/model.hpp"

namespace nlstab {

struct UpwindStep {
  DensityField next;
  double dt = 0.0;
  double speed = 0.0;  // frozen over the step
  double W = 0.0;      // mass at the start of the step
  double u = 0.0;      // influx used at x = 0
  double y = 0.0;      // outflux used at x = 1
};

/// First-order upwind step with the speed frozen at lambda(W(t)).
/// dt = min(cfl dx / lambda, max_dt). The discrete mass obeys
/// W(t+dt) = W(t) + dt (u - y) up to rounding.
UpwindStep step_upwind(const DensityField& f, const ClosedLoopLaw& law, const ClosedLoopConfig& cfg,
                       double max_dt = std::numeric_limits<double>::infinity());

inline UpwindStep step_upwind(const DensityField& f, const ClosedLoopConfig& cfg,
                              double max_dt = std::numeric_limits<double>::infinity()) {
  return step_upwind(f, ClosedLoopLaw(cfg), cfg, max_dt);
}

}  // namespace nlstab
