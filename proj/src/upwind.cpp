#include "nlstab/upwind.hpp"

#include <algorithm>

#include "nlstab/error.hpp"

namespace nlstab {

UpwindStep step_upwind(const DensityField& f, const ClosedLoopLaw& law, const ClosedLoopConfig& cfg,
                       double max_dt) {
  const Eigen::Index n = f.size();
  if (n != cfg.n_cells) throw ConfigError("field size does not match n_cells");
  const double dx = f.dx();

  UpwindStep s;
  s.W = total_mass(f);
  s.speed = law.speed(s.W);
  if (!(s.speed > 0.0)) throw NumericalError("upwind step: transport speed is not positive");
  s.dt = std::min(cfg.cfl * dx / s.speed, max_dt);
  if (!(s.dt > 0.0)) throw NumericalError("upwind step: nonpositive time step");
  s.y = s.speed * f.cells[n - 1];
  s.u = law.influx(s.y, s.W);

  const double r = s.dt / dx;
  s.next.t = f.t + s.dt;
  s.next.cells.resize(n);
  s.next.cells[0] = f.cells[0] - r * (s.speed * f.cells[0] - s.u);
  s.next.cells.tail(n - 1) =
      f.cells.tail(n - 1) - (r * s.speed) * (f.cells.tail(n - 1) - f.cells.head(n - 1));
  return s;
}

}  // namespace nlstab
