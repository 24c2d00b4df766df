#include "nlstab/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "nlstab/characteristic.hpp"
#include "nlstab/error.hpp"
#include "nlstab/upwind.hpp"

namespace nlstab {

namespace {

class Recorder {
 public:
  Recorder(const ClosedLoopConfig& cfg, TrajectoryRecord& rec, double initial_linf)
      : cfg_(cfg), rec_(rec), initial_linf_(initial_linf) {}

  void observe(const DensityField& f, double W, double u, double y, double displacement, bool record) {
    const auto dev = deviation(f, cfg_.rho_bar);
    const double l1 = l1_norm(dev);
    const double l2 = l2_norm(dev);
    const double linf = linf_norm(dev);
    if (!f.all_finite() || l1 > kBlowUpNorm || l2 > kBlowUpNorm || linf > kBlowUpNorm) {
      throw NumericalError("blow-up: deviation norm exceeded 1e12 at t = " + std::to_string(f.t));
    }
    if (have_prev_) {
      rec_.max_l1_increase = std::max(rec_.max_l1_increase, l1 - prev_l1_);
      rec_.max_l2_increase = std::max(rec_.max_l2_increase, l2 * l2 - prev_l2sq_);
    }
    have_prev_ = true;
    prev_l1_ = l1;
    prev_l2sq_ = l2 * l2;
    rec_.min_cell_value = std::min(rec_.min_cell_value, f.cells.minCoeff());
    if (!rec_.extinction_time && initial_linf_ > 0.0 && linf <= kExtinctionRatio * initial_linf_) {
      rec_.extinction_time = f.t;
      rec_.extinction_displacement = displacement;
    }
    if (!record) return;
    rec_.times.push_back(f.t);
    rec_.W.push_back(W);
    rec_.u.push_back(u);
    rec_.y.push_back(y);
    rec_.l1.push_back(l1);
    rec_.l2.push_back(l2);
    rec_.linf.push_back(linf);
    rec_.displacement.push_back(displacement);
    if (cfg_.store_snapshots) rec_.snapshots.push_back(f);
  }

 private:
  const ClosedLoopConfig& cfg_;
  TrajectoryRecord& rec_;
  double initial_linf_;
  bool have_prev_ = false;
  double prev_l1_ = 0.0;
  double prev_l2sq_ = 0.0;
};

// Steps shorter than this fraction of a nominal step are folded into the previous one.
constexpr double kTailFraction = 1e-9;

TrajectoryRecord run_upwind(const ClosedLoopConfig& cfg, const ClosedLoopLaw& law, DensityField f) {
  TrajectoryRecord rec;
  rec.rho_bar = cfg.rho_bar;
  rec.min_cell_value = f.cells.minCoeff();
  Recorder recorder(cfg, rec, linf_norm(deviation(f, cfg.rho_bar)));

  double displacement = 0.0;
  double W = total_mass(f);
  double y = law.speed(W) * f.cells[f.size() - 1];
  recorder.observe(f, W, law.influx(y, W), y, displacement, true);

  const double t_end = f.t + cfg.t_final;
  while (t_end - f.t > kTailFraction * cfg.dx()) {
    UpwindStep s = step_upwind(f, law, cfg, t_end - f.t);
    const double W_next = total_mass(s.next);
    rec.max_mass_balance_defect =
        std::max(rec.max_mass_balance_defect, std::abs(W_next - s.W - s.dt * (s.u - s.y)));
    displacement += s.speed * s.dt;
    f = std::move(s.next);
    ++rec.steps;
    W = W_next;
    y = law.speed(W) * f.cells[f.size() - 1];
    const bool last = !(t_end - f.t > kTailFraction * cfg.dx());
    recorder.observe(f, W, law.influx(y, W), y, displacement, last || rec.steps % cfg.record_every == 0);
  }
  rec.final_state = std::move(f);
  return rec;
}

TrajectoryRecord run_characteristic(const ClosedLoopConfig& cfg, const ClosedLoopLaw& law,
                                    const DensityField& rho0) {
  TrajectoryRecord rec;
  rec.rho_bar = cfg.rho_bar;
  rec.min_cell_value = rho0.cells.minCoeff();
  Recorder recorder(cfg, rec, linf_norm(deviation(rho0, cfg.rho_bar)));

  BoundaryTraceHistory h = BoundaryTraceHistory::from_field(rho0);
  // x = 0 carries the value the feedback law assigns, not the first cell average
  h.set_inflow_value(law.inflow_density(h.outflow_density(), h.mass()));
  DensityField f = rho0;
  const double xi_start = h.xi();
  auto observe = [&](bool record) {
    const double W = h.mass();
    const double y = law.speed(W) * h.outflow_density();
    recorder.observe(f, W, law.influx(y, W), y, h.xi() - xi_start, record);
  };
  observe(true);

  const double t_end = rho0.t + cfg.t_final;
  while (t_end - f.t > kTailFraction * cfg.dx()) {
    CharacteristicStep s = step_characteristic(h, f, law, cfg, t_end - f.t);
    h = std::move(s.history);
    f = std::move(s.field);
    ++rec.steps;
    const bool last = !(t_end - f.t > kTailFraction * cfg.dx());
    observe(last || rec.steps % cfg.record_every == 0);
  }
  rec.final_state = std::move(f);
  return rec;
}

}  // namespace

TrajectoryRecord simulate(const ClosedLoopConfig& cfg, const DensityField& rho0) {
  cfg.validate();
  if (rho0.size() != cfg.n_cells) throw ConfigError("initial field size does not match n_cells");
  if (!rho0.all_finite()) throw ConfigError("initial field has non-finite entries");
  const ClosedLoopLaw law(cfg);
  return cfg.method == SolverMethod::Upwind ? run_upwind(cfg, law, rho0)
                                            : run_characteristic(cfg, law, rho0);
}

}  // namespace nlstab
