#include "nlstab/characteristic.hpp"

#include <algorithm>
#include <cmath>

#include "nlstab/error.hpp"

namespace nlstab {

BoundaryTraceHistory BoundaryTraceHistory::from_field(const DensityField& f) {
  const Eigen::Index n = f.size();
  if (n < 1) throw ConfigError("empty initial field");
  const Eigen::VectorXd x = cell_centers(n);
  BoundaryTraceHistory h;
  h.time_ = f.t;
  // eta = -x runs from -1 (right end of the domain) to 0 (left end)
  h.knots_.push_back({-1.0, f.t, 0.0, f.cells[n - 1]});
  for (Eigen::Index i = n - 1; i >= 0; --i) h.knots_.push_back({-x[i], f.t, 0.0, f.cells[i]});
  h.knots_.push_back({0.0, f.t, 0.0, f.cells[0]});
  h.cumulative_.push_back(0.0);
  for (std::size_t j = 1; j < h.knots_.size(); ++j) {
    const auto& a = h.knots_[j - 1];
    const auto& b = h.knots_[j];
    h.cumulative_.push_back(h.cumulative_.back() + 0.5 * (b.xi - a.xi) * (a.rho + b.rho));
  }
  const double W = h.mass();
  for (auto& k : h.knots_) k.W = W;
  return h;
}

std::size_t BoundaryTraceHistory::locate(double eta) const {
  const double span = knots_.back().xi - knots_[first_].xi;
  const double tol = 1e-12 * std::max(1.0, span);
  if (eta < knots_[first_].xi - tol || eta > knots_.back().xi + tol) {
    throw NumericalError("characteristic trace queried outside its stored span");
  }
  auto begin = knots_.begin() + static_cast<std::ptrdiff_t>(first_);
  auto it = std::upper_bound(begin, knots_.end(), eta,
                             [](double v, const TraceKnot& k) { return v < k.xi; });
  std::size_t j = it == begin ? first_ : static_cast<std::size_t>(it - knots_.begin()) - 1;
  return std::min(j, knots_.size() - 2);
}

double BoundaryTraceHistory::value_at(double eta) const {
  const std::size_t j = locate(eta);
  const auto& a = knots_[j];
  const auto& b = knots_[j + 1];
  const double theta = (eta - a.xi) / (b.xi - a.xi);
  return a.rho + theta * (b.rho - a.rho);
}

double BoundaryTraceHistory::primitive(double eta) const {
  const std::size_t j = locate(eta);
  const auto& a = knots_[j];
  const auto& b = knots_[j + 1];
  const double theta = (eta - a.xi) / (b.xi - a.xi);
  const double v = a.rho + theta * (b.rho - a.rho);
  return cumulative_[j] + 0.5 * (eta - a.xi) * (a.rho + v);
}

double BoundaryTraceHistory::next_knot_after(double eta) const {
  auto begin = knots_.begin() + static_cast<std::ptrdiff_t>(first_);
  const double slack = 1e-14 * std::max(1.0, std::abs(eta));
  auto it = std::upper_bound(begin, knots_.end(), eta + slack,
                             [](double v, const TraceKnot& k) { return v < k.xi; });
  return it == knots_.end() ? knots_.back().xi : it->xi;
}

double BoundaryTraceHistory::integral(double a, double b) const { return primitive(b) - primitive(a); }

DensityField BoundaryTraceHistory::field(int n_cells) const {
  DensityField f;
  f.t = time_;
  f.cells.resize(n_cells);
  const double dx = 1.0 / n_cells;
  const double top = xi();
  double right = primitive(top);
  for (int i = 0; i < n_cells; ++i) {
    // cell [i dx, (i+1) dx] maps to eta in [top - (i+1) dx, top - i dx]
    const double left = primitive(top - (i + 1) * dx);
    f.cells[i] = (right - left) / dx;
    right = left;
  }
  return f;
}

void BoundaryTraceHistory::append(const TraceKnot& knot) {
  const auto& last = knots_.back();
  if (!(knot.xi > last.xi)) throw NumericalError("characteristic coordinate must increase");
  cumulative_.push_back(cumulative_.back() + 0.5 * (knot.xi - last.xi) * (knot.rho + last.rho));
  knots_.push_back(knot);
  time_ = knot.t;
}

void BoundaryTraceHistory::set_inflow_value(double rho) {
  const std::size_t j = knots_.size() - 1;
  if (j == 0) throw NumericalError("characteristic trace has a single knot");
  knots_[j].rho = rho;
  cumulative_[j] = cumulative_[j - 1] + 0.5 * (knots_[j].xi - knots_[j - 1].xi) * (knots_[j - 1].rho + rho);
}

void BoundaryTraceHistory::prune() {
  const double oldest_needed = xi() - 1.0;
  while (first_ + 2 < knots_.size() && knots_[first_ + 1].xi <= oldest_needed) ++first_;
  if (first_ > 256 && first_ > knots_.size() / 2) {
    knots_.erase(knots_.begin(), knots_.begin() + static_cast<std::ptrdiff_t>(first_));
    cumulative_.erase(cumulative_.begin(), cumulative_.begin() + static_cast<std::ptrdiff_t>(first_));
    first_ = 0;
  }
}

CharacteristicStep step_characteristic(const BoundaryTraceHistory& h, const DensityField& f,
                                       const ClosedLoopLaw& law, const ClosedLoopConfig& cfg,
                                       double max_dt) {
  if (f.size() != cfg.n_cells) throw ConfigError("field size does not match n_cells");
  if (!(max_dt > 0.0)) throw NumericalError("characteristic step: nonpositive time step");
  constexpr double w_tol = 1e-12;
  constexpr int max_sweeps = 50;
  constexpr int max_halvings = 5;

  const double xi0 = h.xi();
  const double W0 = h.mass();
  const double speed0 = law.speed(W0);
  const double rho_top = h.value_at(xi0);
  const double gap = h.next_knot_after(xi0 - 1.0) - (xi0 - 1.0);
  if (!(gap > 0.0)) throw NumericalError("characteristic step: empty outgoing trace");

  auto accept = [&](double W, double dt, double xi1, int sweep, int halving) {
    CharacteristicStep step;
    step.history = h;
    step.history.append({xi1, h.time() + dt, W, law.inflow_density(h.value_at(xi1 - 1.0), W)});
    step.history.prune();
    step.field = step.history.field(cfg.n_cells);
    step.dt = dt;
    step.iterations = sweep;
    step.halvings = halving;
    return step;
  };
  auto mass_after = [&](double delta, double W) {
    const double rho_in = law.inflow_density(h.value_at(xi0 + delta - 1.0), W);
    return h.integral(xi0 + delta - 1.0, xi0) + 0.5 * delta * (rho_top + rho_in);
  };

  // Fixed point for W with the xi increment given as a function of W.
  auto solve = [&](auto&& delta_of, double& W, int& sweeps) {
    W = W0;
    for (sweeps = 1; sweeps <= max_sweeps; ++sweeps) {
      const double delta = delta_of(W);
      if (!(delta < 1.0)) return false;  // the new inflow would depend on itself
      const double W_next = mass_after(delta, W);
      const bool converged = std::abs(W_next - W) < w_tol;
      W = W_next;
      if (!std::isfinite(W)) return false;
      if (converged) return true;
    }
    return false;
  };

  double W = W0;
  int sweeps = 0;
  // xi-driven: fixed increment, dt from the trapezoid rule for xi' = lambda(W).
  double delta = std::min(gap, 0.5);
  bool short_of_time = false;
  for (int halving = 0; halving <= max_halvings; ++halving, delta *= 0.5) {
    if (!solve([&](double) { return delta; }, W, sweeps)) continue;
    const double dt = 2.0 * delta / (speed0 + law.speed(W));
    if (!(dt > 0.0)) throw NumericalError("characteristic step: nonpositive time step");
    if (dt <= max_dt) return accept(W, dt, xi0 + delta, sweeps, halving);
    short_of_time = true;
    break;
  }
  // time-driven: the remaining time is shorter than the aligned step.
  if (short_of_time || std::isfinite(max_dt)) {
    double dt = max_dt;
    auto delta_of = [&](double w) { return std::min(0.5 * dt * (speed0 + law.speed(w)), gap); };
    for (int halving = 0; halving <= max_halvings; ++halving, dt *= 0.5) {
      if (solve(delta_of, W, sweeps)) return accept(W, dt, xi0 + delta_of(W), sweeps, halving);
    }
  }
  throw NumericalError("characteristic step: fixed point for W did not converge after 5 halvings");
}

}  // namespace nlstab
