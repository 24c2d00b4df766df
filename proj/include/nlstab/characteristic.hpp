#pragma once

#include <limits>
#include <vector>

#include "nlstab/field.hpp"
#include "nlstab/model.hpp"

namespace nlstab {

/// Sample of the inflow profile: the density rho_in that entered at x = 0
/// when the characteristic coordinate was xi (time t, mass W).
struct TraceKnot {
  double xi = 0.0;
  double t = 0.0;
  double W = 0.0;
  double rho = 0.0;
};

/// Inflow history parametrised by the characteristic coordinate
/// xi(t) = int_0^t lambda(W(s)) ds. Density is constant along characteristics,
/// so rho(t, x) = rho_in(xi(t) - x), and the outflux density is
/// rho_in(xi(t) - 1). Knots for xi in [-1, 0] carry the initial data.
/// rho_in is piecewise linear between knots.
class BoundaryTraceHistory {
 public:
  static BoundaryTraceHistory from_field(const DensityField& f);

  double xi() const { return knots_.back().xi; }
  double time() const { return time_; }

  /// rho_in(eta); eta must lie inside the stored span.
  double value_at(double eta) const;
  /// int_a^b rho_in(eta) d eta, a <= b inside the stored span.
  double integral(double a, double b) const;

  double mass() const { return integral(xi() - 1.0, xi()); }
  double outflow_density() const { return value_at(xi() - 1.0); }
  /// Smallest knot position strictly beyond eta (xi() if there is none).
  double next_knot_after(double eta) const;

  /// Cell averages of rho(t, .) on n uniform cells.
  DensityField field(int n_cells) const;

  void append(const TraceKnot& knot);
  /// Overwrites the density of the newest knot (the inflow value at x = 0).
  void set_inflow_value(double rho);
  /// Drops knots that no characteristic inside the domain can reach anymore.
  void prune();

  std::size_t size() const { return knots_.size() - first_; }
  const TraceKnot& knot(std::size_t i) const { return knots_[first_ + i]; }

 private:
  std::size_t locate(double eta) const;
  double primitive(double eta) const;

  std::vector<TraceKnot> knots_;
  std::vector<double> cumulative_;  // int from knots_[0].xi to knots_[j].xi
  std::size_t first_ = 0;
  double time_ = 0.0;
};

struct CharacteristicStep {
  BoundaryTraceHistory history;
  DensityField field;
  double dt = 0.0;
  int iterations = 0;  // fixed-point sweeps in the accepted attempt
  int halvings = 0;
};

/// Semi-Lagrangian step along characteristics. The new inflow value follows
/// rho(t,0) = k rho(t,1) + (1-k) rho_bar lambda(rho_bar) / lambda(W(t)) (or its
/// linearisation when frozen); the coupled (xi, W) update is solved by fixed
/// point iteration to |dW| < 1e-12 (at most 50 sweeps), halving the step up to
/// 5 times before giving up with NumericalError.
///
/// xi advances to the next knot of the outgoing trace, so the outflow seen
/// during a step is linear and the knot pattern repeats with period 1 in xi
/// (with k = 1 the total mass is then kept to round-off). The step is cut
/// short only by max_dt; cfg.cfl is not used.
CharacteristicStep step_characteristic(const BoundaryTraceHistory& h, const DensityField& f,
                                       const ClosedLoopLaw& law, const ClosedLoopConfig& cfg,
                                       double max_dt = std::numeric_limits<double>::infinity());

inline CharacteristicStep step_characteristic(const BoundaryTraceHistory& h, const DensityField& f,
                                              const ClosedLoopConfig& cfg,
                                              double max_dt = std::numeric_limits<double>::infinity()) {
  return step_characteristic(h, f, ClosedLoopLaw(cfg), cfg, max_dt);
}

}  // namespace nlstab
