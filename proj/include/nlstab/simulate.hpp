#pragma once

#include <optional>
#include <vector>

#include "nlstab/field.hpp"
#include "nlstab/model.hpp"

namespace nlstab {

/// Time series of a closed-loop run. Norms are of the deviation rho - rho_bar.
struct TrajectoryRecord {
  double rho_bar = 0.0;
  std::vector<double> times;
  std::vector<double> W;
  std::vector<double> u;
  std::vector<double> y;
  std::vector<double> l1;
  std::vector<double> l2;
  std::vector<double> linf;
  /// Accumulated characteristic displacement int_0^t lambda(W(s)) ds.
  std::vector<double> displacement;
  /// Stored at every recorded time when snapshots are enabled.
  std::vector<DensityField> snapshots;
  /// State at t_final, kept regardless of store_snapshots.
  DensityField final_state;

  /// First time the deviation's sup norm fell to 1e-8 of its initial value.
  std::optional<double> extinction_time;
  std::optional<double> extinction_displacement;

  /// Largest step-to-step change of the quantities tracked at every step
  /// (recorded or not); used by the invariant checks.
  double max_mass_balance_defect = 0.0;  // |W(t+dt) - W(t) - dt (u - y)|
  double max_l1_increase = 0.0;
  double max_l2_increase = 0.0;
  double min_cell_value = 0.0;
  long steps = 0;

  std::size_t size() const { return times.size(); }
  bool has_snapshots() const { return !snapshots.empty() && snapshots.size() == times.size(); }
};

/// Extinction threshold relative to the initial sup norm of the deviation.
inline constexpr double kExtinctionRatio = 1e-8;
/// Any norm above this aborts the run with NumericalError.
inline constexpr double kBlowUpNorm = 1e12;

/// Integrates the closed loop to cfg.t_final with cfg.method, recording every
/// cfg.record_every steps plus the final state.
TrajectoryRecord simulate(const ClosedLoopConfig& cfg, const DensityField& rho0);

}  // namespace nlstab
