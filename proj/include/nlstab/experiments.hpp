#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlstab/config.hpp"
#include "nlstab/decay.hpp"
#include "nlstab/lyapunov.hpp"
#include "nlstab/stability.hpp"

namespace nlstab {

struct ScenarioResult {
  std::string name;
  EquilibriumSummary equilibrium;
  double d = 0.0;  // as used by the boundary law
  double k = 0.0;
  bool by_theorem = false;
  long steps = 0;
  double max_mass_balance_defect = 0.0;
  double dx = 0.0;
  double initial_l1 = 0.0, initial_l2 = 0.0, initial_linf = 0.0;
  double final_l1 = 0.0, final_l2 = 0.0, final_linf = 0.0;
  std::optional<DecayFit> fit;
  std::string fit_note;  // why no fit was attempted
  std::optional<double> extinction_time;
  std::optional<double> extinction_displacement;
  /// First recorded time at which the accumulated displacement reaches 1
  /// (linear interpolation).
  std::optional<double> exit_time;
  std::vector<std::pair<std::string, MonitorSeries>> monitors;
  std::optional<double> weak_residual;
  std::optional<AbscissaEstimate> spectrum;

  /// Pretty-printed JSON summary record.
  std::string summary_json() const;
};

/// Simulates the scenario and applies its analyses. When out_dir is non-empty
/// the artifacts are written there:
///   trajectory.csv   t,W,u,y,l1,l2,linf,displacement
///   initial.csv, final.csv   x,rho
///   snapshots/snapshot_NNNNN.csv   x,rho, one per recorded time
///   monitor_<name>.csv   t,functional,ratio
///   fit.json, roots.csv (re,im,residual), summary.json
/// Errors are rethrown with the failing stage prefixed to the message.
ScenarioResult run_scenario(const Scenario& s, const std::string& out_dir = "");

/// Roots and abscissa for (d, k) of the scenario.
AbscissaEstimate run_spectrum(const Scenario& s);

struct AmplitudeProbe {
  double amplitude = 0.0;
  /// max per-record increase of the functional divided by its initial value
  double relative_increase = 0.0;
  bool monotone = false;  // relative_increase <= 1e-9
};

/// Reruns a perturbation scenario at each amplitude and monitors the Lyapunov
/// functional matching d (small-d for |d| < 1, large-d otherwise). Used to
/// locate empirically how large a perturbation keeps the decay monotone.
std::vector<AmplitudeProbe> amplitude_sweep(const Scenario& s, const std::vector<double>& amplitudes);
void write_amplitude_csv(const std::vector<AmplitudeProbe>& probes, const std::string& path);

struct RegionPoint {
  double d = 0.0;
  double k = 0.0;
  StabilityVerdict verdict;
  std::optional<double> alpha_sim;
  std::string status = "ok";
  bool failed() const { return status != "ok"; }
  bool mismatch() const { return !failed() && verdict.stable != verdict.by_theorem; }
};

struct RegionResult {
  bool with_fit = false;
  std::vector<RegionPoint> points;  // sorted by (d, k)
  int mismatches() const;
  int failures() const;
};

/// Classifies every non-excluded grid point on up to `threads` workers
/// (0: spec.threads, then hardware concurrency). Per-point failures are
/// recorded in the row and do not stop the scan.
RegionResult region_scan(const RegionScanSpec& spec, int threads = 0);

/// `d,k,s_est,stable,by_theorem[,alpha_sim],mismatch,status`
void write_region_csv(const RegionResult& r, const std::string& path);
void write_roots_csv(const RootSet& roots, const std::string& path);
void write_snapshot_csv(const DensityField& f, const std::string& path);

/// Converts trajectory.csv / region.csv / roots.csv found in dir into
/// norms.dat, region.dat, spectrum.dat plus plot.gp. Throws ConfigError when
/// none of the inputs exists. Returns the files written.
std::vector<std::string> emit_plot_data(const std::string& dir);

struct CheckOutcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Post-run checks for `--check`: mass balance, requested monitors
/// nonincreasing, decay when stability is predicted, extinction, weak residual
/// and root certification.
std::vector<CheckOutcome> check_scenario(const Scenario& s, const ScenarioResult& r);
std::vector<CheckOutcome> check_region(const RegionResult& r);

}  // namespace nlstab
