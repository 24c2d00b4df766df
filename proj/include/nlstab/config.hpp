#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlstab/field.hpp"
#include "nlstab/model.hpp"
#include "nlstab/profile.hpp"
#include "nlstab/roots.hpp"

namespace nlstab {

/// Initial density: constant, cos^2 bump, equilibrium plus perturbation, or a
/// snapshot CSV (`x,rho`).
struct InitialSpec {
  enum class Kind { Constant, Bump, Perturbation, Csv };
  Kind kind = Kind::Perturbation;
  double value = 0.0;  // Constant
  double center = 0.5, width = 0.5, height = 1.0;  // Bump
  PerturbationShape shape = PerturbationShape::Sine;  // Perturbation
  double amplitude = 0.0;
  std::string path;  // Csv, resolved against the config file's directory
};

enum class Analysis { LyapunovSmallD, LyapunovLargeD, DecayFit, WeakResidual, Spectrum, Extinction };

Analysis parse_analysis(const std::string& name);
std::string to_string(Analysis a);

struct SpectrumSpec {
  int n_modes = 8;
  /// Root window; the abscissa window for n_modes when absent.
  std::optional<Window> window;
};

/// min, min + step, ... up to max (inclusive, with a 1e-9 step slack).
struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;
  std::vector<double> values() const;
};

struct RegionScanSpec {
  GridAxis d{-1.5, 2.0, 0.25};
  GridAxis k{-1.4, 1.4, 0.2};
  /// Points with |d + 1| < margin or ||k| - 1| < margin are skipped.
  double margin = 0.05;
  int n_modes = 8;
  /// Per point: frozen unit-speed simulation and decay fit of the L2 deviation.
  bool simulate_and_fit = false;
  int fit_n_cells = 200;
  double fit_t_final = 10.0;
  double fit_amplitude = 0.05;
  int threads = 0;  // 0: hardware concurrency
  void validate() const;
  bool excluded(double d, double k) const;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  ClosedLoopConfig cfg;
  InitialSpec initial;
  std::vector<Analysis> analyses;
  SpectrumSpec spectrum;
  std::optional<RegionScanSpec> region;

  bool wants(Analysis a) const;
  /// Throws ConfigError.
  void validate() const;
};

/// YAML text to Scenario. Unknown keys are errors. Relative paths are taken
/// relative to base_dir.
Scenario parse_scenario(const std::string& yaml_text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

/// Cell averages of the configured initial density on cfg.n_cells cells.
DensityField make_initial(const Scenario& s);

}  // namespace nlstab
