#pragma once

#include <cmath>

#include "nlstab/roots.hpp"

namespace nlstab {

/// (d, k) plus the speed lambda(rho_bar) that converts nondimensional
/// eigenvalues mu into physical rates mu * lambda(rho_bar).
struct SpectralProblem {
  double d = 0.0;
  double k = 0.0;
  double time_scale = 1.0;

  void validate() const;
};

inline constexpr int kDefaultModes = 8;

struct AbscissaEstimate {
  /// max(max Re of computed roots, asymptote); nondimensional.
  double s_est = 0.0;
  /// ln|k| (the line high-frequency roots accumulate on), -inf for k = 0.
  double asymptote = 0.0;
  int roots_used = 0;
  /// k = 1 or d = -1: mu = 0 is an eigenvalue.
  bool degenerate = false;
  /// some root in the window failed to converge or the count did not certify.
  bool low_confidence = false;
  RootSet roots;
};

/// Window [-R, R] x [-2 pi (n_modes+1), 2 pi (n_modes+1)],
/// R = max(3, |ln|k|| + 2) (R = 3 for k = 0).
Window abscissa_window(double k, int n_modes);

AbscissaEstimate spectral_abscissa(double d, double k, int n_modes = kDefaultModes);

struct StabilityVerdict {
  bool stable = false;      // s_est < -1e-6
  bool by_theorem = false;  // d > -1 and |k| < 1
  double s_est = 0.0;
  bool degenerate = false;
  bool low_confidence = false;
};

inline constexpr double kStabilityMargin = 1e-6;

StabilityVerdict classify_stability(double d, double k, int n_modes = kDefaultModes);

inline bool theorem_predicts_stable(double d, double k) { return d > -1.0 && std::abs(k) < 1.0; }

}  // namespace nlstab
