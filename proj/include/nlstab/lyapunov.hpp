#pragma once

#include <string>
#include <vector>

#include "nlstab/field.hpp"
#include "nlstab/simulate.hpp"

namespace nlstab {

// All functionals act on deviation variables rho - rho_bar, W - rho_bar.

/// Constants of the weighted functional
/// L = int e^{-beta x} (rho - rho_bar)^2 + a (W - rho_bar)^2 used for |d| < 1.
struct LyapunovCaseSmallD {
  double beta = 1.0;
  double a = 0.0;
  bool valid = false;
  /// beta (1 - d^2 (e^beta - 1)^2 e^{-beta} beta^{-2}) / C3: guaranteed decay
  /// rate of L for the linearised loop at unit speed.
  double rate = 0.0;
  /// L <= c3 int e^{-beta x} rho^2.
  double c3 = 1.0;
};

/// Individual constraints on (beta, a).
bool mass_weight_admissible(double beta, double a);         // a > -beta / (e^beta - 1)
bool boundary_weight_admissible(double beta, double k);     // e^{-beta} > k^2
double decay_margin(double beta, double d);                 // 1 - d^2 (e^beta-1)^2 e^{-beta} / beta^2
double mass_weight(double beta, double d, double k);        // a = (e^{-beta} - k) d / (1 - k)

/// Halves beta from 1 until all three constraints hold. Throws DomainError
/// unless |d| < 1 and |k| < 1.
LyapunovCaseSmallD select_beta(double d, double k);

/// Norm equivalence C1 ||rho||^2 <= L <= C4 ||rho||^2.
struct Coercivity {
  double c1 = 0.0;
  double c4 = 0.0;
};
Coercivity small_d_coercivity(double beta, double a);

/// V = (2A / (1 - k^2)) V1 + V2 for d >= 1.
struct LyapunovCaseLargeD {
  double A = 0.0;
  double v1_weight = 0.0;  // 2A / (1 - k^2)
  double d = 0.0;
  double k = 0.0;
};

/// A = max(1e-6, k^2 + 2 d^2 (1-k)^2 (1 - e^{-1})). Throws DomainError for |k| >= 1.
double constant_A(double d, double k);
LyapunovCaseLargeD large_d_case(double d, double k);

/// B1 ||rho||^2 <= B2 V2 <= V <= B3 V2 <= B4 ||rho||^2 (valid for d >= 0).
struct Equivalence {
  double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0;
};
Equivalence large_d_equivalence(double d, double k);

double lyap_L(const DensityField& f, double rho_bar, double beta, double a);
DensityField xi_field(const DensityField& f, double rho_bar, double d);
double lyap_V1(const DensityField& f, double rho_bar, double d);
double lyap_V2(const DensityField& f, double rho_bar, double d);
double lyap_V(const DensityField& f, double rho_bar, double d, double k, double A);

/// Discrete counterpart of (e^beta - 1)/beta in W^2 <= const * int e^{-beta x} rho^2:
/// sum_i dx^2 / w_i with w_i the exact cell weights. Never exceeds the continuous
/// constant; equality holds for rho_i proportional to dx / w_i.
double discrete_mass_bound(Eigen::Index n_cells, double beta);
inline double continuous_mass_bound(double beta) { return beta == 0.0 ? 1.0 : std::expm1(beta) / beta; }

enum class FunctionalKind { SmallD, LargeD };

struct MonitorCase {
  FunctionalKind kind = FunctionalKind::SmallD;
  double rho_bar = 0.0;
  double d = 0.0;
  double k = 0.0;
  double beta = 1.0;  // SmallD
  double a = 0.0;     // SmallD
  double A = 1.0;     // LargeD

  static MonitorCase small_d(double rho_bar, double d, double k);
  static MonitorCase large_d(double rho_bar, double d, double k);
  double evaluate(const DensityField& f) const;
  std::string name() const;
};

struct MonitorSeries {
  std::vector<double> t;
  std::vector<double> functional;
  /// log(F_i / F_{i-1}) / (t_i - t_{i-1}); NaN for the first entry.
  std::vector<double> ratio;
  /// max_i (F_i - F_{i-1}), clipped below at 0.
  double max_increase = 0.0;
  double initial = 0.0;
  bool nonincreasing(double relative_tol) const { return max_increase <= relative_tol * initial; }
};

/// Evaluates the functional on every snapshot. Throws ConfigError when the
/// trajectory carries no snapshots.
MonitorSeries monitor(const TrajectoryRecord& traj, const MonitorCase& c);

}  // namespace nlstab
