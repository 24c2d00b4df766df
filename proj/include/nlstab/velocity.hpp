#pragma once

#include <functional>
#include <string>
#include <vector>

namespace nlstab {

enum class VelocityKind { Reciprocal, UserTabulated, UserAnalytic };

std::string to_string(VelocityKind kind);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double s) const { return s >= lo && s <= hi; }
};

/// Speed law lambda(W) as a function of the total mass W, together with its
/// derivative. Evaluation outside valid_range throws DomainError; no
/// extrapolation is ever attempted.
///
/// Three flavours are supported:
///  - Reciprocal: lambda(s) = 1/(1+s), analytic derivative.
///  - UserAnalytic: polynomial sum_i c_i s^i, analytic derivative.
///  - UserTabulated: C^1 monotone cubic Hermite interpolant of (s, lambda)
///    samples; the derivative is a centred difference with
///    h = 1e-6 * max(1, |s|).
class VelocityModel {
 public:
  static VelocityModel reciprocal(Interval valid_range);
  /// Default range for reciprocal speed around an equilibrium rho_bar:
  /// [-0.5 (1+|rho_bar|), 10 (1+|rho_bar|)] clipped to s > -1.
  static VelocityModel reciprocal_around(double rho_bar);
  static VelocityModel polynomial(std::vector<double> coefficients, Interval valid_range);
  static VelocityModel constant(double speed, Interval valid_range);
  static VelocityModel tabulated(std::vector<double> s, std::vector<double> lambda);
  /// Reads a CSV file with header `s,lambda`.
  static VelocityModel tabulated_from_csv(const std::string& path);

  double operator()(double s) const;
  double derivative(double s) const;

  VelocityKind kind() const { return kind_; }
  const Interval& valid_range() const { return range_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  /// Sampled positivity check: lambda(s) > 0 at `samples` equispaced points.
  bool positive_on_range(int samples = 1001) const;

 private:
  VelocityModel(VelocityKind kind, Interval range) : kind_(kind), range_(range) {}
  void require_in_range(double s) const;

  VelocityKind kind_;
  Interval range_;
  std::vector<double> coeffs_;
  std::vector<double> table_s_;
  std::vector<double> table_v_;
  std::vector<double> table_m_;  // Hermite slopes
  double eval_raw(double s) const;
};

}  // namespace nlstab
