#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace nlstab {

/// Cell-average density on a uniform grid of [0, 1] at time t.
struct DensityField {
  double t = 0.0;
  Eigen::VectorXd cells;

  Eigen::Index size() const { return cells.size(); }
  double dx() const { return 1.0 / static_cast<double>(cells.size()); }
  bool all_finite() const { return cells.allFinite(); }
};

/// Cell centres x_i = (i + 1/2) dx.
inline Eigen::VectorXd cell_centers(Eigen::Index n) {
  const double dx = 1.0 / static_cast<double>(n);
  return Eigen::VectorXd::LinSpaced(n, 0.5 * dx, 1.0 - 0.5 * dx);
}

/// Exact cell integrals of exp(-beta x): w_i = int_{x_i-}^{x_i+} e^{-beta x} dx.
/// beta = 0 gives the uniform weights dx.
inline Eigen::VectorXd exponential_weights(Eigen::Index n, double beta) {
  const double dx = 1.0 / static_cast<double>(n);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) * dx;
    // int_a^{a+dx} e^{-beta x} dx = e^{-beta a} * (1 - e^{-beta dx}) / beta
    w[i] = beta == 0.0 ? dx : std::exp(-beta * a) * (-std::expm1(-beta * dx)) / beta;
  }
  return w;
}

/// Midpoint rule for int_0^1 rho; exact for the cell-average representation.
template <typename Derived>
typename Derived::Scalar total_mass(const Eigen::MatrixBase<Derived>& cells) {
  return cells.sum() / static_cast<typename Derived::Scalar>(cells.size());
}

inline double total_mass(const DensityField& f) { return total_mass(f.cells); }

template <typename Derived>
typename Derived::Scalar l1_norm(const Eigen::MatrixBase<Derived>& cells) {
  return cells.cwiseAbs().sum() / static_cast<typename Derived::Scalar>(cells.size());
}

template <typename Derived>
typename Derived::Scalar l2_norm(const Eigen::MatrixBase<Derived>& cells) {
  using std::sqrt;
  return sqrt(cells.squaredNorm() / static_cast<typename Derived::Scalar>(cells.size()));
}

template <typename Derived>
typename Derived::Scalar linf_norm(const Eigen::MatrixBase<Derived>& cells) {
  return cells.cwiseAbs().maxCoeff();
}

/// rho - rho_bar as an expression.
inline auto deviation(const DensityField& f, double rho_bar) {
  return (f.cells.array() - rho_bar).matrix();
}

}  // namespace nlstab
