#pragma once

#include <complex>

namespace nlstab {

/// Radius below which the removable singularity of (1 - e^{-mu}) / mu is
/// handled by its Taylor series.
inline constexpr double kTaylorRadius = 1e-3;

/// E(mu) = (1 - e^{-mu}) / mu = int_0^1 e^{-mu x} dx, entire.
template <typename Scalar>
std::complex<Scalar> exp_ratio(const std::complex<Scalar>& mu) {
  if (std::abs(mu) < Scalar(kTaylorRadius)) {
    // 1 - mu/2 + mu^2/6 - mu^3/24 + mu^4/120
    return Scalar(1) + mu * (Scalar(-1) / 2 + mu * (Scalar(1) / 6 + mu * (Scalar(-1) / 24 + mu / Scalar(120))));
  }
  return (Scalar(1) - std::exp(-mu)) / mu;
}

/// E'(mu) = (e^{-mu} (1 + mu) - 1) / mu^2.
template <typename Scalar>
std::complex<Scalar> exp_ratio_derivative(const std::complex<Scalar>& mu) {
  if (std::abs(mu) < Scalar(kTaylorRadius)) {
    // -1/2 + mu/3 - mu^2/8 + mu^3/30 - mu^4/144
    return Scalar(-1) / 2 +
           mu * (Scalar(1) / 3 + mu * (Scalar(-1) / 8 + mu * (Scalar(1) / 30 - mu / Scalar(144))));
  }
  return (std::exp(-mu) * (Scalar(1) + mu) - Scalar(1)) / (mu * mu);
}

/// Characteristic function of the linearised closed loop,
/// f(mu) = 1 - k e^{-mu} + d (1 - k) (1 - e^{-mu}) / mu, with f(0) = (1 + d)(1 - k).
template <typename Scalar>
std::complex<Scalar> char_fn(const std::complex<Scalar>& mu, Scalar d, Scalar k) {
  return Scalar(1) - k * std::exp(-mu) + d * (Scalar(1) - k) * exp_ratio(mu);
}

template <typename Scalar>
std::complex<Scalar> char_fn_deriv(const std::complex<Scalar>& mu, Scalar d, Scalar k) {
  return k * std::exp(-mu) + d * (Scalar(1) - k) * exp_ratio_derivative(mu);
}

/// Direct formula without the Taylor branch (diagnostics only; loses digits near 0).
template <typename Scalar>
std::complex<Scalar> char_fn_direct(const std::complex<Scalar>& mu, Scalar d, Scalar k) {
  return Scalar(1) - k * std::exp(-mu) + d * (Scalar(1) - k) * (Scalar(1) - std::exp(-mu)) / mu;
}

/// Purely imaginary roots of f_{d,-1}: zeros of g(b) = -(b/2) cot(b/2) - d.
template <typename Scalar>
Scalar imag_axis_g(Scalar b, Scalar d) {
  using std::tan;
  return -(b / 2) / tan(b / 2) - d;
}

}  // namespace nlstab
