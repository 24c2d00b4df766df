#pragma once

#include <complex>
#include <optional>
#include <vector>

namespace nlstab {

using cplx = std::complex<double>;

struct Window {
  double re_min = 0.0;
  double re_max = 0.0;
  double im_min = 0.0;
  double im_max = 0.0;

  double width() const { return re_max - re_min; }
  double height() const { return im_max - im_min; }
  cplx center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
  bool contains(cplx z, double margin = 0.0) const {
    return z.real() >= re_min - margin && z.real() <= re_max + margin && z.imag() >= im_min - margin &&
           z.imag() <= im_max + margin;
  }
  Window inflated(double by) const { return {re_min - by, re_max + by, im_min - by, im_max + by}; }
};

struct Root {
  cplx value;
  double residual = 0.0;  // |f(value)|
  bool converged = false;
  int multiplicity = 1;
};

struct RootSet {
  Window window;
  std::vector<Root> roots;  // sorted by (Im, Re)
  int winding_total = 0;
  /// winding_total matches the listed roots and every residual is < 1e-9.
  bool certified = false;
};

/// Winding number of f_{d,k} around the rectangle boundary (argument
/// principle), by adaptive trapezoid integration of f'/f. If the contour comes
/// within 1e-10 of a zero the window is inflated by 1e-6 (up to 3 times).
/// Throws NumericalError when no clean integer count can be obtained.
int count_roots(const Window& window, double d, double k);

/// Pre-rounding value of the contour integral (1 / 2 pi i) \oint f'/f.
double winding_integral(const Window& window, double d, double k, double tolerance = 1e-6);

/// Zeros of f_{d,k} inside the window: recursive bisection until each piece
/// holds at most one zero, then Newton refinement to |f| < 1e-12.
RootSet find_roots(const Window& window, double d, double k);

/// Newton iteration for f_{d,k} from `start`. Returns nullopt if the iterate
/// leaves `box`.
std::optional<Root> newton_refine(cplx start, double d, double k, const Window& box);

struct ImagAxisRoot {
  int n = 0;
  double b = 0.0;           // root in (2 n pi, 2 (n+1) pi)
  bool bracketed = false;   // sign condition met on the shrunken interval
  double g_value = 0.0;     // g(b)
  double residual = 0.0;    // |f_{d,-1}(i b)|
};

/// For k = -1 and d > -1, the root b of g on each interval (2 n pi, 2 (n+1) pi),
/// n = 1..n_max, by bisection to |g| < 1e-12.
std::vector<ImagAxisRoot> imag_axis_roots_k_minus1(double d, int n_max);

}  // namespace nlstab
