#include "nlstab/roots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nlstab/char_fn.hpp"
#include "nlstab/error.hpp"

namespace nlstab {

namespace {

using std::numbers::pi;

constexpr double kContourMinAbs = 1e-10;
constexpr double kIntegerSlack = 1e-3;
constexpr double kNewtonTarget = 1e-12;
constexpr double kRootResidual = 1e-9;
constexpr int kMaxDepth = 48;

struct ContourIntegral {
  cplx value{0.0, 0.0};
  double min_abs_f = std::numeric_limits<double>::infinity();
};

// Thrown internally as soon as a sample lands on (numerically) a zero.
struct ContourHitsZero {};

class EdgeIntegrator {
 public:
  EdgeIntegrator(cplx a, cplx b, double d, double k, double tol)
      : a_(a), span_(b - a), d_(d), k_(k), tol_(tol) {}

  struct Sample {
    double s;
    cplx f;
    cplx g;  // f'/f * dz/ds
  };

  Sample sample(double s, ContourIntegral& acc) const {
    const cplx z = a_ + s * span_;
    const cplx f = char_fn(z, d_, k_);
    acc.min_abs_f = std::min(acc.min_abs_f, std::abs(f));
    if (acc.min_abs_f <= kContourMinAbs) throw ContourHitsZero{};
    return {s, f, char_fn_deriv(z, d_, k_) / f * span_};
  }

  cplx integrate(const Sample& lo, const Sample& hi, ContourIntegral& acc, int depth) const {
    const Sample mid = sample(0.5 * (lo.s + hi.s), acc);
    const double h = hi.s - lo.s;
    const cplx coarse = 0.5 * h * (lo.g + hi.g);
    const cplx fine = 0.25 * h * (lo.g + 2.0 * mid.g + hi.g);
    const bool smooth_arg = std::abs(std::arg(mid.f / lo.f)) < pi / 4 && std::abs(std::arg(hi.f / mid.f)) < pi / 4;
    const bool finite = std::isfinite(fine.real()) && std::isfinite(fine.imag());
    // absolute accuracy per unit length, relaxed to relative accuracy where
    // f'/f is large (a zero close to the contour)
    const double allowed = tol_ * std::max(h, std::abs(fine));
    if (depth >= kMaxDepth || (finite && smooth_arg && std::abs(fine - coarse) <= allowed)) {
      return fine + (fine - coarse) / 3.0;
    }
    return integrate(lo, mid, acc, depth + 1) + integrate(mid, hi, acc, depth + 1);
  }

  cplx run(ContourIntegral& acc) const {
    const int pieces = std::max(8, static_cast<int>(std::ceil(16.0 * std::abs(span_))));
    cplx total{0.0, 0.0};
    Sample prev = sample(0.0, acc);
    for (int p = 1; p <= pieces; ++p) {
      const Sample next = sample(static_cast<double>(p) / pieces, acc);
      total += integrate(prev, next, acc, 0);
      prev = next;
    }
    return total;
  }

 private:
  cplx a_;
  cplx span_;
  double d_;
  double k_;
  double tol_;
};

ContourIntegral contour_integral(const Window& w, double d, double k, double tol) {
  const cplx corners[5] = {{w.re_min, w.im_min}, {w.re_max, w.im_min}, {w.re_max, w.im_max},
                           {w.re_min, w.im_max}, {w.re_min, w.im_min}};
  ContourIntegral acc;
  try {
    for (int e = 0; e < 4; ++e) acc.value += EdgeIntegrator(corners[e], corners[e + 1], d, k, tol).run(acc);
  } catch (const ContourHitsZero&) {
    return acc;
  }
  acc.value /= cplx(0.0, 2.0 * pi);
  return acc;
}

// Minimum |f| along a segment, sampled.
double min_abs_on_segment(cplx a, cplx b, double d, double k, int samples) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    m = std::min(m, std::abs(char_fn(a + (b - a) * (static_cast<double>(i) / samples), d, k)));
  }
  return m;
}

}  // namespace

double winding_integral(const Window& window, double d, double k, double tolerance) {
  return contour_integral(window, d, k, tolerance).value.real();
}

int count_roots(const Window& window, double d, double k) {
  if (!(window.width() > 0.0) || !(window.height() > 0.0)) throw ConfigError("degenerate root window");
  Window w = window;
  bool hit_root = false;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    hit_root = false;
    double last = 0.0;
    for (double tol : {1e-6, 1e-8, 1e-10}) {
      const ContourIntegral c = contour_integral(w, d, k, tol);
      if (c.min_abs_f <= kContourMinAbs) {
        hit_root = true;
        break;
      }
      last = c.value.real();
      const double nearest = std::round(last);
      if (std::abs(last - nearest) < kIntegerSlack && std::abs(c.value.imag()) < kIntegerSlack) {
        return static_cast<int>(nearest);
      }
    }
    if (!hit_root) {
      throw NumericalError("argument principle: non-integer winding " + std::to_string(last));
    }
    w = w.inflated(1e-6);
  }
  throw NumericalError("argument principle: contour passes through a zero after 3 inflations");
}

std::optional<Root> newton_refine(cplx start, double d, double k, const Window& box) {
  cplx z = start;
  cplx fz = char_fn(z, d, k);
  for (int it = 0; it < 100 && std::abs(fz) >= kNewtonTarget; ++it) {
    const cplx step = fz / char_fn_deriv(z, d, k);
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return std::nullopt;
    z -= step;
    if (!box.contains(z)) return std::nullopt;
    fz = char_fn(z, d, k);
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
  }
  // one polishing step; keep it only if it helps
  const cplx polished = z - fz / char_fn_deriv(z, d, k);
  if (box.contains(polished) && std::abs(char_fn(polished, d, k)) < std::abs(fz)) {
    z = polished;
    fz = char_fn(z, d, k);
  }
  Root r;
  r.value = z;
  r.residual = std::abs(fz);
  r.converged = r.residual < kRootResidual;
  return r;
}

namespace {

class RootFinder {
 public:
  RootFinder(double d, double k) : d_(d), k_(k), rng_(0x5eed) {}

  void process(const Window& w, int count, int depth) {
    if (count <= 0) return;
    const double size = std::max(w.width(), w.height());
    if (count == 1 || size < 1e-9 || depth > 80) {
      if (auto r = refine(w)) {
        r->multiplicity = count;
        roots_.push_back(*r);
        return;
      }
      if (size >= 1e-6 && depth <= 80) {
        split(w, count, depth);
        return;
      }
      Root r;
      r.value = w.center();
      r.residual = std::abs(char_fn(r.value, d_, k_));
      r.converged = false;
      r.multiplicity = count;
      roots_.push_back(r);
      return;
    }
    split(w, count, depth);
  }

  std::vector<Root> take() { return std::move(roots_); }

 private:
  std::optional<Root> refine(const Window& w) {
    const double margin = 1e-9 * std::max(1.0, std::max(w.width(), w.height()));
    const Window box = w.inflated(margin);
    if (auto r = newton_refine(w.center(), d_, k_, box); r && r->converged) return r;
    for (int attempt = 0; attempt < 5; ++attempt) {
      const double a = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      const double b = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      const cplx start{w.re_min + a * w.width(), w.im_min + b * w.height()};
      if (auto r = newton_refine(start, d_, k_, box); r && r->converged) return r;
    }
    return std::nullopt;
  }

  void split(const Window& w, int count, int depth) {
    const bool vertical_cut = w.width() >= w.height();
    static constexpr double fractions[] = {0.5, 0.5137, 0.4781, 0.5419, 0.4533, 0.6, 0.4};
    for (double frac : fractions) {
      Window lo = w, hi = w;
      cplx a, b;
      if (vertical_cut) {
        const double cut = w.re_min + frac * w.width();
        lo.re_max = hi.re_min = cut;
        a = {cut, w.im_min};
        b = {cut, w.im_max};
      } else {
        const double cut = w.im_min + frac * w.height();
        lo.im_max = hi.im_min = cut;
        a = {w.re_min, cut};
        b = {w.re_max, cut};
      }
      if (min_abs_on_segment(a, b, d_, k_, 256) < 1e-6) continue;
      int c_lo = 0, c_hi = 0;
      try {
        c_lo = count_roots(lo, d_, k_);
        c_hi = count_roots(hi, d_, k_);
      } catch (const NumericalError&) {
        continue;
      }
      if (c_lo + c_hi != count) continue;
      process(lo, c_lo, depth + 1);
      process(hi, c_hi, depth + 1);
      return;
    }
    // no clean cut: fall back to an independent count of each half
    Window lo = w, hi = w;
    if (vertical_cut) {
      lo.re_max = hi.re_min = w.re_min + 0.5 * w.width();
    } else {
      lo.im_max = hi.im_min = w.im_min + 0.5 * w.height();
    }
    process(lo, count_roots(lo, d_, k_), depth + 1);
    process(hi, count_roots(hi, d_, k_), depth + 1);
  }

  double d_;
  double k_;
  std::mt19937_64 rng_;
  std::vector<Root> roots_;
};

}  // namespace

RootSet find_roots(const Window& window, double d, double k) {
  if (!std::isfinite(window.re_min) || !std::isfinite(window.re_max) || !std::isfinite(window.im_min) ||
      !std::isfinite(window.im_max)) {
    throw ConfigError("root window must be bounded");
  }
  RootSet set;
  set.window = window;
  set.winding_total = count_roots(window, d, k);

  RootFinder finder(d, k);
  finder.process(window, set.winding_total, 0);
  std::vector<Root> roots = finder.take();

  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
    if (a.value.imag() != b.value.imag()) return a.value.imag() < b.value.imag();
    return a.value.real() < b.value.real();
  });
  // sub-windows may have been inflated; merge duplicates
  std::vector<Root> unique;
  for (const Root& r : roots) {
    auto dup = std::find_if(unique.begin(), unique.end(),
                            [&](const Root& u) { return std::abs(u.value - r.value) < 1e-8; });
    if (dup == unique.end()) {
      unique.push_back(r);
    } else if (r.residual < dup->residual) {
      *dup = r;
    }
  }
  set.roots = std::move(unique);

  int listed = 0;
  bool residuals_ok = true;
  for (const Root& r : set.roots) {
    if (r.converged) listed += r.multiplicity;
    residuals_ok = residuals_ok && r.converged && r.residual < kRootResidual;
  }
  set.certified = residuals_ok && listed == set.winding_total;
  return set;
}

std::vector<ImagAxisRoot> imag_axis_roots_k_minus1(double d, int n_max) {
  if (!(d > -1.0)) throw DomainError("imaginary-axis roots at k = -1 need d > -1");
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  std::vector<ImagAxisRoot> out;
  for (int n = 1; n <= n_max; ++n) {
    ImagAxisRoot r;
    r.n = n;
    const double eps = 1e-9 * (n + 1);
    double lo = 2.0 * n * pi + eps;
    double hi = 2.0 * (n + 1) * pi - eps;
    double g_lo = imag_axis_g(lo, d);
    double g_hi = imag_axis_g(hi, d);
    r.bracketed = g_lo < 0.0 && g_hi > 0.0;
    if (!r.bracketed) {
      r.b = 0.5 * (lo + hi);
      r.g_value = imag_axis_g(r.b, d);
      r.residual = std::abs(char_fn(cplx(0.0, r.b), d, -1.0));
      out.push_back(r);
      continue;
    }
    double mid = 0.5 * (lo + hi);
    double g_mid = imag_axis_g(mid, d);
    for (int it = 0; it < 200 && std::abs(g_mid) >= 1e-12; ++it) {
      if (g_mid < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
      const double next = 0.5 * (lo + hi);
      if (next == lo || next == hi) break;
      mid = next;
      g_mid = imag_axis_g(mid, d);
    }
    r.b = mid;
    r.g_value = g_mid;
    r.residual = std::abs(char_fn(cplx(0.0, r.b), d, -1.0));
    out.push_back(r);
  }
  return out;
}

}  // namespace nlstab
