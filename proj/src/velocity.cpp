#include "nlstab/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlstab/csv.hpp"
#include "nlstab/error.hpp"

namespace nlstab {

std::string to_string(VelocityKind kind) {
  switch (kind) {
    case VelocityKind::Reciprocal:
      return "reciprocal";
    case VelocityKind::UserTabulated:
      return "tabulated";
    case VelocityKind::UserAnalytic:
      return "analytic";
  }
  return "unknown";
}

VelocityModel VelocityModel::reciprocal(Interval valid_range) {
  if (!(valid_range.lo > -1.0) || !(valid_range.hi > valid_range.lo)) {
    throw ConfigError("reciprocal speed needs a valid range inside (-1, inf)");
  }
  return VelocityModel(VelocityKind::Reciprocal, valid_range);
}

VelocityModel VelocityModel::reciprocal_around(double rho_bar) {
  const double scale = 1.0 + std::abs(rho_bar);
  // keep 1+s away from zero
  const double lo = std::max(-0.5 * scale, -0.5);
  return reciprocal({lo, 10.0 * scale});
}

VelocityModel VelocityModel::polynomial(std::vector<double> coefficients, Interval valid_range) {
  if (coefficients.empty()) throw ConfigError("analytic speed needs at least one coefficient");
  if (!(valid_range.hi > valid_range.lo)) throw ConfigError("empty valid range");
  VelocityModel v(VelocityKind::UserAnalytic, valid_range);
  v.coeffs_ = std::move(coefficients);
  return v;
}

VelocityModel VelocityModel::constant(double speed, Interval valid_range) {
  return polynomial({speed}, valid_range);
}

VelocityModel VelocityModel::tabulated(std::vector<double> s, std::vector<double> lambda) {
  if (s.size() != lambda.size() || s.size() < 2) {
    throw ConfigError("speed table needs at least two (s, lambda) rows");
  }
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) throw ConfigError("speed table abscissae must be strictly increasing");
  }
  VelocityModel v(VelocityKind::UserTabulated, {s.front(), s.back()});
  const std::size_t n = s.size();
  // Fritsch-Carlson slopes: C^1 and shape preserving.
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (lambda[i + 1] - lambda[i]) / (s[i + 1] - s[i]);
  std::vector<double> m(n);
  m[0] = secant[0];
  m[n - 1] = secant[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (secant[i - 1] * secant[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      const double h0 = s[i] - s[i - 1];
      const double h1 = s[i + 1] - s[i];
      const double w0 = 2.0 * h1 + h0;
      const double w1 = h1 + 2.0 * h0;
      m[i] = (w0 + w1) / (w0 / secant[i - 1] + w1 / secant[i]);
    }
  }
  v.table_s_ = std::move(s);
  v.table_v_ = std::move(lambda);
  v.table_m_ = std::move(m);
  return v;
}

VelocityModel VelocityModel::tabulated_from_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header != std::vector<std::string>{"s", "lambda"}) {
    throw ConfigError("speed table " + path + " must have header `s,lambda`");
  }
  std::vector<double> s, lam;
  for (const auto& row : table.rows) {
    s.push_back(row[0]);
    lam.push_back(row[1]);
  }
  return tabulated(std::move(s), std::move(lam));
}

void VelocityModel::require_in_range(double s) const {
  if (!std::isfinite(s) || !range_.contains(s)) {
    std::ostringstream os;
    os << "speed evaluated at s = " << s << " outside valid range [" << range_.lo << ", " << range_.hi
       << "]";
    throw DomainError(os.str());
  }
}

double VelocityModel::eval_raw(double s) const {
  switch (kind_) {
    case VelocityKind::Reciprocal:
      return 1.0 / (1.0 + s);
    case VelocityKind::UserAnalytic: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
      return acc;
    }
    case VelocityKind::UserTabulated: {
      const auto& xs = table_s_;
      auto it = std::upper_bound(xs.begin(), xs.end(), s);
      std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
      i = std::min(i, xs.size() - 2);
      const double h = xs[i + 1] - xs[i];
      const double t = (s - xs[i]) / h;
      const double t2 = t * t, t3 = t2 * t;
      return (2 * t3 - 3 * t2 + 1) * table_v_[i] + (t3 - 2 * t2 + t) * h * table_m_[i] +
             (-2 * t3 + 3 * t2) * table_v_[i + 1] + (t3 - t2) * h * table_m_[i + 1];
    }
  }
  return 0.0;
}

double VelocityModel::operator()(double s) const {
  require_in_range(s);
  return eval_raw(s);
}

double VelocityModel::derivative(double s) const {
  require_in_range(s);
  switch (kind_) {
    case VelocityKind::Reciprocal:
      return -1.0 / ((1.0 + s) * (1.0 + s));
    case VelocityKind::UserAnalytic: {
      double acc = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 1;) acc = acc * s + static_cast<double>(i) * coeffs_[i];
      return acc;
    }
    case VelocityKind::UserTabulated: {
      // end segments extrapolate their cubic for the half-stencil outside the table
      const double h = 1e-6 * std::max(1.0, std::abs(s));
      return (eval_raw(s + h) - eval_raw(s - h)) / (2.0 * h);
    }
  }
  return 0.0;
}

bool VelocityModel::positive_on_range(int samples) const {
  samples = std::max(samples, 2);
  for (int i = 0; i < samples; ++i) {
    const double s = range_.lo + (range_.hi - range_.lo) * i / (samples - 1);
    if (!(eval_raw(s) > 0.0)) return false;
  }
  return true;
}

}  // namespace nlstab
