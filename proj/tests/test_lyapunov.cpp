#include <doctest.h>

#include <cmath>
#include <random>

#include "nlstab/decay.hpp"
#include "nlstab/error.hpp"
#include "nlstab/lyapunov.hpp"
#include "nlstab/profile.hpp"
#include "nlstab/simulate.hpp"

using namespace nlstab;

namespace {

DensityField field_of(const Eigen::VectorXd& v, double t = 0.0) {
  DensityField f;
  f.t = t;
  f.cells = v;
  return f;
}

DensityField random_field(int n, double center, double spread, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-spread, spread);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = center + U(rng);
  return field_of(v);
}

double sq_norm(const DensityField& f, double rho_bar) {
  const double n = l2_norm(deviation(f, rho_bar));
  return n * n;
}

// (e^b - 1)^2 e^{-b} / b^2 written as (sinh(b/2) / (b/2))^2.
double sinhc_sq(double beta) {
  const double h = 0.5 * beta;
  return std::pow(std::sinh(h) / h, 2);
}

ClosedLoopConfig frozen_unit_speed(double d, double k, int n, double t_final) {
  ClosedLoopConfig cfg;
  cfg.rho_bar = 1.0;
  cfg.k = k;
  cfg.velocity = VelocityModel::constant(1.0, {-1e6, 1e6});
  cfg.freeze_velocity = true;
  cfg.linear_d = d;
  cfg.n_cells = n;
  cfg.t_final = t_final;
  return cfg;
}

}  // namespace

TEST_CASE("beta constraints") {
  CHECK(mass_weight(0.1, 0.5, 0.0) == doctest::Approx(0.45241870901797976).epsilon(1e-15));
  CHECK(mass_weight(1.0, 0.5, 0.3) == doctest::Approx((std::exp(-1.0) - 0.3) * 0.5 / 0.7));
  CHECK(mass_weight_admissible(1.0, -0.5));
  CHECK_FALSE(mass_weight_admissible(1.0, -0.6));
  CHECK(boundary_weight_admissible(0.2, 0.9));
  CHECK_FALSE(boundary_weight_admissible(0.25, 0.9));
  for (double beta : {1e-3, 0.125, 0.5, 1.0, 3.0})
    for (double d : {-0.9, 0.0, 0.4}) CHECK(decay_margin(beta, d) == doctest::Approx(1.0 - d * d * sinhc_sq(beta)));
}

TEST_CASE("select_beta examples") {
  SUBCASE("beta = 1 admissible") {
    const auto c = select_beta(0.5, 0.3);
    CHECK(c.valid);
    CHECK(c.beta == 1.0);
    CHECK(c.a == doctest::Approx(mass_weight(1.0, 0.5, 0.3)));
    CHECK(c.rate > 0.0);
  }
  SUBCASE("d close to 1 needs beta = 1/4") {
    // 1 - 0.99^2 sinhc^2: negative at beta = 1/2, positive at 1/4
    CHECK(1.0 - 0.9801 * sinhc_sq(0.5) < 0.0);
    const auto c = select_beta(0.99, 0.0);
    CHECK(c.valid);
    CHECK(c.beta == 0.25);
  }
  SUBCASE("boundary weight drives beta for k = 0.9") {
    // e^{-beta} > 0.81 first holds at beta = 1/8
    CHECK(select_beta(0.0, 0.9).beta == 0.125);
  }
  CHECK_THROWS_AS(select_beta(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(select_beta(-1.0, 0.0), DomainError);
  CHECK_THROWS_AS(select_beta(0.2, -1.0), DomainError);
}

TEST_CASE("select_beta result satisfies every constraint") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-0.999, 0.999);
  for (int i = 0; i < 300; ++i) {
    const double d = U(rng), k = U(rng);
    const auto c = select_beta(d, k);
    CHECK(mass_weight_admissible(c.beta, c.a));
    CHECK(std::exp(-c.beta) > k * k);
    CHECK(1.0 - d * d * sinhc_sq(c.beta) > 0.0);
    CHECK(c.rate > 0.0);
  }
}

TEST_CASE("lyap_L on constant offsets") {
  const int n = 64;
  CHECK(lyap_L(field_of(Eigen::VectorXd::Constant(n, 2.0)), 2.0, 1.0, 0.3) == 0.0);
  for (double beta : {0.0, 0.5, 1.0}) {
    const double c = 0.25, a = 0.4;
    const double weight = beta == 0.0 ? 1.0 : (1.0 - std::exp(-beta)) / beta;
    const double L = lyap_L(field_of(Eigen::VectorXd::Constant(n, 1.0 + c)), 1.0, beta, a);
    CHECK(L == doctest::Approx(c * c * (weight + a)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(lyap_L(field_of(Eigen::VectorXd::Zero(4)), 0.0, -1.0, 0.0), DomainError);
}

TEST_CASE("xi, V1, V2 on a two-cell field") {
  // deviation (0.2, -0.1): dW = 0.05
  const auto f = field_of((Eigen::VectorXd(2) << 1.2, 0.9).finished());
  const double d = 2.0;
  const auto xi = xi_field(f, 1.0, d);
  CHECK(xi.cells[0] == doctest::Approx(0.3));
  CHECK(xi.cells[1] == doctest::Approx(0.0));
  CHECK(lyap_V1(f, 1.0, d) == doctest::Approx(0.5 * (0.04 + 0.01) + 2.0 * 0.0025));
  // weight of the first half of [0, 1] under e^{-x}
  CHECK(lyap_V2(f, 1.0, d) == doctest::Approx((1.0 - std::exp(-0.5)) * 0.09));
  const double A = constant_A(d, 0.2);
  CHECK(lyap_V(f, 1.0, d, 0.2, A) ==
        doctest::Approx(2 * A / (1 - 0.04) * lyap_V1(f, 1.0, d) + lyap_V2(f, 1.0, d)));
  CHECK_THROWS_AS(lyap_V(f, 1.0, d, 1.0, A), DomainError);
  CHECK_THROWS_AS(lyap_V(f, 1.0, d, 0.2, 0.0), DomainError);
}

TEST_CASE("constant_A examples") {
  CHECK(constant_A(0.5, 0.2) == doctest::Approx(0.04 + 0.32 * (1.0 - std::exp(-1.0))).epsilon(1e-14));
  CHECK(constant_A(0.0, 0.0) == 1e-6);
  CHECK(constant_A(3.0, -0.5) == doctest::Approx(0.25 + 2 * 9 * 2.25 * 0.6321205588285577));
  CHECK_THROWS_AS(constant_A(1.0, 1.0), DomainError);
  const auto c = large_d_case(2.0, 0.5);
  CHECK(c.v1_weight == doctest::Approx(2 * c.A / 0.75));
}

TEST_CASE("small-d coercivity holds on random fields") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.99, 0.99);
  for (int i = 0; i < 200; ++i) {
    const double d = U(rng), k = U(rng);
    const auto c = select_beta(d, k);
    const auto bounds = small_d_coercivity(c.beta, c.a);
    const auto f = random_field(50, 1.0, 0.5, rng);
    const double L = lyap_L(f, 1.0, c.beta, c.a);
    const double nrm = sq_norm(f, 1.0);
    CHECK(bounds.c1 > 0.0);
    CHECK(bounds.c1 * nrm <= L * (1 + 1e-12));
    CHECK(L <= bounds.c4 * nrm * (1 + 1e-12));
  }
}

TEST_CASE("large-d equivalence chain holds on random fields") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> Ud(0.0, 5.0), Uk(-0.95, 0.95);
  for (int i = 0; i < 200; ++i) {
    const double d = Ud(rng), k = Uk(rng);
    const auto e = large_d_equivalence(d, k);
    const auto f = random_field(40, 2.0, 1.0, rng);
    const double nrm = sq_norm(f, 2.0);
    const double V2 = lyap_V2(f, 2.0, d);
    const double V = lyap_V(f, 2.0, d, k, constant_A(d, k));
    const double tol = 1 + 1e-12;
    CHECK(e.b1 * nrm <= e.b2 * V2 * tol);
    CHECK(e.b2 * V2 <= V * tol);
    CHECK(V <= e.b3 * V2 * tol);
    CHECK(e.b3 * V2 <= e.b4 * nrm * tol);
  }
  CHECK_THROWS_AS(large_d_equivalence(-0.5, 0.0), DomainError);
}

TEST_CASE("discrete mass bound: Cauchy-Schwarz and its equality case") {
  for (int n : {1, 7, 100, 1000})
    for (double beta : {0.0, 0.125, 1.0, 4.0}) {
      const double bound = discrete_mass_bound(n, beta);
      CHECK(bound <= continuous_mass_bound(beta) * (1 + 1e-14));
      const Eigen::VectorXd w = exponential_weights(n, beta);
      const double dx = 1.0 / n;
      // equality for rho_i = dx / w_i
      const Eigen::VectorXd r = dx * w.cwiseInverse();
      const double W = total_mass(r);
      CHECK(W * W == doctest::Approx(bound * w.dot(r.cwiseAbs2())).epsilon(1e-12));
    }
  CHECK(discrete_mass_bound(1000, 1.0) == doctest::Approx(std::expm1(1.0)).epsilon(1e-6));
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto f = random_field(30, 0.0, 1.0, rng);
    const Eigen::VectorXd w = exponential_weights(30, 0.7);
    const double W = total_mass(f);
    CHECK(W * W <= discrete_mass_bound(30, 0.7) * w.dot(f.cells.cwiseAbs2()) * (1 + 1e-12));
  }
}

TEST_CASE("monitor on a hand-built trajectory") {
  TrajectoryRecord tr;
  tr.rho_bar = 1.0;
  const double offsets[] = {1.0, 0.5, 0.6};
  for (int i = 0; i < 3; ++i) {
    tr.times.push_back(0.5 * i);
    tr.snapshots.push_back(field_of(Eigen::VectorXd::Constant(8, 1.0 + offsets[i]), 0.5 * i));
  }
  const MonitorCase c = MonitorCase::small_d(1.0, 0.0, 0.0);  // a = 0, beta = 1
  CHECK(c.name() == "L");
  const auto m = monitor(tr, c);
  const double w = 1.0 - std::exp(-1.0);
  REQUIRE(m.functional.size() == 3);
  CHECK(m.functional[0] == doctest::Approx(w));
  CHECK(m.initial == doctest::Approx(w));
  CHECK(std::isnan(m.ratio[0]));
  CHECK(m.ratio[1] == doctest::Approx(std::log(0.25) / 0.5));
  CHECK(m.max_increase == doctest::Approx(0.11 * w));
  CHECK_FALSE(m.nonincreasing(1e-9));
  CHECK(MonitorCase::large_d(1.0, 2.0, 0.1).name() == "V");

  tr.snapshots.pop_back();
  CHECK_THROWS_AS(monitor(tr, c), ConfigError);
}

TEST_CASE("monitors decrease along simulated linearised runs") {
  SUBCASE("small d") {
    auto cfg = frozen_unit_speed(0.5, 0.3, 200, 3.0);
    const auto rec = simulate(cfg, sample_cell_averages(perturbation_profile(1.0, PerturbationShape::Compatible, 0.1), 200));
    const auto m = monitor(rec, MonitorCase::small_d(1.0, 0.5, 0.3));
    CHECK(m.nonincreasing(1e-9));
    CHECK(m.functional.back() < 0.1 * m.initial);
  }
  SUBCASE("large d") {
    auto cfg = frozen_unit_speed(2.0, 0.3, 200, 3.0);
    const auto rec = simulate(cfg, sample_cell_averages(perturbation_profile(1.0, PerturbationShape::Compatible, 0.1), 200));
    const auto m = monitor(rec, MonitorCase::large_d(1.0, 2.0, 0.3));
    CHECK(m.nonincreasing(1e-9));
  }
  SUBCASE("no snapshots") {
    auto cfg = frozen_unit_speed(0.5, 0.3, 50, 0.5);
    cfg.store_snapshots = false;
    const auto rec = simulate(cfg, sample_cell_averages(perturbation_profile(1.0, PerturbationShape::Sine, 0.1), 50));
    CHECK_THROWS_AS(monitor(rec, MonitorCase::small_d(1.0, 0.5, 0.3)), ConfigError);
  }
}

TEST_CASE("fit_decay_rate on exact exponentials") {
  std::vector<double> t, s;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    s.push_back(3.0 * std::exp(-0.7 * t.back()));
  }
  const auto fit = fit_decay_rate(t, s);
  CHECK(fit.alpha == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fit.c == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.t_start == doctest::Approx(1.0));
  CHECK(fit.points == 91);
  CHECK_FALSE(fit.extinct());

  s[60] = 0.0;
  const auto ext = fit_decay_rate(t, s);
  CHECK(ext.extinct());
  CHECK(*ext.extinction_time == doctest::Approx(6.0));

  CHECK_THROWS_AS(fit_decay_rate({0.0, 1.0}, {1.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(fit_decay_rate({0.0, 1.0, 2.0}, {1.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(fit_decay_rate(t, std::vector<double>(t.size(), 1.0), 1.0), ConfigError);
}

TEST_CASE("fitted decay of the linear loop d = 0, k = 1/2 matches ln 2") {
  auto cfg = frozen_unit_speed(0.0, 0.5, 200, 10.0);
  cfg.record_every = 5;
  const auto rec = simulate(cfg, sample_cell_averages(perturbation_profile(1.0, PerturbationShape::Compatible, 0.05), 200));
  const auto fit = fit_decay_rate(rec.times, rec.l2);
  CHECK(std::abs(fit.alpha - std::log(2.0)) < 0.1 * std::log(2.0));
}
