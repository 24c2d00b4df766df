#include <doctest.h>

#include <cmath>
#include <random>

#include "nlstab/characteristic.hpp"
#include "nlstab/error.hpp"
#include "nlstab/profile.hpp"
#include "nlstab/simulate.hpp"
#include "nlstab/upwind.hpp"
#include "nlstab/weak_form.hpp"

using namespace nlstab;

namespace {

ClosedLoopConfig loop(double rho_bar, double k, int n = 100, double t_final = 2.0) {
  ClosedLoopConfig cfg;
  cfg.rho_bar = rho_bar;
  cfg.k = k;
  cfg.velocity = VelocityModel::reciprocal_around(rho_bar);
  cfg.n_cells = n;
  cfg.t_final = t_final;
  return cfg;
}

DensityField constant_field(int n, double c) {
  DensityField f;
  f.cells = Eigen::VectorXd::Constant(n, c);
  return f;
}

DensityField random_field(int n, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  DensityField f;
  f.cells.resize(n);
  for (int i = 0; i < n; ++i) f.cells[i] = U(rng);
  return f;
}

// Mass-weighted mean position of the field.
double centroid(const DensityField& f) {
  const Eigen::VectorXd x = cell_centers(f.size());
  return x.dot(f.cells) / f.cells.sum();
}

}  // namespace

TEST_CASE("equilibrium is a fixed point of the upwind step") {
  for (double k : {-0.6, 0.0, 0.3, 1.0}) {
    auto cfg = loop(1.0, k, 80);
    DensityField f = constant_field(80, 1.0);
    for (int i = 0; i < 200; ++i) f = step_upwind(f, cfg).next;
    CHECK((f.cells.array() - 1.0).abs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("upwind step: time step and discrete mass balance") {
  auto cfg = loop(0.7, 0.4, 60);
  DensityField f = random_field(60, 0.2, 1.5, 11);
  const ClosedLoopLaw law(cfg);
  for (int i = 0; i < 300; ++i) {
    const double W = total_mass(f);
    const UpwindStep s = step_upwind(f, law, cfg);
    CHECK(s.dt == doctest::Approx(cfg.cfl * cfg.dx() / cfg.velocity(W)).epsilon(1e-15));
    CHECK(s.y == doctest::Approx(f.cells[59] * cfg.velocity(W)).epsilon(1e-15));
    CHECK(s.u == doctest::Approx(feedback_influx(s.y, cfg)).epsilon(1e-15));
    CHECK(std::abs(total_mass(s.next) - W - s.dt * (s.u - s.y)) < 1e-13);
    f = s.next;
  }
  // max_dt caps the step
  CHECK(step_upwind(f, law, cfg, 1e-4).dt == 1e-4);
}

TEST_CASE("k = 1 conserves mass") {
  auto cfg = loop(0.5, 1.0, 100, 10.0);
  const auto traj = simulate(cfg, random_field(100, 0.0, 2.0, 5));
  double drift = 0.0;
  for (double w : traj.W) drift = std::max(drift, std::abs(w - traj.W.front()));
  CHECK(drift <= 1e-10);
  CHECK(traj.max_mass_balance_defect < 1e-13);
  for (std::size_t i = 0; i < traj.size(); ++i) CHECK(traj.u[i] == doctest::Approx(traj.y[i]).epsilon(1e-15));
}

TEST_CASE("zero gain at zero equilibrium empties the domain") {
  auto cfg = loop(0.0, 0.0, 100, 10.0);
  const DensityField rho0 = constant_field(100, 1.0);
  const auto up = simulate(cfg, rho0);
  CHECK(up.final_state.cells.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(up.extinction_time.has_value());

  cfg.method = SolverMethod::Characteristic;
  const auto ch = simulate(cfg, rho0);
  CHECK(ch.final_state.cells.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("simulate: zero and equilibrium runs") {
  SUBCASE("zero data at zero equilibrium stays zero") {
    auto cfg = loop(0.0, 0.5, 50, 10.0);
    const auto t = simulate(cfg, constant_field(50, 0.0));
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(t.W[i] == 0.0);
      CHECK(t.u[i] == 0.0);
      CHECK(t.y[i] == 0.0);
      CHECK(t.l1[i] == 0.0);
      CHECK(t.l2[i] == 0.0);
    }
    CHECK_FALSE(t.extinction_time.has_value());
  }
  SUBCASE("equilibrium data keeps u = y = rho_bar lambda(rho_bar) = 1/2") {
    for (double k : {-0.9, 0.0, 0.5}) {
      auto cfg = loop(1.0, k, 50, 3.0);
      for (auto m : {SolverMethod::Upwind, SolverMethod::Characteristic}) {
        cfg.method = m;
        const auto t = simulate(cfg, constant_field(50, 1.0));
        for (std::size_t i = 0; i < t.size(); ++i) {
          CHECK(t.u[i] == doctest::Approx(0.5).epsilon(1e-14));
          CHECK(t.y[i] == doctest::Approx(0.5).epsilon(1e-14));
        }
      }
    }
  }
}

TEST_CASE("frozen unit speed transports a bump by t") {
  ClosedLoopConfig cfg;
  cfg.rho_bar = 0.0;
  cfg.k = 0.0;
  cfg.velocity = VelocityModel::constant(1.0, {-10.0, 10.0});
  cfg.freeze_velocity = true;
  cfg.n_cells = 400;
  cfg.t_final = 0.5;
  const auto rho0 = sample_cell_averages(bump_profile(0.3, 0.2, 1.0), 400);
  for (auto m : {SolverMethod::Upwind, SolverMethod::Characteristic}) {
    cfg.method = m;
    const auto t = simulate(cfg, rho0);
    const DensityField& f = t.final_state;
    CHECK(centroid(f) == doctest::Approx(0.8).epsilon(0.01));
    const Eigen::VectorXd x = cell_centers(400);
    double inside = 0.0;
    for (int i = 0; i < 400; ++i) {
      if (x[i] > 0.7 - 5 * cfg.dx() * 4 && x[i] < 0.9 + 5 * cfg.dx() * 4) inside += f.cells[i];
    }
    CHECK(inside / f.cells.sum() > 0.999);
    CHECK(t.displacement.back() == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("L1 and L2 of the deviation do not grow at zero equilibrium") {
  for (double k : {-0.7, 0.0, 0.5, 0.9}) {
    auto cfg = loop(0.0, k, 100, 5.0);
    const auto t = simulate(cfg, random_field(100, 0.0, 0.4, 17));
    CHECK(t.max_l1_increase <= 1e-12);
    CHECK(t.max_l2_increase <= 1e-12);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.l1[i] <= t.l1[i - 1] + 1e-12);
  }
}

TEST_CASE("nonnegative data stays nonnegative for k in [0, 1)") {
  for (double k : {0.0, 0.4, 0.95}) {
    for (double rho_bar : {0.0, 0.8}) {
      auto cfg = loop(rho_bar, k, 100, 5.0);
      const auto t = simulate(cfg, random_field(100, 0.0, 1.5, 23));
      CHECK(t.min_cell_value >= -1e-12);
    }
  }
}

TEST_CASE("trajectory record structure") {
  auto cfg = loop(0.6, 0.3, 40, 1.0);
  cfg.record_every = 7;
  const auto t = simulate(cfg, random_field(40, 0.3, 0.9, 2));
  CHECK(t.has_snapshots());
  CHECK(t.W.size() == t.size());
  CHECK(t.l2.size() == t.size());
  CHECK(t.displacement.size() == t.size());
  CHECK(t.size() == static_cast<std::size_t>(t.steps / 7 + 1 + (t.steps % 7 != 0)));
  for (std::size_t i = 1; i < t.size(); ++i) {
    CHECK(t.times[i] > t.times[i - 1]);
    CHECK(t.displacement[i] >= t.displacement[i - 1]);
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.W[i] == doctest::Approx(total_mass(t.snapshots[i])).epsilon(1e-14));
  }
  CHECK(t.times.back() == doctest::Approx(1.0).epsilon(1e-12));

  cfg.store_snapshots = false;
  const auto lean = simulate(cfg, random_field(40, 0.3, 0.9, 2));
  CHECK_FALSE(lean.has_snapshots());
  CHECK(lean.final_state.cells == t.final_state.cells);
}

TEST_CASE("simulate rejects bad input and reports blow-up") {
  auto cfg = loop(0.5, 0.3, 40);
  CHECK_THROWS_AS(simulate(cfg, constant_field(39, 0.5)), ConfigError);
  DensityField bad = constant_field(40, 0.5);
  bad.cells[3] = std::nan("");
  CHECK_THROWS_AS(simulate(cfg, bad), ConfigError);

  ClosedLoopConfig unstable;
  unstable.rho_bar = 1.0;
  unstable.k = 0.0;
  unstable.velocity = VelocityModel::constant(1.0, {-1e6, 1e6});
  unstable.freeze_velocity = true;
  unstable.linear_d = -1.5;
  unstable.n_cells = 50;
  unstable.t_final = 80.0;
  unstable.store_snapshots = false;
  CHECK_THROWS_AS(simulate(unstable, sample_cell_averages(perturbation_profile(1.0, PerturbationShape::Sine, 0.05), 50)),
                  NumericalError);
}

TEST_CASE("characteristic history") {
  const auto rho0 = sample_cell_averages(perturbation_profile(0.5, PerturbationShape::Compatible, 0.2), 50);
  auto h = BoundaryTraceHistory::from_field(rho0);
  CHECK(h.xi() == 0.0);
  CHECK(h.mass() == doctest::Approx(total_mass(rho0)).epsilon(1e-3));
  CHECK(h.integral(-0.5, -0.25) == doctest::Approx(h.integral(-0.5, -0.3) + h.integral(-0.3, -0.25)).epsilon(1e-14));
  CHECK(h.outflow_density() == doctest::Approx(rho0.cells[49]));

  auto cfg = loop(0.5, 0.3, 50, 1.0);
  const ClosedLoopLaw law(cfg);
  DensityField f = rho0;
  double xi_prev = h.xi();
  for (int i = 0; i < 200; ++i) {
    auto s = step_characteristic(h, f, law, cfg);
    CHECK(s.iterations <= 50);
    h = std::move(s.history);
    f = std::move(s.field);
    CHECK(h.xi() >= xi_prev);
    xi_prev = h.xi();
    CHECK(h.mass() == doctest::Approx(total_mass(f)).epsilon(1e-3));
  }
  for (std::size_t i = 1; i < h.size(); ++i) CHECK(h.knot(i).xi >= h.knot(i - 1).xi);
}

TEST_CASE("characteristic step leaves the equilibrium unchanged") {
  auto cfg = loop(1.0, 0.4, 64, 3.0);
  cfg.method = SolverMethod::Characteristic;
  const auto t = simulate(cfg, constant_field(64, 1.0));
  CHECK((t.final_state.cells.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("zero gain at zero equilibrium: characteristic solver translates the data") {
  ClosedLoopConfig cfg;
  cfg.rho_bar = 0.0;
  cfg.k = 0.0;
  cfg.velocity = VelocityModel::reciprocal_around(0.0);
  cfg.n_cells = 200;
  cfg.t_final = 0.3;
  cfg.method = SolverMethod::Characteristic;
  const auto rho0 = sample_cell_averages(bump_profile(0.3, 0.3, 1.0), 200);
  const auto t = simulate(cfg, rho0);
  const double shift = t.displacement.back();
  const auto expected = sample_cell_averages(bump_profile(0.3 + shift, 0.3, 1.0), 200);
  CHECK((t.final_state.cells - expected.cells).cwiseAbs().maxCoeff() < 10 * cfg.dx());
  CHECK(t.final_state.cells.head(static_cast<Eigen::Index>(shift / cfg.dx()) - 1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("upwind and characteristic solvers agree at first order") {
  double prev = 0.0;
  std::vector<double> orders;
  for (int n : {50, 100, 200}) {
    auto cfg = loop(0.5, 0.4, n, 1.0);
    cfg.store_snapshots = false;
    const auto rho0 = sample_cell_averages(perturbation_profile(0.5, PerturbationShape::Compatible, 0.2), n);
    const auto a = simulate(cfg, rho0);
    cfg.method = SolverMethod::Characteristic;
    const auto b = simulate(cfg, rho0);
    const double err = (a.final_state.cells - b.final_state.cells).cwiseAbs().maxCoeff();
    CHECK(err < 0.5 / n);
    if (prev > 0.0) orders.push_back(std::log2(prev / err));
    prev = err;
  }
  for (double p : orders) CHECK(p >= 0.8);
}

TEST_CASE("weak residual") {
  SUBCASE("zero test function gives zero") {
    auto cfg = loop(0.5, 0.4, 50, 1.0);
    const auto t = simulate(cfg, random_field(50, 0.1, 1.0, 4));
    CHECK(weak_residual(t, cfg, zero_test_function(1.0)) == 0.0);
  }
  SUBCASE("equilibrium trajectory cancels") {
    // For rho = c: int int c (phi_t + lambda phi_x) = -c tau/2 - c lambda tau^2/2,
    // int c phi(0, x) = c tau/2, int u phi(t, 0) = c lambda tau^2/2; the sum is zero.
    auto cfg = loop(1.0, 0.4, 50, 1.0);
    const auto t = simulate(cfg, constant_field(50, 1.0));
    CHECK(weak_residual(t, cfg, linear_test_function(1.0)) < 1e-13);
  }
  SUBCASE("constraint violations and unsupported trajectories") {
    auto cfg = loop(0.5, 0.4, 50, 1.0);
    const auto t = simulate(cfg, random_field(50, 0.1, 1.0, 4));
    TestFunction bad_end = linear_test_function(1.0);
    bad_end.value = [](double s, double x) { return (1.0 - s) * x; };
    bad_end.dx = [](double s, double) { return 1.0 - s; };
    bad_end.dt = [](double, double x) { return -x; };
    CHECK_THROWS_AS(weak_residual(t, cfg, bad_end), ConfigError);
    TestFunction bad_tau = linear_test_function(1.0);
    bad_tau.value = [](double, double x) { return 1.0 - x; };
    CHECK_THROWS_AS(weak_residual(t, cfg, bad_tau), ConfigError);
    CHECK_THROWS_AS(weak_residual(t, cfg, linear_test_function(2.0)), ConfigError);
    auto frozen = cfg;
    frozen.freeze_velocity = true;
    CHECK_THROWS_AS(weak_residual(simulate(frozen, random_field(50, 0.1, 1.0, 4)), frozen, linear_test_function(1.0)),
                    ConfigError);
    cfg.store_snapshots = false;
    CHECK_THROWS_AS(weak_residual(simulate(cfg, random_field(50, 0.1, 1.0, 4)), cfg, linear_test_function(1.0)),
                    ConfigError);
  }
  SUBCASE("first-order decrease under refinement") {
    std::vector<double> res;
    for (int n : {50, 100, 200}) {
      auto cfg = loop(0.5, 0.4, n, 1.0);
      const auto rho0 = sample_cell_averages(perturbation_profile(0.5, PerturbationShape::Compatible, 0.2), n);
      res.push_back(weak_residual(simulate(cfg, rho0), cfg, linear_test_function(1.0)));
    }
    CHECK(std::log2(res[0] / res[1]) >= 0.8);
    CHECK(std::log2(res[1] / res[2]) >= 0.8);
  }
}

TEST_CASE("characteristic steps end on knots of the outgoing trace") {
  auto cfg = loop(0.5, 0.3, 40, 1.0);
  const ClosedLoopLaw law(cfg);
  DensityField f = sample_cell_averages(perturbation_profile(0.5, PerturbationShape::Sine, 0.2), 40);
  auto h = BoundaryTraceHistory::from_field(f);
  const std::size_t knots0 = h.size();
  for (int i = 0; i < 400; ++i) {
    const double target = h.next_knot_after(h.xi() - 1.0) + 1.0;
    auto s = step_characteristic(h, f, law, cfg);
    h = std::move(s.history);
    f = std::move(s.field);
    CHECK(h.xi() == doctest::Approx(target).epsilon(1e-14));
  }
  // the knot pattern repeats, so the live history does not grow
  CHECK(h.size() <= knots0 + 1);
  CHECK(step_characteristic(h, f, law, cfg, 1e-5).dt == 1e-5);
}

TEST_CASE("k = 1 conserves mass to round-off with either solver") {
  std::mt19937_64 rng(21);
  for (auto method : {SolverMethod::Upwind, SolverMethod::Characteristic}) {
    for (double rho_bar : {0.0, 0.7, 2.0}) {
      auto cfg = loop(rho_bar, 1.0, 120, 6.0);
      cfg.method = method;
      cfg.store_snapshots = false;
      const auto rho0 = random_field(120, rho_bar, rho_bar + 1.0, static_cast<unsigned>(rng()));
      const auto t = simulate(cfg, rho0);
      double drift = 0.0;
      for (double W : t.W) drift = std::max(drift, std::abs(W - t.W.front()));
      CHECK(drift < 1e-12);
    }
  }
}
