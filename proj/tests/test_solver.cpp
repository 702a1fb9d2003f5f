#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "maxsurf/oracle.hpp"
#include "maxsurf/radial.hpp"
#include "maxsurf/solver.hpp"
#include "support.hpp"

using namespace maxsurf;
using namespace maxsurf::solver;
using mesh::ScalarField;
using test_support::vec;

namespace {

mesh::GridPtr annulus(int n, double R, int N_r, int N_ang, double grading = 1.0) {
  mesh::GridSpec g;
  g.n = n;
  g.hole = mesh::HoleSpec::circle(1.0);
  g.R_out = R;
  g.N_r = N_r;
  g.N_ang = N_ang;
  g.grading = grading;
  return mesh::build_grid(g);
}

PointFunction radial_w(int n, double lambda) {
  auto w = std::make_shared<radial::RadialSolution>(n, lambda);
  return [w](const Eigen::VectorXd& x) { return w->value(x.norm()); };
}

double max_abs_diff(const ScalarField& f, const PointFunction& u) {
  double e = 0.0;
  for (int k = 0; k < f.grid->size(); ++k) e = std::max(e, std::abs(f.values[k] - u(f.grid->point(k))));
  return e;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("area_energy") {
  auto g = annulus(2, 2.0, 32, 256);
  const double area = g->total_measure();
  CHECK(area == doctest::Approx(3 * std::numbers::pi).epsilon(2e-4));
  CHECK(area_energy(ScalarField(g, Eigen::VectorXd::Constant(g->size(), 1.0))) == doctest::Approx(area).epsilon(1e-14));
  const auto affine = mesh::sample(g, [](const Eigen::VectorXd& x) { return 0.36 * x[0] - 0.48 * x[1]; });
  CHECK(area_energy(affine) == doctest::Approx(0.8 * area).epsilon(1e-13));
  const auto steep = mesh::sample(g, [](const Eigen::VectorXd& x) { return 1.01 * x[0]; });
  CHECK_ERROR_KIND(area_energy(steep), ErrorKind::non_spacelike);
}

TEST_CASE("area_energy of w_1 against a 1D quadrature") {
  const radial::RadialSolution w(2, 1.0);
  const double exact = oracle::richardson_simpson(
      [&](double r) { return 2 * std::numbers::pi * r * std::sqrt(1 - std::pow(w.slope(r), 2)); }, 1.0, 4.0);
  auto err = [&](int N) {
    auto g = annulus(2, 4.0, N, N);
    return std::abs(area_energy(mesh::sample(g, radial_w(2, 1.0))) - exact);
  };
  CHECK(err(16) / err(32) > 3.0);
}

TEST_CASE("constants and affine data are exact") {
  auto g = annulus(2, 3.0, 24, 24, 1.05);
  SUBCASE("constant") {
    auto c = [](const Eigen::VectorXd&) { return -0.4; };
    const auto sol = solve_dirichlet(g, sample_boundary(*g, c, c), {});
    CHECK(max_abs_diff(sol.field, c) < 1e-12);
  }
  SUBCASE("affine, |a| = 0.5") {
    auto u = [](const Eigen::VectorXd& x) { return 0.3 * x[0] - 0.4 * x[1] + 0.2; };
    const auto sol = solve_dirichlet(g, sample_boundary(*g, u, u), {});
    CHECK(max_abs_diff(sol.field, u) < 1e-10);
    CHECK(residual_norm(mesh::sample(g, u)) < 1e-12);
  }
  SUBCASE("axial affine, n = 3") {
    auto g3 = annulus(3, 3.0, 24, 24, 1.05);
    auto u = [](const Eigen::VectorXd& x) { return 0.7 * x[2] + 1.0; };
    CHECK(residual_norm(mesh::sample(g3, u)) < 1e-12);
    const auto sol = solve_dirichlet(g3, sample_boundary(*g3, u, u), {});
    CHECK(max_abs_diff(sol.field, u) < 1e-10);
  }
}

TEST_CASE("second-order convergence to w_1") {
  auto err = [](int N) {
    auto g = annulus(2, 16.0, N, N);
    const auto w = radial_w(2, 1.0);
    return max_abs_diff(solve_dirichlet(g, sample_boundary(*g, w, w), {}).field, w);
  };
  const double e32 = err(32);
  const double e64 = err(64);
  CHECK(std::log2(e32 / e64) > 1.9);
}

TEST_CASE("n = 3 radial solution") {
  auto err = [](int N) {
    auto g = annulus(3, 4.0, N, N / 2);
    const auto w = radial_w(3, 1.0);
    return max_abs_diff(solve_dirichlet(g, sample_boundary(*g, w, w), {}).field, w);
  };
  // The south-pole spoke is still pre-asymptotic at these sizes (ratio 2.7, 3.1, 3.3).
  const double e32 = err(32);
  const double e64 = err(64);
  CHECK(e64 < 2e-3);
  CHECK(e32 / e64 > 3.0);
}

TEST_CASE("Newton trace") {
  auto g = annulus(2, 8.0, 8, 8);
  const auto w = radial_w(2, 1.0);
  const auto bc = sample_boundary(*g, w, w);
  // Affine-in-radius initial guess between the boundary values.
  ScalarField init(g);
  for (int k = 0; k < g->size(); ++k) {
    const double s = g->sigma(g->ring_of(k));
    init.values[k] = (1 - s) * bc.inner[g->spoke_of(k)] + s * bc.outer[g->spoke_of(k)];
  }
  const auto sol = solve_dirichlet(g, bc, {}, init);
  const auto& r = sol.report.residuals;
  REQUIRE(r.size() >= 3);
  CHECK(r.back() <= 1e-10);
  for (size_t k = 1; k < r.size(); ++k) CHECK(r[k] < r[k - 1]);
  for (size_t k = 1; k < sol.report.energies.size(); ++k) {
    CHECK(sol.report.energies[k] >= sol.report.energies[k - 1] - 1e-12 * std::abs(sol.report.energies[k - 1]));
  }
  // Quadratic tail once the residual is small.
  for (size_t k = 1; k < r.size(); ++k) {
    if (r[k - 1] <= 1e-3 && r[k] > 1e-13) CHECK(r[k] <= 10.0 * r[k - 1] * r[k - 1]);
  }
  // At the solution a Newton step barely moves.
  CHECK(newton_step(sol.field, {}).step_norm <= 1e-9);
  CHECK(sol.report.theta_h > 0.0);
  CHECK(sol.report.theta_h == doctest::Approx(1.0 - mesh::max_cell_gradient(sol.field)));
}

TEST_CASE("discrete comparison on random ordered data") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto g = annulus(2, 3.0, 12, 24, 1.05);
  auto random_data = [&](double scale) {
    const double c0 = U(rng);
    const double a1 = scale * U(rng), b1 = scale * U(rng), a2 = 0.5 * scale * U(rng);
    return [=](const Eigen::VectorXd& x) {
      const double t = std::atan2(x[1], x[0]);
      return c0 + 0.1 * x.norm() + a1 * std::cos(t) + b1 * std::sin(t) + a2 * std::cos(2 * t);
    };
  };
  int pairs = 0;
  double worst = -1.0;
  while (pairs < 20) {
    const auto f1 = random_data(0.25);
    const auto f2 = random_data(0.25);
    const double lift = 0.2 * (1 + U(rng));
    BoundaryData bc1 = sample_boundary(*g, f1, f1);
    BoundaryData bc2 = sample_boundary(*g, f2, f2);
    // Order the data: bc2 = max(bc1, bc2) + lift, nodewise.
    bc2.inner = bc1.inner.cwiseMax(bc2.inner).array() + lift;
    bc2.outer = bc1.outer.cwiseMax(bc2.outer).array() + lift;
    if (!check_admissible(*g, bc1).admissible() || !check_admissible(*g, bc2).admissible()) continue;
    ++pairs;
    const auto u1 = solve_dirichlet(g, bc1, {}).field;
    const auto u2 = solve_dirichlet(g, bc2, {}).field;
    worst = std::max(worst, (u1.values - u2.values).maxCoeff());
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("solutions maximize the discrete area") {
  auto g = annulus(2, 4.0, 16, 16);
  const auto w = radial_w(2, 1.0);
  const auto sol = solve_dirichlet(g, sample_boundary(*g, w, w), {});
  const double E = area_energy(sol.field);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int decreased = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ScalarField bumped = sol.field;
    for (int k = 0; k < g->size(); ++k) {
      if (!g->on_boundary(k)) bumped.values[k] += 1e-3 * U(rng);
    }
    if (area_energy(bumped) < E) ++decreased;
  }
  CHECK(decreased == 100);
}

TEST_CASE("admissibility and failure modes") {
  auto g = annulus(2, 3.0, 12, 24);
  SUBCASE("inner data steeper than light") {
    auto bad = [](const Eigen::VectorXd& x) { return 1.2 * x[0]; };
    auto zero = [](const Eigen::VectorXd&) { return 0.0; };
    const auto bc = sample_boundary(*g, bad, zero);
    CHECK_FALSE(check_admissible(*g, bc).admissible());
    CHECK_ERROR_KIND(solve_dirichlet(g, bc, {}), ErrorKind::inadmissible);
  }
  SUBCASE("inner/outer gap too large") {
    auto lo = [](const Eigen::VectorXd&) { return 0.0; };
    auto hi = [](const Eigen::VectorXd&) { return 2.5; };
    const auto bc = sample_boundary(*g, lo, hi);
    CHECK(check_admissible(*g, bc).cross_lipschitz > 1.0);
    CHECK_ERROR_KIND(solve_dirichlet(g, bc, {}), ErrorKind::inadmissible);
  }
  SUBCASE("configuration checks") {
    SolverConfig cfg;
    cfg.spacelike_cap = 1.0;
    CHECK_ERROR_KIND(cfg.validate(), ErrorKind::invalid_argument);
    cfg = SolverConfig{};
    cfg.max_iter = 0;
    CHECK_ERROR_KIND(cfg.validate(), ErrorKind::invalid_argument);
  }
  SUBCASE("iteration budget exhausted") {
    auto w = radial_w(2, 1.0);
    SolverConfig cfg;
    cfg.max_iter = 1;
    const auto bc = sample_boundary(*g, w, w);
    try {
      solve_dirichlet(g, bc, cfg);
      FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
      CHECK(e.kind() == ErrorKind::convergence);
      CHECK(e.report().residuals.size() == 2);
      CHECK(e.last_iterate().values.size() == g->size());
    }
  }
}

TEST_CASE("theta_h is stable under refinement") {
  const radial::BoostedRadialSolution w(radial::RadialSolution(2, 1.0), lorentz::BoostParam(vec({0.0, 0.3})));
  auto f = [&](const Eigen::VectorXd& x) { return w.value(x); };
  double theta[2];
  for (int level = 0; level < 2; ++level) {
    auto g = annulus(2, 8.0, 32 << level, 32 << level);
    theta[level] = solve_dirichlet(g, sample_boundary(*g, f, f), {}).report.theta_h;
  }
  CHECK(theta[1] > 0.0);
  CHECK((theta[0] - theta[1]) / theta[0] < 0.1);
}

}  // TEST_SUITE
