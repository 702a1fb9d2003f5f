#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "maxsurf/mesh.hpp"
#include "maxsurf/radial.hpp"
#include "support.hpp"

using namespace maxsurf;
using namespace maxsurf::mesh;
using test_support::vec;

namespace {

GridSpec annulus(int n, double rho, double R, int N_r, int N_ang, double grading = 1.0) {
  GridSpec g;
  g.n = n;
  g.hole = HoleSpec::circle(rho);
  g.R_out = R;
  g.N_r = N_r;
  g.N_ang = N_ang;
  g.grading = grading;
  return g;
}

// Max error of the radial derivative of sampled w_1 against the closed-form slope.
double radial_derivative_error(int n, int N) {
  auto grid = build_grid(annulus(n, 1.0, 4.0, N, n == 2 ? N : N / 2));
  const radial::RadialSolution w(n, 1.0);
  const auto f = sample(grid, [&](const Eigen::VectorXd& x) { return w.value(x.norm()); });
  const auto g = gradient(f);
  double err = 0.0;
  for (int k = 0; k < grid->size(); ++k) {
    const Eigen::Vector2d p = grid->plane(k);
    err = std::max(err, std::abs(g[k].dot(p.normalized()) - w.slope(p.norm())));
  }
  return err;
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("radial node placement") {
  SUBCASE("uniform") {
    auto g = build_grid(annulus(2, 1.0, 2.0, 2, 4));
    CHECK(g->radius(g->index(0, 0)) == doctest::Approx(1.0));
    CHECK(g->radius(g->index(1, 1)) == doctest::Approx(1.5));
    CHECK(g->radius(g->index(2, 3)) == doctest::Approx(2.0));
    CHECK(g->size() == 12);
  }
  SUBCASE("geometric") {
    auto g = build_grid(annulus(2, 1.0, 8.0, 3, 4, 2.0));
    for (int i = 0; i <= 3; ++i) CHECK(g->radius(g->index(i, 0)) == doctest::Approx(std::pow(2.0, i)).epsilon(1e-14));
  }
  SUBCASE("n = 3 spokes include both poles") {
    auto g = build_grid(annulus(3, 1.0, 2.0, 4, 8));
    CHECK(g->spokes() == 9);
    CHECK(g->angle(0) == 0.0);
    CHECK(g->angle(8) == doctest::Approx(std::numbers::pi));
    CHECK(g->point(g->index(0, 0))[2] == doctest::Approx(1.0));
    CHECK(g->point(g->index(0, 8))[2] == doctest::Approx(-1.0));
  }
}

TEST_CASE("cell measures") {
  SUBCASE("n = 2 total area approaches the annulus") {
    auto g = build_grid(annulus(2, 1.0, 2.0, 64, 64));
    CHECK(g->total_measure() == doctest::Approx(3 * std::numbers::pi).epsilon(2e-3));
    double cells = 0.0;
    for (int i = 0; i < g->N_r(); ++i)
      for (int j = 0; j < g->N_ang(); ++j) cells += g->cell_measure(i, j);
    CHECK(cells == doctest::Approx(g->total_measure()).epsilon(1e-12));
    CHECK(g->nodal_measure().sum() == doctest::Approx(g->total_measure()).epsilon(1e-12));
  }
  SUBCASE("n = 3 total volume within 1e-3") {
    auto g = build_grid(annulus(3, 1.0, 2.0, 64, 64));
    CHECK(g->total_measure() == doctest::Approx(4.0 * std::numbers::pi * 7.0 / 3.0).epsilon(1e-3));
  }
}

TEST_CASE("construction errors name the problem") {
  CHECK_ERROR_KIND(build_grid(annulus(2, 1.0, 0.9, 8, 8)), ErrorKind::geometry);
  CHECK_ERROR_KIND(build_grid(annulus(2, 1.0, 2.0, 1, 8)), ErrorKind::geometry);
  CHECK_ERROR_KIND(build_grid(annulus(2, 1.0, 2.0, 8, 3)), ErrorKind::geometry);
  CHECK_ERROR_KIND(build_grid(annulus(4, 1.0, 2.0, 8, 8)), ErrorKind::geometry);
  CHECK_ERROR_KIND(build_grid(annulus(2, 1.0, 2.0, 8, 8, 0.9)), ErrorKind::geometry);
  auto bad = annulus(2, 1.0, 2.0, 8, 8);
  bad.hole = HoleSpec::star(1.0, 1.2, 3);
  CHECK_ERROR_KIND(build_grid(bad), ErrorKind::geometry);
}

TEST_CASE("star holes") {
  auto spec = annulus(2, 1.0, 4.0, 16, 32);
  spec.hole = HoleSpec::star(1.0, 0.2, 3);
  auto g = build_grid(spec);
  for (int j = 0; j < g->spokes(); ++j) {
    const double t = g->angle(j);
    CHECK(g->radius(g->index(0, j)) == doctest::Approx(1.0 + 0.2 * std::cos(3 * t)).epsilon(1e-14));
    CHECK(g->radius(g->index(16, j)) == doctest::Approx(4.0));
  }
  CHECK(g->max_hole_radius() == doctest::Approx(1.2));
}

TEST_CASE("gradient") {
  SUBCASE("constant") {
    auto g = build_grid(annulus(2, 1.0, 3.0, 16, 16));
    const auto grad = gradient(ScalarField(g, Eigen::VectorXd::Constant(g->size(), 2.5)));
    for (const auto& v : grad) CHECK(v.norm() < 1e-14);
  }
  SUBCASE("affine fields are reproduced on graded grids, n = 2") {
    const Eigen::VectorXd a = vec({0.0, 0.3});
    for (int N : {16, 32}) {
      auto g = build_grid(annulus(2, 1.0, 5.0, N, N, 1.05));
      const auto grad = gradient(sample(g, [&](const Eigen::VectorXd& x) { return a.dot(x) + 1.0; }));
      for (const auto& v : grad) CHECK((v - Eigen::Vector2d(0.0, 0.3)).norm() < 1e-9);
    }
    auto spec = annulus(2, 1.0, 5.0, 16, 16, 1.05);
    spec.hole = HoleSpec::star(1.0, 0.15, 2);
    auto g = build_grid(spec);
    const auto grad = gradient(sample(g, [](const Eigen::VectorXd& x) { return -0.4 * x[0] + 0.2 * x[1]; }));
    for (const auto& v : grad) CHECK((v - Eigen::Vector2d(-0.4, 0.2)).norm() < 1e-9);
  }
  SUBCASE("axial affine field, n = 3") {
    auto g = build_grid(annulus(3, 1.0, 5.0, 16, 16, 1.05));
    const auto grad = gradient(sample(g, [](const Eigen::VectorXd& x) { return 0.3 * x[2]; }));
    for (const auto& v : grad) CHECK((v - Eigen::Vector2d(0.0, 0.3)).norm() < 1e-9);
  }
  SUBCASE("second-order radial derivative of w_1") {
    for (int n : {2, 3}) {
      const double e16 = radial_derivative_error(n, 16);
      const double e32 = radial_derivative_error(n, 32);
      CHECK(e16 / e32 >= 3.6);
    }
  }
}

TEST_CASE("hessian") {
  // u = x^2 + x y - 0.5 y^2 with constant Hessian; second order on refinement.
  auto error = [](int N) {
    auto g = build_grid(annulus(2, 1.0, 3.0, N, N));
    const auto H = hessian(sample(g, [](const Eigen::VectorXd& x) { return x[0] * x[0] + x[0] * x[1] - 0.5 * x[1] * x[1]; }));
    Eigen::Matrix2d exact;
    exact << 2.0, 1.0, 1.0, -1.0;
    double err = 0.0;
    for (int k = 0; k < g->size(); ++k) {
      if (g->on_boundary(k)) continue;
      err = std::max(err, (H[k] - exact).cwiseAbs().maxCoeff());
    }
    return err;
  };
  const double e16 = error(16);
  const double e32 = error(32);
  CHECK(e32 < 0.1);
  CHECK(e16 / e32 > 3.0);

  SUBCASE("n = 3 hoop entry") {
    // u = rho^2 / 2 + z^2 (from (x1^2 + x2^2) / 2 + x3^2): Hessian diag(1, 1, 2).
    auto g = build_grid(annulus(3, 1.0, 3.0, 32, 32));
    const auto H3 = hessian(sample(g, [](const Eigen::VectorXd& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]) + x[2] * x[2]; }));
    Eigen::Matrix3d exact = Eigen::Vector3d(1.0, 1.0, 2.0).asDiagonal();
    for (int k = 0; k < g->size(); ++k) {
      if (g->on_boundary(k)) continue;
      CHECK((H3[k] - exact).cwiseAbs().maxCoeff() < 0.05);
    }
  }
}

TEST_CASE("interp") {
  auto g = build_grid(annulus(2, 1.0, 3.0, 8, 16));
  SUBCASE("at nodes") {
    std::mt19937_64 rng(1);
    Eigen::VectorXd v = Eigen::VectorXd::Random(g->size());
    const ScalarField f(g, v);
    for (int k = 0; k < g->size(); k += 7) CHECK(interp(f, g->point(k)) == doctest::Approx(v[k]).epsilon(1e-12));
  }
  SUBCASE("affine in (r, theta) at a cell centre") {
    const ScalarField f = sample(g, [&](const Eigen::VectorXd& x) {
      const double t = std::atan2(x[1], x[0]);
      return 2.0 * x.norm() + 0.5 * (t < -1e-12 ? t + 2 * std::numbers::pi : t);
    });
    const double rc = 1.0 + 2.5 * 0.25;  // between rings 2 and 3
    const double tc = 2.5 * 2 * std::numbers::pi / 16;
    const double corners = 0.25 * (f.values[g->index(2, 2)] + f.values[g->index(3, 2)] + f.values[g->index(2, 3)] +
                                   f.values[g->index(3, 3)]);
    CHECK(interp(f, rc * vec({std::cos(tc), std::sin(tc)})) == doctest::Approx(corners).epsilon(1e-13));
  }
  SUBCASE("second order for w_1") {
    auto err = [](int N) {
      auto grid = build_grid(annulus(2, 1.0, 4.0, N, N));
      const radial::RadialSolution w(2, 1.0);
      const auto f = sample(grid, [&](const Eigen::VectorXd& x) { return w.value(x.norm()); });
      std::mt19937_64 rng(2);
      std::uniform_real_distribution<double> U(0.0, 1.0);
      double e = 0.0;
      for (int k = 0; k < 200; ++k) {
        const double r = 1.0 + 3.0 * U(rng);
        const double t = 2 * std::numbers::pi * U(rng);
        const Eigen::VectorXd x = r * vec({std::cos(t), std::sin(t)});
        e = std::max(e, std::abs(interp(f, x) - w.value(r)));
      }
      return e;
    };
    CHECK(err(16) / err(32) > 3.0);
  }
  SUBCASE("outside the annulus") {
    const ScalarField f(g);
    CHECK_ERROR_KIND(interp(f, vec({0.5, 0.0})), ErrorKind::out_of_domain);
    CHECK_ERROR_KIND(interp(f, vec({0.0, 3.5})), ErrorKind::out_of_domain);
  }
}

TEST_CASE("boundary rings and mesh width") {
  auto g = build_grid(annulus(2, 1.0, 3.0, 8, 16));
  CHECK(g->inner_ring().size() == 16);
  CHECK(g->outer_ring().size() == 16);
  for (int k : g->inner_ring()) CHECK(g->on_boundary(k));
  CHECK(g->mesh_width() == doctest::Approx(std::max(0.25 / 1.25, 2 * std::numbers::pi / 16)));
  CHECK(max_cell_gradient(sample(g, [](const Eigen::VectorXd& x) { return 0.6 * x[0]; })) ==
        doctest::Approx(0.6).epsilon(1e-12));
}

}  // TEST_SUITE
