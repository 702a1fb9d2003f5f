#include <cmath>
#include <numbers>

#include "doctest.h"
#include "maxsurf/analysis.hpp"
#include "maxsurf/oracle.hpp"
#include "maxsurf/solver.hpp"
#include "support.hpp"

using namespace maxsurf;
using namespace maxsurf::analysis;
using test_support::axis;
using test_support::vec;

namespace {

radial::BoostedRadialSolution boosted(int n, double lambda, const Eigen::VectorXd& a) {
  return radial::BoostedRadialSolution(radial::RadialSolution(n, lambda), lorentz::BoostParam(a));
}

mesh::GridPtr grid(int n, double R, int N_r, int N_ang, double grading) {
  mesh::GridSpec g;
  g.n = n;
  g.hole = mesh::HoleSpec::circle(1.0);
  g.R_out = R;
  g.N_r = N_r;
  g.N_ang = N_ang;
  g.grading = grading;
  return mesh::build_grid(g);
}

std::vector<double> radii_between(double lo, double hi, int count) {
  std::vector<double> r;
  for (int k = 0; k < count; ++k) r.push_back(lo * std::pow(hi / lo, double(k) / (count - 1)));
  return r;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("residue normalization") {
  CHECK(residue_normalization(2) == doctest::Approx(1.0 / (2 * std::numbers::pi)).epsilon(1e-15));
  CHECK(residue_normalization(3) == doctest::Approx(1.0 / (4 * std::numbers::pi)).epsilon(1e-15));
  // |S^3| = 2 pi^2.
  CHECK(residue_normalization(4) == doctest::Approx(1.0 / (4 * std::numbers::pi * std::numbers::pi)).epsilon(1e-15));
  CHECK_ERROR_KIND(residue_normalization(1), ErrorKind::invalid_argument);
}

TEST_CASE("residue of exact solutions") {
  for (int n : {2, 3}) {
    for (double l : {-1.0, 0.5, 2.0}) {
      const auto rep = residue(boosted(n, l, Eigen::VectorXd::Zero(n)), {2.0, 5.0, 40.0});
      for (double v : rep.values) CHECK(std::abs(v - l) < 1e-10);
      CHECK(rep.spread < 1e-10);
      CHECK(rep.mean() == doctest::Approx(l).epsilon(1e-10));
    }
  }
  // Res[w^a] = lambda / sqrt(1 - |a|^2) in the far field.
  const auto rep = residue(boosted(2, 1.0, vec({0.3, 0.4})), {1e3, 1e4});
  CHECK(std::abs(rep.values.back() - 1.0 / std::sqrt(0.75)) < 1e-6);
  CHECK_ERROR_KIND(residue(boosted(2, 1.0, vec({0.0, 0.0})), {2.0, 1.0}), ErrorKind::invalid_argument);
  CHECK_ERROR_KIND(residue(boosted(2, 1.0, vec({0.0, 0.0})), {}), ErrorKind::invalid_argument);
}

TEST_CASE("residue of a solved field") {
  auto g = grid(2, 16.0, 64, 64, 1.0);
  const radial::RadialSolution w(2, 1.0);
  auto f = [&](const Eigen::VectorXd& x) { return w.value(x.norm()); };
  const auto sol = solver::solve_dirichlet(g, solver::sample_boundary(*g, f, f), {});
  const auto rep = residue(sol.field, radii_between(2.0, 8.0, 5));
  for (double v : rep.values) CHECK(std::abs(v - 1.0) < 0.02);
  CHECK_ERROR_KIND(residue(sol.field, {0.5}), ErrorKind::domain);
  CHECK_ERROR_KIND(residue(sol.field, {20.0}), ErrorKind::domain);
}

TEST_CASE("asymptotic basis") {
  CHECK(asymptotic_basis(2, vec({0.0, 0.0}), vec({3.0, 4.0})) == doctest::Approx(std::log(5.0)));
  CHECK(asymptotic_basis(3, Eigen::VectorXd::Zero(3), vec({0.0, 0.0, 2.0})) == doctest::Approx(-0.5));
  // q = |x|^2 - (a.x)^2
  CHECK(asymptotic_basis(2, vec({0.0, 0.6}), vec({0.0, 10.0})) == doctest::Approx(std::log(8.0)));
  CHECK_ERROR_KIND(asymptotic_basis(2, vec({0.0, 0.0}), vec({0.0, 0.0})), ErrorKind::domain);
}

TEST_CASE("fit_samples") {
  SUBCASE("affine data are reproduced") {
    const Eigen::VectorXd a = vec({0.2, -0.1});
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    for (int k = 0; k < 60; ++k) {
      const double r = 50.0 * (1 + k % 7);
      const double t = 0.37 * k;
      pts.push_back(r * vec({std::cos(t), std::sin(t)}));
      vals.push_back(a.dot(pts.back()) + 1.5 + 0.25 * asymptotic_basis(2, a, pts.back()));
    }
    const auto fit = fit_samples(2, a, pts, vals);
    CHECK(std::abs(fit.c - 1.5) < 1e-10);
    CHECK(std::abs(fit.d - 0.25) < 1e-10);
    CHECK(fit.rms_residual < 1e-10);
  }
  SUBCASE("too few samples") {
    CHECK_ERROR_KIND(fit_samples(2, vec({0.0, 0.0}), {vec({10.0, 0.0})}, {1.0}), ErrorKind::window_too_narrow);
  }
  SUBCASE("a on the light cone") {
    CHECK_ERROR_KIND(fit_samples(2, vec({1.0, 0.0}), {}, {}), ErrorKind::fit_failure);
  }
}

TEST_CASE("fit_asymptotics on exact solutions") {
  SUBCASE("w_1 recovers m(1) = ln 2 and d = 1") {
    const auto fit = fit_asymptotics(boosted(2, 1.0, vec({0.0, 0.0})), 1e2, 1e4);
    CHECK(fit.a.norm() < 1e-4);
    CHECK(std::abs(fit.c - std::log(2.0)) < 1e-4);
    CHECK(std::abs(fit.d - 1.0) < 1e-4);
  }
  SUBCASE("n = 3, a = (0, 0, 0.5)") {
    const double s = std::sqrt(0.75);
    const auto fit = fit_asymptotics(boosted(3, 1.0, vec({0.0, 0.0, 0.5})), 1e2, 1e3);
    CHECK((fit.a - vec({0.0, 0.0, 0.5})).norm() < 1e-4);
    CHECK(std::abs(fit.c - s * radial::M_const(1.0, 3).value) < 1e-3);
    CHECK(std::abs(fit.d - s * 1.0) < 1e-3);
  }
  SUBCASE("residue relation d = (1 - |a|^2) Res") {
    for (int n : {2, 3}) {
      const auto w = boosted(n, 1.0, axis(n, 0.5));
      const double hi = n == 2 ? 1e4 : 1e3;
      const auto fit = fit_asymptotics(w, 1e2, hi);
      const auto res = residue(w, radii_between(1e2, hi, 4));
      CHECK(check_residue_relation(fit, res) / std::abs(fit.d) < 1e-3);
    }
  }
  SUBCASE("refitting the fitted model is idempotent") {
    const auto fit = fit_asymptotics(boosted(2, 1.0, vec({0.0, 0.3})), 1e2, 1e4);
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    for (int k = 0; k < 40; ++k) {
      const double t = 0.5 * k;
      pts.push_back((1e2 + 250.0 * k) * vec({std::cos(t), std::sin(t)}));
      vals.push_back(fit.a.dot(pts.back()) + fit.c + fit.d * asymptotic_basis(2, fit.a, pts.back()));
    }
    const auto again = fit_samples(2, fit.a, pts, vals);
    CHECK(std::abs(again.c - fit.c) < 1e-9);
    CHECK(std::abs(again.d - fit.d) < 1e-9);
  }
  SUBCASE("bad windows") {
    CHECK_ERROR_KIND(fit_asymptotics(boosted(2, 1.0, vec({0.0, 0.0})), 10.0, 10.0), ErrorKind::window_too_narrow);
    auto g = grid(2, 16.0, 16, 16, 1.1);
    CHECK_ERROR_KIND(fit_asymptotics(mesh::ScalarField(g), 2.0, 8.0), ErrorKind::invalid_argument);
  }
}

TEST_CASE("cross term of the n = 2 expansion") {
  // Along the ray through a the remainder u - a.x - c - d psi behaves like
  // (C ln r + K) / r with C = -|a| lambda^2. Two radii pin C and K.
  const double eta = 0.5;
  const double lambda = 1.0;
  const Eigen::VectorXd a = vec({0.0, eta});
  const auto w = boosted(2, lambda, a);
  const double s = std::sqrt(1 - eta * eta);
  const double c = s * radial::m_const(lambda).value;
  const double d = s * lambda;
  auto scaled = [&](double r) {
    const Eigen::VectorXd x = vec({0.0, r});
    return (w.value(x) - a.dot(x) - c - d * asymptotic_basis(2, a, x)) * r;
  };
  const double r1 = 1e3;
  const double r2 = 1e5;
  const double C = (scaled(r2) - scaled(r1)) / std::log(r2 / r1);
  CHECK(C == doctest::Approx(-eta * lambda * lambda).epsilon(1e-2));
}

TEST_CASE("blowdown") {
  const Eigen::VectorXd a = vec({0.0, 0.4});
  const auto w = boosted(2, 1.0, a);
  const auto seq = blowdown_sequence(w, {10.0, 100.0, 1000.0}, a);
  REQUIRE(seq.size() == 3);
  for (size_t k = 1; k < seq.size(); ++k) CHECK(seq[k].sup_distance < seq[k - 1].sup_distance);
  for (const auto& s : seq) CHECK(s.lipschitz < 1.0);
  // u(rx)/r - a.x = O(ln r / r).
  CHECK(seq.back().sup_distance < 2.0 * std::log(1000.0) / 1000.0);

  auto g = grid(2, 40.0, 32, 32, 1.1);
  const auto f = mesh::sample(g, [](const Eigen::VectorXd& x) { return 0.3 * x[0] + 2.0; });
  const auto fs = blowdown_sequence(f, {4.0, 16.0}, vec({0.3, 0.0}));
  // Bilinear interpolation in (sigma, angle) is not exact for affine fields.
  CHECK(fs[1].sup_distance == doctest::Approx(2.0 / 16.0).epsilon(1e-2));
  CHECK(fs[1].lipschitz == doctest::Approx(0.3).epsilon(1e-2));
  CHECK_ERROR_KIND(blowdown_sequence(f, {30.0}, vec({0.3, 0.0})), ErrorKind::domain);
  CHECK_ERROR_KIND(blowdown_sequence(f, {4.0}, vec({0.3, 0.0, 0.0})), ErrorKind::invalid_argument);
}

TEST_CASE("second fundamental form") {
  SUBCASE("planes are flat") {
    auto g = grid(2, 8.0, 24, 24, 1.05);
    const auto II = second_ff_norm(mesh::sample(g, [](const Eigen::VectorXd& x) { return 0.5 * x[0] - 0.2 * x[1]; }));
    for (int k = 0; k < g->size(); ++k) {
      if (!g->on_boundary(k)) CHECK(std::abs(II[k]) < 1e-9);
    }
    CHECK(std::isnan(II[g->inner_ring().front()]));
  }
  SUBCASE("exact radial curvature") {
    for (int n : {2, 3}) {
      const auto w = boosted(n, 1.5, Eigen::VectorXd::Zero(n));
      const Eigen::VectorXd x = 2.0 * axis(n, 1.0);
      CHECK(second_ff_norm_exact(w, x) == doctest::Approx(oracle::radial_curvature(n, 1.5, 2.0)).epsilon(1e-12));
    }
  }
  SUBCASE("discrete |II| of w_1 converges") {
    auto err = [](int N) {
      auto g = grid(2, 4.0, N, N, 1.0);
      const radial::RadialSolution w(2, 1.0);
      const auto II = second_ff_norm(mesh::sample(g, [&](const Eigen::VectorXd& x) { return w.value(x.norm()); }));
      // Rings next to the boundary use one-sided gradients and are only first order.
      double e = 0.0;
      for (int k = 0; k < g->size(); ++k) {
        const int i = g->ring_of(k);
        if (i >= 2 && i <= N - 2) e = std::max(e, std::abs(II[k] - oracle::radial_curvature(2, 1.0, g->radius(k))));
      }
      return e;
    };
    CHECK(err(16) / err(32) > 3.0);
  }
}

TEST_CASE("Lipschitz extensions") {
  const int M = 64;
  auto samples = [&](auto f) {
    Eigen::VectorXd g(M);
    for (int k = 0; k < M; ++k) g[k] = f(2 * std::numbers::pi * k / M);
    return g;
  };
  SUBCASE("constant data") {
    // min_b {g + m |x - b|} = g + m (R* - |x|) for constant g.
    const auto w = extend_infconv(Eigen::VectorXd::Constant(M, 0.4), 2.0, 0.5, 16);
    for (int k = 0; k < w.grid->size(); ++k) {
      CHECK(w.values[k] == doctest::Approx(0.4 + 0.5 * (2.0 - w.grid->radius(k))).epsilon(1e-3));
    }
    const auto v = extend_radial(Eigen::VectorXd::Constant(M, -0.3), 16);
    CHECK((v.values.array() + 0.3).abs().maxCoeff() < 1e-14);
  }
  SUBCASE("inf-convolution keeps the data and the slope") {
    const auto g = samples([](double t) { return 0.6 * 2.0 * std::cos(t); });
    const double L = chord_lipschitz(g, 2.0);
    CHECK(L == doctest::Approx(0.6).epsilon(1e-12));
    const auto w = extend_infconv(g, 2.0, 0.6, 32);
    for (int j = 0; j < M; ++j) CHECK(w.values[w.grid->index(32, j)] == g[j]);
    CHECK(sampled_lipschitz(w, 10000, 1) <= 0.6 + 1e-9);
    CHECK_ERROR_KIND(extend_infconv(g, 2.0, 0.5, 16), ErrorKind::invalid_argument);
    CHECK_ERROR_KIND(extend_infconv(g, 2.0, 1.0, 16), ErrorKind::non_spacelike);
  }
  SUBCASE("radial extension accepts osc < 2 only") {
    CHECK_NOTHROW(extend_radial(samples([](double t) { return 0.95 * std::cos(t); }), 8));
    CHECK_ERROR_KIND(extend_radial(samples([](double t) { return std::cos(t); }), 8), ErrorKind::non_spacelike);
    const auto v = extend_radial(samples([](double t) { return 0.4 * std::cos(t) + 0.2; }), 32);
    CHECK(sampled_lipschitz(v, 10000, 2) < 0.4 + 1e-3);
  }
}

}  // TEST_SUITE
