#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "maxsurf/oracle.hpp"
#include "maxsurf/radial.hpp"
#include "support.hpp"

using namespace maxsurf;
using namespace maxsurf::radial;
using test_support::axis;
using test_support::vec;

namespace {

// The defining split integral of m(lambda), tail mapped to [0, 1] by t = 1/s.
double m_split_integral(double l) {
  auto head = [l](double t) { return l / std::sqrt(t * t + l * l); };
  auto tail = [l](double s) { return s == 0.0 ? 0.0 : (l / std::sqrt(1.0 + l * l * s * s) - l) / s; };
  return oracle::richardson_simpson(head, 0.0, 1.0) + oracle::richardson_simpson(tail, 0.0, 1.0);
}

}  // namespace

TEST_SUITE("radial") {

TEST_CASE("w_value") {
  CHECK(RadialSolution(2, 0.0).value(3.0) == 0.0);
  CHECK(RadialSolution(3, 1.5).value(0.0) == 0.0);
  // lambda asinh(r / lambda) for n = 2.
  CHECK(RadialSolution(2, 1.0).value(1.0) == doctest::Approx(0.881373587019543).epsilon(1e-14));
  CHECK_ERROR_KIND(RadialSolution(2, 1.0).value(-0.1), ErrorKind::domain);

  for (int n : {2, 3, 4}) {
    for (double l : {0.25, 1.0, 3.0}) {
      const RadialSolution w(n, l);
      const RadialSolution wm(n, -l);
      double prev = 0.0;
      for (double r : {0.01, 0.3, 1.0, 2.5, 10.0, 40.0}) {
        const double v = w.value(r);
        CHECK(std::abs(v - oracle::w_reference(n, l, r)) < 1e-10);
        CHECK(wm.value(r) == -v);
        CHECK(v > prev);
        prev = v;
      }
    }
  }
  CHECK(std::abs(RadialSolution(2, 0.7).value(5.0) - oracle::w2_closed(0.7, 5.0)) < 1e-13);
}

TEST_CASE("w_slope and flux") {
  CHECK(RadialSolution(3, 0.0).slope(2.0) == 0.0);
  CHECK(RadialSolution(2, 1.0).slope(1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_ERROR_KIND(RadialSolution(2, 1.0).slope(0.0), ErrorKind::domain);
  for (int n : {2, 3, 5}) {
    const RadialSolution w(n, 2.0);
    for (double r : {0.1, 1.0, 7.0}) {
      const double s = w.slope(r);
      CHECK(std::abs(s) < 1.0);
      CHECK(s == doctest::Approx(2.0 / std::sqrt(std::pow(r, 2 * (n - 1)) + 4.0)).epsilon(1e-14));
      // s / sqrt(1 - s^2) loses digits as s -> 1; only check it where s is moderate.
      if (r >= 1.0) CHECK(s / std::sqrt(1 - s * s) == doctest::Approx(2.0 * std::pow(r, 1 - n)).epsilon(1e-12));
      CHECK(w.flux_density(r) == doctest::Approx(2.0 * std::pow(r, 1 - n)).epsilon(1e-14));
    }
  }
}

TEST_CASE("m(lambda)") {
  // The closed form lambda ln(2 / lambda) against the defining integral.
  for (double l : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    CHECK(std::abs(oracle::m_closed(l) - m_split_integral(l)) < 1e-11);
    CHECK(std::abs(m_const(l).value - oracle::m_closed(l)) < 1e-10);
    CHECK(m_const(-l).value == -m_const(l).value);
  }
  CHECK(std::abs(m_const(1.0).value - std::log(2.0)) < 1e-10);
  CHECK(std::abs(m_const(2.0).value) < 1e-10);
  CHECK(m_const(1.0).error < 1e-10);
  CHECK_ERROR_KIND(m_const(0.0), ErrorKind::undefined_constant);
  CHECK_ERROR_KIND(RadialSolution(2, 0.0).asymptotic_constant(), ErrorKind::undefined_constant);
}

TEST_CASE("M(lambda, n)") {
  CHECK(M_const(0.0, 3).value == 0.0);
  // Gamma(1/4)^2 / (4 sqrt(pi)) = 1.8540746773013719...
  CHECK(std::abs(M_const(1.0, 3).value - 1.8540746773013719) < 1e-12);
  CHECK(std::abs(M_const(1.0, 3).value - oracle::M13_closed()) < 1e-12);
  CHECK(std::abs(M_const(4.0, 3).value - 2.0 * M_const(1.0, 3).value) < 1e-10);
  for (int n : {3, 4, 5}) {
    const double M1 = M_const(1.0, n).value;
    CHECK(std::abs(M1 - oracle::M_reference(1.0, n)) < 1e-10);
    for (double l : {0.5, -2.0, 4.0}) {
      const double expect = (l < 0 ? -1.0 : 1.0) * std::pow(std::abs(l), 1.0 / (n - 1)) * M1;
      CHECK(std::abs(M_const(l, n).value - expect) <= 1e-9 * std::abs(expect));
    }
  }
  CHECK_ERROR_KIND(M_const(1.0, 2), ErrorKind::invalid_argument);
}

TEST_CASE("far-field expansions of w_lambda") {
  SUBCASE("n = 2: (w - m - lambda ln r) r^2 stays bounded") {
    const RadialSolution w(2, 1.0);
    const double m = w.asymptotic_constant();
    for (double r = 10.0; r <= 1e4; r *= 3.0) {
      const double scaled = (w.value(r) - m - std::log(r)) * r * r;
      CHECK(std::abs(scaled) < 0.3);  // tends to 1/4
    }
  }
  SUBCASE("n = 3, 4: error against M - lambda r^{2-n}/(n-2) is O(r^{4-3n})") {
    for (int n : {3, 4}) {
      const RadialSolution w(n, 1.0);
      const double M = w.asymptotic_constant();
      for (double r = 2.0; r <= 20.0; r *= 1.5) {
        const double err = w.value(r) - (M - std::pow(r, 2 - n) / (n - 2));
        CHECK(std::abs(err) * std::pow(r, 3 * n - 4) < 1.0);
      }
    }
  }
}

TEST_CASE("boosted_eval basics") {
  const BoostedRadialSolution plain(RadialSolution(3, 1.3), lorentz::BoostParam::zero(3));
  const Eigen::VectorXd x = vec({0.4, -1.0, 2.0});
  CHECK(plain.value(x) == doctest::Approx(RadialSolution(3, 1.3).value(x.norm())).epsilon(1e-14));

  const BoostedRadialSolution w(RadialSolution(2, 1.0), lorentz::BoostParam(vec({0.0, 0.5})));
  CHECK(w.value(Eigen::VectorXd::Zero(2)) == 0.0);
  CHECK_ERROR_KIND(w.evaluate(Eigen::VectorXd::Zero(2)), ErrorKind::domain);
}

TEST_CASE("boosted graph points lie on the boosted radial graph") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int n : {2, 3}) {
    for (double eta : {0.3, 0.9, 0.99}) {
      Eigen::VectorXd a(n);
      for (int i = 0; i < n; ++i) a[i] = normal(rng);
      a *= eta / a.norm();
      const BoostedRadialSolution w(RadialSolution(n, 1.7), lorentz::BoostParam(a));
      for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = 3.0 * normal(rng);
        const Eigen::VectorXd xt = w.preimage(x);
        const auto P = w.boost().apply({xt, w.base().value(xt.norm())});
        CHECK((P.x - x).norm() < 1e-9 * (1 + x.norm()));
        CHECK(std::abs(P.t - w.value(x)) < 1e-9 * (1 + x.norm()));
      }
    }
  }
}

TEST_CASE("far field of the n = 2 boost") {
  // u - a.x - sqrt(1-|a|^2) lambda ln sqrt(|x|^2 - (a.x)^2) -> sqrt(1-|a|^2) m(lambda).
  const Eigen::VectorXd a = vec({0.0, 0.5});
  const BoostedRadialSolution w(RadialSolution(2, 1.0), lorentz::BoostParam(a));
  const double s = std::sqrt(0.75);
  const double limit = s * std::log(2.0);
  double prev = 1e300;
  for (double r : {1e2, 1e3, 1e4}) {
    double worst = 0.0;
    for (int k = 0; k < 16; ++k) {
      const double t = 2 * std::numbers::pi * (k + 0.5) / 16;
      const Eigen::VectorXd x = r * vec({std::cos(t), std::sin(t)});
      const double q = x.squaredNorm() - std::pow(a.dot(x), 2);
      worst = std::max(worst, std::abs(w.value(x) - a.dot(x) - s * 0.5 * std::log(q) - limit));
    }
    CHECK(worst < 5.0 * std::log(r) / r);
    CHECK(worst < prev);
    prev = worst;
  }
}

TEST_CASE("boosted gradients are spacelike and match differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 2;
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = U(rng);
    a *= 0.9 * std::abs(U(rng)) / a.norm();
    const double lambda = 4.0 * U(rng);
    const BoostedRadialSolution w(RadialSolution(n, lambda), lorentz::BoostParam(a));
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = U(rng);
    x *= (0.1 + 5.0 * std::abs(U(rng))) / x.norm();
    const auto smp = w.evaluate(x);
    Eigen::VectorXd fd(n);
    const double h = 1e-5;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[i] = h;
      fd[i] = (w.value(x + e) - w.value(x - e)) / (2 * h);
    }
    CHECK(fd.norm() < 1.0 - 1e-6);
    CHECK((fd - smp.gradient).norm() < 1e-6);
  }
}

TEST_CASE("boosted solutions solve the maximal surface equation") {
  // (1 - |Du|^2) Lap u + Du' D^2u Du by 5-point differences; second order in h.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const BoostedRadialSolution w(RadialSolution(2, 1.0), lorentz::BoostParam(vec({0.2, 0.5})));
  auto op = [&](const Eigen::VectorXd& x, double h) {
    auto u = [&](double dx, double dy) { return w.value(x + vec({dx, dy})); };
    const double u0 = u(0, 0);
    const double ux = (u(h, 0) - u(-h, 0)) / (2 * h);
    const double uy = (u(0, h) - u(0, -h)) / (2 * h);
    const double uxx = (u(h, 0) - 2 * u0 + u(-h, 0)) / (h * h);
    const double uyy = (u(0, h) - 2 * u0 + u(0, -h)) / (h * h);
    const double uxy = (u(h, h) - u(h, -h) - u(-h, h) + u(-h, -h)) / (4 * h * h);
    return (1 - ux * ux - uy * uy) * (uxx + uyy) + ux * ux * uxx + 2 * ux * uy * uxy + uy * uy * uyy;
  };
  double coarse = 0.0;
  double fine = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double r = 1.0 + 4.0 * U(rng);
    const double t = 2 * std::numbers::pi * U(rng);
    const Eigen::VectorXd x = r * vec({std::cos(t), std::sin(t)});
    coarse = std::max(coarse, std::abs(op(x, 0.04)));
    fine = std::max(fine, std::abs(op(x, 0.02)));
  }
  CHECK(fine < coarse / 3.5);
  CHECK(fine < 1e-3);
}

}  // TEST_SUITE
