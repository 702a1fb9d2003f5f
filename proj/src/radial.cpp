#include "maxsurf/radial.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "maxsurf/error.hpp"

namespace maxsurf::radial {

namespace {

constexpr double kRelTol = 1e-13;
constexpr unsigned kMaxDepth = 12;

template <class F>
Quadrature integrate(F&& f, double lo, double hi) {
  if (hi <= lo) return {};
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, lo, hi, kMaxDepth, kRelTol, &error);
  return {value, error};
}

double power_2n2(double t, int n) {
  // t^{2(n-1)} without pow() for the common dimensions.
  const double t2 = t * t;
  switch (n) {
    case 2: return t2;
    case 3: return t2 * t2;
    case 4: return t2 * t2 * t2;
    default: return std::pow(t2, n - 1);
  }
}

// lambda / sqrt(t^{2(n-1)} + lambda^2) for lambda > 0.
double integrand(double t, double lambda, int n) {
  return lambda / std::sqrt(power_2n2(t, n) + lambda * lambda);
}

// int_0^r of the integrand for lambda > 0: a direct piece on [0, 1] and a
// logarithmic substitution t = e^v on [1, r] so far radii stay cheap.
Quadrature w_positive(int n, double lambda, double r) {
  const double head_end = std::min(r, 1.0);
  Quadrature head = integrate([&](double t) { return integrand(t, lambda, n); }, 0.0, head_end);
  if (r <= 1.0) return head;
  Quadrature tail = integrate(
      [&](double v) {
        const double t = std::exp(v);
        return integrand(t, lambda, n) * t;
      },
      0.0, std::log(r));
  return {head.value + tail.value, head.error + tail.error};
}

void require_dim(int n) {
  if (n < 2) fail(ErrorKind::invalid_argument, "dimension must be >= 2, got " + std::to_string(n));
}

}  // namespace

RadialSolution::RadialSolution(int n, double lambda)
    : n_(n), lambda_(lambda), constant_(0.0), constant_defined_(false) {
  require_dim(n);
  if (!std::isfinite(lambda)) fail(ErrorKind::invalid_argument, "lambda must be finite");
  if (n == 2) {
    if (lambda != 0.0) {
      constant_ = m_const(lambda).value;
      constant_defined_ = true;
    }
  } else {
    constant_ = M_const(lambda, n).value;
    constant_defined_ = true;
  }
}

Quadrature RadialSolution::value_with_error(double r) const {
  if (!(r >= 0.0)) fail(ErrorKind::domain, "w_value needs r >= 0, got " + std::to_string(r));
  if (lambda_ == 0.0 || r == 0.0) return {};
  Quadrature q = w_positive(n_, std::abs(lambda_), r);
  if (lambda_ < 0.0) q.value = -q.value;
  return q;
}

double RadialSolution::value(double r) const { return value_with_error(r).value; }

double RadialSolution::slope(double r) const {
  if (lambda_ == 0.0) return 0.0;
  if (!(r > 0.0)) fail(ErrorKind::domain, "w_slope needs r > 0 when lambda != 0");
  return lambda_ / std::sqrt(power_2n2(r, n_) + lambda_ * lambda_);
}

double RadialSolution::flux_density(double r) const {
  if (lambda_ == 0.0) return 0.0;
  if (!(r > 0.0)) fail(ErrorKind::domain, "flux density needs r > 0");
  return lambda_ * std::pow(r, 1 - n_);
}

double RadialSolution::asymptotic_constant() const {
  if (!constant_defined_) {
    fail(ErrorKind::undefined_constant, "m(lambda) is undefined for lambda = 0");
  }
  return constant_;
}

Quadrature m_const(double lambda) {
  if (lambda == 0.0) fail(ErrorKind::undefined_constant, "m(lambda) is undefined for lambda = 0");
  if (!std::isfinite(lambda)) fail(ErrorKind::invalid_argument, "lambda must be finite");
  const double l = std::abs(lambda);
  Quadrature head = integrate([&](double t) { return l / std::sqrt(t * t + l * l); }, 0.0, 1.0);
  // int_1^inf (f(t) - l/t) dt under t = 1/s, written without cancellation.
  Quadrature tail = integrate(
      [&](double s) {
        const double q = std::sqrt(1.0 + l * l * s * s);
        return -l * l * l * s / (q * (1.0 + q));
      },
      0.0, 1.0);
  const double sign = lambda < 0.0 ? -1.0 : 1.0;
  return {sign * (head.value + tail.value), head.error + tail.error};
}

Quadrature M_const(double lambda, int n) {
  if (n < 3) fail(ErrorKind::invalid_argument, "M(lambda, n) needs n >= 3");
  if (!std::isfinite(lambda)) fail(ErrorKind::invalid_argument, "lambda must be finite");
  if (lambda == 0.0) return {};
  const double l = std::abs(lambda);
  Quadrature head = integrate([&](double t) { return integrand(t, l, n); }, 0.0, 1.0);
  // int_1^inf f(t) dt with t = 1/s: l s^{n-3} / sqrt(1 + l^2 s^{2(n-1)}).
  Quadrature tail = integrate(
      [&](double s) {
        const double sn3 = n == 3 ? 1.0 : std::pow(s, n - 3);
        return l * sn3 / std::sqrt(1.0 + l * l * power_2n2(s, n));
      },
      0.0, 1.0);
  const double sign = lambda < 0.0 ? -1.0 : 1.0;
  return {sign * (head.value + tail.value), head.error + tail.error};
}

BoostedRadialSolution::BoostedRadialSolution(RadialSolution base, const lorentz::BoostParam& a)
    : base_(std::move(base)), boost_(a) {
  if (a.dim() != base_.dim()) {
    fail(ErrorKind::invalid_argument, "boost dimension does not match the radial solution");
  }
}

BoostedRadialSolution::Root BoostedRadialSolution::solve_preimage(const Eigen::VectorXd& x) const {
  const int n = dim();
  if (x.size() != n) fail(ErrorKind::invalid_argument, "point dimension mismatch");
  Eigen::VectorXd y = boost_.rotation().transpose() * x;
  const double eta = boost_.speed();
  const double target = y[n - 1] / boost_.gamma();
  const double transverse2 = y.head(n - 1).squaredNorm();

  auto radius_of = [&](double xi) { return std::sqrt(transverse2 + xi * xi); };
  auto residual = [&](double xi) { return xi + eta * base_.value(radius_of(xi)) - target; };

  if (eta == 0.0 || base_.lambda() == 0.0) {
    y[n - 1] = target;
    return {y, radius_of(target)};
  }

  // xi -> xi + eta w(|x~|) is strictly increasing since |w'| < 1, and
  // |w(r)| <= r bounds the root: |xi*| <= (|target| + eta |y'|) / (1 - eta).
  const double transverse = std::sqrt(transverse2);
  const double bound = (std::abs(target) + eta * transverse) / (1.0 - eta) + 1e-300;
  double lo = -bound;
  double hi = bound;
  if (base_.lambda() > 0.0) {
    hi = std::min(hi, target);
  } else {
    lo = std::max(lo, target);
  }
  double f_lo = residual(lo);
  double f_hi = residual(hi);
  if (f_lo > 0.0 || f_hi < 0.0) {
    fail(ErrorKind::root_find, "boosted preimage root is not bracketed");
  }

  // Newton inside the bracket, falling back to bisection whenever a step
  // leaves it or fails to halve |f|; the bracket shrinks every iteration.
  const double scale = std::max({1.0, std::abs(target), transverse});
  const double tol = 1e-12 * scale;
  // First guess: one fixed-point step from the unboosted height.
  double xi = std::clamp(target - eta * base_.value(radius_of(target)), lo, hi);
  double f = residual(xi);
  double f_prev = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 200 && std::abs(f) > tol; ++iter) {
    (f < 0.0 ? lo : hi) = xi;
    const double r = radius_of(xi);
    const double df = r > 0.0 ? 1.0 + eta * base_.slope(r) * xi / r : 1.0;
    double next = xi - f / df;
    const bool inside = next > lo && next < hi;
    if (!inside || (hi - lo > 1e-8 && std::abs(f) > 0.5 * std::abs(f_prev))) next = 0.5 * (lo + hi);
    f_prev = f;
    xi = next;
    f = residual(xi);
  }
  if (!(std::abs(f) <= tol)) {
    fail(ErrorKind::root_find, "boosted preimage solve did not converge (|f| = " +
                                   std::to_string(std::abs(f)) + ")");
  }
  y[n - 1] = xi;
  return {y, radius_of(xi)};
}

double BoostedRadialSolution::value(const Eigen::VectorXd& x) const {
  const Root root = solve_preimage(x);
  const int n = dim();
  const double w = base_.value(root.radius);
  return boost_.gamma() * (boost_.speed() * root.rotated[n - 1] + w);
}

BoostedRadialSolution::Sample BoostedRadialSolution::evaluate(const Eigen::VectorXd& x) const {
  const Root root = solve_preimage(x);
  const int n = dim();
  const double eta = boost_.speed();
  const double gamma = boost_.gamma();
  Sample out;
  out.value = gamma * (eta * root.rotated[n - 1] + base_.value(root.radius));

  Eigen::VectorXd unboosted = Eigen::VectorXd::Zero(n);
  if (base_.lambda() != 0.0) {
    if (!(root.radius > 0.0)) {
      fail(ErrorKind::domain, "gradient of w_lambda^a is undefined at the vertex");
    }
    unboosted = base_.slope(root.radius) / root.radius * root.rotated;
  }
  // The covector (Dw, -1) transforms like the vector (Dw, 1) under a Lorentz
  // map, so Du = spatial(L(Dw, 1)) / time(L(Dw, 1)).
  const double pn = unboosted[n - 1];
  const double qt = gamma * (eta * pn + 1.0);
  Eigen::VectorXd q = unboosted;
  q[n - 1] = gamma * (pn + eta);
  out.gradient = boost_.rotation() * (q / qt);
  return out;
}

Eigen::VectorXd BoostedRadialSolution::preimage(const Eigen::VectorXd& x) const {
  return boost_.rotation() * solve_preimage(x).rotated;
}

}  // namespace maxsurf::radial
