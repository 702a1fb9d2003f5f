#include "maxsurf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "maxsurf/error.hpp"

namespace maxsurf::oracle {

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels < 2 || panels % 2 != 0) fail(ErrorKind::invalid_argument, "Simpson needs an even panel count");
  const double h = (b - a) / panels;
  double odd = 0.0;
  double even = 0.0;
  for (int i = 1; i < panels; ++i) (i % 2 ? odd : even) += f(a + i * h);
  return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

double richardson_simpson(const std::function<double(double)>& f, double a, double b, int k0,
                          int levels) {
  std::vector<double> T;
  for (int k = 0; k < levels; ++k) T.push_back(simpson(f, a, b, 1 << (k0 + k)));
  // Simpson's error expands in h^4, h^6, h^8, ...
  for (int j = 1; j < levels; ++j) {
    const double factor = std::pow(2.0, 2 * j + 2);
    for (int k = levels - 1; k >= j; --k) T[k] = (factor * T[k] - T[k - 1]) / (factor - 1.0);
  }
  return T.back();
}

double w2_closed(double lambda, double r) {
  if (lambda == 0.0) return 0.0;
  return lambda * std::asinh(r / std::abs(lambda));
}

double m_closed(double lambda) {
  const double l = std::abs(lambda);
  return (lambda < 0 ? -1.0 : 1.0) * l * std::log(2.0 / l);
}

double M13_closed() {
  const double g = std::tgamma(0.25);
  return g * g / (4.0 * std::sqrt(std::numbers::pi));
}

double M_reference(double lambda, int n) {
  if (lambda == 0.0) return 0.0;
  const double l = std::abs(lambda);
  auto head = [&](double t) { return l / std::sqrt(std::pow(t, 2 * (n - 1)) + l * l); };
  auto tail = [&](double s) {
    return l * std::pow(s, n - 3) / std::sqrt(1.0 + l * l * std::pow(s, 2 * (n - 1)));
  };
  const double v = richardson_simpson(head, 0.0, 1.0) + richardson_simpson(tail, 0.0, 1.0);
  return lambda < 0 ? -v : v;
}

double w_reference(int n, double lambda, double r) {
  if (lambda == 0.0 || r == 0.0) return 0.0;
  const double l = std::abs(lambda);
  auto f = [&](double t) { return l / std::sqrt(std::pow(t, 2 * (n - 1)) + l * l); };
  const double v = richardson_simpson(f, 0.0, r, 10, 4);
  return lambda < 0 ? -v : v;
}

double radial_curvature(int n, double lambda, double r) {
  return std::sqrt(static_cast<double>(n * (n - 1))) * std::abs(lambda) / std::pow(r, n);
}

double pairwise_lipschitz(const std::vector<Eigen::VectorXd>& x, const std::vector<double>& f) {
  double worst = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    for (size_t j = i + 1; j < x.size(); ++j) {
      const double dist = (x[i] - x[j]).norm();
      if (dist > 0.0) worst = std::max(worst, std::abs(f[i] - f[j]) / dist);
    }
  }
  return worst;
}

}  // namespace maxsurf::oracle
