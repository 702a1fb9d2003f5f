#pragma once

// Reference values computed independently of the production code paths:
// composite Simpson sums with Richardson extrapolation, closed forms, and
// brute-force pairwise checks. Used by the tests and the verify suites.

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace maxsurf::oracle {

/// Composite Simpson with `panels` (even) subintervals.
double simpson(const std::function<double(double)>& f, double a, double b, int panels);

/// Simpson at 2^k panels for k = k0..k0+levels-1, then Richardson (h^4, h^6, ...).
double richardson_simpson(const std::function<double(double)>& f, double a, double b, int k0 = 8,
                          int levels = 4);

/// w_lambda(r) for n = 2: lambda asinh(r / lambda).
double w2_closed(double lambda, double r);

/// m(lambda) = lambda ln(2 / lambda) for lambda > 0, odd in lambda.
double m_closed(double lambda);

/// M(1, 3) = Gamma(1/4)^2 / (4 sqrt(pi)).
double M13_closed();

/// M(lambda, n) by Richardson-refined Simpson: [0, 1] directly and the tail
/// through t = 1/s.
double M_reference(double lambda, int n);

/// w_lambda(r) by Richardson-refined Simpson on [0, r].
double w_reference(int n, double lambda, double r);

/// |II| of w_lambda at radius r: sqrt(n (n-1)) |lambda| / r^n.
double radial_curvature(int n, double lambda, double r);

/// Largest |f_i - f_j| / |x_i - x_j| over all pairs.
double pairwise_lipschitz(const std::vector<Eigen::VectorXd>& x, const std::vector<double>& f);

}  // namespace maxsurf::oracle
