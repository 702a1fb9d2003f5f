#pragma once

#include <Eigen/Dense>

#include "maxsurf/lorentz.hpp"

namespace maxsurf::radial {

struct Quadrature {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

/// The rotationally symmetric maximal graph
///   w_lambda(x) = int_0^{|x|} lambda / sqrt(t^{2(n-1)} + lambda^2) dt
/// on R^n \ {0}. lambda is the flux parameter: w'/sqrt(1 - w'^2) = lambda r^{1-n}.
///
/// The asymptotic constant (m(lambda) for n = 2, M(lambda, n) for n >= 3) is
/// computed once at construction; instances are immutable afterwards.
class RadialSolution {
 public:
  RadialSolution(int n, double lambda);

  int dim() const { return n_; }
  double lambda() const { return lambda_; }

  /// w_lambda(r) by adaptive quadrature; r >= 0.
  double value(double r) const;
  Quadrature value_with_error(double r) const;

  /// dw/dr = lambda / sqrt(r^{2(n-1)} + lambda^2), in (-1, 1) for r > 0.
  double slope(double r) const;

  /// Normalized radial flux w'/sqrt(1 - w'^2) = lambda r^{1-n}.
  double flux_density(double r) const;

  /// m(lambda) for n = 2 (requires lambda != 0), M(lambda, n) for n >= 3.
  double asymptotic_constant() const;

 private:
  int n_;
  double lambda_;
  double constant_;
  bool constant_defined_;
};

/// m(lambda) = int_0^1 lambda/sqrt(t^2+lambda^2) dt
///           + int_1^inf (lambda/sqrt(t^2+lambda^2) - lambda/t) dt,
/// the constant in w_lambda(r) = m(lambda) + lambda ln r + O(r^-2) for n = 2.
Quadrature m_const(double lambda);

/// M(lambda, n) = int_0^inf lambda / sqrt(t^{2(n-1)} + lambda^2) dt, n >= 3.
Quadrature M_const(double lambda, int n);

/// Graph of w_lambda boosted by L_a, written again as a graph u = w_lambda^a(x).
class BoostedRadialSolution {
 public:
  BoostedRadialSolution(RadialSolution base, const lorentz::BoostParam& a);

  struct Sample {
    double value = 0.0;
    Eigen::VectorXd gradient;
  };

  const RadialSolution& base() const { return base_; }
  const lorentz::LorentzBoost& boost() const { return boost_; }
  int dim() const { return base_.dim(); }

  /// w_lambda^a(x); w_lambda^a(0) = 0.
  double value(const Eigen::VectorXd& x) const;

  /// Value and gradient. The gradient is undefined at x = 0 when lambda != 0.
  Sample evaluate(const Eigen::VectorXd& x) const;

  /// The unboosted point x~ with L_a(x~, w_lambda(|x~|)) = (x, w_lambda^a(x)).
  Eigen::VectorXd preimage(const Eigen::VectorXd& x) const;

 private:
  struct Root {
    Eigen::VectorXd rotated;  // x~ in the frame where a is along e_n
    double radius;
  };
  Root solve_preimage(const Eigen::VectorXd& x) const;

  RadialSolution base_;
  lorentz::LorentzBoost boost_;
};

}  // namespace maxsurf::radial
