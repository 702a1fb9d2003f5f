#pragma once

#include <Eigen/Dense>

namespace maxsurf::lorentz {

/// A point X = (x, t) of Lorentz-Minkowski space L^{n+1}, metric sum dx_i^2 - dt^2.
struct SpacetimePoint {
  Eigen::VectorXd x;
  double t = 0.0;

  int dim() const { return static_cast<int>(x.size()); }

  /// <X, X> = |x|^2 - t^2; positive for spacelike vectors.
  double quadratic_form() const { return x.squaredNorm() - t * t; }
};

/// Boost velocity a in R^n with |a| < 1 strictly.
class BoostParam {
 public:
  explicit BoostParam(Eigen::VectorXd velocity);

  static BoostParam zero(int n) { return BoostParam(Eigen::VectorXd::Zero(n)); }

  const Eigen::VectorXd& velocity() const { return velocity_; }
  double speed() const { return speed_; }
  int dim() const { return static_cast<int>(velocity_.size()); }

 private:
  Eigen::VectorXd velocity_;
  double speed_;
};

/// L_kappa: mixes the last spatial axis with time,
/// (x', x_n, t) -> (x', (x_n + kappa t)/sqrt(1-kappa^2), (kappa x_n + t)/sqrt(1-kappa^2)).
SpacetimePoint boost_axis(double kappa, const SpacetimePoint& point);

/// Orthogonal T with T e_n = a/|a| and det T = +1: a Householder reflection
/// (through e_n - a/|a| or e_n + a/|a|, whichever is longer) with sign fixes.
/// a/|a| = e_n gives the identity.
Eigen::MatrixXd rotation_to_axis(const Eigen::VectorXd& direction);

/// L_a = T_a L_{|a|} T_a^{-1}; T_a acts on the spatial part only and T_0 = id.
SpacetimePoint boost_graph_point(const BoostParam& a, const SpacetimePoint& point);

/// L_a with the rotation precomputed, for evaluation in loops.
class LorentzBoost {
 public:
  explicit LorentzBoost(const BoostParam& a);

  SpacetimePoint apply(const SpacetimePoint& point) const;
  SpacetimePoint inverse(const SpacetimePoint& point) const;

  const BoostParam& param() const { return param_; }
  const Eigen::MatrixXd& rotation() const { return rotation_; }
  double speed() const { return param_.speed(); }
  double gamma() const { return gamma_; }

 private:
  BoostParam param_;
  Eigen::MatrixXd rotation_;
  double gamma_;
};

}  // namespace maxsurf::lorentz
