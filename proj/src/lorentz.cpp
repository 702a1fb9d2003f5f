#include "maxsurf/lorentz.hpp"

#include <cmath>
#include <string>

#include "maxsurf/error.hpp"

namespace maxsurf::lorentz {

namespace {

void require_subluminal(double kappa) {
  if (!(std::abs(kappa) < 1.0)) {
    fail(ErrorKind::invalid_boost,
         "boost speed must satisfy |kappa| < 1, got " + std::to_string(kappa));
  }
}

}  // namespace

BoostParam::BoostParam(Eigen::VectorXd velocity)
    : velocity_(std::move(velocity)), speed_(velocity_.norm()) {
  if (velocity_.size() < 1) {
    fail(ErrorKind::invalid_argument, "boost velocity must have at least one component");
  }
  if (!velocity_.allFinite()) {
    fail(ErrorKind::invalid_boost, "boost velocity has non-finite components");
  }
  require_subluminal(speed_);
}

SpacetimePoint boost_axis(double kappa, const SpacetimePoint& point) {
  require_subluminal(kappa);
  const int n = point.dim();
  if (n < 1) fail(ErrorKind::invalid_argument, "spacetime point needs a spatial part");
  const double gamma = 1.0 / std::sqrt((1.0 - kappa) * (1.0 + kappa));
  SpacetimePoint out = point;
  const double xn = point.x[n - 1];
  out.x[n - 1] = gamma * (xn + kappa * point.t);
  out.t = gamma * (kappa * xn + point.t);
  return out;
}

Eigen::MatrixXd rotation_to_axis(const Eigen::VectorXd& direction) {
  const int n = static_cast<int>(direction.size());
  const double norm = direction.norm();
  if (n < 1 || !(norm > 0.0) || !std::isfinite(norm)) {
    fail(ErrorKind::degenerate_direction, "rotation_to_axis needs a nonzero finite vector");
  }
  if (n == 1) {
    // The only orientation-preserving map of R^1 is the identity; a negative
    // direction cannot be reached and is reported as degenerate.
    if (direction[0] < 0.0) {
      fail(ErrorKind::degenerate_direction, "in one dimension only +e_1 is reachable");
    }
    return Eigen::MatrixXd::Identity(1, 1);
  }
  const Eigen::VectorXd unit = direction / norm;
  if ((unit - Eigen::VectorXd::Unit(n, n - 1)).squaredNorm() == 0.0) return Eigen::MatrixXd::Identity(n, n);

  // Reflect along e_n - u when u_n < 0 and along e_n + u otherwise, so |v|^2 >= 2
  // and the reflection is accurate for u close to either pole.
  const bool upper = unit[n - 1] >= 0.0;
  Eigen::VectorXd v = upper ? unit : Eigen::VectorXd(-unit);
  v[n - 1] += 1.0;
  const double vv = v.squaredNorm();
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n) - (2.0 / vv) * (v * v.transpose());
  if (upper) T = -T;  // the reflection sent e_n to -u
  // det is -1 for the plain reflection and (-1)^(n+1) for its negative. Flip
  // e_1 when needed; e_n is untouched because n >= 2.
  const bool negative_det = !upper || n % 2 == 0;
  if (negative_det) T.col(0) *= -1.0;
  return T;
}

LorentzBoost::LorentzBoost(const BoostParam& a)
    : param_(a),
      rotation_(a.speed() > 0.0 ? rotation_to_axis(a.velocity())
                                : Eigen::MatrixXd::Identity(a.dim(), a.dim())),
      gamma_(1.0 / std::sqrt((1.0 - a.speed()) * (1.0 + a.speed()))) {}

SpacetimePoint LorentzBoost::apply(const SpacetimePoint& point) const {
  if (point.dim() != param_.dim()) {
    fail(ErrorKind::invalid_argument, "boost and point dimensions differ");
  }
  SpacetimePoint rotated{rotation_.transpose() * point.x, point.t};
  SpacetimePoint boosted = boost_axis(param_.speed(), rotated);
  boosted.x = rotation_ * boosted.x;
  return boosted;
}

SpacetimePoint LorentzBoost::inverse(const SpacetimePoint& point) const {
  if (point.dim() != param_.dim()) {
    fail(ErrorKind::invalid_argument, "boost and point dimensions differ");
  }
  SpacetimePoint rotated{rotation_.transpose() * point.x, point.t};
  SpacetimePoint boosted = boost_axis(-param_.speed(), rotated);
  boosted.x = rotation_ * boosted.x;
  return boosted;
}

SpacetimePoint boost_graph_point(const BoostParam& a, const SpacetimePoint& point) {
  return LorentzBoost(a).apply(point);
}

}  // namespace maxsurf::lorentz
