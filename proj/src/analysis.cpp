#include "maxsurf/analysis.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "maxsurf/error.hpp"

namespace maxsurf::analysis {

using mesh::AnnulusGrid;
using mesh::ScalarField;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kCircleSamples = 256;    // exact n = 2 flux and gradient means
constexpr int kFitRadii = 32;
constexpr int kFitAngles = 64;
constexpr int kFitLatitudes = 16;
constexpr int kFitAzimuths = 16;

double sphere_area(int n) {
  // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

void finish(ResidueReport& rep) {
  const auto [lo, hi] = std::minmax_element(rep.values.begin(), rep.values.end());
  rep.spread = rep.values.empty() ? 0.0 : *hi - *lo;
}

void require_increasing(const std::vector<double>& radii) {
  if (radii.empty()) fail(ErrorKind::invalid_argument, "need at least one radius");
  for (size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !std::isfinite(radii[i])) fail(ErrorKind::domain, "radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) {
      fail(ErrorKind::invalid_argument, "radii must be strictly increasing");
    }
  }
}

// Nodal gradient components as two fields, for interpolation.
struct GradientFields {
  ScalarField px;
  ScalarField py;

  explicit GradientFields(const ScalarField& f) : px(f.grid), py(f.grid) {
    const auto p = mesh::gradient(f);
    for (int k = 0; k < f.grid->size(); ++k) {
      px.values[k] = p[k].x();
      py.values[k] = p[k].y();
    }
  }

  Eigen::Vector2d at(const Eigen::VectorXd& x) const {
    return {mesh::interp(px, x), mesh::interp(py, x)};
  }
};

// Circle (sphere) radius r must sit at least one cell inside the ring range.
void require_clearance(const AnnulusGrid& g, double r) {
  for (int j = 0; j < g.spokes(); ++j) {
    const double inner = g.radius(g.index(1, j));
    const double outer = g.radius(g.index(g.N_r() - 1, j));
    if (!(r >= inner && r <= outer)) {
      fail(ErrorKind::domain, "radius " + std::to_string(r) +
                                  " needs one cell of clearance inside the annulus");
    }
  }
}

Eigen::VectorXd node_point(const AnnulusGrid& g, double r, int j) {
  const double ang = g.angle(j);
  Eigen::VectorXd x(g.dim());
  if (g.dim() == 2) {
    x << r * std::cos(ang), r * std::sin(ang);
  } else {
    const double s = (j == 0 || j == g.spokes() - 1) ? 0.0 : std::sin(ang);
    x << r * s, 0.0, r * std::cos(ang);
  }
  return x;
}

// Trapezoid weights in angle along the grid's spokes; n = 3 includes sin(phi).
std::vector<double> angular_weights(const AnnulusGrid& g) {
  const int S = g.spokes();
  std::vector<double> w(static_cast<size_t>(S));
  if (g.dim() == 2) {
    std::fill(w.begin(), w.end(), 2.0 * kPi / S);
  } else {
    const double h = kPi / g.N_ang();
    for (int j = 0; j < S; ++j) {
      const double end = (j == 0 || j == S - 1) ? 0.5 : 1.0;
      const double s = (j == 0 || j == S - 1) ? 0.0 : std::sin(g.angle(j));
      w[j] = 2.0 * kPi * h * end * s;
    }
  }
  return w;
}

double flux_density(const Eigen::VectorXd& p, const Eigen::VectorXd& x) {
  const double p2 = p.squaredNorm();
  if (!(p2 < 1.0)) fail(ErrorKind::non_spacelike, "|Du| >= 1 on a flux contour");
  return p.dot(x) / (x.norm() * std::sqrt(1.0 - p2));
}

// Integral over the unit sphere S^{n-1} of f(R x) for f axisymmetric about
// R e_n, using the polar angle only: |S^{n-2}| int_0^pi f sin^{n-2}.
double axisymmetric_sphere_integral(int n, const Eigen::MatrixXd& R,
                                    const std::function<double(const Eigen::VectorXd&)>& f) {
  auto profile = [&](double phi) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    y[0] = std::sin(phi);
    y[n - 1] = std::cos(phi);
    return f(R * y) * std::pow(std::sin(phi), n - 2);
  };
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      profile, 0.0, kPi, 10, 1e-13, &err);
  return sphere_area(n - 1) * val;
}

Eigen::MatrixXd frame_of(const radial::BoostedRadialSolution& exact) {
  return exact.boost().rotation();
}

std::vector<double> geometric_radii(double lo, double hi, int count) {
  std::vector<double> r(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) r[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return r;
}

// Antipodally symmetric directions on the unit circle / sphere.
std::vector<Eigen::VectorXd> fit_directions(int n) {
  std::vector<Eigen::VectorXd> dirs;
  if (n == 2) {
    for (int k = 0; k < kFitAngles; ++k) {
      const double t = 2.0 * kPi * (k + 0.5) / kFitAngles;
      Eigen::VectorXd x(2);
      x << std::cos(t), std::sin(t);
      dirs.push_back(x);
    }
  } else if (n == 3) {
    for (int j = 0; j < kFitLatitudes; ++j) {
      const double phi = kPi * (j + 0.5) / kFitLatitudes;
      for (int k = 0; k < kFitAzimuths; ++k) {
        const double psi = 2.0 * kPi * k / kFitAzimuths;
        Eigen::VectorXd x(3);
        x << std::sin(phi) * std::cos(psi), std::sin(phi) * std::sin(psi), std::cos(phi);
        dirs.push_back(x);
      }
    }
  } else {
    fail(ErrorKind::invalid_argument, "exact asymptotic fits support n = 2 and n = 3");
  }
  return dirs;
}

std::vector<double> direction_weights(int n, const std::vector<Eigen::VectorXd>& dirs) {
  std::vector<double> w;
  for (const auto& x : dirs) w.push_back(n == 3 ? std::sqrt(1.0 - x[2] * x[2]) : 1.0);
  return w;
}

}  // namespace

double residue_normalization(int n) {
  if (n < 2) fail(ErrorKind::invalid_argument, "residue needs n >= 2");
  if (n == 2) return 1.0 / (2.0 * kPi);
  return 1.0 / ((n - 2) * sphere_area(n));
}

double ResidueReport::mean() const {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / values.size();
}

ResidueReport residue(const ScalarField& field, const std::vector<double>& radii) {
  require_increasing(radii);
  const AnnulusGrid& g = *field.grid;
  const int n = g.dim();
  const GradientFields grad(field);
  const auto w = angular_weights(g);
  ResidueReport rep;
  for (double r : radii) {
    require_clearance(g, r);
    double total = 0.0;
    for (int j = 0; j < g.spokes(); ++j) {
      if (w[j] == 0.0) continue;
      const Eigen::VectorXd x = node_point(g, r, j);
      const Eigen::Vector2d p2 = grad.at(x);
      Eigen::VectorXd p(n);
      if (n == 2) {
        p = p2;
      } else {
        p << p2.x(), 0.0, p2.y();
      }
      total += w[j] * flux_density(p, x);
    }
    const double raw = total * std::pow(r, n - 1);
    rep.radii.push_back(r);
    rep.raw_flux.push_back(raw);
    rep.values.push_back(raw * residue_normalization(n));
  }
  finish(rep);
  return rep;
}

ResidueReport residue(const radial::BoostedRadialSolution& exact, const std::vector<double>& radii) {
  require_increasing(radii);
  const int n = exact.dim();
  ResidueReport rep;
  for (double r : radii) {
    auto density = [&](const Eigen::VectorXd& unit) {
      const Eigen::VectorXd x = r * unit;
      return flux_density(exact.evaluate(x).gradient, x);
    };
    double total = 0.0;
    if (n == 2) {
      // Periodic and smooth: the trapezoid rule converges spectrally.
      for (int k = 0; k < kCircleSamples; ++k) {
        const double t = 2.0 * kPi * k / kCircleSamples;
        Eigen::VectorXd e(2);
        e << std::cos(t), std::sin(t);
        total += density(e);
      }
      total *= 2.0 * kPi / kCircleSamples;
    } else {
      total = axisymmetric_sphere_integral(n, frame_of(exact), density);
    }
    const double raw = total * std::pow(r, n - 1);
    rep.radii.push_back(r);
    rep.raw_flux.push_back(raw);
    rep.values.push_back(raw * residue_normalization(n));
  }
  finish(rep);
  return rep;
}

double asymptotic_basis(int n, const Eigen::VectorXd& a, const Eigen::VectorXd& x) {
  const double ax = a.dot(x);
  const double q = x.squaredNorm() - ax * ax;
  if (!(q > 0.0)) fail(ErrorKind::domain, "asymptotic basis is singular at the origin");
  if (n == 2) return 0.5 * std::log(q);
  return -std::pow(q, 0.5 * (2 - n));
}

AsymptoticFit fit_samples(int n, const Eigen::VectorXd& a, const std::vector<Eigen::VectorXd>& points,
                          const std::vector<double>& values) {
  if (!(a.norm() < 1.0)) fail(ErrorKind::fit_failure, "estimated |a| >= 1");
  if (points.size() != values.size() || points.size() < 3) {
    fail(ErrorKind::window_too_narrow, "too few samples in the fit window");
  }
  const int m = static_cast<int>(points.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = asymptotic_basis(n, a, points[i]);
    b[i] = values[i] - a.dot(points[i]);
  }
  // Column scaling before judging the conditioning.
  Eigen::Vector2d scale(A.col(0).norm(), A.col(1).norm());
  Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv[1] > 1e-10 * sv[0])) {
    fail(ErrorKind::window_too_narrow, "fit basis is numerically degenerate on this window");
  }
  const Eigen::Vector2d coef = svd.solve(b).cwiseQuotient(scale);
  AsymptoticFit fit;
  fit.a = a;
  fit.c = coef[0];
  fit.d = coef[1];
  fit.rms_residual = std::sqrt((A * coef - b).squaredNorm() / m);
  fit.samples = m;
  return fit;
}

AsymptoticFit fit_asymptotics(const ScalarField& field, double lo, double hi) {
  const AnnulusGrid& g = *field.grid;
  const int n = g.dim();
  if (!(lo > 0.0 && hi > lo)) fail(ErrorKind::window_too_narrow, "fit window must satisfy 0 < lo < hi");
  if (lo < 10.0 * g.max_hole_radius()) {
    fail(ErrorKind::invalid_argument, "fit window must start at >= 10 hole radii");
  }
  require_clearance(g, hi);

  // a: mean gradient over the circle (sphere) at the window's outer radius.
  const GradientFields grad(field);
  const auto w = angular_weights(g);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  double wsum = 0.0;
  for (int j = 0; j < g.spokes(); ++j) {
    mean += w[j] * grad.at(node_point(g, hi, j));
    wsum += w[j];
  }
  mean /= wsum;
  Eigen::VectorXd a(n);
  if (n == 2) {
    a = mean;
  } else {
    a << 0.0, 0.0, mean.y();  // the rho component averages out over azimuth
  }

  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  for (int k = 0; k < g.size(); ++k) {
    const double r = g.radius(k);
    if (r >= lo && r <= hi) {
      pts.push_back(g.point(k));
      vals.push_back(field.values[k]);
    }
  }
  AsymptoticFit fit = fit_samples(n, a, pts, vals);
  fit.window_lo = lo;
  fit.window_hi = hi;
  return fit;
}

AsymptoticFit fit_asymptotics(const radial::BoostedRadialSolution& exact, double lo, double hi) {
  const int n = exact.dim();
  if (!(lo > 0.0 && hi > lo)) fail(ErrorKind::window_too_narrow, "fit window must satisfy 0 < lo < hi");
  const auto dirs = fit_directions(n);
  const auto wts = direction_weights(n, dirs);

  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  double wsum = 0.0;
  for (size_t i = 0; i < dirs.size(); ++i) {
    a += wts[i] * exact.evaluate(hi * dirs[i]).gradient;
    wsum += wts[i];
  }
  a /= wsum;

  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  for (double r : geometric_radii(lo, hi, kFitRadii)) {
    for (const auto& e : dirs) {
      pts.push_back(r * e);
      vals.push_back(exact.value(pts.back()));
    }
  }
  AsymptoticFit fit = fit_samples(n, a, pts, vals);
  fit.window_lo = lo;
  fit.window_hi = hi;
  return fit;
}

double check_residue_relation(const AsymptoticFit& fit, const ResidueReport& res) {
  return std::abs(fit.d - (1.0 - fit.a.squaredNorm()) * res.mean());
}

namespace {

std::vector<Eigen::VectorXd> reference_annulus(int n) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i <= 4; ++i) {
    const double r = 1.0 + 0.25 * i;
    if (n == 2) {
      for (int k = 0; k < 32; ++k) {
        const double t = 2.0 * kPi * k / 32;
        Eigen::VectorXd x(2);
        x << r * std::cos(t), r * std::sin(t);
        pts.push_back(x);
      }
    } else {
      for (int j = 0; j <= 8; ++j) {
        const double phi = kPi * j / 8;
        Eigen::VectorXd x(3);
        x << r * std::sin(phi), 0.0, r * std::cos(phi);
        pts.push_back(x);
      }
    }
  }
  return pts;
}

std::vector<BlowdownSample> blowdown(int n, const std::vector<double>& scales, const Eigen::VectorXd& a,
                                     const std::function<double(const Eigen::VectorXd&)>& u) {
  if (a.size() != n) fail(ErrorKind::invalid_argument, "blowdown direction has the wrong dimension");
  if (scales.empty()) fail(ErrorKind::invalid_argument, "need at least one scale");
  const auto ref = reference_annulus(n);
  std::vector<BlowdownSample> out;
  for (double r : scales) {
    if (!(r > 0.0)) fail(ErrorKind::domain, "blowdown scales must be positive");
    BlowdownSample s;
    s.r = r;
    s.points = ref;
    for (const auto& x : ref) {
      const double v = u(r * x) / r;
      s.values.push_back(v);
      s.sup_distance = std::max(s.sup_distance, std::abs(v - a.dot(x)));
    }
    for (size_t i = 0; i < ref.size(); ++i) {
      for (size_t j = i + 1; j < ref.size(); ++j) {
        const double dist = (ref[i] - ref[j]).norm();
        s.lipschitz = std::max(s.lipschitz, std::abs(s.values[i] - s.values[j]) / dist);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<BlowdownSample> blowdown_sequence(const ScalarField& field, const std::vector<double>& scales,
                                              const Eigen::VectorXd& a) {
  const AnnulusGrid& g = *field.grid;
  for (double r : scales) {
    if (!(r >= g.max_hole_radius()) || !(2.0 * r <= g.R_out())) {
      fail(ErrorKind::domain, "blowdown scale " + std::to_string(r) + " leaves the field's domain");
    }
  }
  return blowdown(g.dim(), scales, a, [&](const Eigen::VectorXd& x) { return mesh::interp(field, x); });
}

std::vector<BlowdownSample> blowdown_sequence(const radial::BoostedRadialSolution& exact,
                                              const std::vector<double>& scales,
                                              const Eigen::VectorXd& a) {
  return blowdown(exact.dim(), scales, a, [&](const Eigen::VectorXd& x) { return exact.value(x); });
}

Eigen::VectorXd second_ff_norm(const ScalarField& field) {
  const AnnulusGrid& g = *field.grid;
  const auto p2 = mesh::gradient(field);
  const auto H = mesh::hessian(field);
  Eigen::VectorXd out(g.size());
  const int S = g.spokes();
  for (int k = 0; k < g.size(); ++k) {
    if (k < S || k >= g.size() - S) {
      out[k] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    Eigen::VectorXd p(H[k].rows());
    if (g.dim() == 2) {
      p = p2[k];
    } else {
      p << p2[k].x(), 0.0, p2[k].y();
    }
    const double s2 = 1.0 - p.squaredNorm();
    if (!(s2 > 0.0)) {
      fail(ErrorKind::non_spacelike, "|D_h u| >= 1 at node " + std::to_string(k));
    }
    // g^{ij} = delta_ij + u_i u_j / (1 - |Du|^2); |II|^2 = tr(G H G H) / det g.
    const Eigen::MatrixXd G =
        Eigen::MatrixXd::Identity(p.size(), p.size()) + (p * p.transpose()) / s2;
    const Eigen::MatrixXd GH = G * H[k];
    out[k] = std::sqrt(std::max(0.0, (GH * GH).trace() / s2));
  }
  return out;
}

double second_ff_norm_exact(const radial::BoostedRadialSolution& exact, const Eigen::VectorXd& x) {
  const int n = exact.dim();
  const double lambda = exact.base().lambda();
  if (lambda == 0.0) return 0.0;
  const double r = exact.preimage(x).norm();
  if (!(r > 0.0)) fail(ErrorKind::domain, "curvature is singular at the vertex");
  return std::sqrt(static_cast<double>(n * (n - 1))) * std::abs(lambda) / std::pow(r, n);
}

RingProfile ring_max_scaled(const ScalarField& field, const Eigen::VectorXd& nodal) {
  const AnnulusGrid& g = *field.grid;
  RingProfile prof;
  for (int i = 0; i < g.rings(); ++i) {
    double worst = -1.0;
    double rsum = 0.0;
    for (int j = 0; j < g.spokes(); ++j) {
      const int k = g.index(i, j);
      rsum += g.radius(k);
      if (std::isnan(nodal[k])) continue;
      worst = std::max(worst, nodal[k] * g.radius(k));
    }
    if (worst < 0.0) continue;
    prof.radius.push_back(rsum / g.spokes());
    prof.value.push_back(worst);
  }
  return prof;
}

double chord_lipschitz(const Eigen::VectorXd& boundary, double R) {
  const int M = static_cast<int>(boundary.size());
  double worst = 0.0;
  for (int a = 0; a < M; ++a) {
    for (int b = a + 1; b < M; ++b) {
      const double dist = 2.0 * R * std::abs(std::sin(kPi * (b - a) / M));
      worst = std::max(worst, std::abs(boundary[a] - boundary[b]) / dist);
    }
  }
  return worst;
}

namespace {

mesh::GridPtr disc_grid(double R, int spokes, int N_r) {
  mesh::GridSpec s;
  s.n = 2;
  s.hole = mesh::HoleSpec::point();
  s.R_out = R;
  s.N_r = N_r;
  s.N_ang = spokes;
  s.grading = 1.0;
  return mesh::build_grid(s);
}

}  // namespace

ScalarField extend_infconv(const Eigen::VectorXd& boundary, double R_star, double m, int N_r) {
  if (!(m < 1.0)) fail(ErrorKind::non_spacelike, "inf-convolution slope must satisfy m < 1");
  if (!(m > 0.0)) fail(ErrorKind::invalid_argument, "inf-convolution slope must be positive");
  if (!(R_star > 0.0)) fail(ErrorKind::invalid_argument, "R* must be positive");
  if (boundary.size() < 4) fail(ErrorKind::invalid_argument, "need at least 4 boundary samples");
  const double lip = chord_lipschitz(boundary, R_star);
  if (lip > m * (1.0 + 1e-12)) {
    fail(ErrorKind::invalid_argument, "boundary Lipschitz constant " + std::to_string(lip) +
                                          " exceeds m = " + std::to_string(m));
  }
  const int M = static_cast<int>(boundary.size());
  auto grid = disc_grid(R_star, M, N_r);
  std::vector<Eigen::Vector2d> b(static_cast<size_t>(M));
  for (int k = 0; k < M; ++k) {
    const double t = 2.0 * kPi * k / M;
    b[k] = Eigen::Vector2d(R_star * std::cos(t), R_star * std::sin(t));
  }
  ScalarField out(grid);
  for (int k = 0; k < grid->size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (int q = 0; q < M; ++q) best = std::min(best, boundary[q] + m * (grid->plane(k) - b[q]).norm());
    out.values[k] = best;
  }
  // Exactly the data on the circle; the inf above agrees up to rounding.
  for (int j = 0; j < M; ++j) out.values[grid->index(N_r, j)] = boundary[j];
  return out;
}

ScalarField extend_radial(const Eigen::VectorXd& boundary, int N_r) {
  if (boundary.size() < 4) fail(ErrorKind::invalid_argument, "need at least 4 boundary samples");
  const double hi = boundary.maxCoeff();
  const double lo = boundary.minCoeff();
  if (!(hi - lo < 2.0)) fail(ErrorKind::non_spacelike, "radial extension needs osc < 2");
  const double mid = 0.5 * (hi + lo);
  auto grid = disc_grid(1.0, static_cast<int>(boundary.size()), N_r);
  ScalarField out(grid);
  for (int k = 0; k < grid->size(); ++k) {
    const double r = grid->radius(k);
    out.values[k] = r * (boundary[grid->spoke_of(k)] - mid) + mid;
  }
  return out;
}

double sampled_lipschitz(const ScalarField& field, int pairs, std::uint64_t seed) {
  const AnnulusGrid& g = *field.grid;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, g.size() - 1);
  double worst = 0.0;
  for (int s = 0; s < pairs; ++s) {
    const int a = pick(rng);
    const int b = pick(rng);
    const double dist = (g.plane(a) - g.plane(b)).norm();
    if (dist < 1e-14) continue;
    worst = std::max(worst, std::abs(field.values[a] - field.values[b]) / dist);
  }
  return worst;
}

}  // namespace maxsurf::analysis
