#include "maxsurf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "maxsurf/error.hpp"

namespace maxsurf::mesh {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void bad_geometry(const std::string& what) { fail(ErrorKind::geometry, what); }

double angular_step(const GridSpec& s) { return (s.n == 2 ? 2.0 * kPi : kPi) / s.N_ang; }

}  // namespace

HoleSpec HoleSpec::circle(double radius) {
  HoleSpec h;
  h.kind = Kind::circle;
  h.radius = radius;
  return h;
}

HoleSpec HoleSpec::star(double radius, double amplitude, int mode) {
  HoleSpec h;
  h.kind = Kind::star;
  h.radius = radius;
  h.amplitude = amplitude;
  h.mode = mode;
  return h;
}

HoleSpec HoleSpec::star_samples(std::vector<double> radii) {
  HoleSpec h;
  h.kind = Kind::star;
  h.radius = 0.0;
  h.samples = std::move(radii);
  return h;
}

HoleSpec HoleSpec::point() {
  HoleSpec h;
  h.kind = Kind::point;
  h.radius = 0.0;
  return h;
}

double HoleSpec::radius_at(double angle, int j) const {
  switch (kind) {
    case Kind::circle: return radius;
    case Kind::point: return 0.0;
    case Kind::star:
      if (!samples.empty()) return samples.at(static_cast<size_t>(j));
      return radius * (1.0 + amplitude * std::cos(mode * angle));
  }
  return radius;
}

AnnulusGrid::AnnulusGrid(const GridSpec& spec) : spec_(spec) {
  const int n = spec_.n;
  if (n != 2 && n != 3) bad_geometry("n must be 2 or 3 (axisymmetric), got " + std::to_string(n));
  if (spec_.N_r < 2) bad_geometry("N_r must be >= 2, got " + std::to_string(spec_.N_r));
  const int min_ang = n == 2 ? 4 : 2;
  if (spec_.N_ang < min_ang) {
    bad_geometry("N_ang must be >= " + std::to_string(min_ang) + ", got " +
                 std::to_string(spec_.N_ang));
  }
  if (!(spec_.grading >= 1.0) || !std::isfinite(spec_.grading)) {
    bad_geometry("grading must be >= 1, got " + std::to_string(spec_.grading));
  }
  if (!(spec_.R_out > 0.0) || !std::isfinite(spec_.R_out)) bad_geometry("R_out must be positive");
  if (spec_.hole.kind == HoleSpec::Kind::circle && !(spec_.hole.radius > 0.0)) {
    bad_geometry("hole radius must be positive");
  }
  if (spec_.hole.kind == HoleSpec::Kind::star && spec_.hole.samples.empty()) {
    if (!(spec_.hole.radius > 0.0)) bad_geometry("star hole radius must be positive");
    if (!(std::abs(spec_.hole.amplitude) < 1.0)) bad_geometry("star amplitude must be in (-1, 1)");
    if (n == 3 && spec_.hole.mode < 0) bad_geometry("star mode must be >= 0");
  }

  spokes_ = n == 2 ? spec_.N_ang : spec_.N_ang + 1;
  const double dang = angular_step(spec_);

  if (!spec_.hole.samples.empty() && static_cast<int>(spec_.hole.samples.size()) != spokes_) {
    bad_geometry("star hole needs " + std::to_string(spokes_) + " samples, got " +
                 std::to_string(spec_.hole.samples.size()));
  }

  angle_.resize(spokes_);
  hole_.resize(spokes_);
  for (int j = 0; j < spokes_; ++j) {
    angle_[j] = j * dang;
    hole_[j] = spec_.hole.radius_at(angle_[j], j);
    if (spec_.hole.kind != HoleSpec::Kind::point && !(hole_[j] > 0.0)) {
      bad_geometry("hole radius must be positive at spoke " + std::to_string(j));
    }
    if (!(hole_[j] < spec_.R_out)) {
      bad_geometry("R_out must exceed the hole radius (spoke " + std::to_string(j) + ")");
    }
  }
  if (spec_.hole.kind == HoleSpec::Kind::star) {
    // Lipschitz star shape at sample level: |d rho / d angle| / rho bounded.
    for (int j = 0; j + (periodic() ? 0 : 1) < spokes_; ++j) {
      const int jn = (j + 1) % spokes_;
      const double slope = std::abs(hole_[jn] - hole_[j]) / (dang * std::min(hole_[j], hole_[jn]));
      if (!(slope < 10.0)) bad_geometry("star hole profile is too steep near spoke " + std::to_string(j));
    }
  }

  const int N = spec_.N_r;
  const double q = spec_.grading;
  sigma_.resize(N + 1);
  for (int i = 0; i <= N; ++i) {
    sigma_[i] = q == 1.0 ? static_cast<double>(i) / N : std::expm1(i * std::log(q)) /
                                                          std::expm1(N * std::log(q));
  }
  sigma_[N] = 1.0;

  radius_.resize(size());
  plane_.resize(size());
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j < spokes_; ++j) {
      const int k = index(i, j);
      const double r = hole_[j] + (spec_.R_out - hole_[j]) * sigma_[i];
      radius_[k] = r;
      if (n == 2) {
        plane_[k] = Eigen::Vector2d(r * std::cos(angle_[j]), r * std::sin(angle_[j]));
      } else {
        double s = std::sin(angle_[j]);
        if (j == 0 || j == spokes_ - 1) s = 0.0;  // poles sit exactly on the axis
        plane_[k] = Eigen::Vector2d(r * s, r * std::cos(angle_[j]));
      }
    }
  }

  mesh_width_ = dang;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < spokes_; ++j) {
      const double r1 = radius_[index(i + 1, j)];
      mesh_width_ = std::max(mesh_width_, (r1 - radius_[index(i, j)]) / r1);
    }
  }

  build_triangles();
}

void AnnulusGrid::build_triangles() {
  const int N = spec_.N_r;
  const int cells_ang = spec_.N_ang;
  const bool axisym = spec_.n == 3;
  const double expected_sign = axisym ? -1.0 : 1.0;
  triangles_.clear();
  triangles_.reserve(static_cast<size_t>(2 * N * cells_ang));
  nodal_measure_ = Eigen::VectorXd::Zero(size());

  auto add = [&](int v0, int v1, int v2) {
    if (is_disc() && (ring_of(v0) == 0) + (ring_of(v1) == 0) + (ring_of(v2) == 0) >= 2) {
      // Collapsed triangle at the disc centre.
      return;
    }
    Triangle t;
    t.v = {v0, v1, v2};
    Eigen::Matrix2d E;
    E.col(0) = plane_[v1] - plane_[v0];
    E.col(1) = plane_[v2] - plane_[v0];
    const double det = E.determinant();
    const double scale = E.col(0).norm() * E.col(1).norm();
    if (!(det * expected_sign > 1e-12 * scale)) {
      bad_geometry("degenerate or inverted cell at node " + std::to_string(v0));
    }
    const Eigen::Matrix2d inv_t = E.inverse().transpose();
    t.grad[1] = inv_t.col(0);
    t.grad[2] = inv_t.col(1);
    t.grad[0] = -(t.grad[1] + t.grad[2]);
    const double area = 0.5 * std::abs(det);
    if (axisym) {
      const double rho_c = (plane_[v0].x() + plane_[v1].x() + plane_[v2].x()) / 3.0;
      t.weight = 2.0 * kPi * area * rho_c;  // Pappus: volume swept by the triangle
    } else {
      t.weight = area;
    }
    for (int v : t.v) nodal_measure_[v] += t.weight / 3.0;
    triangles_.push_back(t);
  };

  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < cells_ang; ++j) {
      const int jn = (j + 1) % spokes_;
      const int a = index(i, j);
      const int b = index(i + 1, j);
      const int c = index(i + 1, jn);
      const int d = index(i, jn);
      add(a, b, c);
      add(a, c, d);
    }
  }
}

double AnnulusGrid::max_hole_radius() const { return *std::max_element(hole_.begin(), hole_.end()); }

Eigen::VectorXd AnnulusGrid::point(int k) const {
  if (spec_.n == 2) return plane_[k];
  Eigen::VectorXd x(3);
  x << plane_[k].x(), 0.0, plane_[k].y();
  return x;
}

std::pair<double, double> AnnulusGrid::polar(const Eigen::VectorXd& x) const {
  if (x.size() != spec_.n) fail(ErrorKind::invalid_argument, "point dimension does not match grid");
  if (spec_.n == 2) {
    double ang = std::atan2(x[1], x[0]);
    if (ang < 0.0) ang += 2.0 * kPi;
    if (ang >= 2.0 * kPi) ang = 0.0;
    return {std::hypot(x[0], x[1]), ang};
  }
  const double rho = std::hypot(x[0], x[1]);
  return {std::hypot(rho, x[2]), std::atan2(rho, x[2])};
}

double AnnulusGrid::cell_measure(int i, int j) const {
  // Triangles are stored two per cell in (i, j) order; disc centre cells keep one.
  double total = 0.0;
  const int jn = (j + 1) % spokes_;
  const int a = index(i, j);
  const int c = index(i + 1, jn);
  for (const Triangle& t : triangles_) {
    if (t.v[0] == a && (t.v[1] == c || t.v[2] == c)) total += t.weight;
  }
  return total;
}

double AnnulusGrid::total_measure() const {
  double total = 0.0;
  for (const Triangle& t : triangles_) total += t.weight;
  return total;
}

std::vector<int> AnnulusGrid::inner_ring() const {
  std::vector<int> out(spokes_);
  for (int j = 0; j < spokes_; ++j) out[j] = index(0, j);
  return out;
}

std::vector<int> AnnulusGrid::outer_ring() const {
  std::vector<int> out(spokes_);
  for (int j = 0; j < spokes_; ++j) out[j] = index(spec_.N_r, j);
  return out;
}

Eigen::Vector2d AnnulusGrid::locate(const Eigen::VectorXd& x) const {
  const auto [r, ang] = polar(x);
  const double dang = angular_step(spec_);
  double jf = ang / dang;
  int j0 = static_cast<int>(std::floor(jf));
  if (periodic()) {
    j0 = ((j0 % spec_.N_ang) + spec_.N_ang) % spec_.N_ang;
  } else {
    j0 = std::clamp(j0, 0, spec_.N_ang - 1);
  }
  double t = std::clamp(jf - j0, 0.0, 1.0);
  if (periodic() && jf >= spec_.N_ang) t = 0.0;
  const int j1 = (j0 + 1) % spokes_;
  const double rho = (1.0 - t) * hole_[j0] + t * hole_[j1];
  const double sig = (r - rho) / (spec_.R_out - rho);
  const double slack = 1e-12;
  if (!(sig >= -slack && sig <= 1.0 + slack)) {
    fail(ErrorKind::out_of_domain, "point at radius " + std::to_string(r) + " is outside the annulus");
  }
  const double s = std::clamp(sig, 0.0, 1.0);
  const double q = spec_.grading;
  const int N = spec_.N_r;
  const double i_f = q == 1.0 ? s * N : std::log1p(s * std::expm1(N * std::log(q))) / std::log(q);
  return {std::clamp(i_f, 0.0, static_cast<double>(N)), j0 + t};
}

GridPtr build_grid(const GridSpec& spec) { return std::make_shared<const AnnulusGrid>(spec); }

ScalarField::ScalarField(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid) fail(ErrorKind::invalid_argument, "field needs a grid");
  if (values.size() != grid->size()) {
    fail(ErrorKind::invalid_argument, "field has " + std::to_string(values.size()) +
                                          " values for a grid of " + std::to_string(grid->size()));
  }
  if (!values.allFinite()) fail(ErrorKind::invalid_argument, "field values must be finite");
}

ScalarField::ScalarField(GridPtr g) : grid(std::move(g)) {
  if (!grid) fail(ErrorKind::invalid_argument, "field needs a grid");
  values = Eigen::VectorXd::Zero(grid->size());
}

ScalarField sample(GridPtr grid, const std::function<double(const Eigen::VectorXd&)>& f) {
  Eigen::VectorXd v(grid->size());
  for (int k = 0; k < grid->size(); ++k) v[k] = f(grid->point(k));
  return ScalarField(std::move(grid), std::move(v));
}

namespace {

// Logical derivatives (d/di, d/dj) of a nodal array. `parity` is the
// reflection sign across the axis for n = 3 (+1 even, -1 odd).
std::vector<Eigen::Vector2d> logical_derivatives(const AnnulusGrid& g, const Eigen::VectorXd& f,
                                                 double parity) {
  const int N = g.N_r();
  const int S = g.spokes();
  std::vector<Eigen::Vector2d> d(static_cast<size_t>(g.size()));
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j < S; ++j) {
      double di;
      if (i == 0) {
        di = 0.5 * (-3.0 * f[g.index(0, j)] + 4.0 * f[g.index(1, j)] - f[g.index(2, j)]);
      } else if (i == N) {
        di = 0.5 * (3.0 * f[g.index(N, j)] - 4.0 * f[g.index(N - 1, j)] + f[g.index(N - 2, j)]);
      } else {
        di = 0.5 * (f[g.index(i + 1, j)] - f[g.index(i - 1, j)]);
      }
      double dj;
      if (g.periodic()) {
        dj = 0.5 * (f[g.index(i, (j + 1) % S)] - f[g.index(i, (j + S - 1) % S)]);
      } else if (j == 0) {
        dj = 0.5 * (1.0 - parity) * f[g.index(i, 1)];
      } else if (j == S - 1) {
        dj = 0.5 * (parity - 1.0) * f[g.index(i, S - 2)];
      } else {
        dj = 0.5 * (f[g.index(i, j + 1)] - f[g.index(i, j - 1)]);
      }
      d[g.index(i, j)] = Eigen::Vector2d(di, dj);
    }
  }
  return d;
}

// J^{-T} per node, J = [dX/di, dX/dj].
std::vector<Eigen::Matrix2d> inverse_jacobians(const AnnulusGrid& g) {
  if (g.is_disc()) fail(ErrorKind::geometry, "finite-difference operators need an annular grid");
  Eigen::VectorXd x(g.size());
  Eigen::VectorXd y(g.size());
  for (int k = 0; k < g.size(); ++k) {
    x[k] = g.plane(k).x();
    y[k] = g.plane(k).y();
  }
  // For n = 3, rho is odd and z even under reflection through the axis.
  const auto dx = logical_derivatives(g, x, g.periodic() ? 1.0 : -1.0);
  const auto dy = logical_derivatives(g, y, 1.0);
  std::vector<Eigen::Matrix2d> out(static_cast<size_t>(g.size()));
  for (int k = 0; k < g.size(); ++k) {
    Eigen::Matrix2d J;
    J << dx[k].x(), dx[k].y(), dy[k].x(), dy[k].y();
    out[k] = J.inverse().transpose();
  }
  return out;
}

std::vector<Eigen::Vector2d> apply_gradient(const AnnulusGrid& g,
                                            const std::vector<Eigen::Matrix2d>& jit,
                                            const Eigen::VectorXd& f, double parity) {
  auto d = logical_derivatives(g, f, parity);
  for (int k = 0; k < g.size(); ++k) d[k] = jit[k] * d[k];
  return d;
}

}  // namespace

std::vector<Eigen::Vector2d> gradient(const ScalarField& field) {
  const AnnulusGrid& g = *field.grid;
  return apply_gradient(g, inverse_jacobians(g), field.values, 1.0);
}

std::vector<Eigen::MatrixXd> hessian(const ScalarField& field) {
  const AnnulusGrid& g = *field.grid;
  const auto jit = inverse_jacobians(g);
  const auto p = apply_gradient(g, jit, field.values, 1.0);
  Eigen::VectorXd px(g.size());
  Eigen::VectorXd py(g.size());
  for (int k = 0; k < g.size(); ++k) {
    px[k] = p[k].x();
    py[k] = p[k].y();
  }
  const bool axisym = !g.periodic();
  const auto dpx = apply_gradient(g, jit, px, axisym ? -1.0 : 1.0);
  const auto dpy = apply_gradient(g, jit, py, 1.0);
  std::vector<Eigen::MatrixXd> out(static_cast<size_t>(g.size()));
  for (int k = 0; k < g.size(); ++k) {
    const double xx = dpx[k].x();
    const double xy = 0.5 * (dpx[k].y() + dpy[k].x());
    const double yy = dpy[k].y();
    if (!axisym) {
      Eigen::MatrixXd H(2, 2);
      H << xx, xy, xy, yy;
      out[k] = H;
    } else {
      const double rho = g.plane(k).x();
      const double hoop = rho > 1e-12 * g.radius(k) ? p[k].x() / rho : xx;
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, 3);
      H(0, 0) = xx;
      H(0, 2) = H(2, 0) = xy;
      H(1, 1) = hoop;
      H(2, 2) = yy;
      out[k] = H;
    }
  }
  return out;
}

double interp(const ScalarField& field, const Eigen::VectorXd& x) {
  const AnnulusGrid& g = *field.grid;
  const Eigen::Vector2d ij = g.locate(x);
  const int i0 = std::min(static_cast<int>(std::floor(ij.x())), g.N_r() - 1);
  const double s = ij.x() - i0;
  const int j0 = std::min(static_cast<int>(std::floor(ij.y())), g.N_ang() - 1);
  const double t = ij.y() - j0;
  const int j1 = (j0 + 1) % g.spokes();
  const auto& v = field.values;
  return (1.0 - s) * (1.0 - t) * v[g.index(i0, j0)] + s * (1.0 - t) * v[g.index(i0 + 1, j0)] +
         s * t * v[g.index(i0 + 1, j1)] + (1.0 - s) * t * v[g.index(i0, j1)];
}

double max_cell_gradient(const ScalarField& field) {
  double worst = 0.0;
  const auto& v = field.values;
  for (const Triangle& t : field.grid->triangles()) {
    const Eigen::Vector2d p = v[t.v[0]] * t.grad[0] + v[t.v[1]] * t.grad[1] + v[t.v[2]] * t.grad[2];
    worst = std::max(worst, p.norm());
  }
  return worst;
}

}  // namespace maxsurf::mesh
