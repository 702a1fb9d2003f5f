#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace maxsurf::mesh {

/// Hole boundary as a polar graph r = rho(angle) about the origin.
/// For n = 3 the angle is the polar angle phi in [0, pi] from the +e_3 axis.
struct HoleSpec {
  enum class Kind { circle, star, point };

  Kind kind = Kind::circle;
  double radius = 1.0;         // circle radius, or base radius of a parametric star
  double amplitude = 0.0;      // parametric star: rho = radius (1 + amplitude cos(mode angle))
  int mode = 0;
  std::vector<double> samples;  // explicit star radii, one per grid spoke

  static HoleSpec circle(double radius);
  static HoleSpec star(double radius, double amplitude, int mode);
  static HoleSpec star_samples(std::vector<double> radii);
  /// Degenerate hole at the origin; gives disc grids for the extension operators.
  static HoleSpec point();

  /// rho at a given angle, spoke index j out of `spokes` (samples are indexed by j).
  double radius_at(double angle, int j) const;
};

struct GridSpec {
  int n = 2;
  HoleSpec hole;
  double R_out = 2.0;
  int N_r = 16;
  int N_ang = 16;
  double grading = 1.05;
};

/// One P1 triangle of the split cell: vertex indices, constant basis
/// gradients (rows, in the plane or meridian half plane), integration weight.
struct Triangle {
  std::array<int, 3> v{};
  std::array<Eigen::Vector2d, 3> grad{};
  double weight = 0.0;
};

/// Tensor grid between the hole boundary and the circle/sphere of radius R_out.
///
/// Nodes are (i, j) with ring i = 0..N_r (0 on the hole) and spoke j; index
/// k = i * spokes + j. n = 2 has N_ang periodic spokes at theta_j = 2 pi j / N_ang.
/// n = 3 is the axisymmetric reduction with N_ang + 1 spokes phi_j = pi j / N_ang,
/// both poles included. The radial map is r = rho(angle) + (R - rho) sigma_i with
/// sigma_i geometric in i with ratio `grading`.
class AnnulusGrid {
 public:
  explicit AnnulusGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.n; }
  int N_r() const { return spec_.N_r; }
  int N_ang() const { return spec_.N_ang; }
  int rings() const { return spec_.N_r + 1; }
  int spokes() const { return spokes_; }
  int size() const { return rings() * spokes_; }
  bool periodic() const { return spec_.n == 2; }
  bool is_disc() const { return spec_.hole.kind == HoleSpec::Kind::point; }
  double R_out() const { return spec_.R_out; }

  int index(int i, int j) const { return i * spokes_ + j; }
  int ring_of(int k) const { return k / spokes_; }
  int spoke_of(int k) const { return k % spokes_; }

  double sigma(int i) const { return sigma_[i]; }
  double angle(int j) const { return angle_[j]; }
  double hole_radius(int j) const { return hole_[j]; }
  double max_hole_radius() const;
  double radius(int k) const { return radius_[k]; }

  /// Node in the plane (n = 2: (x, y)) or meridian half plane (n = 3: (rho, z)).
  const Eigen::Vector2d& plane(int k) const { return plane_[k]; }
  /// Node as a point of R^n; n = 3 uses (rho, 0, z).
  Eigen::VectorXd point(int k) const;

  /// Converts a point of R^n to (radius, angle) in the grid's convention.
  std::pair<double, double> polar(const Eigen::VectorXd& x) const;

  const std::vector<Triangle>& triangles() const { return triangles_; }
  /// Lumped nodal measure: one third of the adjacent triangle weights.
  const Eigen::VectorXd& nodal_measure() const { return nodal_measure_; }
  /// Measure of logical cell (i, j): i < N_r, j < N_ang.
  double cell_measure(int i, int j) const;
  double total_measure() const;

  bool on_boundary(int k) const { int i = ring_of(k); return i == 0 || i == spec_.N_r; }
  std::vector<int> inner_ring() const;
  std::vector<int> outer_ring() const;

  /// Relative mesh width max(dr / r, d angle) over all cells.
  double mesh_width() const { return mesh_width_; }

  /// Fractional logical coordinates (i, j) of a point; throws out_of_domain.
  Eigen::Vector2d locate(const Eigen::VectorXd& x) const;

 private:
  void build_triangles();

  GridSpec spec_;
  int spokes_;
  std::vector<double> sigma_;
  std::vector<double> angle_;
  std::vector<double> hole_;
  std::vector<double> radius_;
  std::vector<Eigen::Vector2d> plane_;
  std::vector<Triangle> triangles_;
  Eigen::VectorXd nodal_measure_;
  double mesh_width_ = 0.0;
};

using GridPtr = std::shared_ptr<const AnnulusGrid>;

GridPtr build_grid(const GridSpec& spec);

/// Node values of u on a grid.
struct ScalarField {
  GridPtr grid;
  Eigen::VectorXd values;

  ScalarField() = default;
  ScalarField(GridPtr g, Eigen::VectorXd v);
  explicit ScalarField(GridPtr g);
};

ScalarField sample(GridPtr grid, const std::function<double(const Eigen::VectorXd&)>& f);

/// Nodal gradient by curvilinear finite differences, in plane / meridian
/// components (n = 3: (u_rho, u_z)).
std::vector<Eigen::Vector2d> gradient(const ScalarField& field);

/// Nodal Hessian in the same components; n = 3 returns a 3x3 matrix in the
/// frame (e_rho, e_azimuth, e_z) with the hoop entry u_rho / rho.
std::vector<Eigen::MatrixXd> hessian(const ScalarField& field);

/// Bilinear interpolation in logical coordinates (sigma index, angle index).
double interp(const ScalarField& field, const Eigen::VectorXd& x);

/// sup over triangles of |D_h u| for the P1 interpolant.
double max_cell_gradient(const ScalarField& field);

}  // namespace maxsurf::mesh
