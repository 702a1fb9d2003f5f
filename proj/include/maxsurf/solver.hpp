#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

#include "maxsurf/error.hpp"
#include "maxsurf/mesh.hpp"

namespace maxsurf::solver {

struct SolverConfig {
  double newton_tol = 1e-10;
  int max_iter = 50;
  double spacelike_cap = 1e-6;  // iterates keep |D_h u| <= 1 - spacelike_cap
  double linesearch_shrink = 0.5;
  double linear_tol = 1e-12;

  void validate() const;
};

/// Dirichlet values by spoke on the inner (hole) and outer rings.
struct BoundaryData {
  Eigen::VectorXd inner;
  Eigen::VectorXd outer;
};

using PointFunction = std::function<double(const Eigen::VectorXd&)>;

BoundaryData sample_boundary(const mesh::AnnulusGrid& grid, const PointFunction& inner,
                             const PointFunction& outer);

/// Sampled admissibility: largest |g(x) - g(y)| / |x - y| over boundary node
/// pairs, split by which rings the pair touches.
struct Admissibility {
  double inner_lipschitz = 0.0;
  double outer_lipschitz = 0.0;
  double cross_lipschitz = 0.0;
  double worst() const;
  bool admissible() const;
};

Admissibility check_admissible(const mesh::AnnulusGrid& grid, const BoundaryData& bc);

/// Discrete area functional: sum over P1 triangles of weight * sqrt(1 - |Du|^2).
double area_energy(const mesh::ScalarField& field);

/// dE/du_k divided by the lumped nodal measure; zero on boundary nodes. This is
/// the discrete divergence-form operator div(Du / sqrt(1 - |Du|^2)).
Eigen::VectorXd residual(const mesh::ScalarField& field);

/// max |residual| over interior nodes.
double residual_norm(const mesh::ScalarField& field);

struct StepResult {
  mesh::ScalarField field;
  double residual_norm = 0.0;  // after the step
  double step_norm = 0.0;      // max |accepted update|
  double step_length = 0.0;    // line-search factor
  double energy = 0.0;
  int linear_iterations = 0;
};

/// One safeguarded Newton step on the interior values; boundary values are
/// taken from the field (they must already equal the Dirichlet data).
StepResult newton_step(const mesh::ScalarField& field, const SolverConfig& cfg);

struct SolveReport {
  int iterations = 0;
  std::vector<double> residuals;  // residual norm before the first step and after each
  std::vector<double> energies;
  std::vector<double> step_norms;
  int linear_iterations = 0;
  double energy = 0.0;
  double theta_h = 0.0;  // 1 - sup_cell |D_h u|
};

struct Solution {
  mesh::ScalarField field;
  SolveReport report;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, mesh::ScalarField last, SolveReport report)
      : Error(ErrorKind::convergence, message), last_(std::move(last)), report_(std::move(report)) {}

  const mesh::ScalarField& last_iterate() const { return last_; }
  const SolveReport& report() const { return report_; }

 private:
  mesh::ScalarField last_;
  SolveReport report_;
};

/// Radial blend (1 - sigma) g + sigma h; if that is not spacelike, the mean of
/// the Lipschitz envelopes of the boundary data.
mesh::ScalarField initial_guess(mesh::GridPtr grid, const BoundaryData& bc, const SolverConfig& cfg);

/// Maximizes area_energy with the given Dirichlet data. An optional initial
/// field supplies interior values (boundary values are overwritten).
Solution solve_dirichlet(mesh::GridPtr grid, const BoundaryData& bc, const SolverConfig& cfg,
                         const std::optional<mesh::ScalarField>& initial = std::nullopt);

}  // namespace maxsurf::solver
