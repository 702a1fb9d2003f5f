#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "maxsurf/analysis.hpp"
#include "maxsurf/mesh.hpp"
#include "maxsurf/radial.hpp"
#include "maxsurf/solver.hpp"

namespace maxsurf::exterior {

/// Exterior Dirichlet problem: u = g on the hole boundary, with the far field
/// prescribed by (a, d) for n = 2 and by (a, c) for n = 3.
struct ExteriorProblem {
  int n = 2;
  mesh::HoleSpec hole = mesh::HoleSpec::circle(1.0);
  solver::PointFunction g = [](const Eigen::VectorXd&) { return 0.0; };
  double g_bound = 0.0;  // sup |g| on the hole boundary (0 = measure it from the samples)
  Eigen::VectorXd a;     // |a| < 1; n = 3 requires a along e_3
  double d = 1.0;        // n = 2
  double c = 0.0;        // n = 3
  /// n = 2: shift the outer data by the constant the previous stage predicts.
  bool outer_shift = true;
  /// Added to the outer data (uniqueness checks).
  solver::PointFunction perturbation;
  bool perturb_final_only = false;

  void validate() const;
  /// n = 2 flux parameter lambda = d / sqrt(1 - |a|^2).
  double lambda() const;
};

struct ContinuationSchedule {
  std::vector<double> radii;
  int nodes_per_octave = 16;  // radial grading 2^{1/K}
  int N_ang = 64;

  /// Factor-2 radii from 8 hole diameters up to R_max.
  static ContinuationSchedule geometric(double hole_radius, double R_max);
  void validate(double hole_radius) const;
  mesh::GridSpec grid_for(const ExteriorProblem& p, double R) const;
};

/// Exact model the outer data are drawn from, without the stage shift:
/// w_lambda^a for n = 2, a.x + c for n = 3.
double far_field_model(const ExteriorProblem& p, const Eigen::VectorXd& x);

/// Outer ring values of stage radius R on `grid`, including `shift` (n = 2)
/// and the problem's perturbation when active.
Eigen::VectorXd outer_data(const ExteriorProblem& p, const mesh::AnnulusGrid& grid, double shift = 0.0,
                           bool final_stage = true);

struct BarrierEnvelope {
  // n = 2: w_lambda^a + c_minus <= u <= w_lambda^a + c_plus.
  // n = 3: Psi^-(x) = w_{l*}^a - s M(l*, n) + c,  Psi^+(x) = w_{-l*}^a + s M(l*, n) + c.
  int n = 2;
  double lambda = 0.0;  // lambda (n = 2) or lambda* (n = 3)
  Eigen::VectorXd a;
  double c_minus = 0.0;
  double c_plus = 0.0;
  double c = 0.0;
  double shift = 0.0;  // sqrt(1 - |a|^2) M(lambda*, n)

  std::shared_ptr<const radial::BoostedRadialSolution> low;   // w_lambda^a or w_{l*}^a
  std::shared_ptr<const radial::BoostedRadialSolution> high;  // n = 3: w_{-l*}^a

  double lower(const Eigen::VectorXd& x) const;
  double upper(const Eigen::VectorXd& x) const;
};

/// Envelopes for the problem; hole samples are taken at the schedule's spokes.
BarrierEnvelope barriers(const ExteriorProblem& p, const ContinuationSchedule& s);

struct BarrierViolations {
  double lower = 0.0;  // max(Psi^- - u, 0)
  double upper = 0.0;  // max(u - Psi^+, 0)
};

BarrierViolations barrier_check(const BarrierEnvelope& env, const mesh::ScalarField& field);
BarrierViolations barrier_check(const ExteriorProblem& p, const ContinuationSchedule& s,
                                const mesh::ScalarField& field);

struct StageRecord {
  int stage = 0;
  double R = 0.0;
  double sup_diff = std::numeric_limits<double>::quiet_NaN();  // vs previous stage on the monitor
  int newton_iters = 0;
  double outer_shift = 0.0;
  double theta_h = 0.0;
  BarrierViolations barrier;
  double mesh_width = 0.0;
};

struct ExteriorResult {
  std::vector<mesh::ScalarField> stages;
  mesh::ScalarField field;  // final stage
  analysis::AsymptoticFit fit;
  analysis::ResidueReport residue;
  double relation_discrepancy = 0.0;
  std::vector<StageRecord> trace;
  bool converged = false;
  BarrierViolations barrier;  // final stage
};

/// Monitor annulus [1.5 rho, 3 rho] for rho the largest hole radius.
std::vector<Eigen::VectorXd> monitor_points(const ExteriorProblem& p, const ContinuationSchedule& s);

double monitor_difference(const std::vector<Eigen::VectorXd>& pts, const mesh::ScalarField& u,
                          const mesh::ScalarField& v);

ExteriorResult solve_exterior(const ExteriorProblem& p, const ContinuationSchedule& s,
                              const solver::SolverConfig& cfg);

struct CrosscheckResult {
  double difference = 0.0;  // sup over the monitor annulus of the final fields
  double stage_tolerance = 0.0;  // last Cauchy trace entry of the unperturbed run
  ExteriorResult base;
  ExteriorResult perturbed;
};

/// Runs the continuation with and without `p.perturbation` (default
/// amplitude 0.1 times cos of the angle) and compares the final fields.
CrosscheckResult uniqueness_crosscheck(const ExteriorProblem& p, const ContinuationSchedule& s,
                                       const solver::SolverConfig& cfg, double amplitude = 0.1,
                                       bool final_only = false);

}  // namespace maxsurf::exterior
