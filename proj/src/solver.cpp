#include "maxsurf/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <string>

namespace maxsurf::solver {

using mesh::AnnulusGrid;
using mesh::ScalarField;
using mesh::Triangle;

namespace {

Eigen::Vector2d triangle_gradient(const Triangle& t, const Eigen::VectorXd& u) {
  return u[t.v[0]] * t.grad[0] + u[t.v[1]] * t.grad[1] + u[t.v[2]] * t.grad[2];
}

double max_gradient(const AnnulusGrid& g, const Eigen::VectorXd& u) {
  double worst = 0.0;
  for (const Triangle& t : g.triangles()) worst = std::max(worst, triangle_gradient(t, u).norm());
  return worst;
}

// Energy with long-double accumulation; +inf marks a non-spacelike cell.
long double energy_of(const AnnulusGrid& g, const Eigen::VectorXd& u) {
  long double total = 0.0L;
  for (const Triangle& t : g.triangles()) {
    const double p2 = triangle_gradient(t, u).squaredNorm();
    if (!(p2 < 1.0)) return std::numeric_limits<long double>::infinity();
    total += static_cast<long double>(t.weight) * std::sqrt(1.0 - p2);
  }
  return total;
}

Eigen::VectorXd raw_gradient(const AnnulusGrid& g, const Eigen::VectorXd& u) {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(g.size());
  for (const Triangle& t : g.triangles()) {
    const Eigen::Vector2d p = triangle_gradient(t, u);
    const double s2 = 1.0 - p.squaredNorm();
    if (!(s2 > 0.0)) fail(ErrorKind::non_spacelike, "non-spacelike cell in residual evaluation");
    const double c = -t.weight / std::sqrt(s2);
    for (int a = 0; a < 3; ++a) F[t.v[a]] += c * p.dot(t.grad[a]);
  }
  return F;
}

double interior_max(const AnnulusGrid& g, const Eigen::VectorXd& v) {
  double worst = 0.0;
  const int S = g.spokes();
  for (int k = S; k < g.size() - S; ++k) worst = std::max(worst, std::abs(v[k]));
  return worst;
}

void require_grid(const AnnulusGrid& g) {
  if (g.is_disc()) fail(ErrorKind::geometry, "the Dirichlet solver needs an annular grid");
}

void require_bc(const AnnulusGrid& g, const BoundaryData& bc) {
  if (bc.inner.size() != g.spokes() || bc.outer.size() != g.spokes()) {
    fail(ErrorKind::invalid_argument, "boundary data must have one value per spoke (" +
                                          std::to_string(g.spokes()) + ")");
  }
  if (!bc.inner.allFinite() || !bc.outer.allFinite()) {
    fail(ErrorKind::invalid_argument, "boundary data must be finite");
  }
}

void impose(const AnnulusGrid& g, const BoundaryData& bc, Eigen::VectorXd& u) {
  const int S = g.spokes();
  const int N = g.N_r();
  for (int j = 0; j < S; ++j) {
    u[g.index(0, j)] = bc.inner[j];
    u[g.index(N, j)] = bc.outer[j];
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (!(newton_tol > 0.0)) fail(ErrorKind::invalid_argument, "newton_tol must be positive");
  if (max_iter < 1) fail(ErrorKind::invalid_argument, "max_iter must be >= 1");
  if (!(spacelike_cap > 0.0 && spacelike_cap < 1.0)) {
    fail(ErrorKind::invalid_argument, "spacelike_cap must lie in (0, 1)");
  }
  if (!(linesearch_shrink > 0.0 && linesearch_shrink < 1.0)) {
    fail(ErrorKind::invalid_argument, "linesearch_shrink must lie in (0, 1)");
  }
  if (!(linear_tol > 0.0)) fail(ErrorKind::invalid_argument, "linear_tol must be positive");
}

BoundaryData sample_boundary(const AnnulusGrid& grid, const PointFunction& inner,
                             const PointFunction& outer) {
  BoundaryData bc;
  const int S = grid.spokes();
  bc.inner.resize(S);
  bc.outer.resize(S);
  for (int j = 0; j < S; ++j) {
    bc.inner[j] = inner(grid.point(grid.index(0, j)));
    bc.outer[j] = outer(grid.point(grid.index(grid.N_r(), j)));
  }
  return bc;
}

double Admissibility::worst() const {
  return std::max({inner_lipschitz, outer_lipschitz, cross_lipschitz});
}

bool Admissibility::admissible() const {
  // Saturation (a light segment between samples) counts as inadmissible.
  return worst() < 1.0 - 1e-12;
}

Admissibility check_admissible(const AnnulusGrid& grid, const BoundaryData& bc) {
  require_bc(grid, bc);
  const int S = grid.spokes();
  const auto in = grid.inner_ring();
  const auto out = grid.outer_ring();
  auto ratio = [&](int ka, double va, int kb, double vb) {
    const double dist = (grid.plane(ka) - grid.plane(kb)).norm();
    if (dist == 0.0) return va == vb ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(va - vb) / dist;
  };
  Admissibility adm;
  for (int a = 0; a < S; ++a) {
    for (int b = a + 1; b < S; ++b) {
      adm.inner_lipschitz = std::max(adm.inner_lipschitz, ratio(in[a], bc.inner[a], in[b], bc.inner[b]));
      adm.outer_lipschitz = std::max(adm.outer_lipschitz, ratio(out[a], bc.outer[a], out[b], bc.outer[b]));
    }
    for (int b = 0; b < S; ++b) {
      adm.cross_lipschitz = std::max(adm.cross_lipschitz, ratio(in[a], bc.inner[a], out[b], bc.outer[b]));
    }
  }
  return adm;
}

double area_energy(const ScalarField& field) {
  const long double e = energy_of(*field.grid, field.values);
  if (std::isinf(e)) fail(ErrorKind::non_spacelike, "a cell has |D_h u| >= 1");
  return static_cast<double>(e);
}

Eigen::VectorXd residual(const ScalarField& field) {
  const AnnulusGrid& g = *field.grid;
  Eigen::VectorXd F = raw_gradient(g, field.values);
  const auto& mu = g.nodal_measure();
  const int S = g.spokes();
  for (int k = 0; k < g.size(); ++k) {
    const bool boundary = k < S || k >= g.size() - S;
    F[k] = boundary ? 0.0 : F[k] / mu[k];
  }
  return F;
}

double residual_norm(const ScalarField& field) { return interior_max(*field.grid, residual(field)); }

StepResult newton_step(const ScalarField& field, const SolverConfig& cfg) {
  const AnnulusGrid& g = *field.grid;
  require_grid(g);
  const Eigen::VectorXd& u = field.values;
  const int S = g.spokes();
  const int n_free = g.size() - 2 * S;
  const double cap = 1.0 - cfg.spacelike_cap;

  // F = dE/du and K = -d^2E/du^2 restricted to interior nodes (index k - S).
  Eigen::VectorXd F = Eigen::VectorXd::Zero(n_free);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.triangles().size() * 9);
  auto free_index = [&](int k) { return (k < S || k >= g.size() - S) ? -1 : k - S; };
  for (const Triangle& t : g.triangles()) {
    const Eigen::Vector2d p = triangle_gradient(t, u);
    const double s2 = 1.0 - p.squaredNorm();
    if (!(s2 > 0.0)) fail(ErrorKind::non_spacelike, "Newton step from a non-spacelike iterate");
    const double s = std::sqrt(s2);
    const Eigen::Matrix2d A = Eigen::Matrix2d::Identity() / s + (p * p.transpose()) / (s2 * s);
    for (int a = 0; a < 3; ++a) {
      const int fa = free_index(t.v[a]);
      if (fa < 0) continue;
      F[fa] -= t.weight * p.dot(t.grad[a]) / s;
      const Eigen::Vector2d Ag = A * t.grad[a];
      for (int b = 0; b < 3; ++b) {
        const int fb = free_index(t.v[b]);
        if (fb < 0) continue;
        trip.emplace_back(fa, fb, t.weight * Ag.dot(t.grad[b]));
      }
    }
  }
  Eigen::SparseMatrix<double> K(n_free, n_free);
  K.setFromTriplets(trip.begin(), trip.end());

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(cfg.linear_tol);
  cg.setMaxIterations(std::max(2000, 20 * n_free));
  cg.compute(K);
  if (cg.info() != Eigen::Success) fail(ErrorKind::linear_solve, "Hessian factorization failed");
  Eigen::VectorXd delta = cg.solve(F);
  if (cg.info() != Eigen::Success) {
    fail(ErrorKind::linear_solve, "conjugate gradients did not reach linear_tol after " +
                                      std::to_string(cg.iterations()) + " iterations (error " +
                                      std::to_string(cg.error()) + ")");
  }

  const long double e0 = energy_of(g, u);
  // Rounding noise of the summed energy; accepted steps must not lose more.
  const long double slack = 1e-13L * std::abs(e0);
  double step = 1.0;
  Eigen::VectorXd trial = u;
  while (true) {
    trial.segment(S, n_free) = u.segment(S, n_free) + step * delta;
    if (max_gradient(g, trial) <= cap) {
      const long double e1 = energy_of(g, trial);
      if (e1 >= e0 - slack) {
        StepResult out;
        out.field = ScalarField(field.grid, trial);
        out.step_norm = step * delta.lpNorm<Eigen::Infinity>();
        out.step_length = step;
        out.energy = static_cast<double>(e1);
        out.linear_iterations = static_cast<int>(cg.iterations());
        out.residual_norm = residual_norm(out.field);
        return out;
      }
    }
    step *= cfg.linesearch_shrink;
    if (step < 1e-14) {
      fail(ErrorKind::convergence, "line search underflow");
    }
  }
}

ScalarField initial_guess(mesh::GridPtr grid, const BoundaryData& bc, const SolverConfig& cfg) {
  const AnnulusGrid& g = *grid;
  require_bc(g, bc);
  const int S = g.spokes();
  const int N = g.N_r();
  const double cap = 1.0 - cfg.spacelike_cap;
  Eigen::VectorXd u(g.size());
  for (int i = 0; i <= N; ++i) {
    const double s = g.sigma(i);
    for (int j = 0; j < S; ++j) u[g.index(i, j)] = (1.0 - s) * bc.inner[j] + s * bc.outer[j];
  }
  impose(g, bc, u);
  if (max_gradient(g, u) <= cap) return ScalarField(grid, u);

  // Mean of the upper and lower L-Lipschitz envelopes of the boundary samples.
  const double L = std::min(check_admissible(g, bc).worst(), cap);
  std::vector<int> nodes = g.inner_ring();
  const auto outer = g.outer_ring();
  nodes.insert(nodes.end(), outer.begin(), outer.end());
  auto value_at = [&](int k) { return k < S ? bc.inner[k] : bc.outer[g.spoke_of(k)]; };
  for (int i = 1; i < N; ++i) {
    for (int j = 0; j < S; ++j) {
      const int k = g.index(i, j);
      double upper = std::numeric_limits<double>::infinity();
      double lower = -upper;
      for (int b : nodes) {
        const double dist = (g.plane(k) - g.plane(b)).norm();
        upper = std::min(upper, value_at(b) + L * dist);
        lower = std::max(lower, value_at(b) - L * dist);
      }
      u[k] = 0.5 * (upper + lower);
    }
  }
  if (max_gradient(g, u) <= cap) return ScalarField(grid, u);
  fail(ErrorKind::non_spacelike, "could not build a spacelike initial guess from the boundary data");
}

Solution solve_dirichlet(mesh::GridPtr grid, const BoundaryData& bc, const SolverConfig& cfg,
                         const std::optional<ScalarField>& initial) {
  if (!grid) fail(ErrorKind::invalid_argument, "solve_dirichlet needs a grid");
  const AnnulusGrid& g = *grid;
  require_grid(g);
  cfg.validate();
  require_bc(g, bc);
  const Admissibility adm = check_admissible(g, bc);
  if (!adm.admissible()) {
    fail(ErrorKind::inadmissible, "boundary data are not admissible (sampled Lipschitz ratio " +
                                      std::to_string(adm.worst()) + ")");
  }

  ScalarField u = [&] {
    if (!initial) return initial_guess(grid, bc, cfg);
    if (initial->grid->size() != g.size()) {
      fail(ErrorKind::invalid_argument, "initial field lives on a different grid");
    }
    Eigen::VectorXd v = initial->values;
    impose(g, bc, v);
    if (max_gradient(g, v) > 1.0 - cfg.spacelike_cap) return initial_guess(grid, bc, cfg);
    return ScalarField(grid, v);
  }();

  SolveReport report;
  double res = residual_norm(u);
  report.residuals.push_back(res);
  report.energies.push_back(area_energy(u));
  while (res > cfg.newton_tol) {
    if (report.iterations >= cfg.max_iter) {
      throw ConvergenceError("Newton did not converge in " + std::to_string(cfg.max_iter) +
                                 " iterations (residual " + std::to_string(res) + ")",
                             u, report);
    }
    StepResult step;
    try {
      step = newton_step(u, cfg);
    } catch (const ConvergenceError&) {
      throw;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::convergence) throw;
      throw ConvergenceError(std::string(e.what()) + " at iteration " +
                                 std::to_string(report.iterations) + " (residual " +
                                 std::to_string(res) + ")",
                             u, report);
    }
    u = std::move(step.field);
    res = step.residual_norm;
    ++report.iterations;
    report.linear_iterations += step.linear_iterations;
    report.residuals.push_back(res);
    report.energies.push_back(step.energy);
    report.step_norms.push_back(step.step_norm);
  }
  report.energy = report.energies.back();
  report.theta_h = 1.0 - max_gradient(g, u.values);
  return {std::move(u), std::move(report)};
}

}  // namespace maxsurf::solver
