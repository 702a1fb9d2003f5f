#include "maxsurf/exterior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <string>

#include "maxsurf/error.hpp"

namespace maxsurf::exterior {

using mesh::ScalarField;

namespace {

double hole_max_radius(const mesh::HoleSpec& h) {
  switch (h.kind) {
    case mesh::HoleSpec::Kind::circle: return h.radius;
    case mesh::HoleSpec::Kind::point: return 0.0;
    case mesh::HoleSpec::Kind::star:
      if (!h.samples.empty()) return *std::max_element(h.samples.begin(), h.samples.end());
      return h.radius * (1.0 + std::abs(h.amplitude));
  }
  return h.radius;
}

double boost_factor(const Eigen::VectorXd& a) { return std::sqrt(1.0 - a.squaredNorm()); }

int env_threads() {
  const char* s = std::getenv("MAXSURF_THREADS");
  if (!s) return 1;
  const int v = std::atoi(s);
  return v > 0 ? v : 1;
}

std::vector<double> hole_values(const mesh::AnnulusGrid& grid,
                                const std::function<double(const Eigen::VectorXd&)>& f) {
  std::vector<double> out;
  for (int k : grid.inner_ring()) out.push_back(f(grid.point(k)));
  return out;
}

}  // namespace

void ExteriorProblem::validate() const {
  if (n != 2 && n != 3) fail(ErrorKind::invalid_argument, "exterior problems need n = 2 or 3");
  if (a.size() != n) fail(ErrorKind::invalid_argument, "a must have n components");
  if (!(a.norm() < 1.0)) fail(ErrorKind::invalid_boost, "prescribed |a| must be < 1");
  if (n == 3 && (a[0] != 0.0 || a[1] != 0.0)) {
    fail(ErrorKind::invalid_argument, "n = 3 runs are axisymmetric: a must lie along e_3");
  }
  if (!std::isfinite(d) || !std::isfinite(c)) fail(ErrorKind::invalid_argument, "d and c must be finite");
  if (!g) fail(ErrorKind::invalid_argument, "inner boundary data g is missing");
  if (hole.kind == mesh::HoleSpec::Kind::point) {
    fail(ErrorKind::geometry, "exterior problems need a hole of positive size");
  }
}

double ExteriorProblem::lambda() const { return d / boost_factor(a); }

ContinuationSchedule ContinuationSchedule::geometric(double hole_radius, double R_max) {
  ContinuationSchedule s;
  for (double R = 16.0 * hole_radius; R <= R_max * (1.0 + 1e-12); R *= 2.0) s.radii.push_back(R);
  return s;
}

void ContinuationSchedule::validate(double hole_radius) const {
  if (radii.size() < 3) fail(ErrorKind::invalid_argument, "continuation needs at least 3 stages");
  for (size_t i = 0; i < radii.size(); ++i) {
    if (i > 0 && !(radii[i] > radii[i - 1])) {
      fail(ErrorKind::invalid_argument, "stage radii must be strictly increasing");
    }
  }
  if (!(radii.front() > 3.0 * hole_radius)) {
    fail(ErrorKind::invalid_argument, "first stage must enclose the monitor annulus (R > 3 rho)");
  }
  if (nodes_per_octave < 2) fail(ErrorKind::invalid_argument, "nodes_per_octave must be >= 2");
  if (N_ang < 4) fail(ErrorKind::invalid_argument, "N_ang must be >= 4");
}

mesh::GridSpec ContinuationSchedule::grid_for(const ExteriorProblem& p, double R) const {
  const double rho = hole_max_radius(p.hole);
  mesh::GridSpec g;
  g.n = p.n;
  g.hole = p.hole;
  g.R_out = R;
  const double octaves = std::log2(R / rho);
  g.N_r = std::max(8, static_cast<int>(std::ceil(nodes_per_octave * octaves - 1e-9)));
  g.grading = std::pow(R / rho, 1.0 / g.N_r);
  g.N_ang = N_ang;
  return g;
}

namespace {

// The far-field model with the boosted radial solution built once.
class FarField {
 public:
  explicit FarField(const ExteriorProblem& p) : p_(p) {
    if (p.n == 2) {
      w_ = std::make_shared<radial::BoostedRadialSolution>(radial::RadialSolution(2, p.lambda()),
                                                           lorentz::BoostParam(p.a));
    }
  }
  double operator()(const Eigen::VectorXd& x) const {
    return p_.n == 2 ? w_->value(x) : p_.a.dot(x) + p_.c;
  }

 private:
  const ExteriorProblem& p_;
  std::shared_ptr<const radial::BoostedRadialSolution> w_;
};

}  // namespace

double far_field_model(const ExteriorProblem& p, const Eigen::VectorXd& x) { return FarField(p)(x); }

Eigen::VectorXd outer_data(const ExteriorProblem& p, const mesh::AnnulusGrid& grid, double shift,
                           bool final_stage) {
  const auto ring = grid.outer_ring();
  Eigen::VectorXd h(static_cast<int>(ring.size()));
  const bool perturb = p.perturbation && (final_stage || !p.perturb_final_only);
  const FarField model(p);
  for (size_t j = 0; j < ring.size(); ++j) {
    const Eigen::VectorXd x = grid.point(ring[j]);
    h[static_cast<int>(j)] = model(x) + (p.n == 2 ? shift : 0.0) +
                             (perturb ? p.perturbation(x) : 0.0);
  }
  return h;
}

double BarrierEnvelope::lower(const Eigen::VectorXd& x) const {
  if (n == 2) return low->value(x) + c_minus;
  return low->value(x) - shift + c;
}

double BarrierEnvelope::upper(const Eigen::VectorXd& x) const {
  if (n == 2) return low->value(x) + c_plus;
  return high->value(x) + shift + c;
}

BarrierEnvelope barriers(const ExteriorProblem& p, const ContinuationSchedule& s) {
  p.validate();
  BarrierEnvelope env;
  env.n = p.n;
  env.a = p.a;
  env.c = p.c;
  const lorentz::BoostParam a(p.a);
  const mesh::AnnulusGrid grid(s.grid_for(p, s.radii.empty() ? 16.0 * hole_max_radius(p.hole)
                                                             : s.radii.front()));
  if (p.n == 2) {
    env.lambda = p.lambda();
    env.low = std::make_shared<radial::BoostedRadialSolution>(radial::RadialSolution(2, env.lambda), a);
    // c- <= g - w_lambda^a <= c+ on the hole, with 0 in between so the
    // unshifted outer data are enclosed too.
    const auto diff = hole_values(grid, [&](const Eigen::VectorXd& x) {
      return p.g(x) - env.low->value(x);
    });
    env.c_minus = std::min(0.0, *std::min_element(diff.begin(), diff.end()));
    env.c_plus = std::max(0.0, *std::max_element(diff.begin(), diff.end()));
    return env;
  }
  // sqrt(1-|a|^2) M(l*, n) >= |c| + R~ + G, solved with the scaling law.
  double G = p.g_bound;
  if (G == 0.0) {
    for (double v : hole_values(grid, p.g)) G = std::max(G, std::abs(v));
  }
  const double need = std::abs(p.c) + hole_max_radius(p.hole) + G;
  const double m1 = radial::M_const(1.0, p.n).value;
  const double sq = boost_factor(p.a);
  env.lambda = std::pow(need / (sq * m1), p.n - 1);
  env.shift = sq * radial::M_const(env.lambda, p.n).value;
  env.low = std::make_shared<radial::BoostedRadialSolution>(radial::RadialSolution(p.n, env.lambda), a);
  env.high = std::make_shared<radial::BoostedRadialSolution>(radial::RadialSolution(p.n, -env.lambda), a);
  return env;
}

BarrierViolations barrier_check(const BarrierEnvelope& env, const ScalarField& field) {
  BarrierViolations v;
  const auto& g = *field.grid;
  for (int k = 0; k < g.size(); ++k) {
    const Eigen::VectorXd x = g.point(k);
    const double u = field.values[k];
    v.lower = std::max(v.lower, env.lower(x) - u);
    v.upper = std::max(v.upper, u - env.upper(x));
  }
  return v;
}

BarrierViolations barrier_check(const ExteriorProblem& p, const ContinuationSchedule& s,
                                const ScalarField& field) {
  return barrier_check(barriers(p, s), field);
}

std::vector<Eigen::VectorXd> monitor_points(const ExteriorProblem& p, const ContinuationSchedule& s) {
  const double rho = hole_max_radius(p.hole);
  const mesh::AnnulusGrid grid(s.grid_for(p, s.radii.front()));
  std::vector<Eigen::VectorXd> pts;
  for (int k = 0; k < grid.size(); ++k) {
    const double r = grid.radius(k);
    if (r >= 1.5 * rho * (1.0 - 1e-12) && r <= 3.0 * rho * (1.0 + 1e-12)) pts.push_back(grid.point(k));
  }
  return pts;
}

double monitor_difference(const std::vector<Eigen::VectorXd>& pts, const ScalarField& u,
                          const ScalarField& v) {
  double worst = 0.0;
  for (const auto& x : pts) worst = std::max(worst, std::abs(mesh::interp(u, x) - mesh::interp(v, x)));
  return worst;
}

namespace {

// Previous stage inside its radius; beyond it, the new outer model plus the
// mismatch at R_prev faded out linearly towards R.
ScalarField warm_start(const ExteriorProblem& p, const mesh::GridPtr& grid, const ScalarField& prev,
                       double shift) {
  const double R = grid->R_out();
  const double R_prev = prev.grid->R_out();
  const double rho = hole_max_radius(p.hole);
  const FarField model(p);
  ScalarField out(grid);
  for (int k = 0; k < grid->size(); ++k) {
    const Eigen::VectorXd x = grid->point(k);
    const double r = x.norm();
    if (r <= R_prev * (1.0 - 1e-12)) {
      out.values[k] = mesh::interp(prev, x);
      continue;
    }
    const Eigen::VectorXd edge = x * (R_prev / r);
    const double model_edge = model(edge) + (p.n == 2 ? shift : 0.0);
    const double mismatch = mesh::interp(prev, edge) - model_edge;
    const double t = std::clamp((R - r) / (R - std::max(R_prev, rho)), 0.0, 1.0);
    out.values[k] = model(x) + (p.n == 2 ? shift : 0.0) + t * mismatch;
  }
  return out;
}

// Next outer shift: the constant e in u - w_lambda^a ~ e + f psi on [R/8, R/2].
// Fitting the difference removes the model's own O(r^-2) remainder.
double stage_constant(const ExteriorProblem& p, const FarField& model, const ScalarField& u) {
  const auto& g = *u.grid;
  const double R = g.R_out();
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  for (int k = 0; k < g.size(); ++k) {
    const double r = g.radius(k);
    if (r >= R / 8.0 && r <= R / 2.0) {
      pts.push_back(g.point(k));
      vals.push_back(u.values[k] - model(pts.back()) + p.a.dot(pts.back()));
    }
  }
  return analysis::fit_samples(p.n, p.a, pts, vals).c;
}

}  // namespace

ExteriorResult solve_exterior(const ExteriorProblem& p, const ContinuationSchedule& s,
                              const solver::SolverConfig& cfg) {
  p.validate();
  const double rho = hole_max_radius(p.hole);
  s.validate(rho);
  cfg.validate();
  const BarrierEnvelope env = barriers(p, s);
  const auto monitor = monitor_points(p, s);
  const bool use_shift = p.n == 2 && p.outer_shift && p.lambda() != 0.0;

  ExteriorResult res;
  const FarField model(p);
  double shift = 0.0;
  if (use_shift) {
    // Mean of g - w_lambda^a over the hole: the value at infinity of the
    // bounded harmonic function with those boundary values.
    const mesh::AnnulusGrid first(s.grid_for(p, s.radii.front()));
    const auto diff = hole_values(first, [&](const Eigen::VectorXd& x) { return p.g(x) - model(x); });
    double sum = 0.0;
    for (double v : diff) sum += v;
    shift = std::clamp(sum / diff.size(), env.c_minus, env.c_plus);
  }
  const int stages = static_cast<int>(s.radii.size());
  for (int k = 0; k < stages; ++k) {
    const double R = s.radii[k];
    mesh::GridPtr grid = mesh::build_grid(s.grid_for(p, R));
    solver::BoundaryData bc;
    bc.inner.resize(grid->spokes());
    int j = 0;
    for (int node : grid->inner_ring()) bc.inner[j++] = p.g(grid->point(node));
    bc.outer = outer_data(p, *grid, shift, k == stages - 1);

    std::optional<ScalarField> init;
    if (!res.stages.empty()) init = warm_start(p, grid, res.stages.back(), shift);

    solver::Solution sol;
    try {
      sol = solver::solve_dirichlet(grid, bc, cfg, init);
    } catch (const Error& e) {
      fail(e.kind(), "stage " + std::to_string(k + 1) + " (R = " + std::to_string(R) + "): " + e.what());
    }

    StageRecord rec;
    rec.stage = k + 1;
    rec.R = R;
    rec.newton_iters = sol.report.iterations;
    rec.outer_shift = shift;
    rec.theta_h = sol.report.theta_h;
    rec.mesh_width = grid->mesh_width();
    if (!p.perturbation) rec.barrier = barrier_check(env, sol.field);
    if (!res.stages.empty()) rec.sup_diff = monitor_difference(monitor, sol.field, res.stages.back());
    res.trace.push_back(rec);
    res.stages.push_back(sol.field);

    if (use_shift) {
      shift = std::clamp(stage_constant(p, model, sol.field), env.c_minus, env.c_plus);
    }

    // Stall: three consecutive monitor differences that never decrease.
    const int m = static_cast<int>(res.trace.size());
    if (m >= 4) {
      const double d1 = res.trace[m - 3].sup_diff;
      const double d2 = res.trace[m - 2].sup_diff;
      const double d3 = res.trace[m - 1].sup_diff;
      if (d2 >= d1 && d3 >= d2 && d3 > 10.0 * cfg.newton_tol) {
        fail(ErrorKind::continuation_stall,
             "monitor differences stopped decreasing at stage " + std::to_string(k + 1));
      }
    }
  }

  res.field = res.stages.back();
  res.barrier = res.trace.back().barrier;
  const double R = s.radii.back();
  res.fit = analysis::fit_asymptotics(res.field, R / 8.0, R / 2.0);
  std::vector<double> radii;
  for (int i = 0; i < 5; ++i) radii.push_back(2.0 * rho * std::pow((R / 4.0) / (2.0 * rho), i / 4.0));
  res.residue = analysis::residue(res.field, radii);
  res.relation_discrepancy = analysis::check_residue_relation(res.fit, res.residue);

  const int m = static_cast<int>(res.trace.size());
  const double last = res.trace[m - 1].sup_diff;
  const double before = res.trace[m - 2].sup_diff;
  res.converged = last < 10.0 * cfg.newton_tol || (std::isfinite(before) && last <= 0.5 * before);
  return res;
}

CrosscheckResult uniqueness_crosscheck(const ExteriorProblem& p, const ContinuationSchedule& s,
                                       const solver::SolverConfig& cfg, double amplitude,
                                       bool final_only) {
  ExteriorProblem base = p;
  base.perturbation = nullptr;
  ExteriorProblem pert = p;
  pert.perturb_final_only = final_only;
  if (amplitude != 0.0) {
    const int n = p.n;
    pert.perturbation = [amplitude, n](const Eigen::VectorXd& x) {
      // cos(theta) for n = 2, cos(phi) for n = 3.
      return amplitude * x[n == 2 ? 0 : 2] / x.norm();
    };
  } else {
    pert.perturbation = nullptr;
  }

  CrosscheckResult out;
  if (env_threads() >= 2) {
    auto fut = std::async(std::launch::async, [&] { return solve_exterior(pert, s, cfg); });
    out.base = solve_exterior(base, s, cfg);
    out.perturbed = fut.get();
  } else {
    out.base = solve_exterior(base, s, cfg);
    out.perturbed = solve_exterior(pert, s, cfg);
  }
  out.difference = monitor_difference(monitor_points(p, s), out.base.field, out.perturbed.field);
  out.stage_tolerance = out.base.trace.back().sup_diff;
  return out;
}

}  // namespace maxsurf::exterior
