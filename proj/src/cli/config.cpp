#include "maxsurf/config.hpp"

#include <cmath>
#include <memory>

#include "maxsurf/error.hpp"
#include "maxsurf/radial.hpp"

namespace maxsurf::config {

void require_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) fail(ErrorKind::usage, where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) fail(ErrorKind::usage, "unknown key '" + item.key() + "' in " + where);
  }
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(ErrorKind::usage, where + " needs '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) fail(ErrorKind::usage, where + "." + key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(ErrorKind::usage, where + "." + key + " must be finite");
  return d;
}

int integer(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(ErrorKind::usage, where + " needs '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number_integer()) fail(ErrorKind::usage, where + "." + key + " must be an integer");
  return v.get<int>();
}

Eigen::VectorXd vector(const json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorKind::usage, where + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ErrorKind::usage, where + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

namespace {

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

int integer_or(const json& j, const char* key, int fallback, const std::string& where) {
  return j.contains(key) ? integer(j, key, where) : fallback;
}

std::string string_of(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) fail(ErrorKind::usage, where + "." + key + " must be a string");
  return j.at(key).get<std::string>();
}

Eigen::VectorXd velocity(const json& j, int n, const std::string& where) {
  Eigen::VectorXd a = vector(j, where);
  if (a.size() != n) fail(ErrorKind::usage, where + " must have " + std::to_string(n) + " components");
  return a;
}

/// Angle of x in the grid convention: theta for n = 2, polar angle from +e_n otherwise.
double grid_angle(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  if (n == 2) return std::atan2(x[1], x[0]);
  const double r = x.norm();
  return r > 0.0 ? std::acos(std::clamp(x[n - 1] / r, -1.0, 1.0)) : 0.0;
}

}  // namespace

mesh::HoleSpec hole_from_json(const json& j) {
  const std::string where = "hole";
  if (!j.is_object()) fail(ErrorKind::usage, "hole must be an object");
  const std::string kind = string_of(j, "kind", where);
  if (kind == "circle") {
    require_keys(j, {"kind", "radius"}, where);
    return mesh::HoleSpec::circle(number(j, "radius", where));
  }
  if (kind == "star") {
    require_keys(j, {"kind", "radius", "amplitude", "mode"}, where);
    return mesh::HoleSpec::star(number(j, "radius", where), number(j, "amplitude", where),
                                integer(j, "mode", where));
  }
  if (kind == "samples") {
    require_keys(j, {"kind", "radii"}, where);
    const auto v = vector(j.at("radii"), "hole.radii");
    return mesh::HoleSpec::star_samples(std::vector<double>(v.data(), v.data() + v.size()));
  }
  if (kind == "point") {
    require_keys(j, {"kind"}, where);
    return mesh::HoleSpec::point();
  }
  fail(ErrorKind::usage, "hole.kind must be circle, star, samples or point");
}

json hole_to_json(const mesh::HoleSpec& h) {
  switch (h.kind) {
    case mesh::HoleSpec::Kind::point:
      return {{"kind", "point"}};
    case mesh::HoleSpec::Kind::star:
      if (!h.samples.empty()) return {{"kind", "samples"}, {"radii", h.samples}};
      return {{"kind", "star"}, {"radius", h.radius}, {"amplitude", h.amplitude}, {"mode", h.mode}};
    case mesh::HoleSpec::Kind::circle:
      break;
  }
  return {{"kind", "circle"}, {"radius", h.radius}};
}

json grid_to_json(const mesh::GridSpec& g) {
  return {{"n", g.n},         {"hole", hole_to_json(g.hole)}, {"R_out", g.R_out},
          {"N_r", g.N_r},     {"N_ang", g.N_ang},            {"grading", g.grading}};
}

mesh::GridSpec grid_from_json(const json& j) {
  const std::string where = "grid";
  require_keys(j, {"n", "hole", "R_out", "N_r", "N_ang", "grading"}, where);
  mesh::GridSpec g;
  g.n = integer(j, "n", where);
  g.hole = j.contains("hole") ? hole_from_json(j.at("hole")) : mesh::HoleSpec::circle(1.0);
  g.R_out = number(j, "R_out", where);
  g.N_r = integer(j, "N_r", where);
  g.N_ang = integer(j, "N_ang", where);
  g.grading = number_or(j, "grading", g.grading, where);
  return g;
}

solver::PointFunction function_from_json(const json& j, int n) {
  const std::string where = "function";
  if (!j.is_object()) fail(ErrorKind::usage, "boundary function must be an object with a 'type'");
  const std::string type = string_of(j, "type", where);
  if (type == "constant") {
    require_keys(j, {"type", "value"}, where);
    const double v = number(j, "value", where);
    return [v](const Eigen::VectorXd&) { return v; };
  }
  if (type == "affine") {
    require_keys(j, {"type", "a", "b"}, where);
    const Eigen::VectorXd a = velocity(j.at("a"), n, "function.a");
    const double b = number_or(j, "b", 0.0, where);
    return [a, b](const Eigen::VectorXd& x) { return a.dot(x) + b; };
  }
  if (type == "radial" || type == "boosted") {
    if (type == "radial") {
      require_keys(j, {"type", "lambda"}, where);
    } else {
      require_keys(j, {"type", "lambda", "a"}, where);
    }
    const double lambda = number(j, "lambda", where);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    if (type == "boosted") a = velocity(j.at("a"), n, "function.a");
    auto w = std::make_shared<const radial::BoostedRadialSolution>(radial::RadialSolution(n, lambda),
                                                                    lorentz::BoostParam(a));
    return [w](const Eigen::VectorXd& x) { return w->value(x); };
  }
  if (type == "fourier") {
    require_keys(j, {"type", "mean", "cos", "sin"}, where);
    const double mean = number_or(j, "mean", 0.0, where);
    const Eigen::VectorXd c = j.contains("cos") ? vector(j.at("cos"), "function.cos") : Eigen::VectorXd();
    const Eigen::VectorXd s = j.contains("sin") ? vector(j.at("sin"), "function.sin") : Eigen::VectorXd();
    return [mean, c, s](const Eigen::VectorXd& x) {
      const double t = grid_angle(x);
      double v = mean;
      for (Eigen::Index k = 0; k < c.size(); ++k) v += c[k] * std::cos((k + 1) * t);
      for (Eigen::Index k = 0; k < s.size(); ++k) v += s[k] * std::sin((k + 1) * t);
      return v;
    };
  }
  fail(ErrorKind::usage, "function.type must be constant, affine, radial, boosted or fourier");
}

solver::SolverConfig solver_from_json(const json& j) {
  solver::SolverConfig cfg;
  const std::string where = "config";
  cfg.newton_tol = number_or(j, "newton_tol", cfg.newton_tol, where);
  cfg.max_iter = integer_or(j, "max_iter", cfg.max_iter, where);
  cfg.spacelike_cap = number_or(j, "spacelike_cap", cfg.spacelike_cap, where);
  cfg.linesearch_shrink = number_or(j, "linesearch_shrink", cfg.linesearch_shrink, where);
  cfg.linear_tol = number_or(j, "linear_tol", cfg.linear_tol, where);
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(ErrorKind::usage, e.what());
  }
  return cfg;
}

AnnulusConfig annulus_from_json(const json& j) {
  const std::string where = "config";
  require_keys(j, {"n", "hole", "R", "N_r", "N_ang", "grading", "bc", "newton_tol", "max_iter", "spacelike_cap",
                   "linesearch_shrink", "linear_tol", "seed", "output_dir", "verbosity"},
               where);
  AnnulusConfig cfg;
  cfg.grid.n = integer_or(j, "n", 2, where);
  if (cfg.grid.n != 2 && cfg.grid.n != 3) fail(ErrorKind::usage, "config.n must be 2 or 3");
  cfg.grid.hole = j.contains("hole") ? hole_from_json(j.at("hole")) : mesh::HoleSpec::circle(1.0);
  cfg.grid.R_out = number(j, "R", where);
  cfg.grid.N_r = integer(j, "N_r", where);
  cfg.grid.N_ang = integer(j, "N_ang", where);
  cfg.grid.grading = number_or(j, "grading", cfg.grid.grading, where);
  if (!j.contains("bc")) fail(ErrorKind::usage, "config needs 'bc'");
  const auto& bc = j.at("bc");
  require_keys(bc, {"inner", "outer"}, "bc");
  if (!bc.contains("inner") || !bc.contains("outer")) fail(ErrorKind::usage, "bc needs 'inner' and 'outer'");
  cfg.inner = function_from_json(bc.at("inner"), cfg.grid.n);
  cfg.outer = function_from_json(bc.at("outer"), cfg.grid.n);
  cfg.solver = solver_from_json(j);
  return cfg;
}

ExteriorConfig exterior_from_json(const json& j) {
  const std::string where = "problem";
  require_keys(j, {"n", "hole", "g", "a", "d", "c", "R_max", "radii", "nodes_per_octave", "N_ang", "outer_shift",
                   "newton_tol", "max_iter", "spacelike_cap", "linesearch_shrink", "linear_tol", "seed",
                   "output_dir", "verbosity"},
               where);
  ExteriorConfig cfg;
  auto& p = cfg.problem;
  p.n = integer_or(j, "n", 2, where);
  if (p.n != 2 && p.n != 3) fail(ErrorKind::usage, "problem.n must be 2 or 3");
  p.hole = j.contains("hole") ? hole_from_json(j.at("hole")) : mesh::HoleSpec::circle(1.0);
  p.g = j.contains("g") ? function_from_json(j.at("g"), p.n) : [](const Eigen::VectorXd&) { return 0.0; };
  p.a = j.contains("a") ? velocity(j.at("a"), p.n, "problem.a") : Eigen::VectorXd::Zero(p.n);
  p.d = number_or(j, "d", p.d, where);
  p.c = number_or(j, "c", p.c, where);
  if (j.contains("outer_shift")) {
    if (!j.at("outer_shift").is_boolean()) fail(ErrorKind::usage, "problem.outer_shift must be a boolean");
    p.outer_shift = j.at("outer_shift").get<bool>();
  }
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorKind::usage, e.what());
  }

  double rho = p.hole.radius;
  if (!p.hole.samples.empty()) {
    for (double r : p.hole.samples) rho = std::max(rho, r);
  } else if (p.hole.kind == mesh::HoleSpec::Kind::star) {
    rho = p.hole.radius * (1.0 + std::abs(p.hole.amplitude));
  }
  if (j.contains("radii")) {
    const auto r = vector(j.at("radii"), "problem.radii");
    cfg.schedule.radii.assign(r.data(), r.data() + r.size());
  } else {
    cfg.schedule = exterior::ContinuationSchedule::geometric(rho, number_or(j, "R_max", 128.0 * rho, where));
  }
  cfg.schedule.nodes_per_octave = integer_or(j, "nodes_per_octave", cfg.schedule.nodes_per_octave, where);
  cfg.schedule.N_ang = integer_or(j, "N_ang", cfg.schedule.N_ang, where);
  try {
    cfg.schedule.validate(rho);
  } catch (const Error& e) {
    fail(ErrorKind::usage, e.what());
  }
  cfg.solver = solver_from_json(j);
  return cfg;
}

}  // namespace maxsurf::config
