#pragma once

// JSON <-> domain types for the command-line tool. Every object rejects keys
// it does not know.

#include <initializer_list>
#include <string>

#include "maxsurf/exterior.hpp"
#include "maxsurf/mesh.hpp"
#include "maxsurf/solver.hpp"
#include "json.hpp"

namespace maxsurf::config {

using json = nlohmann::json;

/// Throws a usage error naming the first key of `obj` outside `allowed`.
void require_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where);

mesh::HoleSpec hole_from_json(const json& j);
json hole_to_json(const mesh::HoleSpec& h);

json grid_to_json(const mesh::GridSpec& g);
mesh::GridSpec grid_from_json(const json& j);

/// Boundary or perturbation function of x in R^n:
///   {"type": "constant", "value": v}
///   {"type": "affine", "a": [...], "b": v}
///   {"type": "radial", "lambda": l}            w_lambda(|x|)
///   {"type": "boosted", "lambda": l, "a": [...]} w_lambda^a(x)
///   {"type": "fourier", "mean": m, "cos": [...], "sin": [...]}  in the grid angle
solver::PointFunction function_from_json(const json& j, int n);

solver::SolverConfig solver_from_json(const json& j);

struct AnnulusConfig {
  mesh::GridSpec grid;
  solver::PointFunction inner;
  solver::PointFunction outer;
  solver::SolverConfig solver;
};
AnnulusConfig annulus_from_json(const json& j);

struct ExteriorConfig {
  exterior::ExteriorProblem problem;
  exterior::ContinuationSchedule schedule;
  solver::SolverConfig solver;
};
ExteriorConfig exterior_from_json(const json& j);

double number(const json& j, const char* key, const std::string& where);
int integer(const json& j, const char* key, const std::string& where);
Eigen::VectorXd vector(const json& j, const std::string& where);

}  // namespace maxsurf::config
