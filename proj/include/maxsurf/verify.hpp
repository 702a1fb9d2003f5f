#pragma once

// Acceptance checks shared by the acceptance test binary and `maxsurf verify`.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "maxsurf/exterior.hpp"

namespace maxsurf::verify {

struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string relation = "<=";  // how measured relates to tolerance when passing
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;
  double time_limit = 0.0;  // 0 = none

  bool passed() const;
  /// Name, measured value and tolerance of the worst failing check (or the
  /// first check when everything passed).
  std::string summary() const;
};

struct Options {
  std::uint64_t seed = 20240611;
  int n = 0;  // restrict dimension-dependent checks to this n; 0 = all
};

constexpr int kCriteria = 11;

CriterionResult run_criterion(int id, const Options& opt = {});

/// Criterion ids covered by a suite name: lorentz, radial, solver, residue,
/// asymptotics, exterior. Throws a usage error for anything else.
std::vector<int> suite_criteria(std::string_view suite);

/// "criterion 7 FAIL cross term: remainder ratio=... (tol ...)"
std::string format_line(const CriterionResult& r);

/// Problem set for the continuation criteria: g = 0 on the unit hole.
struct NamedProblem {
  std::string name;
  exterior::ExteriorProblem problem;
};
std::vector<NamedProblem> continuation_problems(int n_filter = 0);

/// Continuation runs of continuation_problems() on R = 16..128, computed once
/// per process and shared by the criteria that inspect them.
struct ProblemRun {
  NamedProblem problem;
  exterior::ContinuationSchedule schedule;
  exterior::ExteriorResult result;
  double seconds = 0.0;
};
const std::vector<ProblemRun>& continuation_runs(int n_filter = 0);

}  // namespace maxsurf::verify
