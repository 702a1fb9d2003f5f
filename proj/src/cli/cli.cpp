#include "maxsurf/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "maxsurf/analysis.hpp"
#include "maxsurf/config.hpp"
#include "maxsurf/error.hpp"
#include "maxsurf/exterior.hpp"
#include "maxsurf/field_io.hpp"
#include "maxsurf/radial.hpp"
#include "maxsurf/solver.hpp"
#include "maxsurf/verify.hpp"

namespace maxsurf::cli {
namespace {

using config::json;
using Eigen::VectorXd;
namespace fs = std::filesystem;

json to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_row(std::initializer_list<double> values) {
  std::string s;
  for (double v : values) {
    if (!s.empty()) s += ',';
    s += io::format_number(v);
  }
  return s + "\n";
}

json load_config(const std::string& path) {
  const std::string text = io::read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::usage, "config " + path + ": " + e.what());
  }
}

int verbosity_of(const json& j) {
  if (!j.contains("verbosity")) return 0;
  if (!j.at("verbosity").is_number_integer()) fail(ErrorKind::usage, "verbosity must be an integer");
  return j.at("verbosity").get<int>();
}

/// Resolves relative output paths against the config's output_dir.
fs::path output_path(const json& cfg, const std::string& path) {
  fs::path p(path);
  if (p.is_relative() && cfg.is_object() && cfg.contains("output_dir")) {
    if (!cfg.at("output_dir").is_string()) fail(ErrorKind::usage, "output_dir must be a string");
    p = fs::path(cfg.at("output_dir").get<std::string>()) / p;
  }
  return p;
}

void check_common(const json& cfg) {
  if (cfg.contains("seed") && !cfg.at("seed").is_number_unsigned()) {
    fail(ErrorKind::usage, "seed must be a non-negative integer");
  }
  verbosity_of(cfg);
}

// Input of the analysis subcommands: a field CSV or a boosted radial solution.
struct Source {
  std::optional<mesh::ScalarField> field;
  std::shared_ptr<const radial::BoostedRadialSolution> exact;
  int n = 2;
};

Source source_from(const json& cfg, const std::string& field_flag) {
  Source s;
  if (!field_flag.empty()) {
    s.field = io::read_field(field_flag);
    s.n = s.field->grid->dim();
    return s;
  }
  if (!cfg.contains("source")) fail(ErrorKind::usage, "config needs 'source' (or pass --field)");
  const auto& src = cfg.at("source");
  config::require_keys(src, {"field", "exact"}, "source");
  if (src.contains("field") == src.contains("exact")) {
    fail(ErrorKind::usage, "source needs exactly one of 'field' and 'exact'");
  }
  if (src.contains("field")) {
    if (!src.at("field").is_string()) fail(ErrorKind::usage, "source.field must be a path");
    s.field = io::read_field(src.at("field").get<std::string>());
    s.n = s.field->grid->dim();
    return s;
  }
  const auto& ex = src.at("exact");
  config::require_keys(ex, {"n", "lambda", "a"}, "source.exact");
  s.n = config::integer(ex, "n", "source.exact");
  if (s.n < 2) fail(ErrorKind::usage, "source.exact.n must be at least 2");
  const double lambda = config::number(ex, "lambda", "source.exact");
  VectorXd a = ex.contains("a") ? config::vector(ex.at("a"), "source.exact.a") : VectorXd::Zero(s.n);
  if (a.size() != s.n) fail(ErrorKind::usage, "source.exact.a must have n components");
  if (!(a.norm() < 1.0)) fail(ErrorKind::usage, "source.exact.a must satisfy |a| < 1");
  s.exact = std::make_shared<radial::BoostedRadialSolution>(radial::RadialSolution(s.n, lambda),
                                                            lorentz::BoostParam(a));
  return s;
}

std::vector<double> radii_from(const json& cfg, const char* key) {
  if (!cfg.contains(key)) fail(ErrorKind::usage, std::string("config needs '") + key + "'");
  const VectorXd v = config::vector(cfg.at(key), key);
  return {v.data(), v.data() + v.size()};
}

double theta_of(const Source& s) {
  return s.field ? 1.0 - mesh::max_cell_gradient(*s.field) : std::numeric_limits<double>::quiet_NaN();
}

json summary_json(const std::optional<analysis::AsymptoticFit>& fit, double res, double discrepancy, double theta) {
  json j;
  j["a"] = fit ? to_json(fit->a) : json(nullptr);
  j["c"] = fit ? json(fit->c) : json(nullptr);
  j["d"] = fit ? json(fit->d) : json(nullptr);
  j["Res"] = finite_or_null(res);
  j["discrepancy"] = finite_or_null(discrepancy);
  j["theta_h"] = finite_or_null(theta);
  return j;
}

void emit(std::ostream& out, const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    io::write_atomic(path, contents);
  }
}

std::array<double, 2> window_from(const json& cfg, const Source& s) {
  if (cfg.contains("window")) {
    const VectorXd w = config::vector(cfg.at("window"), "window");
    if (w.size() != 2 || !(w[0] > 0.0) || !(w[1] > w[0])) {
      fail(ErrorKind::usage, "window must be [lo, hi] with 0 < lo < hi");
    }
    return {w[0], w[1]};
  }
  if (!s.field) fail(ErrorKind::usage, "exact sources need an explicit 'window'");
  const double R = s.field->grid->R_out();
  return {R / 8.0, R / 2.0};
}

analysis::AsymptoticFit fit_source(const Source& s, double lo, double hi) {
  return s.field ? analysis::fit_asymptotics(*s.field, lo, hi) : analysis::fit_asymptotics(*s.exact, lo, hi);
}

analysis::ResidueReport residue_source(const Source& s, const std::vector<double>& radii) {
  return s.field ? analysis::residue(*s.field, radii) : analysis::residue(*s.exact, radii);
}

std::vector<double> geometric(double lo, double hi, int count) {
  std::vector<double> r;
  for (int i = 0; i < count; ++i) r.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
  return r;
}

// ---- subcommands ----------------------------------------------------------

int run_constants(const std::vector<double>& lambdas, int n, const std::string& out_path, std::ostream& out) {
  if (n < 2) fail(ErrorKind::usage, "--n must be at least 2");
  std::string csv = "lambda,n,value,quadrature_error_estimate\n";
  for (double l : lambdas) {
    const auto q = n == 2 ? radial::m_const(l) : radial::M_const(l, n);
    csv += io::format_number(l) + "," + std::to_string(n) + "," + io::format_number(q.value) + "," +
           io::format_number(q.error) + "\n";
  }
  emit(out, out_path, csv);
  return ok;
}

int run_solve_annulus(const std::string& cfg_path, const std::string& out_path, const std::string& report_path,
                      std::ostream& out) {
  const json cfg = load_config(cfg_path);
  check_common(cfg);
  const auto ac = config::annulus_from_json(cfg);
  auto grid = mesh::build_grid(ac.grid);
  const auto bc = solver::sample_boundary(*grid, ac.inner, ac.outer);
  const auto sol = solver::solve_dirichlet(grid, bc, ac.solver);

  json report;
  report["iterations"] = sol.report.iterations;
  report["residuals"] = sol.report.residuals;
  report["energies"] = sol.report.energies;
  report["energy"] = sol.report.energy;
  report["theta_h"] = sol.report.theta_h;
  report["linear_iterations"] = sol.report.linear_iterations;
  report["mesh_width"] = grid->mesh_width();
  report["grid"] = config::grid_to_json(ac.grid);

  const fs::path field_file = output_path(cfg, out_path);
  io::write_field(field_file, sol.field);
  fs::path report_file;
  if (!report_path.empty()) {
    report_file = output_path(cfg, report_path);
  } else {
    report_file = field_file;
    report_file.replace_extension(".report.json");
  }
  io::write_atomic(report_file, report.dump(2) + "\n");
  if (verbosity_of(cfg) > 0) out << report.dump(2) << "\n";
  return ok;
}

int run_solve_exterior(const std::string& cfg_path, const std::string& out_dir, std::ostream& out) {
  const json cfg = load_config(cfg_path);
  check_common(cfg);
  const auto ec = config::exterior_from_json(cfg);
  const auto res = exterior::solve_exterior(ec.problem, ec.schedule, ec.solver);
  const fs::path dir = output_path(cfg, out_dir);

  std::string trace = "stage,R,sup_diff,newton_iters,outer_shift,theta_h,barrier_lower,barrier_upper,mesh_width\n";
  for (size_t k = 0; k < res.stages.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "stage_%02zu.csv", k + 1);
    io::write_field(dir / name, res.stages[k]);
    const auto& st = res.trace[k];
    trace += std::to_string(st.stage) + "," + io::format_number(st.R) + "," + io::format_number(st.sup_diff) + "," +
             std::to_string(st.newton_iters) + "," + io::format_number(st.outer_shift) + "," +
             io::format_number(st.theta_h) + "," + io::format_number(st.barrier.lower) + "," +
             io::format_number(st.barrier.upper) + "," + io::format_number(st.mesh_width) + "\n";
  }
  io::write_atomic(dir / "trace.csv", trace);

  json summary;
  summary["a_fit"] = to_json(res.fit.a);
  summary["c_fit"] = res.fit.c;
  summary["d_fit"] = res.fit.d;
  summary["fit_window"] = {res.fit.window_lo, res.fit.window_hi};
  summary["rms_residual"] = res.fit.rms_residual;
  summary["Res"] = res.residue.mean();
  summary["residue_spread"] = res.residue.spread;
  summary["relation_discrepancy"] = res.relation_discrepancy;
  summary["theta_h"] = res.trace.back().theta_h;
  summary["barrier_violations"] = {{"lower", res.barrier.lower}, {"upper", res.barrier.upper}};
  summary["converged"] = res.converged;
  io::write_atomic(dir / "summary.json", summary.dump(2) + "\n");
  if (verbosity_of(cfg) > 0) out << summary.dump(2) << "\n";
  return ok;
}

int run_residue(const json& cfg, const std::string& field_flag, const std::string& out_path,
                const std::string& summary_path, std::ostream& out) {
  config::require_keys(cfg, {"source", "radii", "seed", "output_dir", "verbosity"}, "config");
  check_common(cfg);
  const Source s = source_from(cfg, field_flag);
  const auto rep = residue_source(s, radii_from(cfg, "radii"));
  std::string csv = "radius,value,raw_flux\n";
  for (size_t i = 0; i < rep.radii.size(); ++i) csv += csv_row({rep.radii[i], rep.values[i], rep.raw_flux[i]});
  if (!out_path.empty()) io::write_atomic(output_path(cfg, out_path), csv);
  json summary = summary_json(std::nullopt, rep.mean(), std::numeric_limits<double>::quiet_NaN(), theta_of(s));
  summary["spread"] = rep.spread;
  emit(out, summary_path.empty() ? "" : output_path(cfg, summary_path).string(), summary.dump(2) + "\n");
  return ok;
}

int run_fit(const json& cfg, const std::string& field_flag, const std::string& out_path,
            const std::string& summary_path, std::ostream& out) {
  config::require_keys(cfg, {"source", "window", "seed", "output_dir", "verbosity"}, "config");
  check_common(cfg);
  const Source s = source_from(cfg, field_flag);
  const auto [lo, hi] = window_from(cfg, s);
  const auto fit = fit_source(s, lo, hi);
  const auto rep = residue_source(s, geometric(lo, hi, 5));
  const double disc = analysis::check_residue_relation(fit, rep);

  std::string csv = "window_lo,window_hi";
  for (int i = 0; i < fit.a.size(); ++i) csv += ",a_" + std::to_string(i + 1);
  csv += ",c,d,rms_residual,samples\n";
  csv += io::format_number(fit.window_lo) + "," + io::format_number(fit.window_hi);
  for (int i = 0; i < fit.a.size(); ++i) csv += "," + io::format_number(fit.a[i]);
  csv += "," + io::format_number(fit.c) + "," + io::format_number(fit.d) + "," + io::format_number(fit.rms_residual) +
         "," + std::to_string(fit.samples) + "\n";
  if (!out_path.empty()) io::write_atomic(output_path(cfg, out_path), csv);
  json summary = summary_json(fit, rep.mean(), disc, theta_of(s));
  summary["rms_residual"] = fit.rms_residual;
  emit(out, summary_path.empty() ? "" : output_path(cfg, summary_path).string(), summary.dump(2) + "\n");
  return ok;
}

int run_blowdown(const json& cfg, const std::string& field_flag, const std::string& out_path,
                 const std::string& summary_path, std::ostream& out) {
  config::require_keys(cfg, {"source", "scales", "a", "window", "seed", "output_dir", "verbosity"}, "config");
  check_common(cfg);
  const Source s = source_from(cfg, field_flag);
  const auto scales = radii_from(cfg, "scales");
  std::optional<analysis::AsymptoticFit> fit;
  VectorXd a;
  if (cfg.contains("a")) {
    a = config::vector(cfg.at("a"), "a");
    if (a.size() != s.n) fail(ErrorKind::usage, "a must have n components");
  } else if (s.exact) {
    a = s.exact->boost().param().velocity();
  } else {
    const auto [lo, hi] = window_from(cfg, s);
    fit = fit_source(s, lo, hi);
    a = fit->a;
  }
  const auto seq = s.field ? analysis::blowdown_sequence(*s.field, scales, a)
                           : analysis::blowdown_sequence(*s.exact, scales, a);
  std::string csv = "r,sup_distance,lipschitz\n";
  for (const auto& b : seq) csv += csv_row({b.r, b.sup_distance, b.lipschitz});
  if (!out_path.empty()) io::write_atomic(output_path(cfg, out_path), csv);
  json summary = summary_json(fit, std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN(), theta_of(s));
  summary["a"] = to_json(a);
  emit(out, summary_path.empty() ? "" : output_path(cfg, summary_path).string(), summary.dump(2) + "\n");
  return ok;
}

int run_curvature(const json& cfg, const std::string& field_flag, const std::string& out_path,
                  const std::string& summary_path, std::ostream& out) {
  config::require_keys(cfg, {"source", "grid", "seed", "output_dir", "verbosity"}, "config");
  check_common(cfg);
  Source s = source_from(cfg, field_flag);
  if (s.exact) {
    if (!cfg.contains("grid")) fail(ErrorKind::usage, "exact sources need a 'grid' to sample on");
    const auto spec = config::grid_from_json(cfg.at("grid"));
    if (spec.n != s.n) fail(ErrorKind::usage, "grid.n must match source.exact.n");
    auto w = s.exact;
    s.field = mesh::sample(mesh::build_grid(spec), [w](const VectorXd& x) { return w->value(x); });
  }
  const auto nodal = analysis::second_ff_norm(*s.field);
  const auto prof = analysis::ring_max_scaled(*s.field, nodal);
  std::string csv = "radius,max_II_times_r\n";
  double peak = 0.0;
  for (size_t i = 0; i < prof.radius.size(); ++i) {
    csv += csv_row({prof.radius[i], prof.value[i]});
    peak = std::max(peak, prof.value[i]);
  }
  if (!out_path.empty()) io::write_atomic(output_path(cfg, out_path), csv);
  json summary = summary_json(std::nullopt, std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN(), theta_of(s));
  summary["max_II_times_r"] = peak;
  emit(out, summary_path.empty() ? "" : output_path(cfg, summary_path).string(), summary.dump(2) + "\n");
  return ok;
}

int run_verify(const std::string& suite, int n, std::uint64_t seed, std::ostream& out) {
  const auto ids = verify::suite_criteria(suite);
  verify::Options opt;
  opt.n = n;
  opt.seed = seed;
  int failures = 0;
  for (int id : ids) {
    const auto r = verify::run_criterion(id, opt);
    out << verify::format_line(r) << "\n";
    for (const auto& c : r.checks) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " = %.6g (%s %.3g)", c.measured, c.relation.c_str(), c.tolerance);
      out << "    " << (c.passed ? "ok   " : "FAIL ") << c.name << buf << "\n";
    }
    if (!r.passed()) ++failures;
  }
  out << suite << ": " << (ids.size() - failures) << "/" << ids.size() << " criteria passed\n";
  return failures == 0 ? ok : check_failed;
}

void write_error(std::ostream& err, const std::string& kind, const std::string& message, int code,
                 const json& diagnostics = nullptr) {
  json j;
  j["kind"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  if (!diagnostics.is_null()) j["diagnostics"] = diagnostics;
  err << j.dump() << "\n";
}

json load_optional(const std::string& path) {
  return path.empty() ? json::object() : load_config(path);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximal hypersurfaces in Lorentz-Minkowski space: solvers and diagnostics", "maxsurf"};
  app.require_subcommand(1);

  std::vector<double> lambdas;
  int n = 2;
  std::string cfg_path, out_path, report_path, summary_path, field_path, suite;
  std::uint64_t seed = verify::Options{}.seed;

  auto* constants = app.add_subcommand("constants", "m(lambda) for n = 2, M(lambda, n) for n >= 3, as CSV");
  constants->add_option("--lambda", lambdas, "flux parameter(s)")->required();
  constants->add_option("--n", n, "dimension")->default_val(2);
  constants->add_option("--out", out_path, "CSV path (default stdout)");

  auto* annulus = app.add_subcommand("solve-annulus", "Dirichlet problem on an annulus");
  annulus->add_option("--config", cfg_path, "JSON config")->required();
  annulus->add_option("--out", out_path, "field CSV")->required();
  annulus->add_option("--report", report_path, "run report JSON (default: --out with extension .report.json)");

  auto* ext = app.add_subcommand("solve-exterior", "exterior problem by continuation in R");
  ext->add_option("--config", cfg_path, "JSON problem")->required();
  ext->add_option("--out", out_path, "output directory")->required();

  std::vector<CLI::App*> analysis_cmds;
  for (const char* name : {"residue", "fit", "blowdown", "curvature"}) {
    auto* sub = app.add_subcommand(name, std::string(name) + " of a field CSV or an exact solution");
    sub->add_option("--config", cfg_path, "JSON config");
    sub->add_option("--field", field_path, "field CSV (overrides config source)");
    sub->add_option("--out", out_path, "CSV path");
    sub->add_option("--summary", summary_path, "summary JSON path (default stdout)");
    analysis_cmds.push_back(sub);
  }

  auto* ver = app.add_subcommand("verify", "run an acceptance suite");
  ver->add_option("--suite", suite, "lorentz, radial, solver, residue, asymptotics or exterior")->required();
  ver->add_option("--n", n, "restrict dimension-dependent checks (0 = all)")->default_val(0);
  ver->add_option("--seed", seed, "seed for randomized checks");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    write_error(err, "usage", e.what(), usage_error);
    return usage_error;
  }

  try {
    if (constants->parsed()) return run_constants(lambdas, n, out_path, out);
    if (annulus->parsed()) return run_solve_annulus(cfg_path, out_path, report_path, out);
    if (ext->parsed()) return run_solve_exterior(cfg_path, out_path, out);
    if (ver->parsed()) return run_verify(suite, n, seed, out);
    for (auto* sub : analysis_cmds) {
      if (!sub->parsed()) continue;
      if (cfg_path.empty() && field_path.empty()) fail(ErrorKind::usage, "pass --config or --field");
      const json cfg = load_optional(cfg_path);
      const std::string name = sub->get_name();
      if (name == "residue") return run_residue(cfg, field_path, out_path, summary_path, out);
      if (name == "fit") return run_fit(cfg, field_path, out_path, summary_path, out);
      if (name == "blowdown") return run_blowdown(cfg, field_path, out_path, summary_path, out);
      return run_curvature(cfg, field_path, out_path, summary_path, out);
    }
    fail(ErrorKind::usage, "no subcommand");
  } catch (const solver::ConvergenceError& e) {
    json diag;
    diag["iterations"] = e.report().iterations;
    diag["residuals"] = e.report().residuals;
    write_error(err, "convergence", e.what(), numerical_error, diag);
    return numerical_error;
  } catch (const Error& e) {
    const bool usage = e.kind() == ErrorKind::usage;
    write_error(err, std::string(to_string(e.kind())), e.what(), usage ? usage_error : numerical_error);
    return usage ? usage_error : numerical_error;
  } catch (const json::exception& e) {
    write_error(err, "usage", e.what(), usage_error);
    return usage_error;
  } catch (const std::exception& e) {
    write_error(err, "internal", e.what(), numerical_error);
    return numerical_error;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace maxsurf::cli
