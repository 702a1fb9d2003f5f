#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "maxsurf/analysis.hpp"
#include "maxsurf/cli.hpp"
#include "maxsurf/exterior.hpp"
#include "maxsurf/lorentz.hpp"
#include "maxsurf/mesh.hpp"
#include "maxsurf/radial.hpp"
#include "maxsurf/solver.hpp"

namespace py = pybind11;
using namespace maxsurf;

namespace {

// Grid and field travel as plain data: (spec, values) with points on demand.
struct Field {
  mesh::ScalarField f;

  Eigen::MatrixXd points() const {
    const auto& g = *f.grid;
    Eigen::MatrixXd P(g.size(), g.dim());
    for (int k = 0; k < g.size(); ++k) P.row(k) = g.point(k).transpose();
    return P;
  }
};

mesh::GridSpec grid_spec(int n, double hole_radius, double R, int N_r, int N_ang, double grading) {
  mesh::GridSpec g;
  g.n = n;
  g.hole = mesh::HoleSpec::circle(hole_radius);
  g.R_out = R;
  g.N_r = N_r;
  g.N_ang = N_ang;
  g.grading = grading;
  return g;
}

solver::SolverConfig solver_config(double newton_tol, int max_iter) {
  solver::SolverConfig c;
  c.newton_tol = newton_tol;
  c.max_iter = max_iter;
  c.validate();
  return c;
}

py::dict fit_dict(const analysis::AsymptoticFit& fit) {
  py::dict d;
  d["a"] = fit.a;
  d["c"] = fit.c;
  d["d"] = fit.d;
  d["rms_residual"] = fit.rms_residual;
  d["window"] = py::make_tuple(fit.window_lo, fit.window_hi);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Maximal graphs in Lorentz-Minkowski space: radial solutions, boosts, solvers.";

  static py::exception<Error> error(m, "MaxsurfError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  m.def("boost", [](const Eigen::VectorXd& a, const Eigen::VectorXd& x, double t) {
    const auto Y = lorentz::LorentzBoost(lorentz::BoostParam(a)).apply({x, t});
    return py::make_tuple(Y.x, Y.t);
  }, py::arg("a"), py::arg("x"), py::arg("t"), "L_a(x, t) as (x', t').");

  m.def("w_value", [](int n, double lambda, double r) { return radial::RadialSolution(n, lambda).value(r); },
        py::arg("n"), py::arg("lam"), py::arg("r"));
  m.def("m_const", [](double lambda) { return radial::m_const(lambda).value; }, py::arg("lam"));
  m.def("M_const", [](double lambda, int n) { return radial::M_const(lambda, n).value; }, py::arg("lam"),
        py::arg("n"));

  py::class_<radial::BoostedRadialSolution>(m, "BoostedRadial")
      .def(py::init([](int n, double lambda, const Eigen::VectorXd& a) {
             return radial::BoostedRadialSolution(radial::RadialSolution(n, lambda), lorentz::BoostParam(a));
           }),
           py::arg("n"), py::arg("lam"), py::arg("a"))
      .def("value", &radial::BoostedRadialSolution::value)
      .def("gradient", [](const radial::BoostedRadialSolution& w, const Eigen::VectorXd& x) {
        return w.evaluate(x).gradient;
      });

  py::class_<Field>(m, "Field")
      .def_property_readonly("values", [](const Field& f) { return f.f.values; })
      .def_property_readonly("points", &Field::points)
      .def_property_readonly("mesh_width", [](const Field& f) { return f.f.grid->mesh_width(); })
      .def("__call__", [](const Field& f, const Eigen::VectorXd& x) { return mesh::interp(f.f, x); });

  m.def("solve_annulus",
        [](int n, double R, int N_r, int N_ang, const solver::PointFunction& inner,
           const solver::PointFunction& outer, double grading, double newton_tol, int max_iter) {
          auto grid = mesh::build_grid(grid_spec(n, 1.0, R, N_r, N_ang, grading));
          const auto bc = solver::sample_boundary(*grid, inner, outer);
          auto sol = solver::solve_dirichlet(grid, bc, solver_config(newton_tol, max_iter));
          py::dict rep;
          rep["iterations"] = sol.report.iterations;
          rep["residuals"] = sol.report.residuals;
          rep["energy"] = sol.report.energy;
          rep["theta_h"] = sol.report.theta_h;
          return py::make_tuple(Field{sol.field}, rep);
        },
        py::arg("n"), py::arg("R"), py::arg("N_r"), py::arg("N_ang"), py::arg("inner"), py::arg("outer"),
        py::arg("grading") = 1.0, py::arg("newton_tol") = 1e-10, py::arg("max_iter") = 50,
        "Dirichlet problem on 1 <= |x| <= R; returns (field, report).");

  m.def("residue", [](const Field& f, const std::vector<double>& radii) { return analysis::residue(f.f, radii).values; },
        py::arg("field"), py::arg("radii"));
  m.def("residue_exact",
        [](const radial::BoostedRadialSolution& w, const std::vector<double>& radii) {
          return analysis::residue(w, radii).values;
        },
        py::arg("w"), py::arg("radii"));
  m.def("fit", [](const Field& f, double lo, double hi) { return fit_dict(analysis::fit_asymptotics(f.f, lo, hi)); },
        py::arg("field"), py::arg("lo"), py::arg("hi"));
  m.def("fit_exact",
        [](const radial::BoostedRadialSolution& w, double lo, double hi) {
          return fit_dict(analysis::fit_asymptotics(w, lo, hi));
        },
        py::arg("w"), py::arg("lo"), py::arg("hi"));

  m.def("solve_exterior",
        [](int n, const Eigen::VectorXd& a, double d, double c, const solver::PointFunction& g,
           const std::vector<double>& radii, int nodes_per_octave, int N_ang) {
          exterior::ExteriorProblem p;
          p.n = n;
          p.a = a;
          p.d = d;
          p.c = c;
          if (g) p.g = g;
          exterior::ContinuationSchedule s;
          s.radii = radii.empty() ? exterior::ContinuationSchedule::geometric(1.0, 128.0).radii : radii;
          s.nodes_per_octave = nodes_per_octave;
          s.N_ang = N_ang;
          const auto res = exterior::solve_exterior(p, s, {});
          py::list trace;
          for (const auto& r : res.trace) {
            py::dict t;
            t["R"] = r.R;
            t["sup_diff"] = r.sup_diff;
            t["theta_h"] = r.theta_h;
            trace.append(t);
          }
          py::dict out;
          out["fit"] = fit_dict(res.fit);
          out["residue"] = res.residue.mean();
          out["relation_discrepancy"] = res.relation_discrepancy;
          out["trace"] = trace;
          out["converged"] = res.converged;
          return py::make_tuple(Field{res.field}, out);
        },
        py::arg("n"), py::arg("a"), py::arg("d") = 1.0, py::arg("c") = 0.0, py::arg("g") = nullptr,
        py::arg("radii") = std::vector<double>{}, py::arg("nodes_per_octave") = 16, py::arg("N_ang") = 64,
        "Exterior problem outside the unit circle/sphere by continuation in R.");

  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command-line tool in process; returns (exit code, stdout, stderr).");
}
