#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "convfold/appendix3d.hpp"
#include "convfold/cli.hpp"
#include "convfold/concavity.hpp"
#include "convfold/corpus.hpp"
#include "convfold/folding.hpp"
#include "convfold/plap_solver.hpp"

namespace py = pybind11;
using namespace convfold;

namespace {

Eigen::MatrixX2d vertices(const ConvexPolygon& k) {
  Eigen::MatrixX2d m(k.size(), 2);
  for (std::size_t i = 0; i < k.size(); ++i) m.row(i) = k.vertices()[i].transpose();
  return m;
}

ConvexPolygon polygon(const Eigen::MatrixX2d& m) {
  std::vector<Vec2> pts;
  for (Eigen::Index i = 0; i < m.rows(); ++i) pts.emplace_back(m(i, 0), m(i, 1));
  return ConvexPolygon::hull(pts);
}

Reaction reaction(const std::string& kind, double p, double c, double q) {
  if (kind == "torsion") return Reaction::torsion(p);
  if (kind == "power") return Reaction::power(p, c, q > 0 ? q : (1 + p) / 2);
  throw Error(ErrorKind::InvalidReaction, "reaction must be torsion or power");
}

}  // namespace

PYBIND11_MODULE(_convfold, m) {
  m.doc() = "Convex folding geometry and a p-Laplacian solver";

  py::register_exception<Error>(m, "ConvfoldError");

  m.def("builtin_domain", [](const std::string& name) { return vertices(builtin_domain(name)); });
  m.def("builtin_domain_names", &builtin_domain_names);
  m.def("resolve_domain", [](const std::string& spec) { return vertices(resolve_domain(spec)); });

  m.def("width", [](const Eigen::MatrixX2d& v) {
    const auto w = width(polygon(v));
    return py::make_tuple(w.width, Vec2(w.direction.vector()));
  });

  m.def("shadow_section", [](const Eigen::MatrixX2d& v) {
    const auto s = shadow_section_for_min_breadth(polygon(v));
    py::dict d;
    d["lambda"] = s.cut.lambda;
    d["omega"] = Vec2(s.cut.omega.vector());
    d["chord"] = py::make_tuple(s.chord.a, s.chord.b);
    d["width"] = s.width;
    d["projection_equals_section"] = s.projection_equals_section;
    return d;
  });

  m.def("folding_height", [](const Eigen::MatrixX2d& v, const Vec2& omega) {
    return folding_profile(polygon(v), Direction2(omega)).height;
  });

  m.def(
      "lemma_fold_check",
      [](const Eigen::MatrixX2d& v, double lambda, const Vec2& omega) {
        const auto r = lemma_fold_check(polygon(v), Cut2(lambda, Direction2(omega)));
        py::dict d;
        d["f_plus"] = r.f_plus;
        d["f_minus"] = r.f_minus;
        d["breadth"] = r.breadth;
        d["quarter_breadth"] = r.quarter_breadth;
        d["mu"] = r.mu;
        d["mu_foldable"] = r.mu_foldable;
        d["passed"] = r.passed;
        return d;
      },
      py::arg("vertices"), py::arg("lambda_"), py::arg("omega"));

  m.def(
      "heart",
      [](const Eigen::MatrixX2d& v, int n) { return vertices(heart(polygon(v), n).body); },
      py::arg("vertices"), py::arg("n_directions") = 720);

  m.def(
      "max_folding_height_kalpha",
      [](double alpha, int n) {
        KAlphaSpec s;
        s.alpha = alpha;
        return verify_folding_bound(s, n).max_height;
      },
      py::arg("alpha"), py::arg("n_directions") = 5000);

  m.def(
      "solve",
      [](const std::string& domain, double p, const std::string& kind, double h, double c, double q) {
        const auto r = reaction(kind, p, c, q);
        r.validate();
        const auto sol = solve(resolve_domain(domain), r, h);
        const auto& mesh = sol.u.mesh();
        Eigen::MatrixX2d pts(mesh.n_points(), 2);
        for (std::size_t i = 0; i < mesh.n_points(); ++i) pts.row(i) = mesh.points()[i].transpose();
        Eigen::MatrixXi tris(mesh.n_triangles(), 3);
        for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
          for (int j = 0; j < 3; ++j) tris(t, j) = mesh.triangles()[t][j];
        }
        py::dict d;
        d["points"] = pts;
        d["triangles"] = tris;
        d["u"] = Eigen::VectorXd(sol.u.values());
        d["max_u"] = sol.u.max();
        d["converged"] = sol.diagnostics.converged;
        d["residual"] = sol.diagnostics.residual;
        d["critical_points"] = count_critical_points(sol.u).count;
        return d;
      },
      py::arg("domain"), py::arg("p") = 2.0, py::arg("reaction") = "torsion", py::arg("h") = 0.02,
      py::arg("c") = 1.0, py::arg("q") = 0.0);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
