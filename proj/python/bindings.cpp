#include "cdg/analysis.hpp"
#include "cdg/app.hpp"
#include "cdg/output.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace cdg;

namespace {

RasterKappa raster_from_array(const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>& a) {
  std::vector<double> values(a.data(), a.data() + a.size());
  return RasterKappa(static_cast<int>(a.rows()), static_cast<int>(a.cols()), std::move(values));
}

py::dict report_dict(const ErrorReport& r) {
  py::dict d;
  d["h"] = r.h;
  d["dof_u"] = r.dof_u;
  d["dof_p"] = r.dof_p;
  d["trb_e"] = r.trb_e;
  d["l2_e"] = r.l2_e;
  d["l2_eps"] = r.l2_eps;
  d["h_eps"] = r.h_eps;
  d["trb1_eps"] = r.trb1_eps;
  d["residual"] = r.residual;
  d["seconds"] = r.seconds;
  return d;
}

/// A solved unit-square flow kept alive for sampling.
struct FlowResult {
  std::shared_ptr<Discretization> disc;
  Solution solution;

  py::dict sample(int n) const {
    const FESpace& space = disc->space();
    Eigen::ArrayXXd x(n, n), y(n, n), u1(n, n), u2(n, n), p(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Point pt((j + 0.5) / n, (i + 0.5) / n);
        const int c = locate_cell(space.mesh(), pt);
        const Vec2 u = space.eval_velocity(solution.u, c, pt);
        x(i, j) = pt.x();
        y(i, j) = pt.y();
        u1(i, j) = u.x();
        u2(i, j) = u.y();
        p(i, j) = space.eval_pressure(solution.p, c, pt);
      }
    py::dict d;
    d["x"] = x;
    d["y"] = y;
    d["u1"] = u1;
    d["u2"] = u2;
    d["p"] = p;
    return d;
  }
};

RunOptions make_options(const std::string& solver, const std::string& edges, const std::string& weight) {
  RunOptions o;
  o.solver.backend = parse_solver_backend(solver);
  if (edges == "all") o.assembly.stabilizer_edges = StabilizerEdges::All;
  else if (edges != "interior") throw ValidationError("stabilizer_edges must be 'interior' or 'all'");
  if (weight == "edge-h") o.assembly.stabilizer_weight = StabilizerWeight::EdgeH;
  else if (weight != "global-h") throw ValidationError("s_weight must be 'global-h' or 'edge-h'");
  return o;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stabilizer-free conforming DG solver for the Brinkman equations";

  py::register_exception<Error>(m, "CdgError", PyExc_RuntimeError);

  py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
      .def_property_readonly("num_cells", &Mesh::num_cells)
      .def_property_readonly("num_edges", &Mesh::num_edges)
      .def_property_readonly("num_vertices", &Mesh::num_vertices)
      .def_property_readonly("num_boundary_edges", &Mesh::num_boundary_edges)
      .def_property_readonly("h", &Mesh::h)
      .def_property_readonly("labeled_h", &Mesh::labeled_h)
      .def_property_readonly("vertices",
                             [](const Mesh& mesh) {
                               Eigen::MatrixX2d v(mesh.num_vertices(), 2);
                               for (int i = 0; i < mesh.num_vertices(); ++i) v.row(i) = mesh.vertex(i).transpose();
                               return v;
                             })
      .def_property_readonly("cells",
                             [](const Mesh& mesh) {
                               std::vector<std::vector<int>> c;
                               for (const Cell& cell : mesh.cells()) c.push_back(cell.vertices);
                               return c;
                             })
      .def("save", [](const Mesh& mesh, const std::string& path) { save_mesh(mesh, path); });

  m.def("generate_mesh",
        [](const std::string& family, int n) { return std::make_shared<Mesh>(generate(parse_mesh_family(family), n)); },
        py::arg("family"), py::arg("n"), "Unit-square mesh: family 'tri', 'rect' or 'poly' with n divisions.");
  m.def("load_mesh", [](const std::string& path) { return std::make_shared<Mesh>(load_mesh(path)); });

  m.def(
      "converge",
      [](const std::string& family, std::vector<int> levels, int k, double mu, double a, const std::string& solver,
         const std::string& stabilizer_edges, const std::string& s_weight) {
        const ConvergenceReport rep = run_convergence(example1(mu, a), parse_mesh_family(family), levels, k,
                                                      make_options(solver, stabilizer_edges, s_weight));
        py::list out;
        for (const ErrorReport& r : rep.levels) out.append(report_dict(r));
        const Rates rates = rep.rates();
        py::dict res;
        res["levels"] = out;
        res["ord_trb"] = rates.trb_e;
        res["ord_l2"] = rates.l2_e;
        res["ord_eps"] = rates.l2_eps;
        res["ord_h_eps"] = rates.h_eps;
        return res;
      },
      py::arg("family") = "tri", py::arg("levels") = std::vector<int>{4, 8, 16}, py::arg("k") = 1, py::arg("mu") = 1.0,
      py::arg("a") = 1.0, py::arg("solver") = "direct", py::arg("stabilizer_edges") = "interior",
      py::arg("s_weight") = "global-h", "Convergence study on the manufactured solution; one dict per level.");

  m.def(
      "patch_error",
      [](const std::string& family, int n, int k) {
        return report_dict(run_level(generate(parse_mesh_family(family), n), k, polynomial_problem(k)));
      },
      py::arg("family"), py::arg("n"), py::arg("k"), "Errors for a polynomial exact solution (all ~ 0).");

  py::class_<FlowResult>(m, "FlowResult")
      .def_property_readonly("u", [](const FlowResult& r) { return r.solution.u; })
      .def_property_readonly("p", [](const FlowResult& r) { return r.solution.p; })
      .def_property_readonly("relative_residual", [](const FlowResult& r) { return r.solution.relative_residual; })
      .def_property_readonly("num_cells", [](const FlowResult& r) { return r.disc->mesh().num_cells(); })
      .def("sample", &FlowResult::sample, py::arg("n") = 101,
           "Fields on an n x n cell-centred lattice: dict of x, y, u1, u2, p arrays.");

  m.def(
      "solve_flow",
      [](py::object kappa, const std::string& family, int n, int k, double mu, bool matching_force,
         const std::string& solver) {
        RasterKappa raster;
        if (py::isinstance<py::float_>(kappa) || py::isinstance<py::int_>(kappa))
          raster = RasterKappa(1, 1, {kappa.cast<double>()});
        else if (py::isinstance<py::str>(kappa))
          raster = load_kappa_raster(kappa.cast<std::string>());
        else
          raster = raster_from_array(
              kappa.cast<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>());
        py::gil_scoped_release release;
        FlowResult r;
        r.disc = std::make_shared<Discretization>(FESpace(generate(parse_mesh_family(family), n), k));
        SolverOptions opt;
        opt.backend = parse_solver_backend(solver);
        r.solution = solve(assemble_system(*r.disc, cavity_problem(raster, mu, matching_force)), opt);
        return r;
      },
      py::arg("kappa_inv"), py::arg("family") = "rect", py::arg("n") = 64, py::arg("k") = 1, py::arg("mu") = 0.01,
      py::arg("matching_force") = false, py::arg("solver") = "direct",
      "Unit-square flow with g = (1, 0). kappa_inv: scalar, 2D array (row 0 = bottom) or raster path.");

  m.def("synthetic_raster", [](const std::string& kind, int n) {
    RasterKappa r;
    if (kind == "blocky") r = blocky_raster(n);
    else if (kind == "vuggy") r = vuggy_raster(n);
    else if (kind == "fiber") r = fiber_raster(n);
    else throw ValidationError("unknown raster kind '" + kind + "'");
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
               r.values().data(), r.rows(), r.cols())
        .eval();
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
