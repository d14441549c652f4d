#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "recipmod/analysis.hpp"
#include "recipmod/curves.hpp"
#include "recipmod/experiment.hpp"
#include "recipmod/mesh_io.hpp"
#include "recipmod/modulus.hpp"
#include "recipmod/potential.hpp"
#include "recipmod/surface.hpp"

namespace py = pybind11;
using namespace recipmod;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

}  // namespace

PYBIND11_MODULE(_recipmod, m) {
  m.doc() = "Discrete 2-modulus of conjugate curve families on meshed metric surfaces";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

  py::class_<MetricMesh>(m, "MetricMesh")
      .def_property_readonly("num_vertices", &MetricMesh::num_vertices)
      .def_property_readonly("num_edges", &MetricMesh::num_edges)
      .def_property_readonly("num_faces", &MetricMesh::num_faces)
      .def_property_readonly("total_area", &MetricMesh::total_area)
      .def_property_readonly("positions",
                             [](const MetricMesh& mesh) {
                               py::array_t<double> out({static_cast<py::ssize_t>(mesh.num_vertices()),
                                                        py::ssize_t{2}});
                               auto a = out.mutable_unchecked<2>();
                               for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
                                 a(v, 0) = mesh.vertices()[v].x;
                                 a(v, 1) = mesh.vertices()[v].y;
                               }
                               return out;
                             })
      .def_property_readonly("edges",
                             [](const MetricMesh& mesh) {
                               std::vector<std::pair<VertexId, VertexId>> out;
                               for (const auto& e : mesh.edges()) out.emplace_back(e.a, e.b);
                               return out;
                             })
      .def_property_readonly("lengths",
                             [](const MetricMesh& mesh) {
                               std::vector<double> out;
                               for (const auto& e : mesh.edges()) out.push_back(e.length);
                               return to_array(out);
                             })
      .def_property_readonly("edge_areas",
                             [](const MetricMesh& mesh) { return to_array(mesh.edge_areas()); });

  py::class_<QuadFrame>(m, "QuadFrame")
      .def("zeta", [](const QuadFrame& f, int k) {
        if (k < 1 || k > 4) throw InvalidInput("arc index must be 1..4");
        return f.zeta(k);
      });

  py::class_<Surface>(m, "Surface")
      .def_readonly("mesh", &Surface::mesh)
      .def_readonly("frame", &Surface::frame)
      .def("to_json", [](const Surface& s) { return surface_to_json(s); })
      .def_static("from_json", [](const std::string& text) { return surface_from_json(text); });

  m.def("build_rectangle", &build_rectangle, py::arg("width"), py::arg("height"), py::arg("n"));
  m.def("build_conformal", &build_conformal, py::arg("width"), py::arg("height"), py::arg("n"),
        py::arg("weight"));
  m.def("build_collapsed_disk", &build_collapsed_disk, py::arg("outer_half_width"),
        py::arg("n"), py::arg("collapse_radius"));
  m.def("make_surface",
        [](const std::string& spec, int n) { return make_surface(parse_surface_spec(spec), n); },
        py::arg("spec"), py::arg("n"));
  m.def("ball", &ball, py::arg("mesh"), py::arg("center"), py::arg("r"));

  py::class_<FamilySpec>(m, "FamilySpec")
      .def_readonly("source", &FamilySpec::source)
      .def_readonly("sink", &FamilySpec::sink)
      .def_readonly("label", &FamilySpec::label);
  m.def("gamma1", [](const QuadFrame& f) { return gamma1(f); });
  m.def("gamma2", [](const QuadFrame& f) { return gamma2(f); });

  py::class_<ModulusOptions>(m, "ModulusOptions")
      .def(py::init<>())
      .def_readwrite("eps_adm", &ModulusOptions::eps_adm)
      .def_readwrite("eps_gap", &ModulusOptions::eps_gap)
      .def_readwrite("max_iter", &ModulusOptions::max_iter)
      .def_readwrite("warm_start", &ModulusOptions::warm_start);

  py::class_<ModulusResult>(m, "ModulusResult")
      .def_property_readonly("status", [](const ModulusResult& r) { return to_string(r.status); })
      .def_property_readonly("value",
                             [](const ModulusResult& r) -> py::object {
                               if (r.value.infinite) return py::float_(INFINITY);
                               return py::float_(r.value.value);
                             })
      .def_property_readonly("infinite", [](const ModulusResult& r) { return r.value.infinite; })
      .def_property_readonly("density",
                             [](const ModulusResult& r) { return to_array(r.density.values); })
      .def_readonly("active_paths", &ModulusResult::active_paths)
      .def_readonly("multipliers", &ModulusResult::multipliers)
      .def_readonly("primal_value", &ModulusResult::primal_value)
      .def_readonly("dual_value", &ModulusResult::dual_value)
      .def_readonly("min_length", &ModulusResult::min_length)
      .def_readonly("iterations", &ModulusResult::iterations)
      .def_property_readonly("relative_gap", &ModulusResult::relative_gap)
      .def_property_readonly("certified", &ModulusResult::certified)
      .def("to_json", [](const ModulusResult& r) { return modulus_to_json(r); });

  m.def("solve_modulus",
        [](const MetricMesh& mesh, const FamilySpec& fam, const ModulusOptions& opts) {
          py::gil_scoped_release release;
          return solve_modulus(mesh, fam, opts);
        },
        py::arg("mesh"), py::arg("family"), py::arg("options") = ModulusOptions{});

  py::class_<Certificate>(m, "Certificate")
      .def_readonly("min_length", &Certificate::min_length)
      .def_readonly("admissible", &Certificate::admissible)
      .def_readonly("primal", &Certificate::primal)
      .def_readonly("dual", &Certificate::dual)
      .def_readonly("relative_gap", &Certificate::relative_gap)
      .def_readonly("gap_ok", &Certificate::gap_ok)
      .def_property_readonly("passed", &Certificate::passed);
  m.def("certify", &certify, py::arg("result"), py::arg("mesh"), py::arg("family"),
        py::arg("options") = ModulusOptions{});

  py::class_<PotentialField>(m, "PotentialField")
      .def_property_readonly("u", [](const PotentialField& f) { return to_array(f.u); });
  m.def("build_potential",
        [](const MetricMesh& mesh, const QuadFrame& frame, const ModulusResult& r) {
          return build_potential(mesh, frame, r.density);
        },
        py::arg("mesh"), py::arg("frame"), py::arg("result"));
  m.def("upper_gradient_violations", &upper_gradient_violations);

  py::class_<LevelCurve>(m, "LevelCurve")
      .def_readonly("level", &LevelCurve::level)
      .def_readonly("crossed", &LevelCurve::crossed)
      .def_readonly("length_estimate", &LevelCurve::length_estimate)
      .def_property_readonly("num_components",
                             [](const LevelCurve& c) { return c.components.size(); })
      .def_property_readonly("spanning_components", &LevelCurve::spanning_components)
      .def_property_readonly("connected", &LevelCurve::connected);
  m.def("level_set", &level_set, py::arg("mesh"), py::arg("frame"), py::arg("field"),
        py::arg("t"));

  py::class_<MaxPrincipleReport>(m, "MaxPrincipleReport")
      .def_readonly("region_max", &MaxPrincipleReport::region_max)
      .def_readonly("boundary_max", &MaxPrincipleReport::boundary_max)
      .def_property_readonly("passed", &MaxPrincipleReport::passed);
  m.def("max_principle_check",
        [](const MetricMesh& mesh, const QuadFrame& frame, const PotentialField& field,
           const std::vector<VertexId>& region) {
          return max_principle_check(mesh, frame, field, region);
        });

  py::class_<CurvePath>(m, "CurvePath")
      .def_readonly("vertices", &CurvePath::vertices)
      .def_readonly("edges", &CurvePath::edges)
      .def_readonly("length", &CurvePath::length)
      .def_readonly("injective", &CurvePath::injective);
  m.def("extract_path",
        [](const MetricMesh& mesh, const std::vector<EdgeId>& sub, VertexId x, VertexId y) {
          return extract_path(mesh, sub, x, y);
        });
  m.def("double_traversal",
        [](const MetricMesh& mesh, const std::vector<EdgeId>& sub, VertexId x, VertexId y) {
          return double_traversal(mesh, sub, x, y);
        });

  py::class_<CoareaReport>(m, "CoareaReport")
      .def_readonly("lhs", &CoareaReport::lhs)
      .def_readonly("rhs", &CoareaReport::rhs)
      .def_readonly("empirical_constant", &CoareaReport::empirical_constant)
      .def_readonly("passed", &CoareaReport::passed);
  m.def("coarea_check",
        [](const MetricMesh& mesh, const std::vector<double>& values, double lipschitz,
           const std::vector<double>& g, int levels, double tolerance) {
          return coarea_check(mesh, values, lipschitz, g, levels, tolerance);
        },
        py::arg("mesh"), py::arg("values"), py::arg("lipschitz"), py::arg("g"),
        py::arg("levels") = kDefaultLevels, py::arg("tolerance") = 0.05);

  m.def("ring_modulus",
        [](const MetricMesh& mesh, VertexId c, double r, double R, const ModulusOptions& o) {
          py::gil_scoped_release release;
          return ring_modulus(mesh, c, r, R, o);
        },
        py::arg("mesh"), py::arg("center"), py::arg("r"), py::arg("R"),
        py::arg("options") = ModulusOptions{});

  m.def("reciprocality_report",
        [](const MetricMesh& mesh, const QuadFrame& frame, bool probes) {
          ReciprocityOptions opts;
          opts.probes = probes;
          ReciprocalityReport rep;
          {
            py::gil_scoped_release release;
            rep = reciprocality_report(mesh, frame, opts);
          }
          const char* names[3] = {"proven", "refined", "conjectured"};
          py::dict d;
          d["mod_gamma1"] = rep.gamma1.value.infinite ? INFINITY : rep.gamma1.value.value;
          d["mod_gamma2"] = rep.gamma2.value.infinite ? INFINITY : rep.gamma2.value.value;
          d["product"] = rep.product.to_string();
          d["certified"] = rep.certified;
          py::dict lower, upper;
          for (int i = 0; i < 3; ++i) {
            lower[names[i]] = to_string(rep.lower[i]);
            upper[names[i]] = to_string(rep.upper[i]);
          }
          d["lower"] = lower;
          d["upper"] = upper;
          d["upper_max_product"] = rep.upper_max_product;
          d["ring"] = to_string(rep.ring);
          d["ring_ratio"] = rep.ring_ratio;
          d["chain_ok"] = rep.chain.passed();
          d["chain_empirical_constant"] = rep.chain.empirical_constant;
          return d;
        },
        py::arg("mesh"), py::arg("frame"), py::arg("probes") = true);

  m.def("run_experiment",
        [](const std::string& config_text, const std::string& out) {
          auto cfg = parse_config(config_text);
          if (!out.empty()) cfg.out = out;
          RunResult run;
          {
            py::gil_scoped_release release;
            run = run_experiment(cfg);
          }
          std::vector<std::string> files;
          for (const auto& f : run.files) files.push_back(f.string());
          return py::make_tuple(run.exit_code, files);
        },
        py::arg("config"), py::arg("out") = "");

  py::dict kappa;
  const KappaBounds k;
  kappa["proven"] = k.proven;
  kappa["refined"] = k.refined;
  kappa["conjectured"] = k.conjectured;
  m.attr("KAPPA") = kappa;
}
