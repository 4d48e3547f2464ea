#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "attn/dense.hpp"
#include "attn/disentangler.hpp"
#include "attn/effective.hpp"
#include "attn/engine.hpp"
#include "attn/error.hpp"
#include "attn/lattice.hpp"

namespace py = pybind11;
using namespace attn;

namespace {

RowMatrix gate_matrix(const Tensor& u) { return u.as_matrix(u.dim(0) * u.dim(1)); }

Tensor gate_tensor(const RowMatrix& m) {
  if (m.rows() != 4 || m.cols() != 4) throw StructureError("gate must be a 4 x 4 matrix");
  return Tensor::from_matrix(m).reshape({2, 2, 2, 2});
}

py::dict sweep_dict(const SweepRecord& s) {
  py::dict d;
  d["sweep"] = s.sweep;
  d["phase"] = s.phase;
  d["energy"] = s.energy;
  d["density"] = s.density;
  d["t_deopt"] = s.t_deopt;
  d["t_sweep"] = s.t_sweep;
  d["num_disentanglers"] = s.num_disentanglers;
  d["unconverged"] = s.unconverged;
  return d;
}

RunConfig as_config(const py::object& config) {
  if (py::isinstance<RunConfig>(config)) return config.cast<RunConfig>();
  if (py::isinstance<py::dict>(config)) {
    const py::object dumps = py::module_::import("json").attr("dumps");
    return parse_run_config(dumps(config).cast<std::string>());
  }
  return parse_run_config(config.cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Augmented tree tensor networks";

  auto base = py::register_exception<Error>(m, "AttnError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<PlacementError>(m, "PlacementError", base.ptr());
  py::register_exception<StructureError>(m, "StructureError", base.ptr());

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init([](const py::object& c) { return as_config(c); }), py::arg("config"))
      .def_static("load", &load_run_config)
      .def("to_json", &dump_run_config)
      .def_property_readonly("num_sites", &RunConfig::num_sites)
      .def_readonly("L", &RunConfig::L)
      .def_readonly("m", &RunConfig::m)
      .def_property_readonly("model", [](const RunConfig& c) { return std::string(model_name(c.model)); })
      .def_property_readonly("ansatz", [](const RunConfig& c) { return std::string(ansatz_name(c.ansatz)); })
      .def("__repr__", [](const RunConfig& c) { return "RunConfig(" + dump_run_config(c) + ")"; });

  py::class_<TpoOperator>(m, "TpoOperator")
      .def_property_readonly("num_sites", &TpoOperator::num_sites)
      .def_property_readonly("num_terms", [](const TpoOperator& op) { return op.all_terms().size(); })
      .def("dense", [](const TpoOperator& op) { return dense_export(op).as_matrix(std::size_t{1} << op.num_sites()); })
      .def("expectation", [](const TpoOperator& op, const Vector& psi) { return expectation(op, psi); });

  m.def("build_model", [](const py::object& c) { return build_model(as_config(c)); }, py::arg("config"));

  py::class_<TtnState>(m, "TtnState")
      .def_property_readonly("num_sites", &TtnState::num_sites)
      .def_property_readonly("max_bond", &TtnState::max_bond)
      .def("state_vector", [](const TtnState& s) { return to_state_vector(s); })
      .def("norm", [](const TtnState& s) { return state_norm(s); })
      .def("max_isometry_deviation", [](const TtnState& s) { return max_isometry_deviation(s); });

  m.def("init_random_ttn", &init_random_ttn, py::arg("num_sites"), py::arg("local_dim"), py::arg("max_bond"),
        py::arg("seed"));

  py::class_<DisentanglerLayer>(m, "DisentanglerLayer")
      .def(py::init([](int n) { return DisentanglerLayer{n, 2, {}}; }), py::arg("num_sites"))
      .def("__len__", &DisentanglerLayer::size)
      .def("add",
           [](DisentanglerLayer& l, int a, int b, const RowMatrix& u) { l.entries.push_back({a, b, gate_tensor(u)}); },
           py::arg("site_a"), py::arg("site_b"), py::arg("u"))
      .def_property_readonly("pairs",
                             [](const DisentanglerLayer& l) {
                               std::vector<std::pair<int, int>> p;
                               for (const auto& e : l.entries) p.emplace_back(e.site_a, e.site_b);
                               return p;
                             })
      .def("gate", [](const DisentanglerLayer& l, std::size_t k) { return gate_matrix(l.entries.at(k).u); })
      .def("max_unitarity_deviation", &DisentanglerLayer::max_unitarity_deviation)
      .def("apply_dense", &apply_layer_dense, py::arg("psi"), py::arg("dagger") = true);

  m.def(
      "place_disentanglers",
      [](const TpoOperator& op, const TtnState& s, std::optional<std::size_t> budget) {
        return place_disentanglers(op, s.shape(), s.max_bond(), {budget});
      },
      py::arg("op"), py::arg("state"), py::arg("budget") = py::none());
  m.def(
      "validate_layer",
      [](const DisentanglerLayer& l, const TpoOperator& op, const TtnState& s) {
        validate_layer(l, op, s.shape(), s.max_bond());
      },
      py::arg("layer"), py::arg("op"), py::arg("state"));
  m.def("contract_de_layer", [](const TpoOperator& op, const DisentanglerLayer& l) { return contract_de_layer(op, l); },
        py::arg("op"), py::arg("layer"));
  m.def(
      "energy",
      [](TtnState& s, const TpoOperator& op) {
        if (!s.isometry_center()) s.isometrize_towards(s.shape().top());
        EffectiveOperators eff(op, s.shape());
        return eff.energy(s);
      },
      py::arg("state"), py::arg("op"));
  m.def(
      "svd_update", [](const RowMatrix& gamma) { return gate_matrix(svd_update(Tensor::from_matrix(gamma))); },
      py::arg("gamma"));
  m.def(
      "optimize_layer",
      [](TtnState& s, const TpoOperator& op, DisentanglerLayer& l) {
        const auto r = optimize_layer(s, op, l);
        return std::make_pair(r.energy_before, r.energy_after);
      },
      py::arg("state"), py::arg("op"), py::arg("layer"));

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("state", &RunResult::state)
      .def_readonly("layer", &RunResult::layer)
      .def_property_readonly("energies",
                             [](const RunResult& r) {
                               std::vector<double> e;
                               for (const auto& s : r.record.sweeps) e.push_back(s.energy);
                               return e;
                             })
      .def_property_readonly("sweeps",
                             [](const RunResult& r) {
                               py::list out;
                               for (const auto& s : r.record.sweeps) out.append(sweep_dict(s));
                               return out;
                             })
      .def_property_readonly("final_energy", [](const RunResult& r) { return r.record.final_energy(); })
      .def_property_readonly("placement", [](const RunResult& r) { return r.record.placement; })
      .def_property_readonly("max_unitarity_deviation",
                             [](const RunResult& r) { return r.record.max_unitarity_deviation; })
      .def("correlations",
           [](RunResult& r, const std::string& pair) {
             MeasurementRequests req;
             req.correlations = {pair};
             return measure_observables(r.state, r.layer, req).correlations.front().second;
           })
      .def("save", [](const RunResult& r, const std::filesystem::path& path, const RunConfig& c) {
        save_checkpoint(path, {c, r.state, r.layer, r.record});
      });

  m.def(
      "run",
      [](const py::object& c) {
        const RunConfig config = as_config(c);
        py::gil_scoped_release release;
        return run_ground_state_search(config);
      },
      py::arg("config"));
  m.def(
      "resume",
      [](const std::filesystem::path& checkpoint, const py::object& c) {
        const Checkpoint ck = load_checkpoint(checkpoint);
        const RunConfig config = c.is_none() ? ck.config : as_config(c);
        py::gil_scoped_release release;
        return run_ground_state_search(config, ck);
      },
      py::arg("checkpoint"), py::arg("config") = py::none());
  m.def(
      "exact_diagonalize",
      [](const py::object& c) {
        const EdReport r = run_exact_diagonalization(as_config(c));
        py::dict d;
        d["energy"] = r.energy;
        d["density"] = r.density;
        d["dimension"] = r.dimension;
        d["dense"] = r.dense;
        return d;
      },
      py::arg("config"));
  m.def("version", &version_tag);
}
