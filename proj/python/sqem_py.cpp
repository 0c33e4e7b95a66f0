// Copyright 2026 The SQEM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sqem/compiler.hpp"
#include "sqem/corrector.hpp"
#include "sqem/protocol.hpp"
#include "sqem/sweep.hpp"

namespace py = pybind11;
using namespace sqem;

namespace {

py::object to_python(const nlohmann::json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

nlohmann::json from_python(const py::object& obj) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

// aux: "choi", a named product state, or an amplitude vector.
ProtocolSpec build(const Matrix& unitary, const KrausChannel& channel, int d, const py::object& aux) {
  const int m = channel.n_qubits();
  if (py::isinstance<py::str>(aux)) {
    const auto name = aux.cast<std::string>();
    if (name == "choi") return make_choi_spec(unitary, channel, d, choi_input(m));
    return make_spec(unitary, channel, d, choi_input(m), explicit_register(named_state(name, m)));
  }
  return make_spec(unitary, channel, d, choi_input(m),
                   explicit_register(PureState(aux.cast<Vector>())));
}

py::dict merit_dict(const FiguresOfMerit& f) {
  py::dict out;
  out["P"] = f.P;
  out["R"] = f.R;
  out["F_CJ"] = f.F_CJ;
  out["F0_CJ"] = f.F0_CJ;
  out["R_sentinel"] = f.R_sentinel;
  return out;
}

}  // namespace

PYBIND11_MODULE(sqem, m) {
  m.doc() = "Superposed quantum error mitigation simulator";
  m.attr("__version__") = SQEM_VERSION;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<KrausChannel>(m, "KrausChannel")
      .def(py::init<std::vector<Matrix>>(), py::arg("operators"))
      .def_property_readonly("operators", &KrausChannel::operators)
      .def_property_readonly("n_qubits", &KrausChannel::n_qubits)
      .def_property_readonly("p_ne", [](const KrausChannel& c) { return no_error_probability(c); })
      .def("to_json", [](const KrausChannel& c) { return to_python(channel_to_json(c)); })
      .def_static("from_json",
                  [](const py::object& doc) { return channel_from_json(from_python(doc)); })
      .def("__len__", &KrausChannel::size);

  m.def("dephasing", &dephasing, py::arg("p_ne"));
  m.def("depolarizing", &depolarizing, py::arg("p_ne"));
  m.def("bit_flip", &bit_flip, py::arg("p_ne"));
  m.def("amplitude_damping", &amplitude_damping, py::arg("gamma"));
  m.def("joint_depolarizing", &joint_depolarizing, py::arg("n_qubits"), py::arg("p_ne"));
  m.def("identity_channel", &identity_channel, py::arg("n_qubits"));
  m.def("tensor_power", &tensor_power, py::arg("channel"), py::arg("m"));
  m.def("no_error_probability", &no_error_probability, py::arg("channel"));

  py::class_<OutcomeRecord>(m, "Outcome")
      .def_property_readonly("control", [](const OutcomeRecord& r) { return r.key.control; })
      .def_property_readonly("aux", [](const OutcomeRecord& r) { return r.key.aux; })
      .def_readonly("probability", &OutcomeRecord::probability)
      .def_readonly("fidelity", &OutcomeRecord::fidelity)
      .def_property_readonly("state", [](const OutcomeRecord& r) { return r.state.entries(); })
      .def("__repr__", [](const OutcomeRecord& r) {
        std::ostringstream s;
        s << "Outcome(" << r.key.to_string() << ", p=" << r.probability << ")";
        return s.str();
      });

  m.def(
      "run",
      [](const Matrix& unitary, const KrausChannel& channel, int d, const py::object& aux,
         const std::string& engine) {
        const auto spec = build(unitary, channel, d, aux);
        return evaluate_outcomes(spec, engine_from_string(engine)).records;
      },
      py::arg("unitary"), py::arg("channel"), py::arg("d") = 2, py::arg("aux") = "choi",
      py::arg("engine") = "bruteforce",
      "Every measurement outcome of one protocol run on the Choi input.");

  m.def(
      "figures_of_merit",
      [](const Matrix& unitary, const KrausChannel& channel, int d, const py::object& aux,
         const std::string& engine) {
        const auto spec = build(unitary, channel, d, aux);
        const auto eval = evaluate_outcomes(spec, engine_from_string(engine));
        const std::vector<OutcomeKey> keep{constructive_outcome(spec)};
        auto out = merit_dict(figures_of_merit(spec, eval.records, keep));
        const auto omega = omega_metrics(spec);
        out["omega1"] = omega.omega1 ? py::cast(*omega.omega1) : py::none();
        out["omega2"] = omega.omega2;
        return out;
      },
      py::arg("unitary"), py::arg("channel"), py::arg("d") = 2, py::arg("aux") = "choi",
      py::arg("engine") = "closed_form",
      "P, R, F_CJ and F0_CJ of the constructive outcome, plus the omega metrics.");

  m.def(
      "analytic_P_R",
      [](double p_ne, int d) {
        const auto a = analytic_P_R(p_ne, d);
        py::dict out;
        out["P"] = a.P;
        out["R"] = a.R;
        out["F_CJ"] = a.F_CJ;
        return out;
      },
      py::arg("p_ne"), py::arg("d"));

  m.def(
      "optimize_corrections",
      [](const Matrix& unitary, const KrausChannel& channel, int d, const py::object& aux,
         double threshold, const std::string& parameterization, std::uint64_t seed,
         int max_evaluations, int restarts, int shots) {
        OptimizerConfig cfg;
        cfg.threshold = threshold;
        cfg.parameterization = parameterization_from_string(parameterization);
        cfg.seed = seed;
        cfg.max_evaluations = max_evaluations;
        cfg.restarts = restarts;
        cfg.shots = shots;
        return to_python(table_to_json(optimize_corrections(build(unitary, channel, d, aux), cfg)));
      },
      py::arg("unitary"), py::arg("channel"), py::arg("d") = 2, py::arg("aux") = "choi",
      py::arg("threshold") = 1.0, py::arg("parameterization") = "single_qubit_products",
      py::arg("seed") = 0, py::arg("max_evaluations") = 4000, py::arg("restarts") = 4,
      py::arg("shots") = 0, "CorrectionTable as a JSON-compatible dict.");

  m.def(
      "noisy_cswap",
      [](const Matrix& unitary, const KrausChannel& channel, const py::object& aux, double eps) {
        NoisyProtocolOptions options;
        options.cswap_eps = eps;
        return merit_dict(run_noisy_protocol(build(unitary, channel, 2, aux), options).merit);
      },
      py::arg("unitary"), py::arg("channel"), py::arg("aux") = "choi", py::arg("cswap_eps") = 0.0,
      "Two-branch protocol with gate-level swaps and depolarized cNOTs.");

  m.def("gate_unitary",
        [](const py::object& gate, int m_qubits) {
          return gate_from_json(from_python(gate), m_qubits).unitary;
        },
        py::arg("gate"), py::arg("m") = 1,
        "Unitary of a named gate (cnot, t, identity, layered(N)) or a circuit dict.");
  m.def("cswap_cnot_count",
        [](int m_qubits) { return cswap_decomposition(m_qubits).two_qubit_gate_count(); },
        py::arg("m"));

  m.def(
      "validate_config", [](const std::string& text) { return expand_grid(parse_config(text)).size(); },
      py::arg("text"), "Number of grid points; raises ConfigError.");
  m.def(
      "sweep",
      [](const std::string& text, int workers, py::object seed) {
        auto cfg = parse_config(text);
        if (!seed.is_none()) cfg.seed = seed.cast<std::uint64_t>();
        SweepResult result;
        {
          py::gil_scoped_release release;
          result = run_sweep(cfg, workers > 0 ? workers : default_worker_count());
        }
        std::ostringstream csv;
        write_csv(csv, result.rows, false);
        return py::make_tuple(csv.str(), to_python(make_manifest(cfg, text, result)));
      },
      py::arg("text"), py::arg("workers") = 0, py::arg("seed") = py::none(),
      "Runs a sweep config given as JSON text; returns (csv, manifest).");
}
