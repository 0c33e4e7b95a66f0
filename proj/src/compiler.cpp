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

#include "sqem/compiler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

namespace sqem {
namespace {

constexpr double kPi = std::numbers::pi;

struct KindInfo {
  GateKind kind;
  const char* name;
  int arity;
};

constexpr std::array<KindInfo, 9> kKinds{{
    {GateKind::kH, "h", 1},
    {GateKind::kT, "t", 1},
    {GateKind::kTdg, "tdg", 1},
    {GateKind::kX, "x", 1},
    {GateKind::kZ, "z", 1},
    {GateKind::kPhase, "phase", 1},
    {GateKind::kCnot, "cnot", 2},
    {GateKind::kToffoli, "toffoli", 3},
    {GateKind::kFredkin, "fredkin", 3},
}};

const KindInfo& info(GateKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw ValidationError("unknown gate kind");
}

Matrix permutation(std::size_t dim, const std::function<std::size_t(std::size_t)>& f) {
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    p(static_cast<Eigen::Index>(f(i)), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return p;
}

GateOp make_phase(int q, double angle) {
  GateOp op;
  op.kind = GateKind::kPhase;
  op.targets = {q};
  op.angle = angle;
  return op;
}

std::vector<int> range(int first, int count) {
  std::vector<int> out(static_cast<std::size_t>(count));
  std::iota(out.begin(), out.end(), first);
  return out;
}

}  // namespace

std::string to_string(GateKind kind) { return info(kind).name; }

GateKind gate_kind_from_string(const std::string& name) {
  for (const auto& k : kKinds) {
    if (name == k.name) return k.kind;
  }
  throw ValidationError("unknown gate '" + name + "'");
}

int arity(GateKind kind) { return info(kind).arity; }

Matrix gate_matrix(const GateOp& op) {
  Matrix m(2, 2);
  switch (op.kind) {
    case GateKind::kH:
      m << 1, 1, 1, -1;
      return m / std::sqrt(2.0);
    case GateKind::kT:
      m << std::polar(1.0, kPi / 8), 0, 0, std::polar(1.0, -kPi / 8);
      return m;
    case GateKind::kTdg:
      m << std::polar(1.0, -kPi / 8), 0, 0, std::polar(1.0, kPi / 8);
      return m;
    case GateKind::kX:
      m << 0, 1, 1, 0;
      return m;
    case GateKind::kZ:
      m << 1, 0, 0, -1;
      return m;
    case GateKind::kPhase:
      m << 1, 0, 0, std::polar(1.0, op.angle);
      return m;
    case GateKind::kCnot:
      return permutation(4, [](std::size_t i) { return (i & 2U) ? i ^ 1U : i; });
    case GateKind::kToffoli:
      return permutation(8, [](std::size_t i) { return (i & 6U) == 6U ? i ^ 1U : i; });
    case GateKind::kFredkin:
      return permutation(8, [](std::size_t i) {
        if (!(i & 4U)) return i;
        const std::size_t a = (i >> 1) & 1U, b = i & 1U;
        return (i & 4U) | (b << 1) | a;
      });
  }
  throw ValidationError("unknown gate kind");
}

GateCircuit::GateCircuit(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 0) throw ValidationError("circuit qubit count must be non-negative");
}

GateCircuit& GateCircuit::add(GateOp op) {
  if (static_cast<int>(op.targets.size()) != arity(op.kind)) {
    throw ValidationError("gate " + to_string(op.kind) + " takes " +
                          std::to_string(arity(op.kind)) + " target(s)");
  }
  validate_targets(op.targets, n_qubits_);
  if (op.noise && op.noise->n_qubits() != arity(op.kind)) {
    throw ValidationError("noise on gate " + to_string(op.kind) + " must act on " +
                          std::to_string(arity(op.kind)) + " qubit(s)");
  }
  ops_.push_back(std::move(op));
  return *this;
}

GateCircuit& GateCircuit::add(GateKind kind, std::vector<int> targets,
                              std::optional<KrausChannel> noise) {
  GateOp op;
  op.kind = kind;
  op.targets = std::move(targets);
  op.noise = std::move(noise);
  return add(std::move(op));
}

GateCircuit& GateCircuit::append(const GateCircuit& other, std::span<const int> map) {
  if (static_cast<int>(map.size()) != other.n_qubits()) {
    throw ValidationError("append: qubit map must cover the appended circuit");
  }
  for (GateOp op : other.ops()) {
    for (int& t : op.targets) t = map[static_cast<std::size_t>(t)];
    add(std::move(op));
  }
  return *this;
}

int GateCircuit::two_qubit_gate_count() const {
  return static_cast<int>(
      std::count_if(ops_.begin(), ops_.end(), [](const GateOp& op) { return arity(op.kind) == 2; }));
}

Matrix circuit_unitary(const GateCircuit& circuit) {
  const auto dim = static_cast<Eigen::Index>(dim_of(circuit.n_qubits()));
  Matrix u = Matrix::Identity(dim, dim);
  for (const auto& op : circuit.ops()) {
    kernel::apply_left(u, gate_matrix(op), op.targets, circuit.n_qubits());
  }
  return u;
}

void apply_circuit(DensityMatrix& rho, const GateCircuit& circuit, std::span<const int> qubits) {
  if (static_cast<int>(qubits.size()) != circuit.n_qubits()) {
    throw ValidationError("apply_circuit: qubit map must cover the circuit");
  }
  validate_targets(qubits, rho.n_qubits());
  const int n = rho.n_qubits();
  std::vector<int> mapped;
  for (const auto& op : circuit.ops()) {
    mapped.clear();
    for (int t : op.targets) mapped.push_back(qubits[static_cast<std::size_t>(t)]);
    const Matrix g = gate_matrix(op);
    kernel::sandwich(rho.mutable_entries(), g, g, mapped, n);
    if (op.noise) kernel::apply_channel(rho.mutable_entries(), *op.noise, mapped, n);
  }
}

KrausChannel two_qubit_depolarizing(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ValidationError("depolarizing strength must be in [0, 1]");
  return joint_depolarizing(2, 1.0 - eps);
}

GateCircuit toffoli_decomposition(std::optional<KrausChannel> cnot_noise) {
  constexpr int a = 0, b = 1, t = 2;
  GateCircuit c(3);
  auto cx = [&](int x, int y) { c.add(GateKind::kCnot, {x, y}, cnot_noise); };
  auto tp = [&](int q) { c.add(make_phase(q, kPi / 4)); };
  auto tm = [&](int q) { c.add(make_phase(q, -kPi / 4)); };
  c.add(GateKind::kH, {t});
  cx(b, t);
  tm(t);
  cx(a, t);
  tp(t);
  cx(b, t);
  tm(t);
  cx(a, t);
  tp(b);
  tp(t);
  c.add(GateKind::kH, {t});
  cx(a, b);
  tp(a);
  tm(b);
  cx(a, b);
  return c;
}

GateCircuit cswap_decomposition(int m, std::optional<KrausChannel> cnot_noise) {
  if (m < 1) throw ValidationError("cswap_decomposition: m must be positive");
  if (cnot_noise && cnot_noise->n_qubits() != 2) {
    throw ValidationError("cswap_decomposition: cNOT noise must act on two qubits");
  }
  GateCircuit c(2 * m + 1);
  const GateCircuit toffoli = toffoli_decomposition(cnot_noise);
  for (int q = 0; q < m; ++q) {
    const int qa = 1 + q, qb = 1 + m + q;
    // Fredkin(c; a, b) = CX(b -> a) Toffoli(c, a -> b) CX(b -> a)
    c.add(GateKind::kCnot, {qb, qa}, cnot_noise);
    const std::array<int, 3> map{0, qa, qb};
    c.append(toffoli, map);
    c.add(GateKind::kCnot, {qb, qa}, cnot_noise);
  }
  return c;
}

Matrix layered_unitary(int layers) {
  if (layers < 1) throw ValidationError("layered_unitary: at least one layer");
  GateOp t;
  t.kind = GateKind::kT;
  GateOp cx;
  cx.kind = GateKind::kCnot;
  const Matrix layer = gate_matrix(cx) * kron(gate_matrix(t), gate_matrix(t));
  Matrix u = Matrix::Identity(4, 4);
  for (int i = 0; i < layers; ++i) u = layer * u;
  return u;
}

GateCircuit layered_circuit(int layers, std::optional<KrausChannel> cnot_noise,
                            std::optional<KrausChannel> t_noise) {
  if (layers < 1) throw ValidationError("layered_circuit: at least one layer");
  GateCircuit c(2);
  for (int i = 0; i < layers; ++i) {
    c.add(GateKind::kT, {0}, t_noise);
    c.add(GateKind::kT, {1}, t_noise);
    c.add(GateKind::kCnot, {0, 1}, cnot_noise);
  }
  return c;
}

NoisyProtocolResult run_noisy_protocol(const ProtocolSpec& spec,
                                       const NoisyProtocolOptions& options) {
  validate_spec(spec);
  if (spec.branches != 2) throw ValidationError("run_noisy_protocol supports d = 2 only");
  if (spec.input_mode != InputMode::kChoi) {
    throw ValidationError("run_noisy_protocol requires the Choi input mode");
  }
  const int m = spec.m();
  if (options.target) {
    if (options.target->n_qubits() != m) {
      throw ValidationError("target circuit must act on m = " + std::to_string(m) + " qubit(s)");
    }
    const Matrix u = circuit_unitary(*options.target);
    const Complex overlap = (spec.unitary.adjoint() * u).trace() / static_cast<double>(u.rows());
    if (std::abs(std::abs(overlap) - 1.0) > 1e-8) {
      throw ValidationError("target circuit does not implement the spec unitary");
    }
  }

  std::optional<KrausChannel> noise;
  if (options.cswap_eps > 0.0) noise = two_qubit_depolarizing(options.cswap_eps);
  const GateCircuit swap = cswap_decomposition(m, noise);

  auto target = [&](DensityMatrix& rho, std::span<const int> active) {
    if (options.target) {
      apply_circuit(rho, *options.target, active);
    } else {
      kernel::sandwich(rho.mutable_entries(), spec.unitary, spec.unitary, active, rho.n_qubits());
      kernel::apply_channel(rho.mutable_entries(), spec.channel, active, rho.n_qubits());
    }
  };

  ExecutionModel model;
  model.target = target;
  model.cswap = [&](DensityMatrix& rho, const ProtocolLayout& layout) {
    std::vector<int> map{layout.registers.at("control").first};
    map.insert(map.end(), layout.input_active.begin(), layout.input_active.end());
    map.insert(map.end(), layout.aux_active[0].begin(), layout.aux_active[0].end());
    apply_circuit(rho, swap, map);
  };

  NoisyProtocolResult out;
  out.records = run_bruteforce(spec, model);

  // Incoherent baseline: the same noisy target on the Choi input.
  DensityMatrix baseline(spec.input.state);
  const auto active = range(spec.input.reference_qubits, m);
  target(baseline, active);
  const double f0 = std::clamp(state_fidelity(ideal_output(spec), baseline), 0.0, 1.0);

  const OutcomeKey key = constructive_outcome(spec);
  const std::span<const OutcomeKey> selection(&key, 1);
  double p = 0.0;
  for (const auto& r : out.records) {
    if (r.key == key) p = r.probability;
  }
  out.merit = merit_from(p, cj_fidelity(spec, out.records, selection), f0);
  return out;
}

GateCircuit circuit_from_json(const nlohmann::json& doc) {
  try {
    const nlohmann::json& gates = doc.is_array() ? doc : doc.at("gates");
    int n = 0;
    for (const auto& g : gates) {
      for (const auto& t : g.at("targets")) n = std::max(n, t.get<int>() + 1);
    }
    if (doc.is_object() && doc.contains("n_qubits")) {
      const int declared = doc.at("n_qubits").get<int>();
      if (declared < n) throw ValidationError("circuit targets exceed n_qubits");
      n = declared;
    }
    GateCircuit c(n);
    for (const auto& g : gates) {
      GateOp op;
      op.kind = gate_kind_from_string(g.at("gate").get<std::string>());
      op.targets = g.at("targets").get<std::vector<int>>();
      if (g.contains("angle")) op.angle = g.at("angle").get<double>();
      if (g.contains("noise") && !g.at("noise").is_null()) op.noise = channel_from_json(g.at("noise"));
      c.add(std::move(op));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed circuit JSON: ") + e.what());
  }
}

nlohmann::json circuit_to_json(const GateCircuit& circuit) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& op : circuit.ops()) {
    nlohmann::json g{{"gate", to_string(op.kind)}, {"targets", op.targets}};
    if (op.kind == GateKind::kPhase) g["angle"] = op.angle;
    if (op.noise) g["noise"] = channel_to_json(*op.noise);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace sqem
