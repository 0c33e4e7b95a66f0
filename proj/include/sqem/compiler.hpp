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

#pragma once

// Gate lists with optional per-gate noise, and the two circuits the
// robustness studies need: the controlled swap expanded into cNOTs and
// single-qubit gates, and the layered T/cNOT benchmark.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqem/channels.hpp"
#include "sqem/protocol.hpp"

namespace sqem {

enum class GateKind { kH, kT, kTdg, kX, kZ, kPhase, kCnot, kToffoli, kFredkin };

[[nodiscard]] std::string to_string(GateKind kind);
[[nodiscard]] GateKind gate_kind_from_string(const std::string& name);
/// Number of qubits the gate acts on.
[[nodiscard]] int arity(GateKind kind);

struct GateOp {
  GateKind kind = GateKind::kH;
  /// Controls first; for fredkin {control, a, b}.
  std::vector<int> targets;
  double angle = 0.0;  // kPhase only: diag(1, e^{i angle})
  /// Applied to `targets` right after the gate.
  std::optional<KrausChannel> noise;
};

/// t is exp(i pi/8 Z), tdg its inverse.
[[nodiscard]] Matrix gate_matrix(const GateOp& op);

class GateCircuit {
 public:
  explicit GateCircuit(int n_qubits = 0);

  /// Validates targets and noise width; returns *this for chaining.
  GateCircuit& add(GateOp op);
  GateCircuit& add(GateKind kind, std::vector<int> targets,
                   std::optional<KrausChannel> noise = std::nullopt);
  /// Appends `other` with its qubit i mapped to map[i].
  GateCircuit& append(const GateCircuit& other, std::span<const int> map);

  [[nodiscard]] const std::vector<GateOp>& ops() const { return ops_; }
  [[nodiscard]] int n_qubits() const { return n_qubits_; }
  [[nodiscard]] int two_qubit_gate_count() const;

 private:
  std::vector<GateOp> ops_;
  int n_qubits_;
};

/// Product of the gate matrices, noise ignored.
[[nodiscard]] Matrix circuit_unitary(const GateCircuit& circuit);

/// Runs the circuit, gates and attached noise, on `qubits` of rho (circuit
/// qubit i -> qubits[i]).
void apply_circuit(DensityMatrix& rho, const GateCircuit& circuit, std::span<const int> qubits);

/// Uniform two-qubit Pauli channel: weight eps/15 on each non-identity string.
[[nodiscard]] KrausChannel two_qubit_depolarizing(double eps);

/// Toffoli as 6 cNOTs, 2 H and 7 phase(+-pi/4) gates on {c1, c2, target}.
[[nodiscard]] GateCircuit toffoli_decomposition(std::optional<KrausChannel> cnot_noise = std::nullopt);

/// Controlled swap of two m-qubit registers on 2m + 1 qubits: control 0,
/// register a on 1..m, register b on m+1..2m.  One Fredkin per qubit pair,
/// each cNOT (Toffoli) cNOT with the Toffoli expanded; 8m cNOTs in total.
/// `cnot_noise` is attached after every cNOT.
[[nodiscard]] GateCircuit cswap_decomposition(int m,
                                              std::optional<KrausChannel> cnot_noise = std::nullopt);

/// [cNOT (T (x) T)]^layers.
[[nodiscard]] Matrix layered_unitary(int layers);
/// Same as a circuit; optional noise after each cNOT and after each T.
[[nodiscard]] GateCircuit layered_circuit(int layers,
                                          std::optional<KrausChannel> cnot_noise = std::nullopt,
                                          std::optional<KrausChannel> t_noise = std::nullopt);

struct NoisyProtocolOptions {
  /// Target computation.  When unset, spec.unitary followed by spec.channel.
  std::optional<GateCircuit> target;
  /// Two-qubit depolarizing strength after every cNOT of both swaps.
  double cswap_eps = 0.0;
};

struct NoisyProtocolResult {
  std::vector<OutcomeRecord> records;
  FiguresOfMerit merit;  // constructive outcome; F0 from the same target alone
};

/// Full protocol with gate-level swaps.  Requires d = 2 and the Choi input.
/// A target circuit must implement spec.unitary up to a global phase.
[[nodiscard]] NoisyProtocolResult run_noisy_protocol(const ProtocolSpec& spec,
                                                     const NoisyProtocolOptions& options);

/// Either a bare gate list (qubit count inferred) or {"n_qubits", "gates"}.
/// Gate entries: {"gate": name, "targets": [...], "angle"?: x, "noise"?: channel}.
[[nodiscard]] GateCircuit circuit_from_json(const nlohmann::json& doc);
/// Emits the bare gate list.
[[nodiscard]] nlohmann::json circuit_to_json(const GateCircuit& circuit);

}  // namespace sqem
