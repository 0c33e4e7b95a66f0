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

// Superposed execution of a noisy gate across an input register and d - 1
// auxiliary registers.
//
// A d-level control (log2 d qubits) is prepared in the uniform superposition.
// A generalized controlled swap sum_k |k><k| (x) SWAP(a, b_k) routes the input
// into branch k, every register then undergoes the same noisy gate
// independently, the swap is undone, and the control (Fourier basis) plus
// every auxiliary (aux_basis) is measured.
//
// Registers may carry a leading reference half that the protocol never
// touches: the Choi-style input (Bell pairs, second half processed) and the
// Choi-like auxiliary use this.

#include <compare>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqem/channels.hpp"
#include "sqem/qstate.hpp"

namespace sqem {

struct RegisterState {
  PureState state;
  /// Leading qubits that are carried along but never acted on.
  int reference_qubits = 0;

  [[nodiscard]] int total_qubits() const { return state.n_qubits(); }
  [[nodiscard]] int active_qubits() const { return state.n_qubits() - reference_qubits; }
};

enum class InputMode { kExplicit, kChoi };
enum class AuxiliaryKind { kPure, kChoi };
enum class Variant { kProbabilistic, kQuasiDeterministic };

struct ProtocolSpec {
  Matrix unitary;        // m qubits
  KrausChannel channel;  // per-branch noise, m qubits
  int branches = 2;      // d
  InputMode input_mode = InputMode::kChoi;
  RegisterState input;
  AuxiliaryKind auxiliary_kind = AuxiliaryKind::kPure;
  RegisterState auxiliary;
  /// First element is phi_f.
  MeasurementBasis aux_basis;
  Variant variant = Variant::kProbabilistic;

  [[nodiscard]] int m() const { return channel.n_qubits(); }
};

/// Throws ValidationError describing the first broken invariant.
void validate_spec(const ProtocolSpec& spec);

/// Bell pairs on 2m qubits, second half processed.
[[nodiscard]] RegisterState choi_input(int m);
[[nodiscard]] RegisterState explicit_register(PureState state);

struct ChoiAuxiliary {
  RegisterState auxiliary;
  /// {(P_i (x) U)|Phi_m+>} over the 4^m Pauli strings, P_0 = I first.
  MeasurementBasis basis;
};
[[nodiscard]] ChoiAuxiliary choi_auxiliary(const Matrix& unitary, int m);

/// Basis whose first element is (I_ref (x) U)|phi0>, completed by Gram-Schmidt.
[[nodiscard]] MeasurementBasis default_aux_basis(const Matrix& unitary, const RegisterState& aux);

/// Spec with a pure auxiliary and the default basis.
[[nodiscard]] ProtocolSpec make_spec(Matrix unitary, KrausChannel channel, int branches,
                                     RegisterState input, RegisterState auxiliary);
/// Spec with the Choi-like auxiliary.
[[nodiscard]] ProtocolSpec make_choi_spec(Matrix unitary, KrausChannel channel, int branches,
                                          RegisterState input);

struct OutcomeKey {
  int control = 0;           // Fourier index; 0 is the "+" outcome
  std::vector<int> aux;      // one basis index per auxiliary register

  auto operator<=>(const OutcomeKey&) const = default;
  [[nodiscard]] std::string to_string() const;
};

struct OutcomeRecord {
  OutcomeKey key;
  double probability = 0.0;
  DensityMatrix state;  // normalized; zero matrix when probability == 0
  double fidelity = 0.0;
};

/// Every outcome of the spec in lexicographic key order.
[[nodiscard]] std::vector<OutcomeKey> all_outcome_keys(const ProtocolSpec& spec);
/// {control "+", every auxiliary on phi_f}.
[[nodiscard]] OutcomeKey constructive_outcome(const ProtocolSpec& spec);

struct BranchOverlaps {
  Vector beta;  // beta_j = <phi_f| (I (x) K_j U) |phi0>
  double A = 0.0;
};
[[nodiscard]] BranchOverlaps branch_overlaps(const ProtocolSpec& spec, const PureState& phi_f);

struct OmegaMetrics {
  std::optional<double> omega1;  // unset for a noiseless channel
  double omega2 = 0.0;
};
/// Sensitivity of U|phi0> to the non-identity Kraus operators, evaluated in
/// the identity-carrying gauge, and the overlap |<phi_f|U|phi0>|^2.
[[nodiscard]] OmegaMetrics omega_metrics(const Matrix& unitary, const KrausChannel& channel,
                                         const PureState& phi0, const PureState& phi_f);
/// Same, on the auxiliary register of `spec` (reference halves included).
[[nodiscard]] OmegaMetrics omega_metrics(const ProtocolSpec& spec);

/// Qubit map of the full brute-force register:
/// [control][input: ref | active][aux_1: ref | active]...
struct ProtocolLayout {
  RegisterLayout registers;
  int control_qubits = 0;
  std::vector<int> input_active;
  std::vector<std::vector<int>> aux_active;
};
[[nodiscard]] ProtocolLayout protocol_layout(const ProtocolSpec& spec);

/// Replaceable stages of the brute-force engine.  Empty hooks use the ideal
/// permutation cSWAP and noisy_gate(U, channel).
struct ExecutionModel {
  std::function<void(DensityMatrix&, const ProtocolLayout&)> cswap;
  std::function<void(DensityMatrix&, std::span<const int> active)> target;
};

/// Full density-matrix execution of the protocol.  Records come back in
/// lexicographic key order.
[[nodiscard]] std::vector<OutcomeRecord> run_bruteforce(const ProtocolSpec& spec);
[[nodiscard]] std::vector<OutcomeRecord> run_bruteforce(const ProtocolSpec& spec,
                                                        const ExecutionModel& model);

/// Two-branch output state for one outcome, from the overlaps.
[[nodiscard]] OutcomeRecord closed_form_d2(const ProtocolSpec& spec, const OutcomeKey& key);

/// Any d, any outcome.  Built as (1/d^2) sum_{k,k'} w^{-s(k-k')} T_{kk'} with
/// T_kk = prod_l A_l E_U(psi) and T_kk' a product of cross-overlaps times
/// B_a psi B_b^dagger, B_l = sum_j conj(beta^l_j) K_j U.
[[nodiscard]] OutcomeRecord closed_form_general(const ProtocolSpec& spec, const OutcomeKey& key);

enum class Engine { kBruteForce, kClosedForm, kAuto };
[[nodiscard]] std::string to_string(Engine engine);

struct Evaluation {
  std::vector<OutcomeRecord> records;
  Engine engine_used = Engine::kClosedForm;
};
[[nodiscard]] Evaluation evaluate_outcomes(const ProtocolSpec& spec, Engine engine);

/// The ideal output (I (x) U)|input> that fidelities are measured against.
[[nodiscard]] PureState ideal_output(const ProtocolSpec& spec);

/// CJ fidelity of the probability-weighted mixture of the selected outcomes.
[[nodiscard]] double cj_fidelity(const ProtocolSpec& spec, std::span<const OutcomeRecord> records,
                                 std::span<const OutcomeKey> selection);

struct FiguresOfMerit {
  double P = 0.0;
  double R = 1.0;
  double F_CJ = 0.0;
  double F0_CJ = 0.0;
  /// R was set by convention (F_CJ == 1): 1 when also F0_CJ == 1, +inf otherwise.
  bool R_sentinel = false;
};
[[nodiscard]] FiguresOfMerit figures_of_merit(const ProtocolSpec& spec,
                                              std::span<const OutcomeRecord> records,
                                              std::span<const OutcomeKey> selection);
/// Infidelity ratio with the noiseless conventions applied.
[[nodiscard]] FiguresOfMerit merit_from(double probability, double f_cj, double f0_cj);

struct AnalyticMerit {
  double P = 0.0;
  double R = 0.0;
  double F_CJ = 0.0;
};
/// Closed forms valid when omega1 = omega2 = 1.
[[nodiscard]] AnalyticMerit analytic_P_R(double p_ne, int branches);

}  // namespace sqem
