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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqem/qstate.hpp"

namespace sqem {

/// Kraus representation of a CPTP map on k qubits.
///
/// Standard constructors put the no-error component first, so that
/// operators()[0] == sqrt(p_ne) * I and declared_p_ne() is set.  Operators
/// with zero Frobenius norm are dropped.
class KrausChannel {
 public:
  KrausChannel() = default;
  /// Checks shapes only; completeness is reported by validate().
  explicit KrausChannel(std::vector<Matrix> operators,
                        std::optional<double> declared_p_ne = std::nullopt);

  [[nodiscard]] const std::vector<Matrix>& operators() const { return operators_; }
  [[nodiscard]] int n_qubits() const { return n_qubits_; }
  [[nodiscard]] std::size_t dim() const { return dim_of(n_qubits_); }
  [[nodiscard]] std::optional<double> declared_p_ne() const { return declared_p_ne_; }
  [[nodiscard]] std::size_t size() const { return operators_.size(); }

 private:
  std::vector<Matrix> operators_;
  int n_qubits_ = 0;
  std::optional<double> declared_p_ne_;
};

struct ChannelReport {
  bool ok = true;
  double completeness_deviation = 0.0;
  /// Unset when the channel declares no p_ne.
  std::optional<bool> identity_convention_ok;
  std::string message;
};

/// Never throws.
[[nodiscard]] ChannelReport validate(const KrausChannel& channel, double tol = 1e-10);

/// 2x2 Pauli: 0 = I, 1 = X, 2 = Y, 3 = Z.
[[nodiscard]] Matrix pauli(int index);
/// m-qubit Pauli string; base-4 digits of `index`, most significant first.
[[nodiscard]] Matrix pauli_string(std::size_t index, int m);

[[nodiscard]] KrausChannel identity_channel(int n_qubits);
[[nodiscard]] KrausChannel dephasing(double p_ne);
[[nodiscard]] KrausChannel depolarizing(double p_ne);
[[nodiscard]] KrausChannel bit_flip(double p_ne);
[[nodiscard]] KrausChannel amplitude_damping(double gamma);
/// Uniform Pauli channel on k qubits: weight (1 - p_ne) / (4^k - 1) on every
/// non-identity Pauli string.
[[nodiscard]] KrausChannel joint_depolarizing(int n_qubits, double p_ne);
/// weights[i] is the probability of pauli_string(i, k); must sum to 1.
[[nodiscard]] KrausChannel pauli_channel(int n_qubits, std::span<const double> weights);

/// All ordered tensor products a_i (x) b_j, a on the high-order qubits.
[[nodiscard]] KrausChannel tensor_product(const KrausChannel& a, const KrausChannel& b);
/// m independent copies, one per qubit block.
[[nodiscard]] KrausChannel tensor_power(const KrausChannel& channel, int m);

/// sum_j K_j rho K_j^dagger on `targets`.
[[nodiscard]] DensityMatrix apply(const KrausChannel& channel, DensityMatrix rho,
                                  std::span<const int> targets);

namespace kernel {
void apply_channel(Matrix& rho, const KrausChannel& channel, std::span<const int> targets,
                   int n_qubits);
}

/// The incoherent reference map rho -> sum_j K_j U rho U^dagger K_j^dagger.
class NoisyGate {
 public:
  NoisyGate(Matrix unitary, KrausChannel channel);

  [[nodiscard]] DensityMatrix operator()(DensityMatrix rho, std::span<const int> targets) const;
  [[nodiscard]] DensityMatrix operator()(DensityMatrix rho) const;

  [[nodiscard]] const Matrix& unitary() const { return unitary_; }
  [[nodiscard]] const KrausChannel& channel() const { return channel_; }
  [[nodiscard]] int n_qubits() const { return channel_.n_qubits(); }

 private:
  Matrix unitary_;
  KrausChannel channel_;
};

[[nodiscard]] NoisyGate noisy_gate(Matrix unitary, KrausChannel channel);

/// declared_p_ne when set; otherwise sum_j |Tr K_j|^2 / dim^2, the entanglement
/// fidelity of the channel with the identity.
[[nodiscard]] double no_error_probability(const KrausChannel& channel);

/// New Kraus list sum_l W_jl K_l for a unitary W.
[[nodiscard]] KrausChannel remix(const KrausChannel& channel, const Matrix& mixing);

/// Gauge-fixed Kraus list: operator 0 carries the whole trace (it is
/// sqrt(p_ne) I plus a traceless part, which vanishes for Pauli channels) and
/// all other operators are traceless.
[[nodiscard]] KrausChannel canonical_identity_gauge(const KrausChannel& channel);

/// I (x) K_j for each operator; used for reference halves of Choi registers.
[[nodiscard]] KrausChannel lift_with_reference(const KrausChannel& channel, int reference_qubits);

/// {"n_qubits": k, "operators": [[[re, im], ...], ...]}, operators row-major.
/// Throws ValidationError when the document is malformed or the channel
/// fails validate().
[[nodiscard]] KrausChannel channel_from_json(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json channel_to_json(const KrausChannel& channel);

}  // namespace sqem
