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

// Per-outcome correction unitaries for the quasi-deterministic variant.
//
// Outcomes are kept greedily by probability until a requested threshold is
// reached; every kept outcome then gets its own correction V applied to the
// active half of the input register, chosen to maximize the fidelity of
// (I (x) V) rho_o (I (x) V)^dagger with the ideal output.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqem/protocol.hpp"

namespace sqem {

/// Outcomes by descending probability (ties in key order), cut at the
/// shortest prefix whose cumulative probability reaches `threshold`.
/// Zero-probability outcomes are never returned.  Throws for thresholds
/// outside (0, 1].
[[nodiscard]] std::vector<OutcomeKey> rank_outcomes(std::span<const OutcomeRecord> records,
                                                    double threshold);

enum class Parameterization { kSingleQubitProducts, kPauliSet };
[[nodiscard]] std::string to_string(Parameterization p);
[[nodiscard]] Parameterization parameterization_from_string(const std::string& name);

struct OptimizerConfig {
  double threshold = 1.0;
  int max_evaluations = 4000;  // per outcome, summed over restarts
  double tolerance = 1e-12;    // simplex spread in objective value
  int restarts = 4;            // random starts after the identity start
  Parameterization parameterization = Parameterization::kSingleQubitProducts;
  std::uint64_t seed = 0;
  /// 0 uses the exact fidelity; otherwise each objective evaluation is a
  /// binomial estimate from this many shots.
  int shots = 0;
};

/// U3(theta, phi, lambda) on every qubit; angles.size() == 3m.
[[nodiscard]] Matrix correction_unitary(std::span<const double> angles);

/// Euler angles of pauli_string(index, m), up to a global phase.
[[nodiscard]] std::vector<double> pauli_angles(std::size_t index, int m);

/// Fidelity with the ideal output after applying `v` to the active qubits.
[[nodiscard]] double corrected_fidelity(const ProtocolSpec& spec, const OutcomeRecord& record,
                                        const Matrix& v);

struct CorrectionEntry {
  OutcomeKey key;
  double probability = 0.0;
  bool included = false;
  std::vector<double> angles;  // 3m; all zero for the identity
  Matrix correction;
  double fidelity_uncorrected = 0.0;
  double fidelity = 0.0;
  int evaluations = 0;
  bool budget_exhausted = false;
};

struct CorrectionTable {
  std::vector<CorrectionEntry> entries;  // key order
  double threshold = 1.0;
  Parameterization parameterization = Parameterization::kSingleQubitProducts;
  double achieved_probability = 0.0;
  double achieved_F_CJ = 0.0;
  double uncorrected_F_CJ = 0.0;
  /// Set when some outcome ran out of evaluations before converging.
  bool warning = false;

  [[nodiscard]] const CorrectionEntry* find(const OutcomeKey& key) const;
};

/// Requires the Choi input mode.  `records` must be the complete outcome list
/// of `spec`.
[[nodiscard]] CorrectionTable optimize_corrections(const ProtocolSpec& spec,
                                                   std::span<const OutcomeRecord> records,
                                                   const OptimizerConfig& cfg);
/// Evaluates the outcomes first (closed form).
[[nodiscard]] CorrectionTable optimize_corrections(const ProtocolSpec& spec,
                                                   const OptimizerConfig& cfg);

/// Angles and doubles use 17 significant digits.
[[nodiscard]] nlohmann::json table_to_json(const CorrectionTable& table);
[[nodiscard]] CorrectionTable table_from_json(const nlohmann::json& doc);

}  // namespace sqem
