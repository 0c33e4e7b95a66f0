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

// Batch experiments: a JSON config describes a grid of protocol runs, each
// grid point becomes one CSV row.

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqem/compiler.hpp"
#include "sqem/corrector.hpp"
#include "sqem/protocol.hpp"

namespace sqem {

inline constexpr const char* kSweepSchema = "sqem-sweep/1";

/// Schema violation.  `line` is 1-based, 0 when it could not be located.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

enum class Scenario { kProbabilistic, kQuasiDeterministic, kNoisyCswap, kOmegaScan };
[[nodiscard]] std::string to_string(Scenario s);
[[nodiscard]] Scenario scenario_from_string(const std::string& name);
[[nodiscard]] Engine engine_from_string(const std::string& name);

struct GateSpec {
  std::string label;  // cnot, t, identity, layered(N), or the custom label
  Matrix unitary;
  std::optional<GateCircuit> circuit;  // set for layered and custom gates
  [[nodiscard]] int n_qubits() const;
};

/// cnot, t, identity (m qubits), layered(N) / {"layered": N}, or
/// {"circuit": ..., "label"?: name}.
[[nodiscard]] GateSpec gate_from_json(const nlohmann::json& doc, int identity_qubits = 1);

struct ChannelFamily {
  /// dephasing, depolarizing, bit_flip, amplitude_damping, joint_depolarizing
  /// or custom.
  std::string family;
  /// Grid values are per-qubit no-error probabilities instead of the total.
  bool per_qubit = false;
  std::optional<KrausChannel> custom;
};

/// m-qubit channel of the family.  Single-qubit families act independently
/// on every qubit; `p_ne` is the total no-error probability unless the
/// family is per_qubit.
[[nodiscard]] KrausChannel make_channel(const ChannelFamily& family, double p_ne, int m);

/// Named auxiliary product states: one character per qubit from "01+-",
/// or "ry:<angle>" for Ry(angle)|0> on every qubit.
[[nodiscard]] PureState named_state(const std::string& name, int m);

struct SweepConfig {
  std::string name;
  Scenario scenario = Scenario::kProbabilistic;
  GateSpec gate;
  ChannelFamily channel;
  std::vector<double> p_ne;
  std::vector<int> branches;
  std::vector<std::string> aux;  // named states or "choi"
  std::vector<double> cswap_eps{0.0};
  double threshold = 1.0;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  Engine engine = Engine::kAuto;
  /// Largest register simulated densely; bigger rows become row errors.
  int max_qubits = 12;
};

/// Parses and checks the whole document.  Throws ConfigError.
[[nodiscard]] SweepConfig parse_config(const std::string& text);
[[nodiscard]] SweepConfig load_config(const std::string& path);

struct GridPoint {
  double p_ne = 1.0;
  int branches = 2;
  std::string aux;
  double cswap_eps = 0.0;
};

/// Grid order: p_ne outermost, then d, aux, cswap_eps.
[[nodiscard]] std::vector<GridPoint> expand_grid(const SweepConfig& cfg);

/// Choi input in every case.
[[nodiscard]] ProtocolSpec build_spec(const SweepConfig& cfg, const GridPoint& point);

struct ResultRow {
  std::string scenario;
  std::string gate;
  std::string channel;
  double p_ne = 0.0;  // of the full m-qubit channel
  int d = 0;
  std::string aux;
  std::optional<double> omega1;
  std::optional<double> omega2;
  double P = 0.0;
  double R = 0.0;
  double F_CJ = 0.0;
  double F0_CJ = 0.0;
  std::string engine;
  double ms = 0.0;
  bool R_sentinel = false;
  std::optional<std::string> error;
};

/// Never throws for per-row failures; they land in `error`.
[[nodiscard]] ResultRow run_point(const SweepConfig& cfg, const GridPoint& point);

struct SweepResult {
  std::vector<ResultRow> rows;
  int workers = 1;
  double wall_ms = 0.0;
  [[nodiscard]] int error_count() const;
};

/// SQEM_WORKERS, else the hardware concurrency.
[[nodiscard]] int default_worker_count();
[[nodiscard]] SweepResult run_sweep(const SweepConfig& cfg, int workers);

/// 17 significant digits, locale independent; inf and nan spelled out.
[[nodiscard]] std::string format_number(double x);

inline constexpr const char* kCsvHeader =
    "scenario,gate,channel,p_ne,d,aux,omega1,omega2,P,R,F_CJ,F0_CJ,engine,ms";

/// Error rows keep their parameters, leave the numbers empty and carry
/// engine "error".  Without `timing` the ms column is empty.
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool timing);

[[nodiscard]] nlohmann::json make_manifest(const SweepConfig& cfg, const std::string& config_text,
                                           const SweepResult& result);

/// Hex SHA-256.
[[nodiscard]] std::string sha256_hex(const std::string& data);

}  // namespace sqem
