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

// sqem: sweep / single / optimize / validate.
//
// Exit codes: 0 ok, 1 runtime failure, 2 config or usage error, 3 some
// sweep rows failed.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sqem/sweep.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kConfigError = 2;
constexpr int kPartialFailure = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sqem::ConfigError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

sqem::SweepConfig load(const std::string& path, std::string& text,
                       std::optional<std::uint64_t> seed) {
  text = read_file(path);
  auto cfg = sqem::parse_config(text);
  if (seed) cfg.seed = *seed;
  return cfg;
}

bool write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  out.close();
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return false;
  }
  return true;
}

int cmd_sweep(const std::string& config, const std::string& out_path, std::string manifest_path,
              std::optional<std::uint64_t> seed, bool timing) {
  std::string text;
  const auto cfg = load(config, text, seed);
  const int workers = sqem::default_worker_count();
  const auto result = sqem::run_sweep(cfg, workers);

  std::ostringstream csv;
  sqem::write_csv(csv, result.rows, timing);
  if (!write_text(out_path, csv.str())) return kRuntimeError;
  if (manifest_path.empty()) manifest_path = out_path + ".manifest.json";
  if (!write_text(manifest_path, sqem::make_manifest(cfg, text, result).dump(2) + "\n")) {
    return kRuntimeError;
  }

  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    if (const auto& r = result.rows[i]; r.error) {
      std::cerr << "row " << i << " (p_ne=" << sqem::format_number(r.p_ne) << ", d=" << r.d
                << ", aux=" << r.aux << "): " << *r.error << "\n";
    }
  }
  std::cerr << result.rows.size() << " rows, " << result.error_count() << " errors, "
            << result.workers << " workers, " << std::fixed << std::setprecision(0)
            << result.wall_ms << " ms\n";
  return result.error_count() > 0 ? kPartialFailure : kOk;
}

int cmd_validate(const std::string& config) {
  std::string text;
  const auto cfg = load(config, text, std::nullopt);
  const auto grid = sqem::expand_grid(cfg);
  for (const auto& point : grid) (void)sqem::build_spec(cfg, point);
  std::cout << "ok: " << (cfg.name.empty() ? config : cfg.name) << ": "
            << sqem::to_string(cfg.scenario) << ", " << grid.size() << " grid points\n";
  return kOk;
}

int cmd_optimize(const std::string& config, const std::string& out_path,
                 std::optional<std::uint64_t> seed) {
  std::string text;
  const auto cfg = load(config, text, seed);
  const auto grid = sqem::expand_grid(cfg);
  if (grid.size() != 1) {
    throw sqem::ConfigError("optimize needs exactly one grid point, config has " +
                            std::to_string(grid.size()));
  }
  const auto spec = sqem::build_spec(cfg, grid.front());
  auto opt = cfg.optimizer;
  opt.threshold = cfg.threshold;
  opt.seed = cfg.seed;
  const auto eval = sqem::evaluate_outcomes(spec, cfg.engine);
  const auto table = sqem::optimize_corrections(spec, eval.records, opt);
  if (!write_text(out_path, sqem::table_to_json(table).dump(2) + "\n")) return kRuntimeError;
  std::cout << "achieved_probability " << sqem::format_number(table.achieved_probability)
            << "\nachieved_F_CJ " << sqem::format_number(table.achieved_F_CJ)
            << "\nuncorrected_F_CJ " << sqem::format_number(table.uncorrected_F_CJ) << "\n";
  if (table.warning) std::cerr << "warning: evaluation budget exhausted for some outcomes\n";
  return kOk;
}

struct SingleArgs {
  std::string gate = "cnot";
  int m = 1;
  std::string channel = "dephasing";
  bool per_qubit = false;
  double p_ne = 0.9;
  int d = 2;
  std::string aux = "choi";
  std::string engine = "auto";
  bool all = false;
};

int cmd_single(const SingleArgs& a) {
  sqem::SweepConfig cfg;
  try {
    cfg.gate = sqem::gate_from_json(nlohmann::json(a.gate), a.m);
    cfg.channel.family = a.channel;
    cfg.channel.per_qubit = a.per_qubit;
    cfg.engine = sqem::engine_from_string(a.engine);
  } catch (const sqem::ValidationError& e) {
    throw sqem::ConfigError(e.what());
  }
  const sqem::GridPoint point{a.p_ne, a.d, a.aux, 0.0};
  const auto spec = sqem::build_spec(cfg, point);
  const auto eval = sqem::evaluate_outcomes(spec, cfg.engine);
  const auto keep = sqem::constructive_outcome(spec);
  const std::vector<sqem::OutcomeKey> selection{keep};
  const auto merit = sqem::figures_of_merit(spec, eval.records, selection);
  const auto omega = sqem::omega_metrics(spec);

  std::cout << "gate " << cfg.gate.label << ", channel " << a.channel << ", p_ne "
            << sqem::format_number(sqem::no_error_probability(spec.channel)) << ", d " << a.d
            << ", aux " << a.aux << ", engine " << sqem::to_string(eval.engine_used) << "\n\n";
  std::cout << std::left << std::setw(6) << "sign" << std::setw(9) << "control" << std::setw(18)
            << "aux" << std::setw(24) << "probability" << "fidelity\n";
  int hidden = 0;
  for (const auto& r : eval.records) {
    if (!a.all && r.probability <= 1e-14) {
      ++hidden;
      continue;
    }
    std::string aux;
    for (std::size_t i = 0; i < r.key.aux.size(); ++i) {
      aux += (i ? "," : "") + std::to_string(r.key.aux[i]);
    }
    if (aux.empty()) aux = "-";
    std::cout << std::setw(6) << (r.key.control == 0 ? "+" : "-") << std::setw(9) << r.key.control
              << std::setw(18) << aux << std::setw(24) << sqem::format_number(r.probability)
              << (r.probability > 0 ? sqem::format_number(r.fidelity) : "") << "\n";
  }
  if (hidden > 0) std::cout << "(" << hidden << " zero-probability outcomes hidden)\n";
  std::cout << "\nkept " << keep.to_string() << "\nP " << sqem::format_number(merit.P) << "\nR "
            << sqem::format_number(merit.R) << (merit.R_sentinel ? " (noiseless convention)" : "")
            << "\nF_CJ " << sqem::format_number(merit.F_CJ) << "\nF0_CJ "
            << sqem::format_number(merit.F0_CJ) << "\nomega1 "
            << (omega.omega1 ? sqem::format_number(*omega.omega1) : "undefined") << "\nomega2 "
            << sqem::format_number(omega.omega2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superposed quantum error mitigation simulator"};
  app.set_version_flag("--version", std::string(SQEM_VERSION));
  app.require_subcommand(1);

  std::string config, out_path, manifest_path;
  std::optional<std::uint64_t> seed;
  bool timing = false;

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write CSV plus manifest");
  sweep->add_option("config", config, "Sweep config (JSON)")->required();
  sweep->add_option("-o,--output", out_path, "CSV output path")->required();
  sweep->add_option("--manifest", manifest_path, "Manifest path (default <output>.manifest.json)");
  sweep->add_option("--seed", seed, "Override the config seed");
  sweep->add_flag("--timing", timing, "Fill the ms column (output no longer byte-stable)");

  SingleArgs single_args;
  auto* single = app.add_subcommand("single", "Run one protocol instance and print every outcome");
  single->add_option("--gate", single_args.gate, "cnot, t, identity or layered(N)")
      ->capture_default_str();
  single->add_option("--m", single_args.m, "Qubits for the identity gate")->capture_default_str();
  single->add_option("--channel", single_args.channel, "Channel family")->capture_default_str();
  single->add_flag("--per-qubit", single_args.per_qubit, "p_ne is per qubit");
  single->add_option("--p-ne", single_args.p_ne, "No-error probability")->capture_default_str();
  single->add_option("--d", single_args.d, "Branches")->capture_default_str();
  single->add_option("--aux", single_args.aux, "Auxiliary state or choi")->capture_default_str();
  single->add_option("--engine", single_args.engine, "bruteforce, closed_form or auto")
      ->capture_default_str();
  single->add_flag("--all", single_args.all, "Also list zero-probability outcomes");

  auto* optimize = app.add_subcommand("optimize", "Optimize correction unitaries for one point");
  optimize->add_option("config", config, "Config with a single grid point")->required();
  optimize->add_option("-o,--output", out_path, "CorrectionTable JSON path")->required();
  optimize->add_option("--seed", seed, "Override the config seed");

  auto* validate = app.add_subcommand("validate", "Check a sweep config");
  validate->add_option("config", config, "Sweep config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sweep) return cmd_sweep(config, out_path, manifest_path, seed, timing);
    if (*single) return cmd_single(single_args);
    if (*optimize) return cmd_optimize(config, out_path, seed);
    if (*validate) return cmd_validate(config);
  } catch (const sqem::ConfigError& e) {
    std::cerr << config << ": " << e.what() << "\n";
    return kConfigError;
  } catch (const sqem::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}
