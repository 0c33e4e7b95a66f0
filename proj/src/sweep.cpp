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

#include "sqem/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

namespace sqem {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Best-effort source line for diagnostics: first line mentioning "key".
int line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

int line_at_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

class Reader {
 public:
  Reader(const nlohmann::json& doc, const std::string& text) : doc_(doc), text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError("\"" + key + "\": " + message, line_of(text_, key));
  }

  template <typename T>
  T get(const nlohmann::json& node, const std::string& key) const {
    try {
      return node.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail(key, e.what());
    }
  }

  // A list, a single value, or {"from","to","steps"}.
  std::vector<double> real_grid(const nlohmann::json& node, const std::string& key) const {
    const auto& v = node.at(key);
    std::vector<double> out;
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_array()) {
      for (const auto& x : v) {
        if (!x.is_number()) fail(key, "grid entries must be numbers");
        out.push_back(x.get<double>());
      }
    } else if (v.is_object()) {
      for (const auto& [k, _] : v.items()) {
        if (k != "from" && k != "to" && k != "steps") fail(key, "unknown range field '" + k + "'");
      }
      const auto from = get<double>(v, "from");
      const auto to = get<double>(v, "to");
      const auto steps = get<int>(v, "steps");
      if (steps < 1) fail(key, "steps must be positive");
      if (steps == 1) {
        out.push_back(from);
      } else {
        for (int i = 0; i < steps; ++i) out.push_back(from + (to - from) * i / (steps - 1));
      }
    } else {
      fail(key, "expected a number, a list or a range");
    }
    if (out.empty()) fail(key, "grid is empty");
    for (double x : out) {
      if (!std::isfinite(x)) fail(key, "grid values must be finite");
    }
    return out;
  }

  const nlohmann::json& doc() const { return doc_; }

 private:
  const nlohmann::json& doc_;
  const std::string& text_;
};

const std::set<std::string> kTopLevelKeys{
    "schema", "name", "scenario", "gate", "m", "channel", "d", "aux", "theta",
    "threshold", "optimizer", "cswap_eps", "seed", "engine", "max_qubits"};

const std::set<std::string> kSingleQubitFamilies{"dephasing", "depolarizing", "bit_flip",
                                                 "amplitude_damping"};

KrausChannel single_qubit(const std::string& family, double p) {
  if (family == "dephasing") return dephasing(p);
  if (family == "depolarizing") return depolarizing(p);
  if (family == "bit_flip") return bit_flip(p);
  // ((1 + sqrt(1 - gamma)) / 2)^2 = p
  if (p < 0.25 || p > 1.0) throw ValidationError("amplitude_damping needs p_ne in [0.25, 1]");
  const double root = 2.0 * std::sqrt(p) - 1.0;
  return amplitude_damping(std::clamp(1.0 - root * root, 0.0, 1.0));
}

int aux_qubits(const std::string& aux, int m) { return aux == "choi" ? 2 * m : m; }

int register_qubits(const SweepConfig& cfg, const GridPoint& point) {
  const int m = cfg.gate.n_qubits();
  const int control = static_cast<int>(std::bit_width(static_cast<unsigned>(point.branches - 1)));
  return control + 2 * m + (point.branches - 1) * aux_qubits(point.aux, m);
}

std::size_t outcome_count(const SweepConfig& cfg, const GridPoint& point) {
  const auto basis = dim_of(aux_qubits(point.aux, cfg.gate.n_qubits()));
  std::size_t n = static_cast<std::size_t>(point.branches);
  for (int l = 1; l < point.branches; ++l) {
    if (n > (std::size_t{1} << 40) / basis) return std::size_t{1} << 40;
    n *= basis;
  }
  return n;
}

constexpr std::size_t kMaxOutcomes = 4096;

std::string channel_label(const SweepConfig& cfg, double cswap_eps) {
  std::string label = cfg.channel.family;
  if (cfg.channel.per_qubit) label += "/qubit";
  if (cfg.scenario == Scenario::kNoisyCswap) label += ";cswap_eps=" + format_number(cswap_eps);
  return label;
}

ResultRow evaluate(const SweepConfig& cfg, const GridPoint& point, ResultRow row) {
  const auto spec = build_spec(cfg, point);
  row.p_ne = no_error_probability(spec.channel);
  const auto omega = omega_metrics(spec);
  row.omega1 = omega.omega1;
  row.omega2 = omega.omega2;

  const bool fits = register_qubits(cfg, point) <= cfg.max_qubits;
  const bool dense = cfg.engine == Engine::kBruteForce || cfg.scenario == Scenario::kNoisyCswap;
  if (dense && !fits) {
    throw ValidationError("register of " + std::to_string(register_qubits(cfg, point)) +
                          " qubits exceeds max_qubits = " + std::to_string(cfg.max_qubits));
  }

  FiguresOfMerit merit;
  switch (cfg.scenario) {
    case Scenario::kNoisyCswap: {
      NoisyProtocolOptions options;
      options.cswap_eps = point.cswap_eps;
      merit = run_noisy_protocol(spec, options).merit;
      row.engine = to_string(Engine::kBruteForce);
      break;
    }
    case Scenario::kQuasiDeterministic: {
      if (outcome_count(cfg, point) > kMaxOutcomes) {
        throw ValidationError("too many measurement outcomes to tabulate corrections");
      }
      const auto eval = evaluate_outcomes(spec, cfg.engine);
      auto opt = cfg.optimizer;
      opt.threshold = cfg.threshold;
      opt.seed = cfg.seed;
      const auto table = optimize_corrections(spec, eval.records, opt);
      merit = merit_from(table.achieved_probability, table.achieved_F_CJ,
                         no_error_probability(spec.channel));
      row.engine = to_string(eval.engine_used);
      break;
    }
    case Scenario::kProbabilistic:
    case Scenario::kOmegaScan: {
      const std::vector<OutcomeKey> keep{constructive_outcome(spec)};
      std::vector<OutcomeRecord> records;
      if (cfg.engine == Engine::kBruteForce) {
        records = run_bruteforce(spec);
        row.engine = to_string(Engine::kBruteForce);
      } else {
        records.push_back(closed_form_general(spec, keep.front()));
        row.engine = to_string(Engine::kClosedForm);
      }
      merit = figures_of_merit(spec, records, keep);
      break;
    }
  }
  row.P = merit.P;
  row.R = merit.R;
  row.F_CJ = merit.F_CJ;
  row.F0_CJ = merit.F0_CJ;
  row.R_sentinel = merit.R_sentinel;
  return row;
}

void write_field(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kProbabilistic: return "probabilistic";
    case Scenario::kQuasiDeterministic: return "quasi_deterministic";
    case Scenario::kNoisyCswap: return "noisy_cswap";
    case Scenario::kOmegaScan: return "omega_scan";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& name) {
  for (auto s : {Scenario::kProbabilistic, Scenario::kQuasiDeterministic, Scenario::kNoisyCswap,
                 Scenario::kOmegaScan}) {
    if (to_string(s) == name) return s;
  }
  throw ValidationError("unknown scenario '" + name + "'");
}

Engine engine_from_string(const std::string& name) {
  for (auto e : {Engine::kBruteForce, Engine::kClosedForm, Engine::kAuto}) {
    if (to_string(e) == name) return e;
  }
  throw ValidationError("unknown engine '" + name + "'");
}

int GateSpec::n_qubits() const {
  return static_cast<int>(std::countr_zero(static_cast<std::size_t>(unitary.rows())));
}

GateSpec gate_from_json(const nlohmann::json& doc, int identity_qubits) {
  GateSpec g;
  int layers = -1;
  if (doc.is_string()) {
    const auto name = doc.get<std::string>();
    if (name == "cnot") {
      g.label = name;
      g.unitary = circuit_unitary(GateCircuit(2).add(GateKind::kCnot, {0, 1}));
      return g;
    }
    if (name == "t") {
      g.label = name;
      g.unitary = circuit_unitary(GateCircuit(1).add(GateKind::kT, {0}));
      return g;
    }
    if (name == "identity") {
      if (identity_qubits < 1 || identity_qubits > 4) {
        throw ValidationError("identity gate needs 1 <= m <= 4");
      }
      g.label = name;
      g.unitary = Matrix::Identity(static_cast<Eigen::Index>(dim_of(identity_qubits)),
                                   static_cast<Eigen::Index>(dim_of(identity_qubits)));
      return g;
    }
    if (name.starts_with("layered(") && name.ends_with(")")) {
      const auto inner = name.substr(8, name.size() - 9);
      const auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), layers);
      if (ec != std::errc{} || ptr != inner.data() + inner.size()) layers = -1;
      if (layers < 0) throw ValidationError("bad layer count in '" + name + "'");
    } else {
      throw ValidationError("unknown gate '" + name + "'");
    }
  } else if (doc.is_object() && doc.contains("layered")) {
    layers = doc.at("layered").get<int>();
  } else if (doc.is_object() && doc.contains("circuit")) {
    g.circuit = circuit_from_json(doc.at("circuit"));
    g.label = doc.value("label", std::string("custom"));
    g.unitary = circuit_unitary(*g.circuit);
    return g;
  } else {
    throw ValidationError("gate must be a name, {\"layered\": N} or {\"circuit\": ...}");
  }
  if (layers < 1) throw ValidationError("layered gate needs at least one layer");
  g.circuit = layered_circuit(layers);
  g.label = "layered(" + std::to_string(layers) + ")";
  g.unitary = layered_unitary(layers);
  return g;
}

KrausChannel make_channel(const ChannelFamily& family, double p_ne, int m) {
  if (family.family == "custom") {
    if (!family.custom) throw ValidationError("custom channel has no Kraus operators");
    return *family.custom;
  }
  if (!(p_ne >= 0.0 && p_ne <= 1.0)) throw ValidationError("p_ne must lie in [0, 1]");
  if (family.family == "joint_depolarizing") return joint_depolarizing(m, p_ne);
  if (!kSingleQubitFamilies.contains(family.family)) {
    throw ValidationError("unknown channel family '" + family.family + "'");
  }
  const double per = family.per_qubit ? p_ne : std::pow(p_ne, 1.0 / m);
  return tensor_power(single_qubit(family.family, per), m);
}

PureState named_state(const std::string& name, int m) {
  if (name.starts_with("ry:")) {
    const auto text = name.substr(3);
    double theta = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), theta);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ValidationError("bad angle in auxiliary state '" + name + "'");
    }
    Vector one(2);
    one << std::cos(theta / 2), std::sin(theta / 2);
    Vector v = one;
    for (int q = 1; q < m; ++q) v = kron(v, one);
    return PureState(v);
  }
  if (static_cast<int>(name.size()) != m) {
    throw ValidationError("auxiliary state '" + name + "' needs " + std::to_string(m) +
                          " characters");
  }
  const double s = 1.0 / std::sqrt(2.0);
  Vector v = Vector::Ones(1);
  for (char c : name) {
    Vector q(2);
    switch (c) {
      case '0': q << 1, 0; break;
      case '1': q << 0, 1; break;
      case '+': q << s, s; break;
      case '-': q << s, -s; break;
      default: throw ValidationError("unknown qubit state '" + std::string(1, c) + "'");
    }
    v = kron(v, q);
  }
  return PureState(v);
}

SweepConfig parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(e.what(), line_at_byte(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object", 1);
  Reader rd(doc, text);
  for (const auto& [k, _] : doc.items()) {
    if (!kTopLevelKeys.contains(k)) rd.fail(k, "unknown field");
  }
  for (const char* required : {"schema", "scenario", "gate", "channel"}) {
    if (!doc.contains(required)) throw ConfigError(std::string("missing field \"") + required + "\"");
  }
  if (rd.get<std::string>(doc, "schema") != kSweepSchema) {
    rd.fail("schema", std::string("expected \"") + kSweepSchema + "\"");
  }

  SweepConfig cfg;
  cfg.name = doc.contains("name") ? rd.get<std::string>(doc, "name") : "";
  try {
    cfg.scenario = scenario_from_string(rd.get<std::string>(doc, "scenario"));
  } catch (const ValidationError& e) {
    rd.fail("scenario", e.what());
  }
  const int m_identity = doc.contains("m") ? rd.get<int>(doc, "m") : 1;
  try {
    cfg.gate = gate_from_json(doc.at("gate"), m_identity);
  } catch (const std::exception& e) {
    rd.fail("gate", e.what());
  }
  const int m = cfg.gate.n_qubits();

  const auto& ch = doc.at("channel");
  if (!ch.is_object()) rd.fail("channel", "expected an object");
  for (const auto& [k, _] : ch.items()) {
    if (k != "family" && k != "p_ne" && k != "per_qubit" && k != "kraus") {
      rd.fail(k, "unknown channel field");
    }
  }
  cfg.channel.family = rd.get<std::string>(ch, "family");
  cfg.channel.per_qubit = ch.value("per_qubit", false);
  if (cfg.channel.family == "custom") {
    if (!ch.contains("kraus")) rd.fail("channel", "custom family needs \"kraus\"");
    if (ch.contains("p_ne")) rd.fail("p_ne", "a custom channel has a fixed p_ne");
    try {
      cfg.channel.custom = channel_from_json(ch.at("kraus"));
    } catch (const std::exception& e) {
      rd.fail("kraus", e.what());
    }
    if (cfg.channel.custom->n_qubits() != m) rd.fail("kraus", "channel width differs from the gate");
    cfg.p_ne = {no_error_probability(*cfg.channel.custom)};
  } else {
    if (!ch.contains("p_ne")) rd.fail("channel", "missing \"p_ne\" grid");
    cfg.p_ne = rd.real_grid(ch, "p_ne");
    if (cfg.channel.family != "joint_depolarizing" &&
        !kSingleQubitFamilies.contains(cfg.channel.family)) {
      rd.fail("family", "unknown channel family '" + cfg.channel.family + "'");
    }
    for (double p : cfg.p_ne) {
      try {
        (void)make_channel(cfg.channel, p, m);
      } catch (const ValidationError& e) {
        rd.fail("p_ne", e.what());
      }
    }
  }

  if (doc.contains("d")) {
    for (double d : rd.real_grid(doc, "d")) {
      const int di = static_cast<int>(std::lround(d));
      if (di != d || di < 1 || di > 16) rd.fail("d", "branch counts must be integers in 1..16");
      cfg.branches.push_back(di);
    }
  } else {
    cfg.branches = {2};
  }

  if (cfg.scenario == Scenario::kOmegaScan) {
    if (doc.contains("aux")) rd.fail("aux", "omega_scan takes \"theta\" instead");
    if (!doc.contains("theta")) throw ConfigError("omega_scan needs a \"theta\" grid");
    for (double t : rd.real_grid(doc, "theta")) cfg.aux.push_back("ry:" + format_number(t));
  } else {
    if (doc.contains("theta")) rd.fail("theta", "only used by omega_scan");
    if (!doc.contains("aux")) throw ConfigError("missing field \"aux\"");
    const auto& aux = doc.at("aux");
    if (aux.is_string()) {
      cfg.aux.push_back(aux.get<std::string>());
    } else if (aux.is_array()) {
      for (const auto& a : aux) {
        if (!a.is_string()) rd.fail("aux", "entries must be strings");
        cfg.aux.push_back(a.get<std::string>());
      }
    } else {
      rd.fail("aux", "expected a string or a list of strings");
    }
    if (cfg.aux.empty()) rd.fail("aux", "grid is empty");
  }
  for (const auto& a : cfg.aux) {
    if (a == "choi") continue;
    try {
      (void)named_state(a, m);
    } catch (const ValidationError& e) {
      rd.fail(cfg.scenario == Scenario::kOmegaScan ? "theta" : "aux", e.what());
    }
  }

  if (doc.contains("cswap_eps")) {
    if (cfg.scenario != Scenario::kNoisyCswap) rd.fail("cswap_eps", "only used by noisy_cswap");
    cfg.cswap_eps = rd.real_grid(doc, "cswap_eps");
    for (double e : cfg.cswap_eps) {
      if (e < 0.0 || e > 1.0) rd.fail("cswap_eps", "must lie in [0, 1]");
    }
  }
  if (cfg.scenario == Scenario::kNoisyCswap) {
    for (int d : cfg.branches) {
      if (d != 2) rd.fail("d", "noisy_cswap supports d = 2 only");
    }
  }

  if (doc.contains("threshold")) {
    if (cfg.scenario != Scenario::kQuasiDeterministic) {
      rd.fail("threshold", "only used by quasi_deterministic");
    }
    cfg.threshold = rd.get<double>(doc, "threshold");
    if (!(cfg.threshold > 0.0 && cfg.threshold <= 1.0)) rd.fail("threshold", "must lie in (0, 1]");
  }
  if (doc.contains("optimizer")) {
    const auto& o = doc.at("optimizer");
    if (!o.is_object()) rd.fail("optimizer", "expected an object");
    for (const auto& [k, _] : o.items()) {
      if (k == "parameterization") {
        try {
          cfg.optimizer.parameterization =
              parameterization_from_string(rd.get<std::string>(o, k));
        } catch (const ValidationError& e) {
          rd.fail(k, e.what());
        }
      } else if (k == "max_evaluations") {
        cfg.optimizer.max_evaluations = rd.get<int>(o, k);
      } else if (k == "restarts") {
        cfg.optimizer.restarts = rd.get<int>(o, k);
      } else if (k == "tolerance") {
        cfg.optimizer.tolerance = rd.get<double>(o, k);
      } else if (k == "shots") {
        cfg.optimizer.shots = rd.get<int>(o, k);
      } else {
        rd.fail(k, "unknown optimizer field");
      }
    }
    if (cfg.optimizer.max_evaluations < 1) rd.fail("max_evaluations", "must be positive");
    if (cfg.optimizer.restarts < 0) rd.fail("restarts", "must be non-negative");
    if (cfg.optimizer.shots < 0) rd.fail("shots", "must be non-negative");
  }
  if (doc.contains("seed")) cfg.seed = rd.get<std::uint64_t>(doc, "seed");
  if (doc.contains("engine")) {
    try {
      cfg.engine = engine_from_string(rd.get<std::string>(doc, "engine"));
    } catch (const ValidationError& e) {
      rd.fail("engine", e.what());
    }
  }
  if (doc.contains("max_qubits")) {
    cfg.max_qubits = rd.get<int>(doc, "max_qubits");
    if (cfg.max_qubits < 1 || cfg.max_qubits > 16) rd.fail("max_qubits", "must lie in 1..16");
  }
  return cfg;
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::vector<GridPoint> expand_grid(const SweepConfig& cfg) {
  std::vector<GridPoint> out;
  for (double p : cfg.p_ne) {
    for (int d : cfg.branches) {
      for (const auto& a : cfg.aux) {
        for (double e : cfg.cswap_eps) out.push_back(GridPoint{p, d, a, e});
      }
    }
  }
  return out;
}

ProtocolSpec build_spec(const SweepConfig& cfg, const GridPoint& point) {
  const int m = cfg.gate.n_qubits();
  auto channel = make_channel(cfg.channel, point.p_ne, m);
  if (point.aux == "choi") {
    return make_choi_spec(cfg.gate.unitary, std::move(channel), point.branches, choi_input(m));
  }
  return make_spec(cfg.gate.unitary, std::move(channel), point.branches, choi_input(m),
                   explicit_register(named_state(point.aux, m)));
}

ResultRow run_point(const SweepConfig& cfg, const GridPoint& point) {
  ResultRow row;
  row.scenario = to_string(cfg.scenario);
  row.gate = cfg.gate.label;
  row.channel = channel_label(cfg, point.cswap_eps);
  row.p_ne = point.p_ne;
  row.d = point.branches;
  row.aux = point.aux;
  const auto start = Clock::now();
  try {
    row = evaluate(cfg, point, row);
  } catch (const std::exception& e) {
    row.error = e.what();
    row.engine = "error";
  }
  row.ms = elapsed_ms(start);
  return row;
}

int SweepResult::error_count() const {
  return static_cast<int>(
      std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return r.error.has_value(); }));
}

int default_worker_count() {
  if (const char* env = std::getenv("SQEM_WORKERS"); env != nullptr && *env != '\0') {
    int n = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), n);
    if (ec == std::errc{} && *ptr == '\0' && n >= 1) return n;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

SweepResult run_sweep(const SweepConfig& cfg, int workers) {
  const auto grid = expand_grid(cfg);
  SweepResult result;
  result.rows.resize(grid.size());
  result.workers = std::clamp(workers, 1, std::max(1, static_cast<int>(grid.size())));
  const auto start = Clock::now();
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      result.rows[i] = run_point(cfg, grid[i]);
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < result.workers; ++w) pool.emplace_back(work);
    work();
  }
  result.wall_ms = elapsed_ms(start);
  return result;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool timing) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    write_field(out, r.scenario);
    out << ',';
    write_field(out, r.gate);
    out << ',';
    write_field(out, r.channel);
    out << ',' << format_number(r.p_ne) << ',' << r.d << ',';
    write_field(out, r.aux);
    out << ',';
    if (r.error) {
      out << ",,,,,,error,";
    } else {
      if (r.omega1) out << format_number(*r.omega1);
      out << ',';
      if (r.omega2) out << format_number(*r.omega2);
      out << ',' << format_number(r.P) << ',' << format_number(r.R) << ','
          << format_number(r.F_CJ) << ',' << format_number(r.F0_CJ) << ',' << r.engine << ',';
    }
    if (timing) out << format_number(r.ms);
    out << '\n';
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream hex;
  hex << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) hex << std::setw(2) << static_cast<int>(digest[i]);
  return hex.str();
}

nlohmann::json make_manifest(const SweepConfig& cfg, const std::string& config_text,
                             const SweepResult& result) {
  nlohmann::json errors = nlohmann::json::array();
  nlohmann::json sentinels = nlohmann::json::array();
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    if (r.error) errors.push_back({{"row", i}, {"message", *r.error}});
    if (!r.error && r.R_sentinel) sentinels.push_back(i);
  }
  const auto n = static_cast<int>(result.rows.size());
  return {
      {"format", "sqem-manifest/1"},
      {"name", cfg.name},
      {"scenario", to_string(cfg.scenario)},
      {"config_sha256", sha256_hex(config_text)},
      {"seed", cfg.seed},
      {"engine", to_string(cfg.engine)},
      {"versions",
       {{"sqem", SQEM_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"compiler", __VERSION__},
        {"cxx_standard", __cplusplus}}},
      {"totals",
       {{"rows", n},
        {"ok", n - result.error_count()},
        {"errors", result.error_count()},
        {"workers", result.workers},
        {"wall_ms", result.wall_ms}}},
      {"r_sentinel_rows", sentinels},
      {"row_errors", errors},
  };
}

}  // namespace sqem
