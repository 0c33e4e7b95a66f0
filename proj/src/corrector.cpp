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

#include "sqem/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>

namespace sqem {
namespace {

constexpr double kPi = std::numbers::pi;

Matrix u3(double theta, double phi, double lambda) {
  Matrix u(2, 2);
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  u(0, 0) = c;
  u(0, 1) = -std::polar(s, lambda);
  u(1, 0) = std::polar(s, phi);
  u(1, 1) = std::polar(c, phi + lambda);
  return u;
}

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Nelder-Mead minimization with the standard coefficients
// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start, double step, int budget, double tol) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> pts(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  std::vector<double> vals(n + 1);
  SimplexResult out;
  auto eval = [&](const std::vector<double>& x) {
    ++out.evaluations;
    return f(x);
  };
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (vals[worst] - vals[best] <= tol) {
      out.converged = true;
      break;
    }
    if (out.evaluations >= budget) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k) x[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
      return x;
    };

    auto reflected = along(-1.0);
    const double fr = eval(reflected);
    if (fr < vals[best]) {
      auto expanded = along(-2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        pts[worst] = std::move(expanded);
        vals[worst] = fe;
      } else {
        pts[worst] = std::move(reflected);
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = std::move(reflected);
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    auto contracted = along(outside ? -0.5 : 0.5);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = std::move(contracted);
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
      vals[i] = eval(pts[i]);
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  out.x = pts[static_cast<std::size_t>(it - vals.begin())];
  out.value = *it;
  return out;
}

std::vector<int> active_of(const ProtocolSpec& spec) {
  std::vector<int> active(static_cast<std::size_t>(spec.m()));
  std::iota(active.begin(), active.end(), spec.input.reference_qubits);
  return active;
}

void optimize_entry(const ProtocolSpec& spec, const OutcomeRecord& rec, const OptimizerConfig& cfg,
                    std::size_t index, CorrectionEntry& entry) {
  const int m = spec.m();
  const std::size_t n_params = 3 * static_cast<std::size_t>(m);
  std::seed_seq seq{static_cast<std::uint64_t>(cfg.seed), static_cast<std::uint64_t>(index)};
  std::mt19937_64 rng(seq);

  auto exact = [&](const std::vector<double>& angles) {
    return corrected_fidelity(spec, rec, correction_unitary(angles));
  };
  std::function<double(const std::vector<double>&)> objective = exact;
  if (cfg.shots > 0) {
    objective = [&](const std::vector<double>& angles) {
      const double p = std::clamp(exact(angles), 0.0, 1.0);
      std::binomial_distribution<int> draw(cfg.shots, p);
      return static_cast<double>(draw(rng)) / cfg.shots;
    };
  }

  std::vector<double> best(n_params, 0.0);
  double best_exact = entry.fidelity_uncorrected;

  if (cfg.parameterization == Parameterization::kPauliSet) {
    const std::size_t count = std::size_t{1} << (2 * m);
    double best_score = objective(best);
    entry.evaluations = 1;
    for (std::size_t i = 1; i < count; ++i) {
      const auto angles = pauli_angles(i, m);
      const double score = objective(angles);
      ++entry.evaluations;
      if (score > best_score) {
        best_score = score;
        best = angles;
      }
    }
    best_exact = exact(best);
  } else {
    auto negated = [&](const std::vector<double>& x) { return -objective(x); };
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    const int runs = 1 + std::max(cfg.restarts, 0);
    int remaining = cfg.max_evaluations;
    for (int run = 0; run < runs && remaining > 0; ++run) {
      std::vector<double> start(n_params, 0.0);
      if (run > 0) {
        for (auto& a : start) a = angle(rng);
      }
      const int budget = remaining / (runs - run);
      auto res = nelder_mead(negated, start, kPi / 4, budget, cfg.tolerance);
      remaining -= res.evaluations;
      entry.evaluations += res.evaluations;
      if (!res.converged) entry.budget_exhausted = true;
      const double f = exact(res.x);
      if (f > best_exact) {
        best_exact = f;
        best = std::move(res.x);
      }
    }
  }
  entry.angles = std::move(best);
  entry.correction = correction_unitary(entry.angles);
  entry.fidelity = best_exact;
}

}  // namespace

std::vector<OutcomeKey> rank_outcomes(std::span<const OutcomeRecord> records, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ValidationError("threshold must lie in (0, 1]");
  }
  std::vector<const OutcomeRecord*> sorted;
  for (const auto& r : records) {
    if (r.probability > 1e-14) sorted.push_back(&r);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    if (a->probability != b->probability) return a->probability > b->probability;
    return a->key < b->key;
  });
  std::vector<OutcomeKey> out;
  double total = 0.0;
  for (const auto* r : sorted) {
    out.push_back(r->key);
    total += r->probability;
    // Rounding in the outcome probabilities must not force an extra outcome;
    // threshold 1 keeps everything.
    if (threshold < 1.0 && total >= threshold - 1e-12) break;
  }
  return out;
}

std::string to_string(Parameterization p) {
  return p == Parameterization::kPauliSet ? "pauli_set" : "single_qubit_products";
}

Parameterization parameterization_from_string(const std::string& name) {
  if (name == "pauli_set") return Parameterization::kPauliSet;
  if (name == "single_qubit_products") return Parameterization::kSingleQubitProducts;
  throw ValidationError("unknown parameterization '" + name + "'");
}

Matrix correction_unitary(std::span<const double> angles) {
  if (angles.empty() || angles.size() % 3 != 0) {
    throw ValidationError("correction angles must come in triples");
  }
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t q = 0; q < angles.size(); q += 3) {
    out = kron(out, u3(angles[q], angles[q + 1], angles[q + 2]));
  }
  return out;
}

std::vector<double> pauli_angles(std::size_t index, int m) {
  std::vector<double> out;
  for (int q = m - 1; q >= 0; --q) {
    switch ((index >> (2 * q)) & 3U) {
      case 0: out.insert(out.end(), {0.0, 0.0, 0.0}); break;
      case 1: out.insert(out.end(), {kPi, 0.0, kPi}); break;
      case 2: out.insert(out.end(), {kPi, kPi / 2, kPi / 2}); break;
      default: out.insert(out.end(), {0.0, 0.0, kPi}); break;
    }
  }
  return out;
}

double corrected_fidelity(const ProtocolSpec& spec, const OutcomeRecord& record, const Matrix& v) {
  // <psi| V rho V^dagger |psi> = <V^dagger psi| rho |V^dagger psi>
  Vector target = ideal_output(spec).amplitudes();
  kernel::apply_vector(target, v.adjoint(), active_of(spec), spec.input.total_qubits());
  return std::clamp(target.dot(record.state.entries() * target).real(), 0.0, 1.0);
}

const CorrectionEntry* CorrectionTable::find(const OutcomeKey& key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

CorrectionTable optimize_corrections(const ProtocolSpec& spec,
                                     std::span<const OutcomeRecord> records,
                                     const OptimizerConfig& cfg) {
  if (spec.input_mode != InputMode::kChoi) {
    throw ValidationError("optimize_corrections requires the Choi input mode");
  }
  if (cfg.max_evaluations < 1) throw ValidationError("max_evaluations must be positive");
  if (cfg.shots < 0) throw ValidationError("shots must be non-negative");
  const auto kept = rank_outcomes(records, cfg.threshold);

  CorrectionTable table;
  table.threshold = cfg.threshold;
  table.parameterization = cfg.parameterization;
  const PureState ideal = ideal_output(spec);
  const std::size_t n_params = 3 * static_cast<std::size_t>(spec.m());

  double weight = 0.0, corrected = 0.0, uncorrected = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    CorrectionEntry entry;
    entry.key = rec.key;
    entry.probability = rec.probability;
    entry.included = std::find(kept.begin(), kept.end(), rec.key) != kept.end();
    entry.angles.assign(n_params, 0.0);
    entry.correction = correction_unitary(entry.angles);
    if (rec.probability > 1e-14) {
      entry.fidelity_uncorrected = std::clamp(state_fidelity(ideal, rec.state), 0.0, 1.0);
    }
    entry.fidelity = entry.fidelity_uncorrected;
    if (entry.included) {
      optimize_entry(spec, rec, cfg, i, entry);
      weight += rec.probability;
      corrected += rec.probability * entry.fidelity;
      uncorrected += rec.probability * entry.fidelity_uncorrected;
      table.warning = table.warning || entry.budget_exhausted;
    }
    table.entries.push_back(std::move(entry));
  }
  std::sort(table.entries.begin(), table.entries.end(),
            [](const CorrectionEntry& a, const CorrectionEntry& b) { return a.key < b.key; });
  table.achieved_probability = weight;
  table.achieved_F_CJ = weight > 0 ? corrected / weight : 0.0;
  table.uncorrected_F_CJ = weight > 0 ? uncorrected / weight : 0.0;
  return table;
}

CorrectionTable optimize_corrections(const ProtocolSpec& spec, const OptimizerConfig& cfg) {
  const auto eval = evaluate_outcomes(spec, Engine::kClosedForm);
  return optimize_corrections(spec, eval.records, cfg);
}

nlohmann::json table_to_json(const CorrectionTable& table) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : table.entries) {
    entries.push_back({{"control", e.key.control},
                       {"aux", e.key.aux},
                       {"probability", e.probability},
                       {"include", e.included},
                       {"angles", e.angles},
                       {"fidelity_uncorrected", e.fidelity_uncorrected},
                       {"fidelity", e.fidelity},
                       {"evaluations", e.evaluations},
                       {"budget_exhausted", e.budget_exhausted}});
  }
  return {{"format", "sqem-corrections/1"},
          {"threshold", table.threshold},
          {"parameterization", to_string(table.parameterization)},
          {"achieved_probability", table.achieved_probability},
          {"achieved_F_CJ", table.achieved_F_CJ},
          {"uncorrected_F_CJ", table.uncorrected_F_CJ},
          {"warning", table.warning},
          {"entries", std::move(entries)}};
}

CorrectionTable table_from_json(const nlohmann::json& doc) {
  try {
    CorrectionTable t;
    if (doc.at("format").get<std::string>() != "sqem-corrections/1") {
      throw ValidationError("unsupported correction table format");
    }
    t.threshold = doc.at("threshold").get<double>();
    t.parameterization = parameterization_from_string(doc.at("parameterization").get<std::string>());
    t.achieved_probability = doc.at("achieved_probability").get<double>();
    t.achieved_F_CJ = doc.at("achieved_F_CJ").get<double>();
    t.uncorrected_F_CJ = doc.value("uncorrected_F_CJ", 0.0);
    t.warning = doc.value("warning", false);
    for (const auto& j : doc.at("entries")) {
      CorrectionEntry e;
      e.key.control = j.at("control").get<int>();
      e.key.aux = j.at("aux").get<std::vector<int>>();
      e.probability = j.value("probability", 0.0);
      e.included = j.at("include").get<bool>();
      e.angles = j.at("angles").get<std::vector<double>>();
      e.correction = correction_unitary(e.angles);
      e.fidelity_uncorrected = j.value("fidelity_uncorrected", 0.0);
      e.fidelity = j.value("fidelity", 0.0);
      e.evaluations = j.value("evaluations", 0);
      e.budget_exhausted = j.value("budget_exhausted", false);
      t.entries.push_back(std::move(e));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed correction table: ") + e.what());
  }
}

}  // namespace sqem
