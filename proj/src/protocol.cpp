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

#include "sqem/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace sqem {
namespace {

constexpr double kZeroProbability = 1e-14;

int control_qubits_for(int branches) {
  return std::bit_width(static_cast<unsigned>(branches - 1));
}

// Fourier basis vector s of the d-level control, embedded in the lowest d
// levels of ceil(log2 d) qubits.
PureState control_state(int branches, int s) {
  const int c = control_qubits_for(branches);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_of(c)));
  const double norm = 1.0 / std::sqrt(static_cast<double>(branches));
  for (int k = 0; k < branches; ++k) {
    const double phase = 2.0 * std::numbers::pi * s * k / branches;
    v(k) = norm * Complex(std::cos(phase), std::sin(phase));
  }
  return PureState(std::move(v), false);
}

Matrix lifted_unitary(const Matrix& unitary, int reference_qubits) {
  if (reference_qubits == 0) return unitary;
  const auto dim = static_cast<Eigen::Index>(dim_of(reference_qubits));
  return kron(Matrix::Identity(dim, dim), unitary);
}

std::vector<int> active_qubits(const QubitRange& block, int reference_qubits) {
  std::vector<int> q;
  for (int i = block.first + reference_qubits; i < block.first + block.count; ++i) q.push_back(i);
  return q;
}

// Generalized cSWAP as a basis permutation: for control value k >= 1 swap the
// active qubits of the input with those of auxiliary k.
void apply_ideal_cswap(DensityMatrix& rho, const ProtocolLayout& layout) {
  const int n = rho.n_qubits();
  const std::size_t dim = rho.dim();
  const int c = layout.control_qubits;
  if (c == 0) return;
  auto bit = [n](int q) { return std::size_t{1} << (n - 1 - q); };

  std::vector<std::size_t> perm(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t k = i >> (n - c);
    std::size_t j = i;
    if (k >= 1 && k < layout.aux_active.size() + 1) {
      const auto& aux = layout.aux_active[k - 1];
      for (std::size_t q = 0; q < aux.size(); ++q) {
        const std::size_t ba = bit(layout.input_active[q]);
        const std::size_t bb = bit(aux[q]);
        const bool va = (i & ba) != 0;
        const bool vb = (i & bb) != 0;
        if (va != vb) j ^= (ba | bb);
      }
    }
    perm[i] = j;
  }
  const Matrix& in = rho.entries();
  Matrix out(in.rows(), in.cols());
  for (std::size_t col = 0; col < dim; ++col) {
    for (std::size_t row = 0; row < dim; ++row) {
      out(static_cast<Eigen::Index>(perm[row]), static_cast<Eigen::Index>(perm[col])) =
          in(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }
  }
  rho.mutable_entries() = std::move(out);
}

OutcomeRecord make_record(const ProtocolSpec& spec, OutcomeKey key, DensityMatrix unnormalized,
                          const PureState& ideal) {
  OutcomeRecord rec;
  rec.key = std::move(key);
  const double p = unnormalized.trace();
  if (p > kZeroProbability) {
    rec.probability = p;
    rec.state = unnormalized.normalized();
    rec.fidelity = std::clamp(state_fidelity(ideal, rec.state), 0.0, 1.0);
  } else {
    rec.probability = std::max(p, 0.0);
    const auto dim = static_cast<Eigen::Index>(dim_of(spec.input.total_qubits()));
    rec.state = DensityMatrix(Matrix::Zero(dim, dim), TraceConvention::kSubnormalized);
    rec.fidelity = 0.0;
  }
  return rec;
}

}  // namespace

std::string OutcomeKey::to_string() const {
  std::ostringstream os;
  os << "(" << control << ";";
  for (std::size_t i = 0; i < aux.size(); ++i) os << (i ? "," : "") << aux[i];
  os << ")";
  return os.str();
}

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::kBruteForce: return "bruteforce";
    case Engine::kClosedForm: return "closed_form";
    case Engine::kAuto: return "auto";
  }
  return "unknown";
}

void validate_spec(const ProtocolSpec& spec) {
  const int m = spec.m();
  if (m < 1) throw ValidationError("spec: channel must act on at least one qubit");
  if (spec.unitary.rows() != static_cast<Eigen::Index>(dim_of(m)) || !is_unitary(spec.unitary)) {
    throw ValidationError("spec: U must be a unitary on the channel's " + std::to_string(m) +
                          " qubit(s)");
  }
  if (spec.branches < 1 || spec.branches > 16) {
    throw ValidationError("spec: branch count d must be in 1..16, got " +
                          std::to_string(spec.branches));
  }
  if (spec.input.active_qubits() != m) {
    throw ValidationError("spec: input register must expose m active qubits");
  }
  if (spec.branches > 1) {
    if (spec.auxiliary.active_qubits() != m) {
      throw ValidationError("spec: auxiliary register must expose m active qubits");
    }
    if (spec.aux_basis.size() == 0 ||
        spec.aux_basis.n_qubits() != spec.auxiliary.total_qubits()) {
      throw ValidationError("spec: auxiliary basis does not match the auxiliary register");
    }
  }
}

RegisterState choi_input(int m) { return RegisterState{bell_pairs(m), m}; }

RegisterState explicit_register(PureState state) { return RegisterState{std::move(state), 0}; }

ChoiAuxiliary choi_auxiliary(const Matrix& unitary, int m) {
  const PureState phi = bell_pairs(m);
  std::vector<int> second(static_cast<std::size_t>(m));
  std::iota(second.begin(), second.end(), m);
  std::vector<int> first(static_cast<std::size_t>(m));
  std::iota(first.begin(), first.end(), 0);

  Vector rotated = phi.amplitudes();
  kernel::apply_vector(rotated, unitary, second, 2 * m);
  std::vector<PureState> elements;
  for (std::size_t i = 0; i < (std::size_t{1} << (2 * m)); ++i) {
    Vector v = rotated;
    kernel::apply_vector(v, pauli_string(i, m), first, 2 * m);
    elements.emplace_back(std::move(v), false);
  }
  return ChoiAuxiliary{RegisterState{phi, m}, MeasurementBasis(std::move(elements))};
}

MeasurementBasis default_aux_basis(const Matrix& unitary, const RegisterState& aux) {
  std::vector<int> active(static_cast<std::size_t>(aux.active_qubits()));
  std::iota(active.begin(), active.end(), aux.reference_qubits);
  Vector v = aux.state.amplitudes();
  kernel::apply_vector(v, unitary, active, aux.total_qubits());
  return MeasurementBasis::completed({PureState(std::move(v), false)});
}

ProtocolSpec make_spec(Matrix unitary, KrausChannel channel, int branches, RegisterState input,
                       RegisterState auxiliary) {
  ProtocolSpec spec;
  spec.aux_basis = default_aux_basis(unitary, auxiliary);
  spec.unitary = std::move(unitary);
  spec.channel = std::move(channel);
  spec.branches = branches;
  spec.input_mode = input.reference_qubits > 0 ? InputMode::kChoi : InputMode::kExplicit;
  spec.input = std::move(input);
  spec.auxiliary_kind = AuxiliaryKind::kPure;
  spec.auxiliary = std::move(auxiliary);
  validate_spec(spec);
  return spec;
}

ProtocolSpec make_choi_spec(Matrix unitary, KrausChannel channel, int branches,
                            RegisterState input) {
  auto choi = choi_auxiliary(unitary, channel.n_qubits());
  ProtocolSpec spec;
  spec.unitary = std::move(unitary);
  spec.channel = std::move(channel);
  spec.branches = branches;
  spec.input_mode = input.reference_qubits > 0 ? InputMode::kChoi : InputMode::kExplicit;
  spec.input = std::move(input);
  spec.auxiliary_kind = AuxiliaryKind::kChoi;
  spec.auxiliary = std::move(choi.auxiliary);
  spec.aux_basis = std::move(choi.basis);
  validate_spec(spec);
  return spec;
}

std::vector<OutcomeKey> all_outcome_keys(const ProtocolSpec& spec) {
  const int aux_count = spec.branches - 1;
  const int basis = static_cast<int>(spec.aux_basis.size());
  std::vector<OutcomeKey> keys;
  for (int s = 0; s < spec.branches; ++s) {
    std::vector<int> aux(static_cast<std::size_t>(aux_count), 0);
    while (true) {
      keys.push_back(OutcomeKey{s, aux});
      int pos = aux_count - 1;
      while (pos >= 0 && ++aux[static_cast<std::size_t>(pos)] == basis) {
        aux[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }
  return keys;
}

OutcomeKey constructive_outcome(const ProtocolSpec& spec) {
  return OutcomeKey{0, std::vector<int>(static_cast<std::size_t>(spec.branches - 1), 0)};
}

BranchOverlaps branch_overlaps(const ProtocolSpec& spec, const PureState& phi_f) {
  const int r = spec.auxiliary.reference_qubits;
  const int total = spec.auxiliary.total_qubits();
  std::vector<int> active(static_cast<std::size_t>(spec.m()));
  std::iota(active.begin(), active.end(), r);

  Vector rotated = spec.auxiliary.state.amplitudes();
  kernel::apply_vector(rotated, spec.unitary, active, total);

  BranchOverlaps out;
  const auto& ops = spec.channel.operators();
  out.beta.resize(static_cast<Eigen::Index>(ops.size()));
  for (std::size_t j = 0; j < ops.size(); ++j) {
    Vector v = rotated;
    kernel::apply_vector(v, ops[j], active, total);
    out.beta(static_cast<Eigen::Index>(j)) = phi_f.amplitudes().dot(v);
  }
  out.A = out.beta.squaredNorm();
  return out;
}

OmegaMetrics omega_metrics(const Matrix& unitary, const KrausChannel& channel,
                           const PureState& phi0, const PureState& phi_f) {
  if (unitary.rows() != static_cast<Eigen::Index>(phi0.dim()) ||
      channel.dim() != phi0.dim() || phi_f.dim() != phi0.dim()) {
    throw ValidationError("omega_metrics: dimension mismatch");
  }
  OmegaMetrics out;
  const Vector x = unitary * phi0.amplitudes();
  out.omega2 = std::clamp(std::norm(phi_f.amplitudes().dot(x)), 0.0, 1.0);

  const double p_ne = no_error_probability(channel);
  if (p_ne >= 1.0 - 1e-15) return out;

  // Without an identity component (p_ne == 0) every operator counts.
  const KrausChannel canonical = canonical_identity_gauge(channel);
  const std::size_t first = std::sqrt(p_ne) >= 1e-14 ? 1 : 0;
  double sensitive = 0.0;
  for (std::size_t j = first; j < canonical.size(); ++j) {
    sensitive += std::norm(x.dot(canonical.operators()[j] * x));
  }
  out.omega1 = std::clamp(1.0 - sensitive / (1.0 - p_ne), 0.0, 1.0);
  return out;
}

OmegaMetrics omega_metrics(const ProtocolSpec& spec) {
  const int r = spec.auxiliary.reference_qubits;
  return omega_metrics(lifted_unitary(spec.unitary, r), lift_with_reference(spec.channel, r),
                       spec.auxiliary.state, spec.aux_basis[0]);
}

ProtocolLayout protocol_layout(const ProtocolSpec& spec) {
  ProtocolLayout out;
  out.control_qubits = control_qubits_for(spec.branches);
  std::vector<std::pair<std::string, int>> sizes{{"control", out.control_qubits},
                                                 {"input", spec.input.total_qubits()}};
  for (int l = 1; l < spec.branches; ++l) {
    sizes.emplace_back("aux" + std::to_string(l), spec.auxiliary.total_qubits());
  }
  out.registers = RegisterLayout(std::move(sizes));
  out.input_active = active_qubits(out.registers.at("input"), spec.input.reference_qubits);
  for (int l = 1; l < spec.branches; ++l) {
    out.aux_active.push_back(active_qubits(out.registers.at("aux" + std::to_string(l)),
                                           spec.auxiliary.reference_qubits));
  }
  return out;
}

PureState ideal_output(const ProtocolSpec& spec) {
  Vector v = spec.input.state.amplitudes();
  std::vector<int> active(static_cast<std::size_t>(spec.m()));
  std::iota(active.begin(), active.end(), spec.input.reference_qubits);
  kernel::apply_vector(v, spec.unitary, active, spec.input.total_qubits());
  return PureState(std::move(v), false);
}

std::vector<OutcomeRecord> run_bruteforce(const ProtocolSpec& spec) {
  return run_bruteforce(spec, ExecutionModel{});
}

std::vector<OutcomeRecord> run_bruteforce(const ProtocolSpec& spec, const ExecutionModel& model) {
  validate_spec(spec);
  const ProtocolLayout layout = protocol_layout(spec);
  const int n = layout.registers.total_qubits();
  if (n > kMaxDensityQubits) {
    throw ValidationError("register of " + std::to_string(n) + " qubits exceeds the " +
                          std::to_string(kMaxDensityQubits) + "-qubit simulator ceiling");
  }

  // Step 1: control in the uniform superposition, auxiliaries in phi0.
  PureState initial = control_state(spec.branches, 0);
  initial = tensor_product(initial, spec.input.state);
  for (int l = 1; l < spec.branches; ++l) initial = tensor_product(initial, spec.auxiliary.state);
  DensityMatrix rho(initial);

  auto cswap = [&] {
    if (model.cswap) {
      model.cswap(rho, layout);
    } else {
      apply_ideal_cswap(rho, layout);
    }
  };
  auto target = [&](const std::vector<int>& active) {
    if (model.target) {
      model.target(rho, active);
    } else {
      kernel::sandwich(rho.mutable_entries(), spec.unitary, spec.unitary, active, n);
      kernel::apply_channel(rho.mutable_entries(), spec.channel, active, n);
    }
  };

  cswap();
  target(layout.input_active);
  for (const auto& aux : layout.aux_active) target(aux);
  cswap();

  // Measure the auxiliaries last-to-first, then the control, so the qubit
  // indices of the registers still to be measured never shift.
  const PureState ideal = ideal_output(spec);
  const auto keys = all_outcome_keys(spec);
  std::vector<OutcomeRecord> records;
  records.reserve(keys.size());

  const int aux_count = spec.branches - 1;
  const int basis_size = static_cast<int>(spec.aux_basis.size());
  OutcomeKey key;
  key.aux.assign(static_cast<std::size_t>(aux_count), 0);

  std::vector<OutcomeRecord> by_aux;  // collected in traversal order, sorted below
  std::function<void(const DensityMatrix&, int)> descend = [&](const DensityMatrix& state,
                                                               int level) {
    if (level == 0) {
      for (int s = 0; s < spec.branches; ++s) {
        key.control = s;
        if (layout.control_qubits == 0) {
          by_aux.push_back(make_record(spec, key, state, ideal));
          continue;
        }
        std::vector<int> ctrl(static_cast<std::size_t>(layout.control_qubits));
        std::iota(ctrl.begin(), ctrl.end(), 0);
        auto proj = project(state, control_state(spec.branches, s), ctrl);
        by_aux.push_back(make_record(spec, key, std::move(proj.conditional), ideal));
      }
      return;
    }
    const auto& block = layout.registers.at("aux" + std::to_string(level));
    const auto qubits = block.qubits();
    for (int t = 0; t < basis_size; ++t) {
      key.aux[static_cast<std::size_t>(level - 1)] = t;
      auto proj = project(state, spec.aux_basis[static_cast<std::size_t>(t)], qubits);
      if (proj.probability <= kZeroProbability) {
        // Every descendant outcome has zero probability.
        std::function<void(int)> zeros = [&](int lvl) {
          if (lvl == 0) {
            for (int s = 0; s < spec.branches; ++s) {
              key.control = s;
              const auto dim = static_cast<Eigen::Index>(dim_of(spec.input.total_qubits()));
              by_aux.push_back(make_record(
                  spec, key,
                  DensityMatrix(Matrix::Zero(dim, dim), TraceConvention::kSubnormalized), ideal));
            }
            return;
          }
          for (int u = 0; u < basis_size; ++u) {
            key.aux[static_cast<std::size_t>(lvl - 1)] = u;
            zeros(lvl - 1);
          }
        };
        zeros(level - 1);
        continue;
      }
      descend(proj.conditional, level - 1);
    }
  };
  descend(rho, aux_count);

  std::sort(by_aux.begin(), by_aux.end(),
            [](const OutcomeRecord& a, const OutcomeRecord& b) { return a.key < b.key; });
  return by_aux;
}

Evaluation evaluate_outcomes(const ProtocolSpec& spec, Engine engine) {
  Evaluation out;
  if (engine == Engine::kBruteForce) {
    out.records = run_bruteforce(spec);
    out.engine_used = Engine::kBruteForce;
    return out;
  }
  validate_spec(spec);
  for (const auto& key : all_outcome_keys(spec)) {
    out.records.push_back(closed_form_general(spec, key));
  }
  out.engine_used = Engine::kClosedForm;
  return out;
}

double cj_fidelity(const ProtocolSpec& spec, std::span<const OutcomeRecord> records,
                   std::span<const OutcomeKey> selection) {
  if (spec.input_mode != InputMode::kChoi) {
    throw ValidationError("cj_fidelity requires the Choi input mode");
  }
  if (selection.empty()) throw ValidationError("cj_fidelity: empty outcome selection");
  const PureState ideal = ideal_output(spec);
  double weight = 0.0;
  double weighted = 0.0;
  for (const auto& key : selection) {
    const auto it = std::find_if(records.begin(), records.end(),
                                 [&](const OutcomeRecord& r) { return r.key == key; });
    if (it == records.end()) {
      throw ValidationError("cj_fidelity: no record for outcome " + key.to_string());
    }
    if (it->probability <= 0.0) continue;
    weight += it->probability;
    weighted += it->probability * state_fidelity(ideal, it->state);
  }
  if (weight <= 0.0) throw ValidationError("cj_fidelity: selected outcomes have zero probability");
  return weighted / weight;
}

FiguresOfMerit merit_from(double probability, double f_cj, double f0_cj) {
  FiguresOfMerit out;
  out.P = probability;
  out.F_CJ = f_cj;
  out.F0_CJ = f0_cj;
  constexpr double kUnit = 1e-14;
  if (1.0 - f_cj <= kUnit) {
    out.R_sentinel = true;
    out.R = (1.0 - f0_cj <= kUnit) ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    out.R = (1.0 - f0_cj) / (1.0 - f_cj);
  }
  return out;
}

FiguresOfMerit figures_of_merit(const ProtocolSpec& spec, std::span<const OutcomeRecord> records,
                                std::span<const OutcomeKey> selection) {
  double p = 0.0;
  for (const auto& key : selection) {
    for (const auto& r : records) {
      if (r.key == key) p += r.probability;
    }
  }
  return merit_from(p, cj_fidelity(spec, records, selection), no_error_probability(spec.channel));
}

AnalyticMerit analytic_P_R(double p_ne, int branches) {
  if (!(p_ne > 0.0 && p_ne <= 1.0)) throw ValidationError("analytic_P_R: p_ne must be in (0, 1]");
  if (branches < 1) throw ValidationError("analytic_P_R: d must be >= 1");
  const double d = branches;
  AnalyticMerit out;
  out.P = std::pow(p_ne, d) * (1.0 + (1.0 / p_ne - 1.0) / d);
  out.R = 1.0 + (d - 1.0) * p_ne;
  out.F_CJ = d * p_ne / (1.0 + (d - 1.0) * p_ne);
  return out;
}

}  // namespace sqem
