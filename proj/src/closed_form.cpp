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

// Closed-form output states.
//
// Label the registers r = 0 (input) and r = 1..d-1 (auxiliaries) and let j_r
// be the Kraus index hitting register r.  In branch k the input sits in
// register k, so after the second swap the input carries K_{j_k} U psi and
// auxiliary l carries K_{j_h} U phi0 with h = h_k(l) = (l == k ? 0 : l).
// Projecting auxiliary l onto its basis element gives beta^l_{j_h}; summing
// the outer products over all Kraus tuples leaves, per branch pair (k, k'),
// a product of scalar overlaps for the spectator registers and one operator
// sandwich for the two registers that swap roles.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "sqem/protocol.hpp"

namespace sqem {
namespace {

struct InputFrame {
  DensityMatrix psi;
  std::vector<int> active;
  int n = 0;
};

InputFrame input_frame(const ProtocolSpec& spec) {
  InputFrame f{DensityMatrix(spec.input.state), {}, spec.input.total_qubits()};
  f.active.resize(static_cast<std::size_t>(spec.m()));
  std::iota(f.active.begin(), f.active.end(), spec.input.reference_qubits);
  return f;
}

Matrix incoherent(const ProtocolSpec& spec, const InputFrame& f) {
  Matrix rho = f.psi.entries();
  kernel::sandwich(rho, spec.unitary, spec.unitary, f.active, f.n);
  kernel::apply_channel(rho, spec.channel, f.active, f.n);
  return rho;
}

// B = sum_j conj(beta_j) K_j U
Matrix interference_operator(const ProtocolSpec& spec, const Vector& beta) {
  const auto dim = spec.unitary.rows();
  Matrix b = Matrix::Zero(dim, dim);
  const auto& ops = spec.channel.operators();
  for (std::size_t j = 0; j < ops.size(); ++j) {
    b += std::conj(beta(static_cast<Eigen::Index>(j))) * ops[j];
  }
  return b * spec.unitary;
}

OutcomeRecord finish(const ProtocolSpec& spec, const OutcomeKey& key, Matrix rho) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  OutcomeRecord rec;
  rec.key = key;
  const double p = rho.trace().real();
  if (p > 1e-14) {
    rec.probability = p;
    rec.state = DensityMatrix(rho / p);
    rec.fidelity = std::clamp(state_fidelity(ideal_output(spec), rec.state), 0.0, 1.0);
  } else {
    rec.probability = std::max(p, 0.0);
    rec.state = DensityMatrix(Matrix::Zero(rho.rows(), rho.cols()), TraceConvention::kSubnormalized);
  }
  return rec;
}

void check_key(const ProtocolSpec& spec, const OutcomeKey& key) {
  if (key.control < 0 || key.control >= spec.branches ||
      static_cast<int>(key.aux.size()) != spec.branches - 1) {
    throw ValidationError("outcome key " + key.to_string() + " does not match d = " +
                          std::to_string(spec.branches));
  }
  for (int t : key.aux) {
    if (t < 0 || t >= static_cast<int>(spec.aux_basis.size())) {
      throw ValidationError("outcome key " + key.to_string() + " indexes outside the basis");
    }
  }
}

}  // namespace

OutcomeRecord closed_form_d2(const ProtocolSpec& spec, const OutcomeKey& key) {
  validate_spec(spec);
  if (spec.branches != 2) throw ValidationError("closed_form_d2 requires d = 2");
  check_key(spec, key);

  const InputFrame f = input_frame(spec);
  const auto overlaps =
      branch_overlaps(spec, spec.aux_basis[static_cast<std::size_t>(key.aux[0])]);
  const Matrix b = interference_operator(spec, overlaps.beta);

  Matrix coherent = f.psi.entries();
  kernel::sandwich(coherent, b, b, f.active, f.n);
  const double sign = key.control == 0 ? 1.0 : -1.0;
  Matrix rho = 0.5 * (overlaps.A * incoherent(spec, f) + sign * coherent);
  return finish(spec, key, std::move(rho));
}

OutcomeRecord closed_form_general(const ProtocolSpec& spec, const OutcomeKey& key) {
  validate_spec(spec);
  check_key(spec, key);
  const int d = spec.branches;
  const InputFrame f = input_frame(spec);
  if (d == 1) return finish(spec, key, incoherent(spec, f));

  // Per-auxiliary overlaps, indexed by register l = 1..d-1.
  std::vector<Vector> beta(static_cast<std::size_t>(d));
  std::vector<Matrix> b_ops(static_cast<std::size_t>(d));
  double prod_a = 1.0;
  for (int l = 1; l < d; ++l) {
    const auto& phi_f = spec.aux_basis[static_cast<std::size_t>(key.aux[static_cast<std::size_t>(l - 1)])];
    auto ov = branch_overlaps(spec, phi_f);
    prod_a *= ov.A;
    b_ops[static_cast<std::size_t>(l)] = interference_operator(spec, ov.beta);
    beta[static_cast<std::size_t>(l)] = std::move(ov.beta);
  }
  // gram(a, b) = sum_j beta^a_j conj(beta^b_j)
  auto gram = [&](int a, int b) {
    return beta[static_cast<std::size_t>(b)].dot(beta[static_cast<std::size_t>(a)]);
  };
  // Register holding Kraus index j_r in branch k (r != k).
  auto holder = [](int k, int r) { return r == 0 ? k : r; };

  std::map<std::pair<int, int>, Matrix> sandwiches;
  auto cross = [&](int a, int b) -> const Matrix& {
    auto it = sandwiches.find({a, b});
    if (it == sandwiches.end()) {
      Matrix m = f.psi.entries();
      kernel::sandwich(m, b_ops[static_cast<std::size_t>(a)], b_ops[static_cast<std::size_t>(b)],
                       f.active, f.n);
      it = sandwiches.emplace(std::make_pair(a, b), std::move(m)).first;
    }
    return it->second;
  };

  Matrix rho = (static_cast<double>(d) * prod_a) * incoherent(spec, f);
  const double theta = -2.0 * std::numbers::pi * key.control / d;
  for (int k = 0; k < d; ++k) {
    for (int kp = 0; kp < d; ++kp) {
      if (k == kp) continue;
      Complex coef = std::polar(1.0, theta * (k - kp));
      for (int r = 0; r < d; ++r) {
        if (r == k || r == kp) continue;
        coef *= gram(holder(k, r), holder(kp, r));
      }
      if (coef == Complex{}) continue;
      rho += coef * cross(holder(kp, k), holder(k, kp));
    }
  }
  rho /= static_cast<double>(d) * d;
  return finish(spec, key, std::move(rho));
}

}  // namespace sqem
