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

#include "sqem/channels.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sqem {
namespace {

constexpr double kDropNorm = 1e-15;
constexpr std::size_t kMaxKrausOperators = 1'000'000;

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << name << " must lie in [0, 1], got " << p;
    throw ValidationError(os.str());
  }
}

std::vector<Matrix> drop_zeros(std::vector<Matrix> ops) {
  std::vector<Matrix> kept;
  kept.reserve(ops.size());
  for (auto& op : ops) {
    if (op.norm() > kDropNorm) kept.push_back(std::move(op));
  }
  return kept;
}

KrausChannel single_qubit_pauli_family(double p_ne, std::span<const double> weights) {
  std::vector<Matrix> ops;
  ops.push_back(std::sqrt(p_ne) * pauli(0));
  for (int i = 1; i < 4; ++i) {
    ops.push_back(std::sqrt(weights[static_cast<std::size_t>(i - 1)]) * pauli(i));
  }
  return KrausChannel(drop_zeros(std::move(ops)), p_ne);
}

}  // namespace

KrausChannel::KrausChannel(std::vector<Matrix> operators, std::optional<double> declared_p_ne)
    : operators_(std::move(operators)), declared_p_ne_(declared_p_ne) {
  if (operators_.empty()) throw ValidationError("KrausChannel needs at least one operator");
  const auto dim = operators_.front().rows();
  if (dim == 0 || !std::has_single_bit(static_cast<std::size_t>(dim))) {
    throw ValidationError("Kraus operator dimension must be a power of two");
  }
  for (const auto& op : operators_) {
    if (op.rows() != dim || op.cols() != dim) {
      throw ValidationError("Kraus operators must be square and of equal size");
    }
  }
  n_qubits_ = std::countr_zero(static_cast<std::size_t>(dim));
  if (declared_p_ne_) check_probability(*declared_p_ne_, "declared p_ne");
}

ChannelReport validate(const KrausChannel& channel, double tol) {
  ChannelReport report;
  if (channel.operators().empty()) {
    report.ok = false;
    report.message = "no Kraus operators";
    return report;
  }
  const auto dim = static_cast<Eigen::Index>(channel.dim());
  Matrix sum = Matrix::Zero(dim, dim);
  for (const auto& k : channel.operators()) sum += k.adjoint() * k;
  report.completeness_deviation = (sum - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (report.completeness_deviation > tol) {
    report.ok = false;
    report.message = "sum K^dagger K deviates from I by " +
                     std::to_string(report.completeness_deviation);
  }
  if (const auto p = channel.declared_p_ne()) {
    bool conv = true;
    if (*p > 0.0) {
      const Matrix expected = std::sqrt(*p) * Matrix::Identity(dim, dim);
      conv = (channel.operators().front() - expected).cwiseAbs().maxCoeff() <= 1e-12;
    }
    report.identity_convention_ok = conv;
    if (!conv) {
      report.ok = false;
      if (!report.message.empty()) report.message += "; ";
      report.message += "operator 0 is not sqrt(p_ne) I";
    }
  }
  return report;
}

Matrix pauli(int index) {
  using namespace std::complex_literals;
  Matrix p(2, 2);
  switch (index) {
    case 0: p << 1.0, 0.0, 0.0, 1.0; break;
    case 1: p << 0.0, 1.0, 1.0, 0.0; break;
    case 2: p << 0.0, -1i, 1i, 0.0; break;
    case 3: p << 1.0, 0.0, 0.0, -1.0; break;
    default: throw ValidationError("pauli index must be in 0..3");
  }
  return p;
}

Matrix pauli_string(std::size_t index, int m) {
  Matrix out = Matrix::Identity(1, 1);
  for (int q = 0; q < m; ++q) {
    const auto digit = static_cast<int>((index >> (2 * (m - 1 - q))) & 3U);
    out = kron(out, pauli(digit));
  }
  return out;
}

KrausChannel identity_channel(int n_qubits) {
  const auto dim = static_cast<Eigen::Index>(dim_of(n_qubits));
  return KrausChannel({Matrix::Identity(dim, dim)}, 1.0);
}

KrausChannel dephasing(double p_ne) {
  check_probability(p_ne, "p_ne");
  const double w[3] = {0.0, 0.0, 1.0 - p_ne};
  return single_qubit_pauli_family(p_ne, w);
}

KrausChannel depolarizing(double p_ne) {
  check_probability(p_ne, "p_ne");
  const double e = (1.0 - p_ne) / 3.0;
  const double w[3] = {e, e, e};
  return single_qubit_pauli_family(p_ne, w);
}

KrausChannel bit_flip(double p_ne) {
  check_probability(p_ne, "p_ne");
  const double w[3] = {1.0 - p_ne, 0.0, 0.0};
  return single_qubit_pauli_family(p_ne, w);
}

KrausChannel amplitude_damping(double gamma) {
  check_probability(gamma, "gamma");
  Matrix k0(2, 2), k1(2, 2);
  k0 << 1.0, 0.0, 0.0, std::sqrt(1.0 - gamma);
  k1 << 0.0, std::sqrt(gamma), 0.0, 0.0;
  return KrausChannel(drop_zeros({k0, k1}));
}

KrausChannel joint_depolarizing(int n_qubits, double p_ne) {
  check_probability(p_ne, "p_ne");
  const std::size_t count = std::size_t{1} << (2 * n_qubits);
  std::vector<double> weights(count, (1.0 - p_ne) / static_cast<double>(count - 1));
  weights[0] = p_ne;
  return pauli_channel(n_qubits, weights);
}

KrausChannel pauli_channel(int n_qubits, std::span<const double> weights) {
  const std::size_t count = std::size_t{1} << (2 * n_qubits);
  if (weights.size() != count) {
    throw ValidationError("pauli_channel needs 4^k weights");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ValidationError("pauli_channel weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("pauli_channel weights must sum to 1");
  std::vector<Matrix> ops;
  for (std::size_t i = 0; i < count; ++i) {
    ops.push_back(std::sqrt(weights[i]) * pauli_string(i, n_qubits));
  }
  return KrausChannel(drop_zeros(std::move(ops)), weights[0]);
}

KrausChannel tensor_product(const KrausChannel& a, const KrausChannel& b) {
  if (a.size() * b.size() > kMaxKrausOperators) {
    throw ValidationError("tensor product would exceed 10^6 Kraus operators");
  }
  std::vector<Matrix> ops;
  ops.reserve(a.size() * b.size());
  for (const auto& ka : a.operators()) {
    for (const auto& kb : b.operators()) ops.push_back(kron(ka, kb));
  }
  std::optional<double> p;
  if (a.declared_p_ne() && b.declared_p_ne()) p = *a.declared_p_ne() * *b.declared_p_ne();
  return KrausChannel(std::move(ops), p);
}

KrausChannel tensor_power(const KrausChannel& channel, int m) {
  if (m < 1) throw ValidationError("tensor_power: m must be positive");
  if (std::pow(static_cast<double>(channel.size()), m) > static_cast<double>(kMaxKrausOperators)) {
    throw ValidationError("tensor_power would exceed 10^6 Kraus operators");
  }
  KrausChannel out = channel;
  for (int i = 1; i < m; ++i) out = tensor_product(out, channel);
  return out;
}

namespace kernel {

void apply_channel(Matrix& rho, const KrausChannel& channel, std::span<const int> targets,
                   int n_qubits) {
  if (channel.size() == 1) {
    sandwich(rho, channel.operators()[0], channel.operators()[0], targets, n_qubits);
    return;
  }
  if (channel.n_qubits() <= 2) {
    const auto local = static_cast<Eigen::Index>(channel.dim() * channel.dim());
    Matrix super = Matrix::Zero(local, local);
    for (const auto& k : channel.operators()) super += kron(k.conjugate(), k);
    apply_superoperator(rho, super, targets, n_qubits);
    return;
  }
  Matrix acc = Matrix::Zero(rho.rows(), rho.cols());
  Matrix scratch;
  for (const auto& k : channel.operators()) {
    scratch = rho;
    sandwich(scratch, k, k, targets, n_qubits);
    acc += scratch;
  }
  rho = std::move(acc);
}

}  // namespace kernel

DensityMatrix apply(const KrausChannel& channel, DensityMatrix rho, std::span<const int> targets) {
  if (channel.n_qubits() != static_cast<int>(targets.size())) {
    throw ValidationError("apply: channel acts on " + std::to_string(channel.n_qubits()) +
                          " qubit(s) but " + std::to_string(targets.size()) + " targets given");
  }
  validate_targets(targets, rho.n_qubits());
  kernel::apply_channel(rho.mutable_entries(), channel, targets, rho.n_qubits());
  return rho;
}

NoisyGate::NoisyGate(Matrix unitary, KrausChannel channel)
    : unitary_(std::move(unitary)), channel_(std::move(channel)) {
  if (unitary_.rows() != static_cast<Eigen::Index>(channel_.dim())) {
    throw ValidationError("noisy_gate: unitary and channel dimensions differ");
  }
  if (!is_unitary(unitary_)) throw ValidationError("noisy_gate: operator is not unitary");
}

DensityMatrix NoisyGate::operator()(DensityMatrix rho, std::span<const int> targets) const {
  rho = apply_unitary(std::move(rho), unitary_, targets);
  return apply(channel_, std::move(rho), targets);
}

DensityMatrix NoisyGate::operator()(DensityMatrix rho) const {
  std::vector<int> all(static_cast<std::size_t>(rho.n_qubits()));
  std::iota(all.begin(), all.end(), 0);
  return (*this)(std::move(rho), all);
}

NoisyGate noisy_gate(Matrix unitary, KrausChannel channel) {
  return NoisyGate(std::move(unitary), std::move(channel));
}

double no_error_probability(const KrausChannel& channel) {
  if (const auto p = channel.declared_p_ne()) return *p;
  const double dim = static_cast<double>(channel.dim());
  double total = 0.0;
  for (const auto& k : channel.operators()) total += std::norm(k.trace());
  return total / (dim * dim);
}

KrausChannel remix(const KrausChannel& channel, const Matrix& mixing) {
  const auto n = static_cast<Eigen::Index>(channel.size());
  if (mixing.rows() != n || mixing.cols() != n) {
    throw ValidationError("remix: mixing matrix must be |ops| x |ops|");
  }
  std::vector<Matrix> ops;
  for (Eigen::Index j = 0; j < n; ++j) {
    Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(channel.dim()),
                              static_cast<Eigen::Index>(channel.dim()));
    for (Eigen::Index l = 0; l < n; ++l) {
      acc += mixing(j, l) * channel.operators()[static_cast<std::size_t>(l)];
    }
    ops.push_back(std::move(acc));
  }
  return KrausChannel(drop_zeros(std::move(ops)));
}

KrausChannel canonical_identity_gauge(const KrausChannel& channel) {
  const auto n = static_cast<Eigen::Index>(channel.size());
  const double dim = static_cast<double>(channel.dim());
  Vector c(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    c(j) = channel.operators()[static_cast<std::size_t>(j)].trace() / dim;
  }
  const double norm = c.norm();
  if (norm < 1e-14) return channel;

  // Rows of W: conj(c)/|c| first, then an orthonormal completion.
  std::vector<Vector> rows;
  rows.push_back(c.conjugate() / norm);
  for (Eigen::Index i = 0; i < n && static_cast<Eigen::Index>(rows.size()) < n; ++i) {
    Vector e = Vector::Zero(n);
    e(i) = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& r : rows) e -= r * r.dot(e);
    }
    const double en = e.norm();
    if (en > 1e-8) rows.push_back(e / en);
  }
  Matrix w(n, n);
  for (Eigen::Index i = 0; i < n; ++i) w.row(i) = rows[static_cast<std::size_t>(i)].transpose();
  KrausChannel out = remix(channel, w);
  return KrausChannel(out.operators(), channel.declared_p_ne());
}

KrausChannel lift_with_reference(const KrausChannel& channel, int reference_qubits) {
  if (reference_qubits == 0) return channel;
  return tensor_product(identity_channel(reference_qubits), channel);
}

KrausChannel channel_from_json(const nlohmann::json& doc) {
  try {
    const int k = doc.at("n_qubits").get<int>();
    if (k < 0 || k > 6) throw ValidationError("n_qubits must be in 0..6");
    const auto dim = static_cast<Eigen::Index>(dim_of(k));
    std::vector<Matrix> ops;
    for (const auto& op : doc.at("operators")) {
      if (static_cast<Eigen::Index>(op.size()) != dim * dim) {
        throw ValidationError("each operator needs 4^n_qubits [re, im] entries");
      }
      Matrix m(dim, dim);
      for (Eigen::Index i = 0; i < dim * dim; ++i) {
        const auto& entry = op.at(static_cast<std::size_t>(i));
        m(i / dim, i % dim) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
      }
      ops.push_back(std::move(m));
    }
    std::optional<double> p;
    if (doc.contains("p_ne")) p = doc.at("p_ne").get<double>();
    KrausChannel channel(std::move(ops), p);
    const auto report = validate(channel);
    if (!report.ok) throw ValidationError("invalid channel: " + report.message);
    return channel;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed channel JSON: ") + e.what());
  }
}

nlohmann::json channel_to_json(const KrausChannel& channel) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& k : channel.operators()) {
    nlohmann::json flat = nlohmann::json::array();
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      for (Eigen::Index j = 0; j < k.cols(); ++j) {
        flat.push_back({k(i, j).real(), k(i, j).imag()});
      }
    }
    ops.push_back(std::move(flat));
  }
  nlohmann::json doc{{"n_qubits", channel.n_qubits()}, {"operators", std::move(ops)}};
  if (const auto p = channel.declared_p_ne()) doc["p_ne"] = *p;
  return doc;
}

}  // namespace sqem
