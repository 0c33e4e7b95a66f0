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

#include "sqem/qstate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace sqem {
namespace {

int qubits_for_dim(std::size_t dim, const char* what) {
  if (dim == 0 || !std::has_single_bit(dim)) {
    throw ValidationError(std::string(what) + ": dimension " + std::to_string(dim) +
                          " is not a power of two");
  }
  return std::countr_zero(dim);
}

void check_targets(std::span<const int> targets, int n_qubits) {
  std::vector<bool> seen(static_cast<std::size_t>(n_qubits), false);
  for (int t : targets) {
    if (t < 0 || t >= n_qubits) {
      throw ValidationError("qubit index " + std::to_string(t) + " out of range [0, " +
                            std::to_string(n_qubits) + ")");
    }
    if (seen[static_cast<std::size_t>(t)]) {
      throw ValidationError("duplicate qubit index " + std::to_string(t));
    }
    seen[static_cast<std::size_t>(t)] = true;
  }
}

std::size_t bit_of(int qubit, int n_qubits) {
  return std::size_t{1} << (n_qubits - 1 - qubit);
}

// Full-register offset contributed by each assignment of `qubits`, with
// qubits[0] as the most significant bit of the local index.
std::vector<std::size_t> local_offsets(std::span<const int> qubits, int n_qubits) {
  const std::size_t k = qubits.size();
  std::vector<std::size_t> offsets(std::size_t{1} << k, 0);
  for (std::size_t s = 0; s < offsets.size(); ++s) {
    for (std::size_t i = 0; i < k; ++i) {
      if ((s >> (k - 1 - i)) & 1U) offsets[s] |= bit_of(qubits[i], n_qubits);
    }
  }
  return offsets;
}

// Applies op to `targets` of a flat 2^n_qubits amplitude array.
void apply_flat(Complex* data, const Matrix& op, std::span<const int> targets, int n_qubits) {
  const std::size_t dim = dim_of(n_qubits);
  if (targets.size() == 1) {
    const std::size_t stride = bit_of(targets[0], n_qubits);
    const Complex o00 = op(0, 0), o01 = op(0, 1), o10 = op(1, 0), o11 = op(1, 1);
    for (std::size_t block = 0; block < dim; block += 2 * stride) {
      Complex* lo = data + block;
      Complex* hi = lo + stride;
      for (std::size_t j = 0; j < stride; ++j) {
        const Complex a = lo[j], c = hi[j];
        lo[j] = o00 * a + o01 * c;
        hi[j] = o10 * a + o11 * c;
      }
    }
    return;
  }
  const auto offsets = local_offsets(targets, n_qubits);
  std::size_t mask = 0;
  for (int t : targets) mask |= bit_of(t, n_qubits);
  const std::size_t local = offsets.size();
  std::vector<Complex> in(local);
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & mask) continue;
    for (std::size_t s = 0; s < local; ++s) in[s] = data[base + offsets[s]];
    for (std::size_t r = 0; r < local; ++r) {
      Complex acc{0.0, 0.0};
      for (std::size_t s = 0; s < local; ++s) acc += op(r, s) * in[s];
      data[base + offsets[r]] = acc;
    }
  }
}

void check_operator(const Matrix& op, std::span<const int> targets, int n_qubits) {
  check_targets(targets, n_qubits);
  const auto local = dim_of(static_cast<int>(targets.size()));
  if (static_cast<std::size_t>(op.rows()) != local ||
      static_cast<std::size_t>(op.cols()) != local) {
    throw ValidationError("operator of size " + std::to_string(op.rows()) + "x" +
                          std::to_string(op.cols()) + " does not match " +
                          std::to_string(targets.size()) + " target qubit(s)");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(Vector amplitudes, bool check)
    : amplitudes_(std::move(amplitudes)),
      n_qubits_(qubits_for_dim(static_cast<std::size_t>(amplitudes_.size()), "PureState")) {
  if (check && std::abs(amplitudes_.norm() - 1.0) > 1e-12) {
    throw ValidationError("PureState is not normalized (norm " +
                          std::to_string(amplitudes_.norm()) + ")");
  }
}

PureState PureState::basis(int n_qubits, std::size_t index) {
  if (index >= dim_of(n_qubits)) throw ValidationError("basis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_of(n_qubits)));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState(std::move(v));
}

PureState PureState::normalized(Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (norm == 0.0) throw ValidationError("cannot normalize the zero vector");
  amplitudes /= norm;
  return PureState(std::move(amplitudes), false);
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Matrix entries, TraceConvention convention)
    : entries_(std::move(entries)), convention_(convention) {
  if (entries_.rows() != entries_.cols()) {
    throw ValidationError("DensityMatrix must be square");
  }
  n_qubits_ = qubits_for_dim(static_cast<std::size_t>(entries_.rows()), "DensityMatrix");
}

DensityMatrix::DensityMatrix(const PureState& psi)
    : entries_(psi.amplitudes() * psi.amplitudes().adjoint()), n_qubits_(psi.n_qubits()) {}

DensityMatrix DensityMatrix::normalized() const {
  const double tr = trace();
  if (tr == 0.0) return *this;
  return DensityMatrix(entries_ / tr, TraceConvention::kNormalized);
}

DensityMatrix::Check DensityMatrix::check() const {
  Check c{};
  c.hermiticity_error = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  const Matrix herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = solver.eigenvalues().minCoeff();
  c.trace = trace();
  return c;
}

bool DensityMatrix::Check::ok(TraceConvention convention, double tol) const {
  if (hermiticity_error > tol || min_eigenvalue < -tol) return false;
  if (convention == TraceConvention::kNormalized) return std::abs(trace - 1.0) <= tol;
  return trace >= -tol && trace <= 1.0 + tol;
}

void DensityMatrix::validate(double tol) const {
  const Check c = check();
  if (!c.ok(convention_, tol)) {
    throw ValidationError("invalid density matrix: hermiticity error " +
                          std::to_string(c.hermiticity_error) + ", min eigenvalue " +
                          std::to_string(c.min_eigenvalue) + ", trace " +
                          std::to_string(c.trace));
  }
}

// ---------------------------------------------------------------------------
// RegisterLayout

std::vector<int> QubitRange::qubits() const {
  std::vector<int> q(static_cast<std::size_t>(count));
  std::iota(q.begin(), q.end(), first);
  return q;
}

RegisterLayout::RegisterLayout(std::vector<std::pair<std::string, int>> sizes) {
  for (auto& [name, count] : sizes) {
    if (count < 0) throw ValidationError("register '" + name + "' has negative size");
    if (contains(name)) throw ValidationError("duplicate register '" + name + "'");
    ranges_.push_back(QubitRange{std::move(name), total_, count});
    total_ += count;
  }
}

const QubitRange& RegisterLayout::at(const std::string& name) const {
  for (const auto& r : ranges_) {
    if (r.name == name) return r;
  }
  throw ValidationError("unknown register '" + name + "'");
}

bool RegisterLayout::contains(const std::string& name) const {
  return std::any_of(ranges_.begin(), ranges_.end(),
                     [&](const QubitRange& r) { return r.name == name; });
}

// ---------------------------------------------------------------------------
// MeasurementBasis

MeasurementBasis::MeasurementBasis(std::vector<PureState> elements)
    : elements_(std::move(elements)) {
  if (elements_.empty()) throw ValidationError("empty measurement basis");
  const int n = elements_.front().n_qubits();
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (elements_[i].n_qubits() != n) {
      throw ValidationError("measurement basis elements differ in size");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const Complex overlap = elements_[j].amplitudes().dot(elements_[i].amplitudes());
      if (std::abs(overlap) > 1e-10) {
        throw ValidationError("measurement basis elements " + std::to_string(j) + " and " +
                              std::to_string(i) + " are not orthogonal");
      }
    }
  }
  if (elements_.size() > elements_.front().dim()) {
    throw ValidationError("measurement basis has more elements than the dimension");
  }
}

MeasurementBasis MeasurementBasis::completed(const std::vector<PureState>& seeds) {
  if (seeds.empty()) throw ValidationError("need at least one seed state");
  const auto dim = static_cast<Eigen::Index>(seeds.front().dim());
  std::vector<Vector> accepted;

  auto try_add = [&](Vector v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : accepted) v -= u * u.dot(v);
    }
    const double norm = v.norm();
    if (norm < 1e-8) return false;
    accepted.push_back(v / norm);
    return true;
  };

  for (const auto& s : seeds) {
    if (s.dim() != static_cast<std::size_t>(dim)) {
      throw ValidationError("seed states differ in size");
    }
    if (!try_add(s.amplitudes())) {
      throw ValidationError("seed states are linearly dependent");
    }
  }
  for (Eigen::Index i = 0; i < dim && static_cast<Eigen::Index>(accepted.size()) < dim; ++i) {
    Vector e = Vector::Zero(dim);
    e(i) = 1.0;
    try_add(std::move(e));
  }

  std::vector<PureState> elements;
  elements.reserve(accepted.size());
  // Keep the first seed's phase exactly.
  elements.emplace_back(seeds.front().amplitudes(), false);
  for (std::size_t i = 1; i < accepted.size(); ++i) {
    elements.emplace_back(std::move(accepted[i]), false);
  }
  return MeasurementBasis(std::move(elements));
}

MeasurementBasis MeasurementBasis::computational(int n_qubits) {
  std::vector<PureState> elements;
  for (std::size_t i = 0; i < dim_of(n_qubits); ++i) {
    elements.push_back(PureState::basis(n_qubits, i));
  }
  return MeasurementBasis(std::move(elements));
}

int MeasurementBasis::n_qubits() const {
  return elements_.empty() ? 0 : elements_.front().n_qubits();
}

bool MeasurementBasis::complete() const {
  return !elements_.empty() && elements_.size() == elements_.front().dim();
}

// ---------------------------------------------------------------------------
// Operations

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

PureState tensor_product(const PureState& a, const PureState& b) {
  Vector out(a.amplitudes().size() * b.amplitudes().size());
  for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i) {
    out.segment(i * b.amplitudes().size(), b.amplitudes().size()) =
        a.amplitudes()(i) * b.amplitudes();
  }
  return PureState(std::move(out), false);
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  const bool normalized = a.convention() == TraceConvention::kNormalized &&
                          b.convention() == TraceConvention::kNormalized;
  return DensityMatrix(kron(a.entries(), b.entries()),
                       normalized ? TraceConvention::kNormalized
                                  : TraceConvention::kSubnormalized);
}

bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const Matrix diff = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
  return diff.cwiseAbs().maxCoeff() <= tol;
}

DensityMatrix apply_unitary(DensityMatrix rho, const Matrix& u, std::span<const int> targets) {
  check_operator(u, targets, rho.n_qubits());
  if (!is_unitary(u)) throw ValidationError("apply_unitary: operator is not unitary");
  kernel::sandwich(rho.mutable_entries(), u, u, targets, rho.n_qubits());
  return rho;
}

PureState apply_unitary(const PureState& psi, const Matrix& u, std::span<const int> targets) {
  check_operator(u, targets, psi.n_qubits());
  if (!is_unitary(u)) throw ValidationError("apply_unitary: operator is not unitary");
  Vector v = psi.amplitudes();
  kernel::apply_vector(v, u, targets, psi.n_qubits());
  return PureState(std::move(v), false);
}

void validate_targets(std::span<const int> targets, int n_qubits) {
  check_targets(targets, n_qubits);
}

std::vector<int> complement(std::span<const int> qubits, int n_qubits) {
  std::vector<bool> in(static_cast<std::size_t>(n_qubits), false);
  for (int q : qubits) in[static_cast<std::size_t>(q)] = true;
  std::vector<int> out;
  for (int q = 0; q < n_qubits; ++q) {
    if (!in[static_cast<std::size_t>(q)]) out.push_back(q);
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const int n = rho.n_qubits();
  check_targets(keep, n);
  const auto traced = complement(keep, n);
  const auto keep_off = local_offsets(keep, n);
  const auto trace_off = local_offsets(traced, n);
  const auto& in = rho.entries();

  const auto k = static_cast<Eigen::Index>(keep_off.size());
  Matrix out = Matrix::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      Complex acc{0.0, 0.0};
      for (std::size_t t : trace_off) {
        acc += in(static_cast<Eigen::Index>(keep_off[static_cast<std::size_t>(i)] | t),
                  static_cast<Eigen::Index>(keep_off[static_cast<std::size_t>(j)] | t));
      }
      out(i, j) = acc;
    }
  }
  return DensityMatrix(std::move(out), rho.convention());
}

Projection project(const DensityMatrix& rho, const PureState& onto,
                   std::span<const int> targets) {
  const int n = rho.n_qubits();
  check_targets(targets, n);
  if (onto.n_qubits() != static_cast<int>(targets.size())) {
    throw ValidationError("project: state size does not match the target count");
  }
  const auto rest = complement(targets, n);
  const auto rest_off = local_offsets(rest, n);
  const auto tgt_off = local_offsets(targets, n);
  const auto& v = onto.amplitudes();
  const auto& in = rho.entries();
  const auto dim = static_cast<Eigen::Index>(rho.dim());
  const auto r = static_cast<Eigen::Index>(rest_off.size());

  // half(row, j) = sum_s' rho(row, (j, s')) v(s')
  Matrix half = Matrix::Zero(dim, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    for (std::size_t s = 0; s < tgt_off.size(); ++s) {
      const Complex vs = v(static_cast<Eigen::Index>(s));
      if (vs == Complex{}) continue;
      half.col(j) += vs * in.col(static_cast<Eigen::Index>(rest_off[static_cast<std::size_t>(j)] |
                                                           tgt_off[s]));
    }
  }
  Matrix out = Matrix::Zero(r, r);
  for (std::size_t s = 0; s < tgt_off.size(); ++s) {
    const Complex vs = std::conj(v(static_cast<Eigen::Index>(s)));
    if (vs == Complex{}) continue;
    for (Eigen::Index i = 0; i < r; ++i) {
      out.row(i) += vs * half.row(static_cast<Eigen::Index>(rest_off[static_cast<std::size_t>(i)] |
                                                            tgt_off[s]));
    }
  }
  // Remove round-off anti-Hermitian parts.
  out = 0.5 * (out + out.adjoint()).eval();
  const double p = std::max(0.0, out.trace().real());
  return Projection{p, DensityMatrix(std::move(out), TraceConvention::kSubnormalized)};
}

PureState bell_pairs(int m) {
  if (m < 1) throw ValidationError("bell_pairs: m must be positive");
  const std::size_t half = dim_of(m);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(half * half));
  const double amp = 1.0 / std::sqrt(static_cast<double>(half));
  for (std::size_t x = 0; x < half; ++x) {
    v(static_cast<Eigen::Index>(x * half + x)) = amp;
  }
  return PureState(std::move(v), false);
}

double state_fidelity(const PureState& psi, const DensityMatrix& rho) {
  if (psi.n_qubits() != rho.n_qubits()) {
    throw ValidationError("state_fidelity: dimension mismatch");
  }
  return psi.amplitudes().dot(rho.entries() * psi.amplitudes()).real();
}

Matrix embed(const Matrix& op, std::span<const int> targets, int n_qubits) {
  check_operator(op, targets, n_qubits);
  Matrix full = Matrix::Identity(static_cast<Eigen::Index>(dim_of(n_qubits)),
                                 static_cast<Eigen::Index>(dim_of(n_qubits)));
  kernel::apply_left(full, op, targets, n_qubits);
  return full;
}

namespace kernel {

// Column-major storage is a 2n-qubit array whose high n qubits index the
// column and low n qubits the row.
void apply_left(Matrix& rho, const Matrix& op, std::span<const int> targets, int n_qubits) {
  std::vector<int> shifted(targets.begin(), targets.end());
  for (int& t : shifted) t += n_qubits;
  apply_flat(rho.data(), op, shifted, 2 * n_qubits);
}

void apply_right_adjoint(Matrix& rho, const Matrix& op, std::span<const int> targets,
                         int n_qubits) {
  const Matrix conj = op.conjugate();
  apply_flat(rho.data(), conj, targets, 2 * n_qubits);
}

void sandwich(Matrix& rho, const Matrix& left, const Matrix& right,
              std::span<const int> targets, int n_qubits) {
  apply_left(rho, left, targets, n_qubits);
  apply_right_adjoint(rho, right, targets, n_qubits);
}

void apply_superoperator(Matrix& rho, const Matrix& super, std::span<const int> targets,
                         int n_qubits) {
  std::vector<int> both(targets.begin(), targets.end());
  for (int t : targets) both.push_back(t + n_qubits);
  apply_flat(rho.data(), super, both, 2 * n_qubits);
}

void apply_vector(Vector& psi, const Matrix& op, std::span<const int> targets, int n_qubits) {
  apply_flat(psi.data(), op, targets, n_qubits);
}

}  // namespace kernel

}  // namespace sqem
