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

// Dense multi-qubit states and the handful of linear-algebra primitives the
// protocol engines are built from.
//
// Ordering is big-endian throughout: qubit 0 is the most significant bit of
// a basis-state index.  A k-qubit operator acting on targets {t0, t1, ...}
// sees t0 as its own most significant bit.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sqem {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Thrown when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Largest register the dense density-matrix simulator accepts.
inline constexpr int kMaxDensityQubits = 13;

inline constexpr double kUnitaryTolerance = 1e-10;

[[nodiscard]] constexpr std::size_t dim_of(int n_qubits) {
  return std::size_t{1} << n_qubits;
}

class PureState {
 public:
  PureState() : amplitudes_(Vector::Ones(1)), n_qubits_(0) {}
  /// Validates length 2^n and unit norm (1e-12), unless `check` is false.
  explicit PureState(Vector amplitudes, bool check = true);

  static PureState basis(int n_qubits, std::size_t index);
  /// Normalizes `amplitudes` instead of rejecting them.
  static PureState normalized(Vector amplitudes);

  [[nodiscard]] const Vector& amplitudes() const { return amplitudes_; }
  [[nodiscard]] int n_qubits() const { return n_qubits_; }
  [[nodiscard]] std::size_t dim() const { return dim_of(n_qubits_); }

 private:
  Vector amplitudes_;
  int n_qubits_;
};

enum class TraceConvention { kNormalized, kSubnormalized };

class DensityMatrix {
 public:
  DensityMatrix() : entries_(Matrix::Ones(1, 1)), n_qubits_(0) {}
  explicit DensityMatrix(Matrix entries,
                         TraceConvention convention = TraceConvention::kNormalized);
  explicit DensityMatrix(const PureState& psi);

  [[nodiscard]] const Matrix& entries() const { return entries_; }
  [[nodiscard]] int n_qubits() const { return n_qubits_; }
  [[nodiscard]] std::size_t dim() const { return dim_of(n_qubits_); }
  [[nodiscard]] TraceConvention convention() const { return convention_; }
  [[nodiscard]] double trace() const { return entries_.trace().real(); }

  /// Copy rescaled to unit trace; a zero-trace matrix is returned unchanged.
  [[nodiscard]] DensityMatrix normalized() const;

  /// Max elementwise deviation from Hermiticity, smallest eigenvalue, trace.
  struct Check {
    double hermiticity_error;
    double min_eigenvalue;
    double trace;
    [[nodiscard]] bool ok(TraceConvention convention, double tol = 1e-10) const;
  };
  [[nodiscard]] Check check() const;
  /// Throws ValidationError if the invariants for the stored convention fail.
  void validate(double tol = 1e-10) const;

  // Mutable access for the engines; public operations below stay pure.
  Matrix& mutable_entries() { return entries_; }

 private:
  Matrix entries_;
  int n_qubits_;
  TraceConvention convention_ = TraceConvention::kNormalized;
};

/// Named contiguous qubit ranges.
struct QubitRange {
  std::string name;
  int first = 0;
  int count = 0;

  [[nodiscard]] std::vector<int> qubits() const;
};

class RegisterLayout {
 public:
  RegisterLayout() = default;
  /// Ranges are laid out in order; the total is their sum.
  explicit RegisterLayout(std::vector<std::pair<std::string, int>> sizes);

  [[nodiscard]] const QubitRange& at(const std::string& name) const;
  [[nodiscard]] bool contains(const std::string& name) const;
  [[nodiscard]] const std::vector<QubitRange>& ranges() const { return ranges_; }
  [[nodiscard]] int total_qubits() const { return total_; }

 private:
  std::vector<QubitRange> ranges_;
  int total_ = 0;
};

/// Ordered list of orthonormal states on one register.
class MeasurementBasis {
 public:
  MeasurementBasis() = default;
  /// Throws unless elements are normalized and pairwise orthogonal (1e-10).
  explicit MeasurementBasis(std::vector<PureState> elements);

  /// Completes `first` (and any further seed vectors) to an orthonormal basis
  /// by Gram-Schmidt against the computational basis.
  static MeasurementBasis completed(const std::vector<PureState>& seeds);
  static MeasurementBasis computational(int n_qubits);

  [[nodiscard]] const std::vector<PureState>& elements() const { return elements_; }
  [[nodiscard]] const PureState& operator[](std::size_t i) const { return elements_[i]; }
  [[nodiscard]] std::size_t size() const { return elements_.size(); }
  [[nodiscard]] int n_qubits() const;
  [[nodiscard]] bool complete() const;

 private:
  std::vector<PureState> elements_;
};

[[nodiscard]] PureState tensor_product(const PureState& a, const PureState& b);
[[nodiscard]] DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);

[[nodiscard]] bool is_unitary(const Matrix& u, double tol = kUnitaryTolerance);

/// U rho U^dagger with U embedded on `targets`.  Throws on a non-unitary U.
[[nodiscard]] DensityMatrix apply_unitary(DensityMatrix rho, const Matrix& u,
                                          std::span<const int> targets);
[[nodiscard]] PureState apply_unitary(const PureState& psi, const Matrix& u,
                                      std::span<const int> targets);

/// Reduced state on `keep`, in the order given.
[[nodiscard]] DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

struct Projection {
  double probability = 0.0;
  DensityMatrix conditional;  // subnormalized; trace == probability
};

/// Projects `targets` onto `onto`; the conditional state lives on the
/// remaining qubits in ascending order.
[[nodiscard]] Projection project(const DensityMatrix& rho, const PureState& onto,
                                 std::span<const int> targets);

/// [(|00> + |11>)/sqrt2]^(x)m with pair k on qubits (k, m + k).
[[nodiscard]] PureState bell_pairs(int m);

/// <psi| rho |psi>.
[[nodiscard]] double state_fidelity(const PureState& psi, const DensityMatrix& rho);

/// Kronecker product of two operators (a on the high-order indices).
[[nodiscard]] Matrix kron(const Matrix& a, const Matrix& b);

/// Embeds an operator on `targets` of an n-qubit register.  Dense; meant for
/// tests and small registers.
[[nodiscard]] Matrix embed(const Matrix& op, std::span<const int> targets, int n_qubits);

/// Throws unless `targets` are distinct and inside [0, n).
void validate_targets(std::span<const int> targets, int n_qubits);

/// Complement of `qubits` in [0, n), ascending.
[[nodiscard]] std::vector<int> complement(std::span<const int> qubits, int n_qubits);

namespace kernel {

// In-place primitives shared by the engines.  `op` acts on `targets`; no
// unitarity assumed.
void apply_left(Matrix& rho, const Matrix& op, std::span<const int> targets, int n_qubits);
// rho <- rho op^dagger
void apply_right_adjoint(Matrix& rho, const Matrix& op, std::span<const int> targets,
                         int n_qubits);
// rho <- left rho right^dagger
void sandwich(Matrix& rho, const Matrix& left, const Matrix& right,
              std::span<const int> targets, int n_qubits);
void apply_vector(Vector& psi, const Matrix& op, std::span<const int> targets, int n_qubits);
// rho <- map(rho) for a superoperator in the conj(K) (x) K layout: index
// (column local, row local) with the column index most significant.
void apply_superoperator(Matrix& rho, const Matrix& super, std::span<const int> targets,
                         int n_qubits);

}  // namespace kernel

}  // namespace sqem
