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

#include "sqem/compiler.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace sqem {
namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Controlled swap of registers (1..m) and (m+1..2m) under qubit 0, built by
// moving bits of each basis index.
Matrix ideal_cswap(int m) {
  const int n = 2 * m + 1;
  const std::size_t dim = std::size_t{1} << n;
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const std::size_t half = std::size_t{1} << m;
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t c = i >> (2 * m);
    const std::size_t a = (i >> m) & (half - 1);
    const std::size_t b = i & (half - 1);
    const std::size_t j = c ? (c << (2 * m)) | (b << m) | a : i;
    p(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return p;
}

Matrix cnot_matrix() {
  Matrix c = Matrix::Zero(4, 4);
  c(0, 0) = c(1, 1) = c(2, 3) = c(3, 2) = 1.0;
  return c;
}

Matrix t_matrix() {
  Matrix t = Matrix::Zero(2, 2);
  t(0, 0) = std::polar(1.0, std::numbers::pi / 8);
  t(1, 1) = std::polar(1.0, -std::numbers::pi / 8);
  return t;
}

TEST(Gates, NamedMatrices) {
  GateOp t;
  t.kind = GateKind::kT;
  EXPECT_LT(max_abs(gate_matrix(t) - t_matrix()), 1e-15);
  GateOp cx;
  cx.kind = GateKind::kCnot;
  EXPECT_LT(max_abs(gate_matrix(cx) - cnot_matrix()), 1e-15);
  GateOp f;
  f.kind = GateKind::kFredkin;
  EXPECT_LT(max_abs(gate_matrix(f) - ideal_cswap(1)), 1e-15);
  for (auto kind : {GateKind::kH, GateKind::kTdg, GateKind::kX, GateKind::kZ, GateKind::kPhase,
                    GateKind::kToffoli}) {
    GateOp op;
    op.kind = kind;
    op.angle = 0.3;
    EXPECT_TRUE(is_unitary(gate_matrix(op))) << to_string(kind);
    EXPECT_EQ(gate_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW((void)gate_kind_from_string("swap"), ValidationError);
}

TEST(Circuit, RejectsBadOps) {
  GateCircuit c(2);
  EXPECT_THROW(c.add(GateKind::kCnot, {0}), ValidationError);
  EXPECT_THROW(c.add(GateKind::kCnot, {0, 2}), ValidationError);
  EXPECT_THROW(c.add(GateKind::kH, {0}, two_qubit_depolarizing(0.1)), ValidationError);
  EXPECT_THROW(c.add(GateKind::kCnot, {0, 1}, dephasing(0.9)), ValidationError);
  EXPECT_NO_THROW(c.add(GateKind::kH, {1}, dephasing(0.9)));
}

TEST(Toffoli, DecompositionIsExact) {
  const auto c = toffoli_decomposition();
  GateOp ccx;
  ccx.kind = GateKind::kToffoli;
  EXPECT_LT(max_abs(circuit_unitary(c) - gate_matrix(ccx)), 1e-12);
  EXPECT_EQ(c.two_qubit_gate_count(), 6);
}

TEST(Cswap, SingleQubitRegistersGiveFredkin) {
  const auto c = cswap_decomposition(1);
  EXPECT_EQ(c.two_qubit_gate_count(), 8);
  EXPECT_LT((circuit_unitary(c) - ideal_cswap(1)).norm(), 1e-10);
}

TEST(Cswap, TwoQubitRegisters) {
  const auto c = cswap_decomposition(2);
  EXPECT_EQ(c.two_qubit_gate_count(), 16);
  EXPECT_LT((circuit_unitary(c) - ideal_cswap(2)).norm(), 1e-10);
}

TEST(Cswap, SwapsRegistersWhenControlIsSet) {
  std::mt19937_64 rng(61);
  const auto psi = oracle::random_state(1, rng);
  const auto phi = oracle::random_state(1, rng);
  const auto in = tensor_product(tensor_product(PureState::basis(1, 1), psi), phi);
  DensityMatrix rho(in);
  const std::vector<int> map{0, 1, 2};
  apply_circuit(rho, cswap_decomposition(1), map);
  const auto expected = tensor_product(tensor_product(PureState::basis(1, 1), phi), psi);
  EXPECT_NEAR(state_fidelity(expected, rho), 1.0, 1e-12);
}

TEST(Layered, OneLayer) {
  EXPECT_LT(max_abs(layered_unitary(1) - cnot_matrix() * kron(t_matrix(), t_matrix())), 1e-15);
}

TEST(Layered, CompositionAndCircuitForm) {
  const Matrix one = layered_unitary(1);
  EXPECT_LT(max_abs(layered_unitary(2) - one * one), 1e-14);
  for (int n : {1, 3, 5}) {
    EXPECT_LT(max_abs(circuit_unitary(layered_circuit(n)) - layered_unitary(n)), 1e-13);
  }
  EXPECT_THROW((void)layered_unitary(0), ValidationError);
}

TEST(Layered, NoisyCircuitMatchesDenseOracle) {
  const auto noise = two_qubit_depolarizing(0.05);
  const auto circuit = layered_circuit(2, noise);
  std::mt19937_64 rng(62);
  const auto rho = oracle::random_density(2, rng);
  DensityMatrix out = rho;
  const std::vector<int> map{0, 1};
  apply_circuit(out, circuit, map);

  Matrix expected = rho.entries();
  const Matrix layer = cnot_matrix() * kron(t_matrix(), t_matrix());
  for (int i = 0; i < 2; ++i) {
    expected = layer * expected * layer.adjoint();
    expected = oracle::apply_channel_dense(noise, expected, {0, 1}, 2);
  }
  EXPECT_LT(max_abs(out.entries() - expected), 1e-12);
}

TEST(Depolarizing, TwoQubitStrength) {
  const auto ch = two_qubit_depolarizing(0.15);
  EXPECT_EQ(ch.size(), 16U);
  EXPECT_NEAR(no_error_probability(ch), 0.85, 1e-15);
  EXPECT_TRUE(validate(ch).ok);
  EXPECT_THROW((void)two_qubit_depolarizing(1.5), ValidationError);
}

ProtocolSpec identity_spec(double p) {
  const double s = 1.0 / std::sqrt(2.0);
  return make_spec(Matrix::Identity(2, 2), dephasing(p), 2, choi_input(1),
                   explicit_register(PureState(Vector{{s, s}})));
}

TEST(NoisyProtocol, ZeroEpsilonMatchesIdealSwaps) {
  const auto spec = identity_spec(0.9);
  const auto noisy = run_noisy_protocol(spec, NoisyProtocolOptions{});
  const auto ideal = run_bruteforce(spec);
  ASSERT_EQ(noisy.records.size(), ideal.size());
  for (std::size_t i = 0; i < ideal.size(); ++i) {
    EXPECT_LT(max_abs(noisy.records[i].probability * noisy.records[i].state.entries() -
                      ideal[i].probability * ideal[i].state.entries()),
              1e-10);
  }
  const auto key = constructive_outcome(spec);
  const auto fm = figures_of_merit(spec, ideal, std::span<const OutcomeKey>(&key, 1));
  EXPECT_NEAR(noisy.merit.P, fm.P, 1e-10);
  EXPECT_NEAR(noisy.merit.R, fm.R, 1e-9);
}

TEST(NoisyProtocol, NoiselessEverythingIsTheSentinel) {
  const auto spec = make_choi_spec(layered_unitary(1), identity_channel(2), 2, choi_input(2));
  const auto res = run_noisy_protocol(spec, NoisyProtocolOptions{layered_circuit(1), 0.0});
  EXPECT_NEAR(res.merit.P, 1.0, 1e-10);
  EXPECT_TRUE(res.merit.R_sentinel);
  EXPECT_EQ(res.merit.R, 1.0);
}

TEST(NoisyProtocol, ContinuousAtZeroEpsilon) {
  const auto spec = identity_spec(0.9);
  const auto ideal = run_noisy_protocol(spec, NoisyProtocolOptions{});
  const auto tiny = run_noisy_protocol(spec, NoisyProtocolOptions{std::nullopt, 1e-6});
  EXPECT_NEAR(tiny.merit.P, ideal.merit.P, 1e-3);
  EXPECT_NEAR(tiny.merit.R, ideal.merit.R, 1e-3);
}

TEST(NoisyProtocol, AdvantageWindowExists) {
  bool found = false;
  for (double p = 0.98; p >= 0.7; p -= 0.02) {
    const auto res = run_noisy_protocol(identity_spec(p), NoisyProtocolOptions{std::nullopt, 0.01});
    found = found || res.merit.R > 1.0;
  }
  EXPECT_TRUE(found);
}

TEST(NoisyProtocol, NoisyCircuitTargetUsesCircuitNoiseForBaseline) {
  const double eps = 0.02;
  const auto circuit = layered_circuit(1, two_qubit_depolarizing(eps));
  const auto spec = make_choi_spec(layered_unitary(1), identity_channel(2), 2, choi_input(2));
  const auto res = run_noisy_protocol(spec, NoisyProtocolOptions{circuit, 0.0});
  // One depolarizing cNOT: F0 is its no-error probability.
  EXPECT_NEAR(res.merit.F0_CJ, 1.0 - eps, 1e-12);
  EXPECT_GT(res.merit.F_CJ, res.merit.F0_CJ);
}

TEST(NoisyProtocol, RejectsMismatchedTarget) {
  const auto spec = make_choi_spec(layered_unitary(2), identity_channel(2), 2, choi_input(2));
  EXPECT_THROW((void)run_noisy_protocol(spec, NoisyProtocolOptions{layered_circuit(1), 0.0}),
               ValidationError);
  const auto four = make_choi_spec(Matrix::Identity(2, 2), dephasing(0.9), 4, choi_input(1));
  EXPECT_THROW((void)run_noisy_protocol(four, NoisyProtocolOptions{}), ValidationError);
}

TEST(Json, CircuitRoundTrip) {
  GateCircuit c(3);
  c.add(GateKind::kH, {0});
  GateOp ph;
  ph.kind = GateKind::kPhase;
  ph.targets = {2};
  ph.angle = 0.123456789012345678;
  c.add(ph);
  c.add(GateKind::kCnot, {0, 1}, two_qubit_depolarizing(0.01));
  c.add(GateKind::kFredkin, {2, 0, 1});
  const auto back = circuit_from_json(nlohmann::json::parse(circuit_to_json(c).dump()));
  ASSERT_EQ(back.ops().size(), 4U);
  EXPECT_EQ(back.n_qubits(), 3);
  EXPECT_EQ(back.ops()[1].angle, ph.angle);
  ASSERT_TRUE(back.ops()[2].noise.has_value());
  EXPECT_NEAR(no_error_probability(*back.ops()[2].noise), 0.99, 1e-15);
  EXPECT_LT(max_abs(circuit_unitary(back) - circuit_unitary(c)), 1e-15);
}

TEST(Json, CircuitErrors) {
  EXPECT_THROW((void)circuit_from_json(nlohmann::json::parse(R"([{"gate": "swap", "targets": [0, 1]}])")),
               ValidationError);
  EXPECT_THROW((void)circuit_from_json(nlohmann::json::parse(R"([{"gate": "cnot", "targets": [0]}])")),
               ValidationError);
  EXPECT_THROW((void)circuit_from_json(
                   nlohmann::json::parse(R"({"n_qubits": 1, "gates": [{"gate": "cnot", "targets": [0, 1]}]})")),
               ValidationError);
  const auto c = circuit_from_json(
      nlohmann::json::parse(R"({"n_qubits": 3, "gates": [{"gate": "x", "targets": [0]}]})"));
  EXPECT_EQ(c.n_qubits(), 3);
}

}  // namespace
}  // namespace sqem
