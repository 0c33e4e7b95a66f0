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

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "sqem/protocol.hpp"

namespace sqem {
namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix cnot() {
  Matrix c = Matrix::Zero(4, 4);
  c(0, 0) = c(1, 1) = c(2, 3) = c(3, 2) = 1.0;
  return c;
}

// Unnormalized comparison so that zero-probability outcomes count too.
double deviation(const OutcomeRecord& a, const OutcomeRecord& b) {
  return max_abs(a.probability * a.state.entries() - b.probability * b.state.entries());
}

template <class Fn>
void expect_engines_agree(const ProtocolSpec& spec, Fn closed, double tol) {
  const auto brute = run_bruteforce(spec);
  for (const auto& rec : brute) {
    const auto cf = closed(spec, rec.key);
    EXPECT_EQ(cf.key, rec.key);
    EXPECT_LT(deviation(rec, cf), tol) << rec.key.to_string();
    EXPECT_NEAR(cf.probability, rec.probability, tol) << rec.key.to_string();
  }
}

TEST(ClosedFormD2, NoiselessPlusOutcome) {
  std::mt19937_64 rng(41);
  const Matrix u = oracle::random_unitary(2, rng);
  const auto psi = oracle::random_state(1, rng);
  const auto spec = make_spec(u, identity_channel(1), 2, explicit_register(psi),
                              explicit_register(oracle::random_state(1, rng)));
  const auto rec = closed_form_d2(spec, constructive_outcome(spec));
  EXPECT_NEAR(rec.probability, 1.0, 1e-12);
  const Vector out = u * psi.amplitudes();
  EXPECT_LT(max_abs(rec.state.entries() - out * out.adjoint()), 1e-12);
}

TEST(ClosedFormD2, IdentityComponentReduction) {
  // With beta_j = sqrt(p) delta_j0 the "+" state is proportional to
  // E_U(psi) + p U psi U^dagger.
  std::mt19937_64 rng(42);
  const Matrix u = oracle::random_unitary(2, rng);
  const auto psi = oracle::random_state(1, rng);
  const double p = 0.8;
  const auto ch = depolarizing(p);
  const auto spec = make_choi_spec(u, ch, 2, explicit_register(psi));
  const auto rec = closed_form_d2(spec, constructive_outcome(spec));

  const Vector out = u * psi.amplitudes();
  const Matrix incoherent =
      oracle::apply_channel_dense(ch, out * out.adjoint(), {0}, 1);
  Matrix expected = incoherent + p * out * out.adjoint();
  expected /= expected.trace().real();
  EXPECT_LT(max_abs(rec.state.entries() - expected), 1e-12);
}

TEST(ClosedFormD2, RejectsOtherBranchCounts) {
  const auto spec = make_choi_spec(Matrix::Identity(2, 2), dephasing(0.9), 4, choi_input(1));
  EXPECT_THROW((void)closed_form_d2(spec, constructive_outcome(spec)), ValidationError);
  const auto two = make_choi_spec(Matrix::Identity(2, 2), dephasing(0.9), 2, choi_input(1));
  EXPECT_THROW((void)closed_form_d2(two, OutcomeKey{2, {0}}), ValidationError);
  EXPECT_THROW((void)closed_form_d2(two, OutcomeKey{0, {0, 0}}), ValidationError);
}

TEST(ClosedFormD2, CnotDephasingChoiAuxiliary) {
  const auto spec =
      make_choi_spec(cnot(), tensor_power(dephasing(0.9), 2), 2, choi_input(2));
  expect_engines_agree(spec, closed_form_d2, 1e-10);
}

TEST(ClosedFormD2, MatchesBruteForceOnRandomSingleQubitInstances) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto spec = make_spec(oracle::random_unitary(2, rng),
                                oracle::random_pauli_channel(1, rng, 0.0), 2, choi_input(1),
                                explicit_register(oracle::random_state(1, rng)));
    expect_engines_agree(spec, closed_form_d2, 1e-10);
  }
}

TEST(ClosedFormD2, MatchesBruteForceOnRandomTwoQubitInstances) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = make_spec(oracle::random_unitary(4, rng),
                                oracle::random_pauli_channel(2, rng, 0.0), 2, choi_input(2),
                                explicit_register(oracle::random_state(2, rng)));
    expect_engines_agree(spec, closed_form_d2, 1e-10);
  }
}

TEST(ClosedFormD2, MatchesBruteForceForNonPauliChannels) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const double gamma = std::uniform_real_distribution<>(0.0, 1.0)(rng);
    const auto spec = make_spec(oracle::random_unitary(2, rng), amplitude_damping(gamma), 2,
                                explicit_register(oracle::random_state(1, rng)),
                                explicit_register(oracle::random_state(1, rng)));
    expect_engines_agree(spec, closed_form_d2, 1e-10);
  }
}

TEST(ClosedFormGeneral, AgreesWithTwoBranchForm) {
  std::mt19937_64 rng(46);
  const auto spec = make_spec(oracle::random_unitary(2, rng),
                              oracle::random_pauli_channel(1, rng, 0.0), 2, choi_input(1),
                              explicit_register(oracle::random_state(1, rng)));
  for (const auto& key : all_outcome_keys(spec)) {
    EXPECT_LT(deviation(closed_form_d2(spec, key), closed_form_general(spec, key)), 1e-12);
  }
}

TEST(ClosedFormGeneral, ThreeBranchesDephasingPlus) {
  const double s = 1.0 / std::sqrt(2.0);
  const auto plus = PureState(Vector{{s, s}});
  const auto spec = make_spec(Matrix::Identity(2, 2), dephasing(0.8), 3, choi_input(1),
                              explicit_register(plus));
  expect_engines_agree(spec, closed_form_general, 1e-10);
}

TEST(ClosedFormGeneral, MatchesBruteForceAtThreeAndFourBranches) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3 + trial % 2;
    const auto ch = trial % 3 == 0 ? amplitude_damping(0.3)
                                   : oracle::random_pauli_channel(1, rng, 0.0);
    const auto spec = make_spec(oracle::random_unitary(2, rng), ch, d, choi_input(1),
                                explicit_register(oracle::random_state(1, rng)));
    expect_engines_agree(spec, closed_form_general, 1e-10);
  }
}

TEST(ClosedFormGeneral, ChoiAuxiliaryAtFourBranches) {
  std::mt19937_64 rng(48);
  const auto spec = make_choi_spec(oracle::random_unitary(2, rng),
                                   oracle::random_pauli_channel(1, rng, 0.5), 4, choi_input(1));
  // 10-qubit register, 256 outcomes.
  expect_engines_agree(spec, closed_form_general, 1e-10);
}

TEST(ClosedFormGeneral, IdentityComponentLimit) {
  for (int d = 1; d <= 8; d *= 2) {
    const auto spec = make_choi_spec(Matrix::Identity(2, 2), dephasing(0.9), d, choi_input(1));
    const auto rec = closed_form_general(spec, constructive_outcome(spec));
    EXPECT_NEAR(rec.fidelity, analytic_P_R(0.9, d).F_CJ, 1e-12) << "d = " << d;
    EXPECT_NEAR(rec.probability, analytic_P_R(0.9, d).P, 1e-12) << "d = " << d;
  }
  // Approaches the ideal gate as d grows.
  const auto big = make_choi_spec(Matrix::Identity(2, 2), dephasing(0.9), 16, choi_input(1));
  EXPECT_GT(closed_form_general(big, constructive_outcome(big)).fidelity, 0.99);
}

TEST(ClosedFormGeneral, ProbabilitiesSumToOne) {
  std::mt19937_64 rng(49);
  const auto spec = make_spec(oracle::random_unitary(4, rng),
                              oracle::random_pauli_channel(2, rng, 0.2), 4, choi_input(2),
                              explicit_register(oracle::random_state(2, rng)));
  const auto eval = evaluate_outcomes(spec, Engine::kAuto);
  EXPECT_EQ(eval.engine_used, Engine::kClosedForm);
  double total = 0.0;
  for (const auto& r : eval.records) total += r.probability;
  EXPECT_NEAR(total, 1.0, 1e-9);
}

}  // namespace
}  // namespace sqem
