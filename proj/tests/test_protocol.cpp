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

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace sqem {
namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix cnot() {
  Matrix c = Matrix::Zero(4, 4);
  c(0, 0) = c(1, 1) = c(2, 3) = c(3, 2) = 1.0;
  return c;
}

Matrix t_gate() {
  Matrix t = Matrix::Identity(2, 2);
  t(1, 1) = std::polar(1.0, std::numbers::pi / 4);
  return t;
}

double total_probability(const std::vector<OutcomeRecord>& records) {
  double p = 0.0;
  for (const auto& r : records) p += r.probability;
  return p;
}

const OutcomeRecord& find(const std::vector<OutcomeRecord>& records, const OutcomeKey& key) {
  for (const auto& r : records) {
    if (r.key == key) return r;
  }
  throw std::runtime_error("missing outcome " + key.to_string());
}

// State fidelity of the constructive outcome against the ideal output, which
// is the CJ fidelity when the input is in Choi mode.
double constructive_fidelity(const ProtocolSpec& spec) {
  const auto records = run_bruteforce(spec);
  const auto key = constructive_outcome(spec);
  return cj_fidelity(spec, records, std::span<const OutcomeKey>(&key, 1));
}

TEST(Spec, Validation) {
  EXPECT_THROW((void)make_spec(Matrix::Identity(4, 4), dephasing(0.9), 2, choi_input(1),
                               explicit_register(PureState::basis(1, 0))),
               ValidationError);
  EXPECT_THROW((void)make_spec(Matrix::Identity(2, 2), dephasing(0.9), 0, choi_input(1),
                               explicit_register(PureState::basis(1, 0))),
               ValidationError);
  Matrix bad(2, 2);
  bad << 1, 1, 0, 1;
  EXPECT_THROW((void)make_spec(bad, dephasing(0.9), 2, choi_input(1),
                               explicit_register(PureState::basis(1, 0))),
               ValidationError);
}

TEST(Spec, DefaultBasisStartsAtRotatedAuxiliary) {
  std::mt19937_64 rng(31);
  const Matrix u = oracle::random_unitary(2, rng);
  const auto phi0 = oracle::random_state(1, rng);
  const auto spec = make_spec(u, dephasing(0.9), 2, choi_input(1), explicit_register(phi0));
  EXPECT_LT((spec.aux_basis[0].amplitudes() - u * phi0.amplitudes()).norm(), 1e-12);
  EXPECT_TRUE(spec.aux_basis.complete());
  EXPECT_NEAR(omega_metrics(spec).omega2, 1.0, 1e-12);
}

TEST(ChoiAuxiliary, IdentityGivesBellBasis) {
  const auto choi = choi_auxiliary(Matrix::Identity(2, 2), 1);
  ASSERT_EQ(choi.basis.size(), 4U);
  const double s = 1.0 / std::sqrt(2.0);
  // I, X, Y, Z on the first half of Phi+.
  EXPECT_LT((choi.basis[0].amplitudes() - Vector{{s, 0, 0, s}}).norm(), 1e-15);
  EXPECT_LT((choi.basis[1].amplitudes() - Vector{{0, s, s, 0}}).norm(), 1e-15);
  EXPECT_LT((choi.basis[3].amplitudes() - Vector{{s, 0, 0, -s}}).norm(), 1e-15);
  EXPECT_NEAR(std::abs(choi.basis[2].amplitudes()(1)), s, 1e-15);
  EXPECT_TRUE(choi.basis.complete());
}

TEST(ChoiAuxiliary, OverlapsIsolateTheIdentityComponent) {
  const auto spec = make_choi_spec(t_gate(), dephasing(0.9), 2, choi_input(1));
  const auto ov = branch_overlaps(spec, spec.aux_basis[0]);
  ASSERT_EQ(ov.beta.size(), 2);
  EXPECT_NEAR(std::abs(ov.beta(0) - std::sqrt(0.9)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(ov.beta(1)), 0.0, 1e-12);
  EXPECT_NEAR(ov.A, 0.9, 1e-12);
}

TEST(ChoiAuxiliary, OmegaOneForDepolarizedT) {
  const auto spec = make_choi_spec(t_gate(), depolarizing(0.9), 2, choi_input(1));
  const auto om = omega_metrics(spec);
  ASSERT_TRUE(om.omega1.has_value());
  EXPECT_NEAR(*om.omega1, 1.0, 1e-12);
  EXPECT_NEAR(om.omega2, 1.0, 1e-12);
}

TEST(ChoiAuxiliary, OmegaOneForRandomPauliChannels) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 2;
    const auto spec = make_choi_spec(oracle::random_unitary(1 << m, rng),
                                     oracle::random_pauli_channel(m, rng, 0.3), 2, choi_input(m));
    const auto om = omega_metrics(spec);
    ASSERT_TRUE(om.omega1.has_value());
    EXPECT_NEAR(*om.omega1, 1.0, 1e-12);
  }
}

TEST(OmegaMetrics, CnotOnOnesIsFullySensitive) {
  const auto ch = tensor_power(dephasing(0.8), 2);
  const auto phi0 = PureState::basis(2, 3);
  const auto phi_f = PureState::basis(2, 2);
  const auto om = omega_metrics(cnot(), ch, phi0, phi_f);
  ASSERT_TRUE(om.omega1.has_value());
  EXPECT_NEAR(*om.omega1, 0.0, 1e-12);
  EXPECT_NEAR(om.omega2, 1.0, 1e-12);
}

TEST(OmegaMetrics, CnotOnPlusPlusIsInsensitive) {
  const auto ch = tensor_power(dephasing(0.8), 2);
  const auto pp = PureState(Vector::Constant(4, 0.5));
  const auto om = omega_metrics(cnot(), ch, pp, pp);
  ASSERT_TRUE(om.omega1.has_value());
  EXPECT_NEAR(*om.omega1, 1.0, 1e-12);
  EXPECT_NEAR(om.omega2, 1.0, 1e-12);
}

TEST(OmegaMetrics, OrthogonalTargetAndNoiselessChannel) {
  const auto om = omega_metrics(Matrix::Identity(2, 2), dephasing(0.9), PureState::basis(1, 0),
                                PureState::basis(1, 1));
  EXPECT_NEAR(om.omega2, 0.0, 1e-15);
  const auto clean = omega_metrics(Matrix::Identity(2, 2), identity_channel(1),
                                   PureState::basis(1, 0), PureState::basis(1, 0));
  EXPECT_FALSE(clean.omega1.has_value());
  EXPECT_NEAR(clean.omega2, 1.0, 1e-15);
}

TEST(OmegaMetrics, StayInUnitIntervalForRandomChannels) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix u = oracle::random_unitary(2, rng);
    const auto ch = trial % 2 ? oracle::random_pauli_channel(1, rng, 0.0)
                              : amplitude_damping(std::uniform_real_distribution<>(0, 1)(rng));
    const auto om = omega_metrics(u, ch, oracle::random_state(1, rng), oracle::random_state(1, rng));
    ASSERT_TRUE(om.omega1.has_value());
    EXPECT_GE(*om.omega1, 0.0);
    EXPECT_LE(*om.omega1, 1.0);
    EXPECT_GE(om.omega2, 0.0);
    EXPECT_LE(om.omega2, 1.0);
  }
}

TEST(OmegaMetrics, GaugeInvariant) {
  std::mt19937_64 rng(34);
  const auto ch = oracle::random_pauli_channel(1, rng, 0.4);
  const Matrix u = oracle::random_unitary(2, rng);
  const auto phi0 = oracle::random_state(1, rng);
  const auto phi_f = oracle::random_state(1, rng);
  const auto ref = omega_metrics(u, ch, phi0, phi_f);
  const auto mixed = remix(KrausChannel(ch.operators()), oracle::random_unitary(
                                                             static_cast<int>(ch.size()), rng));
  const auto again = omega_metrics(u, mixed, phi0, phi_f);
  EXPECT_NEAR(*ref.omega1, *again.omega1, 1e-10);
}

TEST(BruteForce, SingleBranchIsTheIncoherentMap) {
  std::mt19937_64 rng(35);
  const Matrix u = oracle::random_unitary(2, rng);
  const auto ch = depolarizing(0.8);
  const auto spec = make_spec(u, ch, 1, choi_input(1), explicit_register(PureState::basis(1, 0)));
  const auto records = run_bruteforce(spec);
  ASSERT_EQ(records.size(), 1U);
  EXPECT_NEAR(records[0].probability, 1.0, 1e-12);
  const std::vector<int> second{1};
  const auto expected = noisy_gate(u, ch)(DensityMatrix(bell_pairs(1)), second);
  EXPECT_LT(max_abs(records[0].state.entries() - expected.entries()), 1e-12);
}

TEST(BruteForce, NoiselessConstructiveOutcomeIsCertain) {
  std::mt19937_64 rng(36);
  const Matrix u = oracle::random_unitary(2, rng);
  const auto psi = oracle::random_state(1, rng);
  const auto spec = make_spec(u, identity_channel(1), 2, explicit_register(psi),
                              explicit_register(oracle::random_state(1, rng)));
  const auto records = run_bruteforce(spec);
  const auto& plus = find(records, constructive_outcome(spec));
  EXPECT_NEAR(plus.probability, 1.0, 1e-12);
  const Vector out = u * psi.amplitudes();
  EXPECT_LT(max_abs(plus.state.entries() - out * out.adjoint()), 1e-12);
  EXPECT_NEAR(plus.fidelity, 1.0, 1e-12);
}

TEST(BruteForce, ProbabilitiesSumToOne) {
  std::mt19937_64 rng(37);
  for (int d : {1, 2, 3, 4}) {
    const auto spec = make_spec(oracle::random_unitary(2, rng),
                                amplitude_damping(0.3), d, choi_input(1),
                                explicit_register(oracle::random_state(1, rng)));
    const auto records = run_bruteforce(spec);
    EXPECT_EQ(records.size(), all_outcome_keys(spec).size());
    EXPECT_NEAR(total_probability(records), 1.0, 1e-9) << "d = " << d;
    for (const auto& r : records) {
      EXPECT_GE(r.fidelity, 0.0);
      EXPECT_LE(r.fidelity, 1.0);
    }
  }
}

TEST(BruteForce, RejectsOversizeRegister) {
  // 3 control + 8 registers of 2 qubits exceeds the ceiling.
  const auto spec = make_spec(Matrix::Identity(4, 4), tensor_power(dephasing(0.9), 2), 8,
                              explicit_register(PureState::basis(2, 0)),
                              explicit_register(PureState::basis(2, 0)));
  EXPECT_THROW((void)run_bruteforce(spec), ValidationError);
}

TEST(CjFidelity, NoiselessIsOne) {
  const auto spec = make_choi_spec(cnot(), identity_channel(2), 2, choi_input(2));
  const auto records = run_bruteforce(spec);
  std::vector<OutcomeKey> all;
  for (const auto& r : records) all.push_back(r.key);
  EXPECT_NEAR(cj_fidelity(spec, records, all), 1.0, 1e-12);
  EXPECT_THROW((void)cj_fidelity(spec, records, {}), ValidationError);
}

TEST(CjFidelity, IncoherentCnotUnderDephasing) {
  const auto spec = make_spec(cnot(), tensor_power(dephasing(0.9), 2), 1, choi_input(2),
                              explicit_register(PureState::basis(2, 0)));
  EXPECT_NEAR(constructive_fidelity(spec), 0.81, 1e-12);
}

TEST(CjFidelity, TwoBranchesWithChoiAuxiliary) {
  const auto spec = make_choi_spec(t_gate(), dephasing(0.9), 2, choi_input(1));
  EXPECT_NEAR(constructive_fidelity(spec), 2 * 0.9 / 1.9, 1e-12);
}

TEST(FiguresOfMerit, Examples) {
  const auto single = make_spec(t_gate(), dephasing(0.9), 1, choi_input(1),
                                explicit_register(PureState::basis(1, 0)));
  auto records = run_bruteforce(single);
  auto key = constructive_outcome(single);
  auto fm = figures_of_merit(single, records, std::span<const OutcomeKey>(&key, 1));
  EXPECT_NEAR(fm.P, 1.0, 1e-12);
  EXPECT_NEAR(fm.R, 1.0, 1e-10);

  const auto two = make_choi_spec(t_gate(), dephasing(0.9), 2, choi_input(1));
  records = run_bruteforce(two);
  key = constructive_outcome(two);
  fm = figures_of_merit(two, records, std::span<const OutcomeKey>(&key, 1));
  EXPECT_NEAR(fm.P, 0.855, 1e-12);
  EXPECT_NEAR(fm.R, 1.9, 1e-10);

  const auto clean = make_choi_spec(t_gate(), identity_channel(1), 2, choi_input(1));
  records = run_bruteforce(clean);
  key = constructive_outcome(clean);
  fm = figures_of_merit(clean, records, std::span<const OutcomeKey>(&key, 1));
  EXPECT_NEAR(fm.P, 1.0, 1e-12);
  EXPECT_EQ(fm.R, 1.0);
  EXPECT_TRUE(fm.R_sentinel);
}

TEST(FiguresOfMerit, SentinelConventions) {
  EXPECT_TRUE(merit_from(1.0, 1.0, 0.9).R_sentinel);
  EXPECT_TRUE(std::isinf(merit_from(1.0, 1.0, 0.9).R));
  EXPECT_EQ(merit_from(1.0, 1.0, 1.0).R, 1.0);
  EXPECT_NEAR(merit_from(0.5, 0.95, 0.9).R, 2.0, 1e-12);
}

TEST(AnalyticPR, Examples) {
  auto a = analytic_P_R(0.9, 2);
  EXPECT_NEAR(a.P, 0.855, 1e-12);
  EXPECT_NEAR(a.R, 1.9, 1e-12);
  a = analytic_P_R(1.0, 3);
  EXPECT_NEAR(a.P, 1.0, 1e-15);
  EXPECT_NEAR(a.R, 3.0, 1e-15);
  EXPECT_NEAR(a.F_CJ, 1.0, 1e-15);
  a = analytic_P_R(0.9, 4);
  EXPECT_NEAR(a.P, std::pow(0.9, 4) * (1 + (1 / 0.9 - 1) / 4), 1e-12);
  EXPECT_NEAR(a.P, 0.674325, 1e-6);
  EXPECT_NEAR(a.R, 3.7, 1e-12);
  EXPECT_THROW((void)analytic_P_R(0.0, 2), ValidationError);
  EXPECT_THROW((void)analytic_P_R(0.5, 0), ValidationError);
}

TEST(AnalyticPR, MatchesBruteForceAtFourBranches) {
  const auto spec = make_choi_spec(t_gate(), depolarizing(0.9), 4, choi_input(1));
  const auto records = run_bruteforce(spec);
  const auto key = constructive_outcome(spec);
  const auto fm = figures_of_merit(spec, records, std::span<const OutcomeKey>(&key, 1));
  const auto a = analytic_P_R(0.9, 4);
  EXPECT_NEAR(fm.P, a.P, 1e-10);
  EXPECT_NEAR(fm.R, a.R, 1e-9);
  EXPECT_NEAR(fm.F_CJ, a.F_CJ, 1e-10);
}

TEST(Properties, FidelityIncreasesWithBranchCount) {
  for (double p : {0.5, 0.7, 0.9}) {
    double previous = -1.0;
    for (int d = 1; d <= 4; ++d) {
      const auto spec = make_choi_spec(t_gate(), dephasing(p), d, choi_input(1));
      const double f = constructive_fidelity(spec);
      EXPECT_GT(f, previous) << "p_ne = " << p << ", d = " << d;
      EXPECT_NEAR(f, analytic_P_R(p, d).F_CJ, 1e-10);
      previous = f;
    }
  }
}

TEST(Properties, ProbabilisticSchemeIsAdvantageousForPauliChannels) {
  std::mt19937_64 rng(38);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix u = oracle::random_unitary(2, rng);
    const auto ch = oracle::random_pauli_channel(1, rng, 0.5);
    const auto spec =
        make_spec(u, ch, 2, choi_input(1), explicit_register(oracle::random_state(1, rng)));
    const auto records = evaluate_outcomes(spec, Engine::kClosedForm).records;
    const auto key = constructive_outcome(spec);
    const auto fm = figures_of_merit(spec, records, std::span<const OutcomeKey>(&key, 1));
    EXPECT_GE(fm.R, 1.0 - 1e-9) << "trial " << trial;
  }
}

TEST(Properties, AdvantageCanFailBelowHalfNoErrorProbability) {
  // phi0 = |0> is fully sensitive to dephasing; at p_ne = 0.2 the "+" outcome
  // has F = 0.24 / 1.68 < p_ne.
  const auto spec = make_spec(Matrix::Identity(2, 2), dephasing(0.2), 2, choi_input(1),
                              explicit_register(PureState::basis(1, 0)));
  const auto records = run_bruteforce(spec);
  const auto key = constructive_outcome(spec);
  const auto fm = figures_of_merit(spec, records, std::span<const OutcomeKey>(&key, 1));
  EXPECT_NEAR(fm.F_CJ, 0.24 / 1.68, 1e-12);
  EXPECT_NEAR(fm.R, 0.8 * 7.0 / 6.0, 1e-12);
}

TEST(Properties, CjFidelityLowerBoundsPureInputs) {
  std::mt19937_64 rng(39);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix u = oracle::random_unitary(2, rng);
    const auto ch = oracle::random_pauli_channel(1, rng, 0.3);
    const auto cj = make_choi_spec(u, ch, 2, choi_input(1));
    const double f_cj = constructive_fidelity(cj);

    const auto psi = oracle::random_state(1, rng);
    auto spec = make_choi_spec(u, ch, 2, explicit_register(psi));
    const auto records = run_bruteforce(spec);
    const auto& plus = find(records, constructive_outcome(spec));
    EXPECT_GE(plus.fidelity, f_cj - 1e-9) << "trial " << trial;
  }
}

}  // namespace
}  // namespace sqem
