// Copyright 2026 The coherlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "coherlab/measures.hpp"
#include "coherlab/states.hpp"

namespace coherlab {
namespace {

DensityMatrix bell() { return bell_states().front().density(); }

// Zeroes entries whose indices differ on any of `subs`, by explicit digit comparison.
ComplexMatrix dephase_oracle(const ComplexMatrix& m, const Dims& dims, const Subsystems& subs) {
  ComplexMatrix out = m;
  const auto n = static_cast<std::size_t>(m.rows());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t rr = r, cc = c;
      for (std::size_t k = dims.size(); k-- > 0;) {
        const bool differs = rr % dims[k] != cc % dims[k];
        if (differs && std::find(subs.begin(), subs.end(), k) != subs.end()) {
          out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 0.0;
        }
        rr /= dims[k];
        cc /= dims[k];
      }
    }
  }
  return out;
}

TEST(Bipartition, ParsesBothSidesAndComplements) {
  const Bipartition s = Bipartition::parse("A=0;B=1,2", 3);
  EXPECT_EQ(s.a(), (Subsystems{0}));
  EXPECT_EQ(s.b(), (Subsystems{1, 2}));
  EXPECT_EQ(Bipartition::parse("B=1", 3).a(), (Subsystems{0, 2}));
  EXPECT_EQ(Bipartition::parse("A=0,2", 3).b(), (Subsystems{1}));
  EXPECT_EQ(s.to_string(), "A=0;B=1,2");
  EXPECT_EQ(Bipartition::last_is_b(3).b(), (Subsystems{2}));
}

TEST(Bipartition, RejectsMalformedSplits) {
  for (const char* text : {"", "C=1", "A=x", "A=0;B=0", "A=0,1", "B=3"}) {
    EXPECT_THROW(Bipartition::parse(text, 2), Error) << text;
  }
  try {
    Bipartition::parse("A=zz", 2);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
  }
  EXPECT_THROW(Bipartition(2, {0}, {}), Error);
  EXPECT_THROW(Bipartition(3, {0}, {1}), Error);
}

TEST(Dephase, DiagonalStateUnchanged) {
  const DensityMatrix rho = random_qi_state(Dims{2, 2}, 1);
  const DensityMatrix diag = dephase(rho);
  EXPECT_LE(max_abs(dephase(diag).matrix() - diag.matrix()), 0.0);
}

TEST(Dephase, PsiTwoBecomesMaximallyMixed) {
  EXPECT_LE(max_abs(dephase(maximally_coherent(2).density()).matrix() - identity(2) / 2.0), 1e-15);
}

TEST(Dephase, BellOnBobKeepsClassicalCorrelation) {
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 0) = 0.5;
  expected(3, 3) = 0.5;
  const DensityMatrix out = dephase(bell(), {1});
  EXPECT_LE(max_abs(out.matrix() - expected), 1e-15);
  EXPECT_LE(max_abs(out.matrix() - dephase_oracle(bell().matrix(), {2, 2}, {1})), 0.0);
}

TEST(Dephase, MatchesIndexZeroingOnRandomTripartite) {
  const DensityMatrix rho = random_density(Dims{2, 3, 2}, 4, 3);
  for (const Subsystems& s : {Subsystems{}, Subsystems{0}, Subsystems{1, 2}, Subsystems{0, 1, 2}}) {
    EXPECT_LE(max_abs(dephase(rho, s).matrix() - dephase_oracle(rho.matrix(), rho.dims(), s)), 0.0);
  }
  EXPECT_THROW(dephase(rho, {3}), Error);
}

TEST(Dephase, IsIdempotentAndTracePreserving) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const DensityMatrix rho = random_density(Dims{3, 2}, 3, rng);
    const DensityMatrix once = dephase(rho, {0});
    EXPECT_LE(max_abs(dephase(once, {0}).matrix() - once.matrix()), 1e-12);
    EXPECT_NEAR(once.matrix().trace().real(), 1.0, 1e-12);
  }
}

TEST(CoherenceMeasures, PsiTwoHasUnitCoherence) {
  EXPECT_NEAR(relative_entropy_of_coherence(maximally_coherent(2).density()), 1.0, 1e-12);
  EXPECT_NEAR(distillable_coherence(maximally_coherent(2).density()), 1.0, 1e-12);
}

TEST(CoherenceMeasures, DiagonalStatesAreIncoherent) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    EXPECT_EQ(relative_entropy_of_coherence(dephase(random_density(Dims{4}, 4, s))), 0.0);
  }
}

TEST(CoherenceMeasures, HalfPsiTwoHalfZero) {
  // rho = [[3/4, 1/4], [1/4, 1/4]]: eigenvalues (1 +- 1/sqrt 2)/2, diagonal (3/4, 1/4).
  const DensityMatrix rho(0.5 * maximally_coherent(2).projector() +
                          0.5 * outer(basis_vector(2, 0), basis_vector(2, 0)));
  const double l = (1.0 + 1.0 / std::sqrt(2.0)) / 2.0;
  const double expected = binary_entropy(0.25) - binary_entropy(l);
  EXPECT_NEAR(relative_entropy_of_coherence(rho), expected, 1e-12);
  EXPECT_NEAR(expected, 0.21040208776627667, 1e-15);

  // The closest incoherent state is the dephased one; a dense grid agrees.
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 20000; ++k) {
    const double q = k / 20000.0;
    ComplexMatrix sigma = ComplexMatrix::Zero(2, 2);
    sigma(0, 0) = q;
    sigma(1, 1) = 1.0 - q;
    best = std::min(best, relative_entropy(rho, DensityMatrix(sigma)));
  }
  EXPECT_NEAR(best, expected, 1e-6);
  EXPECT_GE(best, expected - 1e-12);
}

TEST(CoherenceMeasures, EqualsDivergenceToDephased) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const DensityMatrix rho = random_density(Dims{3}, 1 + static_cast<std::size_t>(t % 3), rng);
    EXPECT_NEAR(relative_entropy_of_coherence(rho), relative_entropy(rho, dephase(rho)), 1e-9);
  }
}

TEST(QiRelativeEntropy, ZeroOnQiStates) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    EXPECT_NEAR(qi_relative_entropy(random_qi_state(Dims{3, 2}, s), Bipartition::last_is_b(2)), 0.0, 1e-9);
  }
}

TEST(QiRelativeEntropy, BellIsOneBit) {
  EXPECT_NEAR(qi_relative_entropy(bell(), Bipartition::parse("B=1", 2)), 1.0, 1e-12);
}

TEST(QiRelativeEntropy, MergingStateValues) {
  const DensityMatrix rho = merging_state();
  EXPECT_NEAR(qi_relative_entropy(rho, Bipartition::parse("A=0;B=1,2", 3)), 8.0 / 9.0, 1e-9);
  EXPECT_NEAR(qi_relative_entropy(rho, Bipartition::parse("A=0,2;B=1", 3)), 4.0 / 9.0, 1e-9);
}

TEST(QiRelativeEntropy, EqualsDivergenceToBobDephased) {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    const Dims dims{2 + static_cast<std::size_t>(t % 2), 2 + static_cast<std::size_t>((t / 2) % 2)};
    const DensityMatrix rho = random_density(dims, 1 + static_cast<std::size_t>(t % (dims[0] * dims[1])), rng);
    ASSERT_NEAR(qi_relative_entropy(rho, Bipartition::last_is_b(2)), relative_entropy(rho, dephase(rho, {1})), 1e-9)
        << "trial " << t;
  }
}

TEST(QiRelativeEntropy, AdditiveOverTensorProducts) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix rho = random_density(Dims{2, 2}, 2, rng), sigma = random_density(Dims{2, 3}, 3, rng);
    // A = {0, 2}, B = {1, 3} in the product ordering (A1, B1, A2, B2).
    const double joint = qi_relative_entropy(tensor_product(rho, sigma), Bipartition(4, {0, 2}, {1, 3}));
    const double sum =
        qi_relative_entropy(rho, Bipartition::last_is_b(2)) + qi_relative_entropy(sigma, Bipartition::last_is_b(2));
    EXPECT_NEAR(joint, sum, 1e-9);
  }
}

TEST(QiRelativeEntropy, FaithfulOnQiSet) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const DensityMatrix rho = t % 2 == 0 ? random_qi_state(Dims{2, 2}, rng) : random_density(Dims{2, 2}, 4, rng);
    const double value = qi_relative_entropy(rho, Bipartition::last_is_b(2));
    const bool qi = trace_norm(rho.matrix() - dephase(rho, {1}).matrix()) <= 1e-8;
    EXPECT_EQ(value <= 1e-9, qi) << "trial " << t << " value " << value;
  }
}

TEST(QiRelativeEntropy, BoundedByFullCoherence) {
  Rng rng(10);
  for (int t = 0; t < 50; ++t) {
    const DensityMatrix rho = random_density(Dims{2, 3}, 1 + static_cast<std::size_t>(t % 6), rng);
    const double full = relative_entropy_of_coherence(rho);
    EXPECT_GE(full + 1e-9, qi_relative_entropy(rho, Bipartition::last_is_b(2)));
    EXPECT_GE(full + 1e-9, qi_relative_entropy(rho, Bipartition(2, {1}, {0})));
  }
}

TEST(QiRelativeEntropyOracle, QiInputIsNearZero) {
  const DensityMatrix rho = random_qi_state(Dims{2, 2}, 3);
  EXPECT_NEAR(qi_relative_entropy_oracle(rho, Bipartition::last_is_b(2)), 0.0, 1e-4);
}

TEST(QiRelativeEntropyOracle, BellMatchesClosedForm) {
  const double v = qi_relative_entropy_oracle(bell(), Bipartition::last_is_b(2));
  EXPECT_GE(v, 1.0 - 1e-4);
  EXPECT_LE(v, 1.0 + 1e-2);
}

TEST(QiRelativeEntropyOracle, RejectsLargeSystems) {
  try {
    qi_relative_entropy_oracle(random_density(Dims{3, 3, 2}, 2, 1), Bipartition::last_is_b(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionTooLarge);
  }
}

TEST(Correlations, ProductStateHasNoDiscord) {
  const DensityMatrix rho = tensor_product(random_density(Dims{2}, 2, 1), random_density(Dims{3}, 3, 2));
  EXPECT_NEAR(mutual_information(rho, Bipartition::last_is_b(2)), 0.0, 1e-9);
  EXPECT_NEAR(basis_dependent_discord(rho, Bipartition::last_is_b(2)), 0.0, 1e-9);
}

TEST(Correlations, BellValues) {
  const Bipartition split = Bipartition::last_is_b(2);
  EXPECT_NEAR(mutual_information(bell(), split), 2.0, 1e-12);
  EXPECT_NEAR(mutual_information(dephase(bell(), {1}), split), 1.0, 1e-12);
  EXPECT_NEAR(basis_dependent_discord(bell(), split), 1.0, 1e-12);
}

TEST(Correlations, QiStatesHaveNoDiscord) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const DensityMatrix rho = random_qi_state(Dims{2, 3}, s);
    EXPECT_NEAR(basis_dependent_discord(rho, Bipartition::last_is_b(2)), 0.0, 1e-9);
    EXPECT_GE(mutual_information(rho, Bipartition::last_is_b(2)), -1e-12);
  }
}

TEST(CoherenceOfAssistance, PureStateReturnsItsCoherence) {
  const PureState psi = random_pure(Dims{3}, 4);
  const AssistanceResult r = coherence_of_assistance(psi.density());
  EXPECT_NEAR(r.value, relative_entropy_of_coherence(psi), 1e-12);
  EXPECT_EQ(r.method, "optimized");
}

TEST(CoherenceOfAssistance, MaximallyMixedQubitReachesOne) {
  const AssistanceResult r = coherence_of_assistance(DensityMatrix::maximally_mixed(Dims{2}));
  EXPECT_NEAR(r.value, 1.0, 1e-9);
  EXPECT_NEAR(average_coherence(r.witness), r.value, 1e-12);
  EXPECT_LE(max_abs(ensemble_average(r.witness) - identity(2) / 2.0), 1e-8);
  // The explicit +/- ensemble attains the same value.
  const auto pm = fourier_mc_basis(2);
  const Ensemble plus_minus = {{0.5, pm[0]}, {0.5, pm[1]}};
  EXPECT_NEAR(average_coherence(plus_minus), 1.0, 1e-12);
}

TEST(CoherenceOfAssistance, BracketedOnRandomStates) {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 2 + static_cast<std::size_t>(t % 2);
    const DensityMatrix rho = random_density(Dims{d}, d, rng);
    AssistanceOptions opts;
    opts.seed = static_cast<std::uint64_t>(t);
    const AssistanceResult r = coherence_of_assistance(rho, opts);
    // Lower end: the eigen-ensemble.
    const EigenSystem es = eig_hermitian(rho.matrix());
    double eigen_avg = 0.0;
    for (Eigen::Index k = 0; k < es.values.size(); ++k) {
      if (es.values(k) > 1e-12) {
        eigen_avg += es.values(k) * relative_entropy_of_coherence(PureState(ComplexVector(es.vectors.col(k)), Dims{d}));
      }
    }
    EXPECT_GE(r.value, eigen_avg - 1e-9);
    EXPECT_GE(r.value, relative_entropy_of_coherence(rho) - 1e-9);
    EXPECT_LE(r.value, von_neumann_entropy(dephase(rho)) + 1e-9);
    EXPECT_LE(max_abs(ensemble_average(r.witness) - rho.matrix()), 1e-8);
    EXPECT_NEAR(average_coherence(r.witness), r.value, 1e-9);
  }
}

TEST(CoherenceOfAssistance, SeedReproducible) {
  const DensityMatrix rho = random_density(Dims{3}, 2, 12);
  AssistanceOptions opts;
  opts.seed = 5;
  EXPECT_EQ(coherence_of_assistance(rho, opts).value, coherence_of_assistance(rho, opts).value);
}

TEST(ContinuityBound, EqualStatesGiveZero) {
  const DensityMatrix rho = random_density(Dims{2, 2}, 3, 1);
  const ContinuityBound b = continuity_bound(rho, rho, Bipartition::last_is_b(2));
  EXPECT_NEAR(b.bound, 0.0, 1e-12);
  EXPECT_NEAR(b.difference, 0.0, 1e-12);
}

TEST(ContinuityBound, BellAgainstDephasedBell) {
  const ContinuityBound b = continuity_bound(bell(), dephase(bell()), Bipartition::last_is_b(2));
  EXPECT_NEAR(b.trace_distance, 0.5, 1e-12);
  EXPECT_NEAR(b.bound, 4.0, 1e-12);
  EXPECT_NEAR(b.difference, 1.0, 1e-12);
  EXPECT_TRUE(b.monotone_regime);
}

TEST(ContinuityBound, HoldsOnRandomPairs) {
  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    const DensityMatrix rho = random_density(Dims{2, 3}, 6, rng);
    const double eps = 0.01 * (t % 10);
    const DensityMatrix sigma((1.0 - eps) * rho.matrix() + eps * random_density(Dims{2, 3}, 1, rng).matrix(),
                              Dims{2, 3});
    const ContinuityBound b = continuity_bound(rho, sigma, Bipartition::last_is_b(2));
    EXPECT_LE(b.difference, b.bound + 1e-12) << "trial " << t;
  }
  EXPECT_THROW(continuity_bound(random_density(Dims{2, 2}, 1, 1), random_density(Dims{4}, 1, 1),
                                Bipartition::last_is_b(2)),
               Error);
}

TEST(MeasureClamp, RoundingNegativesBecomeZero) {
  EXPECT_EQ(detail::clamp_measure(-5e-10, "test"), 0.0);
  EXPECT_EQ(detail::clamp_measure(0.25, "test"), 0.25);
  try {
    detail::clamp_measure(-1e-6, "test");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InternalConsistency);
  }
}

}  // namespace
}  // namespace coherlab
