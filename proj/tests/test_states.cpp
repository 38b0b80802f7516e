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
#include <numbers>

#include "coherlab/measures.hpp"
#include "coherlab/states.hpp"

namespace coherlab {
namespace {

constexpr double kS = 0.70710678118654752;

TEST(MaximallyCoherent, QubitAmplitudes) {
  const PureState psi = maximally_coherent(2);
  EXPECT_NEAR(psi.amplitudes()(0).real(), kS, 1e-15);
  EXPECT_NEAR(psi.amplitudes()(1).real(), kS, 1e-15);
}

TEST(MaximallyCoherent, FourLevelsAreUniform) {
  const PureState psi = maximally_coherent(4);
  for (Eigen::Index k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(psi.amplitudes()(k) - 0.5), 0.0, 1e-15);
}

TEST(MaximallyCoherent, CoherenceIsLogD) {
  for (std::size_t d = 2; d <= 9; ++d) {
    EXPECT_NEAR(relative_entropy_of_coherence(maximally_coherent(d)), std::log2(static_cast<double>(d)), 1e-12);
  }
}

TEST(MaximallyCoherent, RejectsDimensionOne) {
  try {
    maximally_coherent(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadDimension);
  }
}

TEST(BellStates, PhiPlusFirst) {
  const auto bell = bell_states();
  ASSERT_EQ(bell.size(), 4u);
  ComplexVector phi(4);
  phi << kS, 0, 0, kS;
  EXPECT_LE((bell[0].amplitudes() - phi).norm(), 1e-15);
  EXPECT_EQ(bell[0].dims(), (Dims{2, 2}));
}

TEST(BellStates, OrthonormalWithMixedMarginals) {
  const auto bell = bell_states();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(std::abs(inner(bell[i], bell[j])), i == j ? 1.0 : 0.0, 1e-15);
    EXPECT_LE(max_abs(partial_trace(bell[i].density(), {1}).matrix() - identity(2) / 2.0), 1e-15);
  }
}

TEST(DominoStates, MatchExplicitTable) {
  // Rows: alpha amplitudes then beta amplitudes.
  const double table[9][6] = {
      {0, 1, 0, 0, 1, 0},       {1, 0, 0, kS, kS, 0},     {1, 0, 0, kS, -kS, 0},
      {0, 0, 1, 0, kS, kS},     {0, 0, 1, 0, kS, -kS},    {0, kS, kS, 1, 0, 0},
      {0, kS, -kS, 1, 0, 0},    {kS, kS, 0, 0, 0, 1},     {kS, -kS, 0, 0, 0, 1},
  };
  const DominoFamily f = domino_states();
  ASSERT_EQ(f.states.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    ComplexVector a(3), b(3);
    a << table[i][0], table[i][1], table[i][2];
    b << table[i][3], table[i][4], table[i][5];
    EXPECT_LE((f.alpha[i].amplitudes() - a).norm(), 1e-15) << "alpha " << i + 1;
    EXPECT_LE((f.beta[i].amplitudes() - b).norm(), 1e-15) << "beta " << i + 1;
    EXPECT_LE((f.states[i].amplitudes() - tensor_product(a, b)).norm(), 1e-15) << "psi " << i + 1;
    EXPECT_EQ(f.states[i].dims(), (Dims{3, 3}));
  }
}

TEST(DominoStates, GramMatrixIsIdentity) {
  const DominoFamily f = domino_states();
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      EXPECT_NEAR(std::abs(inner(f.states[i], f.states[j]) - Complex(i == j ? 1.0 : 0.0)), 0.0, 1e-12);
    }
  }
}

TEST(MergingState, EntropyIsLogNine) {
  const DensityMatrix rho = merging_state();
  EXPECT_EQ(rho.dims(), (Dims{9, 3, 3}));
  EXPECT_NEAR(von_neumann_entropy(rho), std::log2(9.0), 1e-10);
}

TEST(MergingState, JointMarginalIsMaximallyMixed) {
  EXPECT_LE(max_abs(partial_trace(merging_state(), {1, 2}).matrix() - identity(9) / 9.0), 1e-14);
}

TEST(MergingState, QiRelativeEntropyAcrossRAB) {
  EXPECT_NEAR(qi_relative_entropy(merging_state(), Bipartition(3, {0}, {1, 2})), 8.0 / 9.0, 1e-9);
}

TEST(MaximallyCorrelated, PsiTwoCoefficientsGiveBell) {
  const DensityMatrix rho = maximally_correlated(maximally_coherent(2).projector());
  EXPECT_LE(max_abs(rho.matrix() - bell_states()[0].projector()), 1e-15);
}

TEST(MaximallyCorrelated, DiagonalCoefficientsAreClassical) {
  ComplexMatrix c = ComplexMatrix::Zero(3, 3);
  c(0, 0) = 0.2;
  c(1, 1) = 0.3;
  c(2, 2) = 0.5;
  const DensityMatrix rho = maximally_correlated(c);
  EXPECT_LE(max_abs(rho.matrix() - dephase(rho).matrix()), 0.0);
  EXPECT_NEAR(rho.matrix()(4, 4).real(), 0.3, 0.0);
}

TEST(MaximallyCorrelated, CoherenceMatchesCoefficientMatrix) {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix c = random_density(Dims{2}, 1 + static_cast<std::size_t>(t % 2), rng);
    const DensityMatrix rho = maximally_correlated(c.matrix());
    const double lhs = von_neumann_entropy(dephase(rho, {1})) - von_neumann_entropy(rho);
    const double rhs = von_neumann_entropy(dephase(c)) - von_neumann_entropy(c);
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(MaximallyCorrelated, RejectsInvalidCoefficients) {
  try {
    maximally_correlated(identity(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidCoefficients);
  }
}

TEST(FourierBasis, QubitIsPlusMinus) {
  const auto f = fourier_mc_basis(2);
  ComplexVector plus(2), minus(2);
  plus << kS, kS;
  minus << kS, -kS;
  EXPECT_LE((f[0].amplitudes() - plus).norm(), 1e-15);
  EXPECT_LE((f[1].amplitudes() - minus).norm(), 1e-15);
}

TEST(FourierBasis, UnitaryWithFlatAmplitudes) {
  for (std::size_t d = 2; d <= 9; ++d) {
    const auto f = fourier_mc_basis(d);
    ComplexMatrix u(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
      u.col(static_cast<Eigen::Index>(j)) = f[j].amplitudes();
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(d); ++k) {
        EXPECT_NEAR(std::abs(f[j].amplitudes()(k)), 1.0 / std::sqrt(static_cast<double>(d)), 1e-15);
      }
    }
    EXPECT_LE(max_abs(u.adjoint() * u - identity(d)), 1e-10) << "d = " << d;
  }
}

TEST(FourierBasis, PositivePhaseConvention) {
  const auto f = fourier_mc_basis(3);
  const Complex expected = std::polar(1.0 / std::sqrt(3.0), 2.0 * std::numbers::pi / 3.0);
  EXPECT_NEAR(std::abs(f[1].amplitudes()(1) - expected), 0.0, 1e-15);
}

TEST(RandomStates, RankOneDensityIsPure) {
  const DensityMatrix rho = random_density(Dims{2}, 1, 3);
  EXPECT_NEAR((rho.matrix() * rho.matrix()).trace().real(), 1.0, 1e-12);
}

TEST(RandomStates, QiStatesHaveZeroQiRelativeEntropy) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    EXPECT_NEAR(qi_relative_entropy(random_qi_state(Dims{2, 3}, s), Bipartition::last_is_b(2)), 0.0, 1e-9);
    EXPECT_NEAR(qi_relative_entropy(random_qi_state(Dims{2, 2, 2}, s), Bipartition::last_is_b(3)), 0.0, 1e-9);
  }
}

TEST(RandomStates, PureAmplitudesAreNormalized) {
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_NEAR(random_pure(Dims{2, 2}, s).amplitudes().norm(), 1.0, 1e-12);
}

TEST(RandomStates, SeedsReproduceBitForBit) {
  EXPECT_EQ(max_abs(random_density(Dims{3, 2}, 4, 99).matrix() - random_density(Dims{3, 2}, 4, 99).matrix()), 0.0);
  EXPECT_EQ((random_pure(Dims{5}, 7).amplitudes() - random_pure(Dims{5}, 7).amplitudes()).norm(), 0.0);
  EXPECT_EQ(max_abs(random_unitary(4, 1) - random_unitary(4, 1)), 0.0);
  EXPECT_GT(max_abs(random_density(Dims{3}, 3, 1).matrix() - random_density(Dims{3}, 3, 2).matrix()), 0.0);
}

TEST(RandomStates, RankAboveDimensionIsRejected) {
  try {
    random_density(Dims{2}, 3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadRank);
  }
}

TEST(RandomStates, UnitaryIsUnitary) {
  const ComplexMatrix u = random_unitary(6, 4);
  EXPECT_LE(max_abs(u.adjoint() * u - identity(6)), 1e-12);
}

TEST(RandomStates, ConstructorOutputsSatisfyInvariants) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    EXPECT_NO_THROW(random_density(Dims{2, 3}, 1 + static_cast<std::size_t>(t % 6), rng));
    EXPECT_NO_THROW(random_qi_state(Dims{3, 2}, rng));
    EXPECT_NO_THROW(random_pure(Dims{4}, rng));
  }
}

}  // namespace
}  // namespace coherlab
