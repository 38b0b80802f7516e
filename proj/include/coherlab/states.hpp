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

#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "coherlab/qmat.hpp"

namespace coherlab {

using Rng = std::mt19937_64;

/// (1/sqrt(d)) sum_k |k>.
inline PureState maximally_coherent(std::size_t d) {
  if (d < 2) throw Error(ErrorCode::BadDimension, "maximally_coherent: d = " + std::to_string(d) + " < 2");
  return PureState(ComplexVector::Constant(static_cast<Eigen::Index>(d), 1.0 / std::sqrt(static_cast<double>(d))),
                   Dims{d});
}

/// Bell basis in the order phi+, phi-, psi+, psi-.
inline std::vector<PureState> bell_states() {
  const double s = 1.0 / std::numbers::sqrt2;
  std::vector<PureState> out;
  const std::array<std::array<double, 4>, 4> amps{{
      {s, 0, 0, s},
      {s, 0, 0, -s},
      {0, s, s, 0},
      {0, s, -s, 0},
  }};
  for (const auto& a : amps) {
    ComplexVector v(4);
    v << a[0], a[1], a[2], a[3];
    out.emplace_back(v, Dims{2, 2});
  }
  return out;
}

/// The nine orthonormal product states |alpha_i> (x) |beta_i> on 3x3 that
/// no LOCC protocol can discriminate.
struct DominoFamily {
  std::vector<PureState> states;
  std::vector<PureState> alpha;
  std::vector<PureState> beta;
};

inline DominoFamily domino_states() {
  const double s = 1.0 / std::numbers::sqrt2;
  auto qutrit = [](double a0, double a1, double a2) {
    ComplexVector v(3);
    v << a0, a1, a2;
    return PureState(v, Dims{3});
  };
  const PureState k0 = qutrit(1, 0, 0);
  const PureState k1 = qutrit(0, 1, 0);
  const PureState k2 = qutrit(0, 0, 1);
  const PureState p01 = qutrit(s, s, 0);
  const PureState m01 = qutrit(s, -s, 0);
  const PureState p12 = qutrit(0, s, s);
  const PureState m12 = qutrit(0, s, -s);

  DominoFamily f;
  f.alpha = {k1, k0, k0, k2, k2, p12, m12, p01, m01};
  f.beta = {k1, p01, m01, p12, m12, k0, k0, k2, k2};
  for (std::size_t i = 0; i < 9; ++i) f.states.push_back(tensor_product(f.alpha[i], f.beta[i]));
  return f;
}

/// (1/9) sum_i |i><i|^R (x) |psi_i><psi_i|^{AB} over the domino family, dims (9, 3, 3).
inline DensityMatrix merging_state() {
  const DominoFamily f = domino_states();
  ComplexMatrix m = ComplexMatrix::Zero(81, 81);
  for (std::size_t i = 0; i < 9; ++i) {
    const ComplexVector flag = basis_vector(9, i);
    m += tensor_product(ComplexMatrix(outer(flag, flag)), f.states[i].projector());
  }
  return DensityMatrix(m / 9.0, Dims{9, 3, 3});
}

/// sum_ij c_ij |ii><jj| with dims (d, d).
inline DensityMatrix maximally_correlated(const ComplexMatrix& coeffs) {
  try {
    DensityMatrix check(coeffs);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidCoefficients, std::string("maximally_correlated: ") + e.what());
  }
  const auto d = static_cast<std::size_t>(coeffs.rows());
  const auto D = static_cast<Eigen::Index>(d * d);
  ComplexMatrix m = ComplexMatrix::Zero(D, D);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      m(static_cast<Eigen::Index>(i * d + i), static_cast<Eigen::Index>(j * d + j)) =
          coeffs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return DensityMatrix(m, Dims{d, d});
}

/// |psi_j> = (1/sqrt d) sum_k exp(+2 pi i jk/d) |k>.
inline std::vector<PureState> fourier_mc_basis(std::size_t d) {
  if (d < 2) throw Error(ErrorCode::BadDimension, "fourier_mc_basis: d = " + std::to_string(d) + " < 2");
  std::vector<PureState> out;
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t j = 0; j < d; ++j) {
    ComplexVector v(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>((j * k) % d) / static_cast<double>(d);
      v(static_cast<Eigen::Index>(k)) = norm * std::polar(1.0, phase);
    }
    out.emplace_back(v, Dims{d});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random generators. Every overload taking a seed builds its own engine, so
// equal seeds reproduce equal outputs bit-for-bit.

inline ComplexMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

inline PureState random_pure(const Dims& dims, Rng& rng) {
  const ComplexMatrix g = ginibre(static_cast<Eigen::Index>(total_dim(dims)), 1, rng);
  return PureState::normalized(g.col(0), dims);
}

inline PureState random_pure(const Dims& dims, std::uint64_t seed) {
  Rng rng(seed);
  return random_pure(dims, rng);
}

inline DensityMatrix random_density(const Dims& dims, std::size_t rank, Rng& rng) {
  const auto d = total_dim(dims);
  if (rank < 1 || rank > d) {
    throw Error(ErrorCode::BadRank, "random_density: rank " + std::to_string(rank) + " not in [1, " +
                                        std::to_string(d) + "]");
  }
  const ComplexMatrix g = ginibre(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rank), rng);
  const ComplexMatrix m = g * g.adjoint();
  return DensityMatrix::normalized(m, dims);
}

inline DensityMatrix random_density(const Dims& dims, std::size_t rank, std::uint64_t seed) {
  Rng rng(seed);
  return random_density(dims, rank, rng);
}

/// Haar unitary from the QR decomposition of a Ginibre matrix, with the
/// phases of diag(R) absorbed.
inline ComplexMatrix random_unitary(std::size_t d, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(d);
  const ComplexMatrix g = ginibre(n, n, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double a = std::abs(r(k, k));
    if (a > 0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

inline ComplexMatrix random_unitary(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return random_unitary(d, rng);
}

/// Uniform draw from the probability simplex.
inline RealVector random_probabilities(std::size_t n, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  RealVector p(static_cast<Eigen::Index>(n));
  for (auto& x : p) x = expo(rng);
  return p / p.sum();
}

/// sum_j p_j sigma_j^A (x) |j><j|^B where B is the last subsystem of `dims`
/// and A is everything before it.
inline DensityMatrix random_qi_state(const Dims& dims, Rng& rng) {
  if (dims.size() < 2) throw Error(ErrorCode::BadDimension, "random_qi_state: need at least two subsystems");
  const Dims a_dims(dims.begin(), dims.end() - 1);
  const std::size_t db = dims.back();
  const auto da = total_dim(a_dims);
  const RealVector p = random_probabilities(db, rng);
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(da * db), static_cast<Eigen::Index>(da * db));
  for (std::size_t j = 0; j < db; ++j) {
    const DensityMatrix sigma = random_density(a_dims, da, rng);
    const ComplexVector e = basis_vector(db, j);
    m += p(static_cast<Eigen::Index>(j)) * tensor_product(sigma.matrix(), ComplexMatrix(outer(e, e)));
  }
  return DensityMatrix::normalized(m, dims);
}

inline DensityMatrix random_qi_state(const Dims& dims, std::uint64_t seed) {
  Rng rng(seed);
  return random_qi_state(dims, rng);
}

}  // namespace coherlab
