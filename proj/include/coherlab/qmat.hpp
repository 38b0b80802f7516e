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

// Dense complex-matrix kernel: Hermitian eigendecomposition, Kronecker
// products, subsystem bookkeeping, trace norm and entropies. Subsystems are
// laid out row-major: for dims (d0, d1, ..., dn) the basis index of
// |i0 i1 ... in> is i0*d1*...*dn + ... + in.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "coherlab/error.hpp"

namespace coherlab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseOperator = Eigen::SparseMatrix<Complex>;
using Dims = std::vector<std::size_t>;
using Subsystems = std::vector<std::size_t>;

namespace tol {
inline constexpr double herm = 1e-9;
inline constexpr double trace = 1e-9;
inline constexpr double psd = 1e-9;
inline constexpr double recon = 1e-10;
inline constexpr double norm = 1e-9;
/// Mass of rho inside ker(sigma) above which S(rho||sigma) is infinite.
inline constexpr double support = 1e-9;
}  // namespace tol

inline std::size_t total_dim(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string dims_string(const Dims& dims) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < dims.size(); ++k) os << (k ? "," : "") << dims[k];
  os << ')';
  return os.str();
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const ComplexMatrix& m) {
  return max_abs(m - m.adjoint());
}

inline ComplexMatrix identity(std::size_t d) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

inline ComplexVector basis_vector(std::size_t d, std::size_t k) {
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d));
  v(static_cast<Eigen::Index>(k)) = 1.0;
  return v;
}

/// |row><col| in dimension (rows x cols).
inline ComplexMatrix outer(const ComplexVector& row, const ComplexVector& col) {
  return row * col.adjoint();
}

// ---------------------------------------------------------------------------
// Eigendecomposition

struct EigenSystem {
  RealVector values;      // descending
  ComplexMatrix vectors;  // columns, matching values
};

inline void require_square(const ComplexMatrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << who << ": matrix is " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::NotSquare, os.str());
  }
}

inline void require_hermitian(const ComplexMatrix& m, const char* who) {
  require_square(m, who);
  const double defect = hermiticity_defect(m);
  if (defect > tol::herm) {
    std::ostringstream os;
    os << who << ": max |M - M^dagger| = " << defect << " exceeds " << tol::herm;
    throw Error(ErrorCode::NonHermitian, os.str());
  }
}

inline EigenSystem eig_hermitian(const ComplexMatrix& m) {
  require_hermitian(m, "eig_hermitian");
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "eig_hermitian: solver did not converge");
  }
  EigenSystem out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

inline RealVector eigenvalues_hermitian(const ComplexMatrix& m) {
  require_hermitian(m, "eigenvalues_hermitian");
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "eigenvalues_hermitian: solver did not converge");
  }
  return solver.eigenvalues().reverse();
}

/// f(H) for Hermitian H, applied on the spectrum.
inline ComplexMatrix hermitian_function(const ComplexMatrix& m, const std::function<double(double)>& f) {
  const EigenSystem es = eig_hermitian(m);
  RealVector fv = es.values.unaryExpr([&](double x) { return f(x); });
  return es.vectors * fv.cast<Complex>().asDiagonal() * es.vectors.adjoint();
}

// ---------------------------------------------------------------------------
// Tensor products

inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline ComplexVector tensor_product(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline Dims concat_dims(const Dims& a, const Dims& b) {
  Dims out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// ---------------------------------------------------------------------------
// Subsystem index bookkeeping

namespace detail {

inline std::vector<std::size_t> strides(const Dims& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) s[k - 1] = s[k] * dims[k];
  return s;
}

/// Global offsets of every basis state of the listed subsystems (row-major
/// in the listed order), all other digits zero.
inline std::vector<std::size_t> offsets(const Dims& dims, const Subsystems& subs) {
  const auto st = strides(dims);
  std::vector<std::size_t> out{0};
  for (std::size_t s : subs) {
    std::vector<std::size_t> next;
    next.reserve(out.size() * dims[s]);
    for (std::size_t base : out) {
      for (std::size_t digit = 0; digit < dims[s]; ++digit) next.push_back(base + digit * st[s]);
    }
    out = std::move(next);
  }
  return out;
}

inline Subsystems complement(std::size_t n, const Subsystems& subs) {
  Subsystems out;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::find(subs.begin(), subs.end(), k) == subs.end()) out.push_back(k);
  }
  return out;
}

inline void validate_subsystems(std::size_t n, const Subsystems& subs, const char* who) {
  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (subs[k] >= n) {
      std::ostringstream os;
      os << who << ": subsystem " << subs[k] << " out of range for " << n << " subsystems";
      throw Error(ErrorCode::BadSubsystemIndex, os.str());
    }
    if (std::find(subs.begin() + static_cast<std::ptrdiff_t>(k) + 1, subs.end(), subs[k]) != subs.end()) {
      std::ostringstream os;
      os << who << ": subsystem " << subs[k] << " listed twice";
      throw Error(ErrorCode::BadSubsystemIndex, os.str());
    }
  }
}

inline Dims select_dims(const Dims& dims, const Subsystems& subs) {
  Dims out;
  for (std::size_t s : subs) out.push_back(dims[s]);
  return out;
}

}  // namespace detail

/// Embeds `op` (acting on `targets`, in the listed order) into the full space
/// described by `dims`. The output dims of the targets are `out_target_dims`
/// (defaults to the input dims); all other subsystems see the identity.
inline SparseOperator lift_operator(const ComplexMatrix& op, const Dims& dims, const Subsystems& targets,
                                    const Dims& out_target_dims = {}) {
  detail::validate_subsystems(dims.size(), targets, "lift_operator");
  const Dims target_in = detail::select_dims(dims, targets);
  const Dims target_out = out_target_dims.empty() ? target_in : out_target_dims;
  if (target_out.size() != targets.size() || static_cast<std::size_t>(op.rows()) != total_dim(target_out) ||
      static_cast<std::size_t>(op.cols()) != total_dim(target_in)) {
    std::ostringstream os;
    os << "lift_operator: operator " << op.rows() << "x" << op.cols() << " does not map "
       << dims_string(target_in) << " to " << dims_string(target_out);
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  Dims out_dims = dims;
  for (std::size_t k = 0; k < targets.size(); ++k) out_dims[targets[k]] = target_out[k];
  const Subsystems rest = detail::complement(dims.size(), targets);
  const auto rest_in = detail::offsets(dims, rest);
  const auto rest_out = detail::offsets(out_dims, rest);
  const auto t_in = detail::offsets(dims, targets);
  const auto t_out = detail::offsets(out_dims, targets);

  std::vector<Eigen::Triplet<Complex>> triplets;
  for (Eigen::Index o = 0; o < op.rows(); ++o) {
    for (Eigen::Index i = 0; i < op.cols(); ++i) {
      const Complex v = op(o, i);
      if (v == Complex{}) continue;
      for (std::size_t r = 0; r < rest_in.size(); ++r) {
        triplets.emplace_back(static_cast<int>(t_out[static_cast<std::size_t>(o)] + rest_out[r]),
                              static_cast<int>(t_in[static_cast<std::size_t>(i)] + rest_in[r]), v);
      }
    }
  }
  SparseOperator lifted(static_cast<Eigen::Index>(total_dim(out_dims)), static_cast<Eigen::Index>(total_dim(dims)));
  lifted.setFromTriplets(triplets.begin(), triplets.end());
  return lifted;
}

/// L M L^dagger for a sparse lifted operator.
inline ComplexMatrix conjugate(const SparseOperator& lifted, const ComplexMatrix& m) {
  const ComplexMatrix left = lifted * m;
  return left * lifted.adjoint();
}

inline ComplexMatrix partial_trace(const ComplexMatrix& m, const Dims& dims, Subsystems keep) {
  if (keep.empty()) throw Error(ErrorCode::BadSubsystemIndex, "partial_trace: keep set is empty");
  detail::validate_subsystems(dims.size(), keep, "partial_trace");
  if (static_cast<std::size_t>(m.rows()) != total_dim(dims) || m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "partial_trace: matrix order does not match dims " + dims_string(dims));
  }
  std::sort(keep.begin(), keep.end());
  const Subsystems traced = detail::complement(dims.size(), keep);
  const auto ko = detail::offsets(dims, keep);
  const auto to = detail::offsets(dims, traced);
  const auto n = static_cast<Eigen::Index>(ko.size());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Complex acc{};
      for (std::size_t t : to) {
        acc += m(static_cast<Eigen::Index>(ko[static_cast<std::size_t>(i)] + t),
                 static_cast<Eigen::Index>(ko[static_cast<std::size_t>(j)] + t));
      }
      out(i, j) = acc;
    }
  }
  return out;
}

/// Reorders subsystems: subsystem k of the result is subsystem order[k] of `m`.
inline ComplexMatrix permute_subsystems(const ComplexMatrix& m, const Dims& dims, const Subsystems& order) {
  if (order.size() != dims.size()) {
    throw Error(ErrorCode::BadSubsystemIndex, "permute_subsystems: order must list every subsystem once");
  }
  detail::validate_subsystems(dims.size(), order, "permute_subsystems");
  const auto off = detail::offsets(dims, order);
  const auto n = static_cast<Eigen::Index>(off.size());
  ComplexMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = m(static_cast<Eigen::Index>(off[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(off[static_cast<std::size_t>(j)]));
    }
  }
  return out;
}

inline Subsystems inverse_permutation(const Subsystems& order) {
  Subsystems inv(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) inv[order[k]] = k;
  return inv;
}

// ---------------------------------------------------------------------------
// States

class DensityMatrix;

/// Unit-norm state vector with a subsystem layout.
class PureState {
 public:
  PureState(ComplexVector amplitudes, Dims dims) : amplitudes_(std::move(amplitudes)), dims_(std::move(dims)) {
    if (dims_.empty() || total_dim(dims_) != static_cast<std::size_t>(amplitudes_.size())) {
      throw Error(ErrorCode::DimensionMismatch, "PureState: " + std::to_string(amplitudes_.size()) +
                                                    " amplitudes do not match dims " + dims_string(dims_));
    }
    const double deviation = std::abs(amplitudes_.norm() - 1.0);
    if (deviation > tol::norm) {
      std::ostringstream os;
      os << "PureState: unit norm violated (| ||psi|| - 1 | = " << deviation << ")";
      throw Error(ErrorCode::InvalidState, os.str());
    }
  }
  explicit PureState(ComplexVector amplitudes)
      : PureState(amplitudes, Dims{static_cast<std::size_t>(amplitudes.size())}) {}

  /// Normalizes `v` first; throws InvalidState on a zero vector.
  static PureState normalized(const ComplexVector& v, Dims dims) {
    const double n = v.norm();
    if (n < 1e-300) throw Error(ErrorCode::InvalidState, "PureState: zero vector cannot be normalized");
    return PureState(v / n, std::move(dims));
  }

  const ComplexVector& amplitudes() const noexcept { return amplitudes_; }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
  ComplexMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }
  DensityMatrix density() const;

 private:
  ComplexVector amplitudes_;
  Dims dims_;
};

inline Complex inner(const PureState& a, const PureState& b) { return a.amplitudes().dot(b.amplitudes()); }

inline PureState tensor_product(const PureState& a, const PureState& b) {
  return PureState(tensor_product(a.amplitudes(), b.amplitudes()), concat_dims(a.dims(), b.dims()));
}

/// Positive semidefinite, unit-trace matrix with a subsystem layout. The
/// stored matrix is exactly Hermitian.
class DensityMatrix {
 public:
  DensityMatrix(const ComplexMatrix& m, Dims dims) : dims_(std::move(dims)) {
    if (m.rows() != m.cols()) {
      std::ostringstream os;
      os << "DensityMatrix: matrix is " << m.rows() << "x" << m.cols() << ", not square";
      throw Error(ErrorCode::InvalidState, os.str());
    }
    if (dims_.empty() || total_dim(dims_) != static_cast<std::size_t>(m.rows())) {
      throw Error(ErrorCode::DimensionMismatch,
                  "DensityMatrix: order " + std::to_string(m.rows()) + " does not match dims " + dims_string(dims_));
    }
    const double herm = hermiticity_defect(m);
    if (herm > tol::herm) {
      std::ostringstream os;
      os << "DensityMatrix: Hermiticity violated (max |M - M^dagger| = " << herm << ")";
      throw Error(ErrorCode::InvalidState, os.str());
    }
    matrix_ = 0.5 * (m + m.adjoint());
    const double trace_dev = std::abs(matrix_.trace() - Complex{1.0});
    if (trace_dev > tol::trace) {
      std::ostringstream os;
      os << "DensityMatrix: unit trace violated (|Tr(M) - 1| = " << trace_dev << ")";
      throw Error(ErrorCode::InvalidState, os.str());
    }
    const double min_eig = eigenvalues_hermitian(matrix_).minCoeff();
    if (min_eig < -tol::psd) {
      std::ostringstream os;
      os << "DensityMatrix: positive semidefiniteness violated (min eigenvalue = " << min_eig << ")";
      throw Error(ErrorCode::InvalidState, os.str());
    }
  }
  explicit DensityMatrix(const ComplexMatrix& m) : DensityMatrix(m, Dims{static_cast<std::size_t>(m.rows())}) {}

  /// Divides `m` by its trace first; throws InvalidState if the trace vanishes.
  static DensityMatrix normalized(const ComplexMatrix& m, Dims dims) {
    const double tr = m.trace().real();
    if (!(tr > 1e-300)) throw Error(ErrorCode::InvalidState, "DensityMatrix: cannot normalize a traceless matrix");
    return DensityMatrix(m / tr, std::move(dims));
  }

  static DensityMatrix maximally_mixed(Dims dims) {
    const auto d = total_dim(dims);
    return DensityMatrix(identity(d) / static_cast<double>(d), std::move(dims));
  }

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t num_subsystems() const noexcept { return dims_.size(); }

 private:
  ComplexMatrix matrix_;
  Dims dims_;
};

inline DensityMatrix PureState::density() const { return DensityMatrix(projector(), dims_); }

inline DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(tensor_product(a.matrix(), b.matrix()), concat_dims(a.dims(), b.dims()));
}

/// Reduced state on `keep`; surviving factors stay in their original order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const Subsystems& keep) {
  Subsystems sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  ComplexMatrix reduced = partial_trace(rho.matrix(), rho.dims(), sorted);
  return DensityMatrix(reduced, detail::select_dims(rho.dims(), sorted));
}

// ---------------------------------------------------------------------------
// Norms and entropies (bits)

inline double trace_norm(const ComplexMatrix& m) {
  require_square(m, "trace_norm");
  if (m.size() == 0) return 0.0;
  if (hermiticity_defect(m) <= 1e-14 * std::max(1.0, max_abs(m))) {
    return eigenvalues_hermitian(m).cwiseAbs().sum();
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  if (svd.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "trace_norm: SVD did not converge");
  return svd.singularValues().sum();
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return 0.5 * trace_norm(a.matrix() - b.matrix());
}

/// -sum p log2 p over a spectrum or distribution, entries clamped to [0, 1].
inline double shannon_entropy(const RealVector& p) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double x = std::clamp(p(k), 0.0, 1.0);
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

inline double binary_entropy(double x) {
  RealVector p(2);
  p << x, 1.0 - x;
  return shannon_entropy(p);
}

/// Entropy of a Hermitian unit-trace matrix without re-validating it.
inline double entropy_of(const ComplexMatrix& m) { return shannon_entropy(eigenvalues_hermitian(m)); }

inline double von_neumann_entropy(const DensityMatrix& rho) { return entropy_of(rho.matrix()); }

namespace detail {

/// S(rho||sigma) from raw Hermitian matrices, given S(rho).
inline double relative_entropy_raw(const ComplexMatrix& rho, double entropy_rho, const ComplexMatrix& sigma) {
  const EigenSystem es = eig_hermitian(sigma);
  double kernel_mass = 0.0;
  double cross = 0.0;  // Tr[rho log2 sigma]
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    const ComplexVector v = es.vectors.col(k);
    const double weight = v.dot(rho * v).real();
    if (es.values(k) < tol::psd) {
      kernel_mass += weight;
    } else {
      cross += weight * std::log2(es.values(k));
    }
  }
  if (kernel_mass > tol::support) return std::numeric_limits<double>::infinity();
  const double value = -entropy_rho - cross;
  return value < 0.0 && value > -tol::psd ? 0.0 : value;
}

}  // namespace detail

/// S(rho || sigma) in bits; +infinity when supp(rho) is not inside supp(sigma).
inline double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "relative_entropy: orders " + std::to_string(rho.dim()) + " and " +
                                                  std::to_string(sigma.dim()) + " differ");
  }
  return detail::relative_entropy_raw(rho.matrix(), von_neumann_entropy(rho), sigma.matrix());
}

}  // namespace coherlab
