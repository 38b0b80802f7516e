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

// Kraus channels, the separable operation classes SI / SQI, instruments and
// round-based local protocols with classical communication.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coherlab/measures.hpp"
#include "coherlab/qmat.hpp"
#include "coherlab/states.hpp"

namespace coherlab {

inline constexpr double kCompletenessTol = 1e-9;
inline constexpr double kIncoherenceTol = 1e-9;
/// Instrument outcomes at or below this probability are dropped.
inline constexpr double kOutcomePruneTol = 1e-12;

/// True iff every column has at most one entry of modulus above `tol`, i.e.
/// K|m> ~ |n> for every incoherent basis state |m>.
inline bool is_incoherent_operator(const ComplexMatrix& k, double tol = kIncoherenceTol) {
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    int nonzero = 0;
    for (Eigen::Index r = 0; r < k.rows(); ++r) {
      if (std::abs(k(r, c)) > tol && ++nonzero > 1) return false;
    }
  }
  return true;
}

/// || sum_l K_l^dagger K_l - I ||_max
inline double completeness_residual(const std::vector<ComplexMatrix>& ops) {
  if (ops.empty()) return std::numeric_limits<double>::infinity();
  ComplexMatrix sum = ComplexMatrix::Zero(ops.front().cols(), ops.front().cols());
  for (const auto& k : ops) sum += k.adjoint() * k;
  return max_abs(sum - ComplexMatrix::Identity(sum.rows(), sum.cols()));
}

class KrausChannel {
 public:
  KrausChannel(std::vector<ComplexMatrix> ops, Dims in_dims, Dims out_dims)
      : ops_(std::move(ops)), in_dims_(std::move(in_dims)), out_dims_(std::move(out_dims)) {
    if (ops_.empty()) throw Error(ErrorCode::IncompleteChannel, "KrausChannel: no Kraus operators");
    const auto rows = static_cast<Eigen::Index>(total_dim(out_dims_));
    const auto cols = static_cast<Eigen::Index>(total_dim(in_dims_));
    for (const auto& k : ops_) {
      if (k.rows() != rows || k.cols() != cols) {
        std::ostringstream os;
        os << "KrausChannel: operator is " << k.rows() << "x" << k.cols() << ", expected " << rows << "x" << cols;
        throw Error(ErrorCode::DimensionMismatch, os.str());
      }
    }
    const double residual = completeness_residual(ops_);
    if (residual > kCompletenessTol) {
      std::ostringstream os;
      os << "KrausChannel: completeness residual " << residual << " exceeds " << kCompletenessTol;
      throw Error(ErrorCode::IncompleteChannel, os.str());
    }
  }
  KrausChannel(std::vector<ComplexMatrix> ops, const Dims& dims) : KrausChannel(std::move(ops), dims, dims) {}

  const std::vector<ComplexMatrix>& ops() const noexcept { return ops_; }
  const Dims& in_dims() const noexcept { return in_dims_; }
  const Dims& out_dims() const noexcept { return out_dims_; }
  std::size_t size() const noexcept { return ops_.size(); }

 private:
  std::vector<ComplexMatrix> ops_;
  Dims in_dims_;
  Dims out_dims_;
};

inline bool is_incoherent(const KrausChannel& ch, double tol = kIncoherenceTol) {
  return std::all_of(ch.ops().begin(), ch.ops().end(), [&](const auto& k) { return is_incoherent_operator(k, tol); });
}

struct KrausPair {
  ComplexMatrix a;
  ComplexMatrix b;
};

/// sum_i (A_i (x) B_i) rho (A_i (x) B_i)^dagger with Alice's operators on her
/// space and Bob's on his.
class ProductKrausChannel {
 public:
  ProductKrausChannel(std::vector<KrausPair> pairs, Dims a_in, Dims b_in, Dims a_out = {}, Dims b_out = {})
      : pairs_(std::move(pairs)),
        a_in_(std::move(a_in)),
        b_in_(std::move(b_in)),
        a_out_(a_out.empty() ? a_in_ : std::move(a_out)),
        b_out_(b_out.empty() ? b_in_ : std::move(b_out)) {
    if (pairs_.empty()) throw Error(ErrorCode::IncompleteChannel, "ProductKrausChannel: no Kraus pairs");
    if (a_in_.size() != a_out_.size() || b_in_.size() != b_out_.size()) {
      throw Error(ErrorCode::DimensionMismatch, "ProductKrausChannel: in/out subsystem counts differ");
    }
    const auto ar = static_cast<Eigen::Index>(total_dim(a_out_)), ac = static_cast<Eigen::Index>(total_dim(a_in_));
    const auto br = static_cast<Eigen::Index>(total_dim(b_out_)), bc = static_cast<Eigen::Index>(total_dim(b_in_));
    for (const auto& p : pairs_) {
      if (p.a.rows() != ar || p.a.cols() != ac || p.b.rows() != br || p.b.cols() != bc) {
        throw Error(ErrorCode::DimensionMismatch, "ProductKrausChannel: operator shape does not match party dims");
      }
    }
    const double residual = completeness_residual();
    if (residual > kCompletenessTol) {
      std::ostringstream os;
      os << "ProductKrausChannel: completeness residual " << residual << " exceeds " << kCompletenessTol;
      throw Error(ErrorCode::IncompleteChannel, os.str());
    }
  }

  /// || sum_i A_i^dagger A_i (x) B_i^dagger B_i - I ||_max
  double completeness_residual() const {
    const auto d = static_cast<Eigen::Index>(total_dim(a_in_) * total_dim(b_in_));
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (const auto& p : pairs_) sum += tensor_product(ComplexMatrix(p.a.adjoint() * p.a), ComplexMatrix(p.b.adjoint() * p.b));
    return max_abs(sum - ComplexMatrix::Identity(d, d));
  }

  const std::vector<KrausPair>& pairs() const noexcept { return pairs_; }
  const Dims& a_in() const noexcept { return a_in_; }
  const Dims& b_in() const noexcept { return b_in_; }
  const Dims& a_out() const noexcept { return a_out_; }
  const Dims& b_out() const noexcept { return b_out_; }
  std::size_t size() const noexcept { return pairs_.size(); }

  /// The same channel as plain Kraus operators A_i (x) B_i on A then B.
  KrausChannel flatten() const {
    std::vector<ComplexMatrix> ops;
    for (const auto& p : pairs_) ops.push_back(tensor_product(p.a, p.b));
    return KrausChannel(std::move(ops), concat_dims(a_in_, b_in_), concat_dims(a_out_, b_out_));
  }

 private:
  std::vector<KrausPair> pairs_;
  Dims a_in_, b_in_, a_out_, b_out_;
};

/// Inclusions SI => SQI => separable always hold for the flags below.
struct ChannelClass {
  bool incoherent = false;
  bool separable = false;
  bool separable_incoherent = false;
  bool separable_quantum_incoherent = false;
};

inline ChannelClass classify(const ProductKrausChannel& ch, double tol = kIncoherenceTol) {
  if (ch.completeness_residual() > kCompletenessTol) {
    throw Error(ErrorCode::IncompleteChannel, "classify: channel is not trace preserving");
  }
  ChannelClass c;
  c.separable = true;
  const auto& pairs = ch.pairs();
  const bool alice = std::all_of(pairs.begin(), pairs.end(), [&](const auto& p) { return is_incoherent_operator(p.a, tol); });
  const bool bob = std::all_of(pairs.begin(), pairs.end(), [&](const auto& p) { return is_incoherent_operator(p.b, tol); });
  c.separable_quantum_incoherent = bob;
  c.separable_incoherent = alice && bob;
  c.incoherent = is_incoherent(ch.flatten(), tol);
  return c;
}

// ---------------------------------------------------------------------------
// Application

struct InstrumentOutcome {
  double probability = 0.0;
  DensityMatrix state;
  std::size_t outcome = 0;
};

namespace detail {

struct LiftedChannel {
  std::vector<SparseOperator> ops;
  Dims out_dims;
};

inline Dims target_out_dims(const Dims& in_dims, const Subsystems& targets, const Dims& ch_in, const Dims& ch_out,
                            const char* who) {
  const Dims t_in = select_dims(in_dims, targets);
  if (total_dim(t_in) != total_dim(ch_in)) {
    throw Error(ErrorCode::DimensionMismatch, std::string(who) + ": channel input " + dims_string(ch_in) +
                                                  " does not match target dims " + dims_string(t_in));
  }
  if (ch_out.size() == targets.size()) return ch_out;
  if (total_dim(ch_out) == total_dim(ch_in)) return t_in;
  throw Error(ErrorCode::DimensionMismatch, std::string(who) + ": cannot distribute output dims " +
                                                dims_string(ch_out) + " over " + std::to_string(targets.size()) +
                                                " subsystems");
}

inline Dims replaced(Dims dims, const Subsystems& targets, const Dims& values) {
  for (std::size_t k = 0; k < targets.size(); ++k) dims[targets[k]] = values[k];
  return dims;
}

inline LiftedChannel lift(const KrausChannel& ch, const Dims& dims, const Subsystems& targets) {
  const Dims t_out = target_out_dims(dims, targets, ch.in_dims(), ch.out_dims(), "apply");
  LiftedChannel out;
  out.out_dims = replaced(dims, targets, t_out);
  for (const auto& k : ch.ops()) out.ops.push_back(lift_operator(k, dims, targets, t_out));
  return out;
}

inline LiftedChannel lift(const ProductKrausChannel& ch, const Dims& dims, const Subsystems& a_targets,
                          const Subsystems& b_targets) {
  Subsystems both = a_targets;
  both.insert(both.end(), b_targets.begin(), b_targets.end());
  validate_subsystems(dims.size(), both, "apply");
  const Dims a_out = target_out_dims(dims, a_targets, ch.a_in(), ch.a_out(), "apply (Alice)");
  const Dims mid = replaced(dims, a_targets, a_out);
  const Dims b_out = target_out_dims(mid, b_targets, ch.b_in(), ch.b_out(), "apply (Bob)");
  LiftedChannel out;
  out.out_dims = replaced(mid, b_targets, b_out);
  for (const auto& p : ch.pairs()) {
    out.ops.push_back(lift_operator(p.b, mid, b_targets, b_out) * lift_operator(p.a, dims, a_targets, a_out));
  }
  return out;
}

inline Subsystems leading(std::size_t count, std::size_t offset = 0) {
  Subsystems s(count);
  std::iota(s.begin(), s.end(), offset);
  return s;
}

inline DensityMatrix apply_lifted(const LiftedChannel& lifted, const DensityMatrix& rho) {
  const auto d = static_cast<Eigen::Index>(total_dim(lifted.out_dims));
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (const auto& k : lifted.ops) out += conjugate(k, rho.matrix());
  return DensityMatrix(out, lifted.out_dims);
}

inline std::vector<InstrumentOutcome> instrument_lifted(const LiftedChannel& lifted, const DensityMatrix& rho) {
  std::vector<InstrumentOutcome> out;
  for (std::size_t l = 0; l < lifted.ops.size(); ++l) {
    const ComplexMatrix post = conjugate(lifted.ops[l], rho.matrix());
    const double p = post.trace().real();
    if (p <= kOutcomePruneTol) continue;
    out.push_back({p, DensityMatrix(post / p, lifted.out_dims), l});
  }
  return out;
}

}  // namespace detail

/// Applies `ch` to the subsystems `targets` of rho.
inline DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho, const Subsystems& targets) {
  return detail::apply_lifted(detail::lift(ch, rho.dims(), targets), rho);
}

inline DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho) {
  if (total_dim(ch.in_dims()) != rho.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "apply: channel input " + dims_string(ch.in_dims()) +
                                                  " does not match state dims " + dims_string(rho.dims()));
  }
  if (ch.in_dims() == rho.dims()) return apply(ch, rho, detail::leading(rho.num_subsystems()));
  const DensityMatrix flat(rho.matrix(), Dims{rho.dim()});
  const DensityMatrix out = apply(ch, flat, {0});
  return DensityMatrix(out.matrix(), ch.out_dims());
}

inline std::vector<InstrumentOutcome> apply_instrument(const KrausChannel& ch, const DensityMatrix& rho,
                                                       const Subsystems& targets) {
  return detail::instrument_lifted(detail::lift(ch, rho.dims(), targets), rho);
}

inline std::vector<InstrumentOutcome> apply_instrument(const KrausChannel& ch, const DensityMatrix& rho) {
  if (total_dim(ch.in_dims()) != rho.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "apply_instrument: channel input " + dims_string(ch.in_dims()) +
                                                  " does not match state dims " + dims_string(rho.dims()));
  }
  if (ch.in_dims() == rho.dims()) return apply_instrument(ch, rho, detail::leading(rho.num_subsystems()));
  auto outcomes = apply_instrument(ch, DensityMatrix(rho.matrix(), Dims{rho.dim()}), {0});
  for (auto& o : outcomes) o.state = DensityMatrix(o.state.matrix(), ch.out_dims());
  return outcomes;
}

/// Alice's operators act on `a_targets`, Bob's on `b_targets`; all other
/// subsystems are untouched.
inline DensityMatrix apply(const ProductKrausChannel& ch, const DensityMatrix& rho, const Subsystems& a_targets,
                           const Subsystems& b_targets) {
  return detail::apply_lifted(detail::lift(ch, rho.dims(), a_targets, b_targets), rho);
}

/// Alice holds the leading subsystems of rho, Bob the following ones.
inline DensityMatrix apply(const ProductKrausChannel& ch, const DensityMatrix& rho) {
  return apply(ch, rho, detail::leading(ch.a_in().size()), detail::leading(ch.b_in().size(), ch.a_in().size()));
}

inline std::vector<InstrumentOutcome> apply_instrument(const ProductKrausChannel& ch, const DensityMatrix& rho,
                                                       const Subsystems& a_targets, const Subsystems& b_targets) {
  return detail::instrument_lifted(detail::lift(ch, rho.dims(), a_targets, b_targets), rho);
}

inline std::vector<InstrumentOutcome> apply_instrument(const ProductKrausChannel& ch, const DensityMatrix& rho) {
  return apply_instrument(ch, rho, detail::leading(ch.a_in().size()),
                          detail::leading(ch.b_in().size(), ch.a_in().size()));
}

// ---------------------------------------------------------------------------
// Incoherent completion

/// Keeps `ops` as they are and appends rank-one incoherent operators
/// |0><w| that make the family complete. Requires sum K^dagger K <= I.
inline KrausChannel complete_incoherent_instrument(std::vector<ComplexMatrix> ops, Dims in_dims, Dims out_dims) {
  if (ops.empty()) throw Error(ErrorCode::IncompleteChannel, "complete_incoherent_instrument: no operators");
  const auto cols = ops.front().cols();
  const auto rows = ops.front().rows();
  ComplexMatrix sum = ComplexMatrix::Zero(cols, cols);
  for (const auto& k : ops) sum += k.adjoint() * k;
  const EigenSystem rest = eig_hermitian(ComplexMatrix::Identity(cols, cols) - sum);
  if (rest.values.minCoeff() < -kCompletenessTol) {
    std::ostringstream os;
    os << "complete_incoherent_instrument: operators exceed the identity by " << -rest.values.minCoeff();
    throw Error(ErrorCode::IncompleteChannel, os.str());
  }
  for (Eigen::Index k = 0; k < rest.values.size(); ++k) {
    if (rest.values(k) <= 1e-15) continue;
    ComplexMatrix f = ComplexMatrix::Zero(rows, cols);
    f.row(0) = std::sqrt(rest.values(k)) * rest.vectors.col(k).adjoint();
    ops.push_back(std::move(f));
  }
  return KrausChannel(std::move(ops), std::move(in_dims), std::move(out_dims));
}

/// Normalizes incoherent operators R_l into a complete incoherent channel.
/// When M = sum R^dagger R is diagonal the result is K_l = R_l M^{-1/2}
/// (a column rescaling). Otherwise M^{-1/2} would mix columns, so the R_l are
/// scaled by 1/sqrt(lambda_max(M)) and the remainder is filled with |0><w|.
inline KrausChannel complete_incoherent_kraus(const std::vector<ComplexMatrix>& raw, Dims in_dims = {},
                                              Dims out_dims = {}) {
  if (raw.empty()) throw Error(ErrorCode::NotIncoherentInput, "complete_incoherent_kraus: no operators");
  for (std::size_t l = 0; l < raw.size(); ++l) {
    if (!is_incoherent_operator(raw[l])) {
      throw Error(ErrorCode::NotIncoherentInput, "complete_incoherent_kraus: operator " + std::to_string(l) +
                                                     " maps a basis state to a superposition");
    }
  }
  if (in_dims.empty()) in_dims = {static_cast<std::size_t>(raw.front().cols())};
  if (out_dims.empty()) out_dims = {static_cast<std::size_t>(raw.front().rows())};
  const auto n = raw.front().cols();
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (const auto& r : raw) m += r.adjoint() * r;
  const RealVector diag = m.diagonal().real();
  if (diag.minCoeff() < 1e-12) {
    std::ostringstream os;
    os << "complete_incoherent_kraus: min diag(sum R^dagger R) = " << diag.minCoeff();
    throw Error(ErrorCode::SingularNormalizer, os.str());
  }
  const ComplexMatrix offdiag = m - ComplexMatrix(m.diagonal().asDiagonal());
  if (max_abs(offdiag) <= 1e-12 * diag.maxCoeff()) {
    const ComplexMatrix scale = diag.cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal();
    std::vector<ComplexMatrix> ops;
    for (const auto& r : raw) ops.push_back(r * scale);
    return KrausChannel(std::move(ops), std::move(in_dims), std::move(out_dims));
  }
  const double top = eigenvalues_hermitian(m)(0);
  std::vector<ComplexMatrix> ops;
  for (const auto& r : raw) ops.push_back(r / std::sqrt(top));
  return complete_incoherent_instrument(std::move(ops), std::move(in_dims), std::move(out_dims));
}

/// Random incoherent channel: each raw operator sends basis state m to a
/// uniformly chosen basis state with a complex Gaussian amplitude.
inline KrausChannel random_incoherent_channel(const Dims& dims, std::size_t n_kraus, Rng& rng) {
  if (n_kraus < 1) throw Error(ErrorCode::BadRank, "random_incoherent_channel: need at least one Kraus operator");
  const auto d = total_dim(dims);
  std::uniform_int_distribution<std::size_t> target(0, d - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<ComplexMatrix> raw;
    for (std::size_t l = 0; l < n_kraus; ++l) {
      ComplexMatrix r = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      for (std::size_t m = 0; m < d; ++m) {
        const double re = normal(rng);
        const double im = normal(rng);
        r(static_cast<Eigen::Index>(target(rng)), static_cast<Eigen::Index>(m)) = Complex(re, im);
      }
      raw.push_back(std::move(r));
    }
    try {
      return complete_incoherent_kraus(raw, dims, dims);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularNormalizer) throw;
    }
  }
  throw Error(ErrorCode::SingularNormalizer, "random_incoherent_channel: 16 singular draws in a row");
}

inline KrausChannel random_incoherent_channel(const Dims& dims, std::size_t n_kraus, std::uint64_t seed) {
  Rng rng(seed);
  return random_incoherent_channel(dims, n_kraus, rng);
}

/// Random instrument with `outcomes` Kraus operators cut from a Haar isometry.
inline KrausChannel random_instrument(const Dims& dims, std::size_t outcomes, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(total_dim(dims));
  const auto n = static_cast<Eigen::Index>(outcomes);
  const ComplexMatrix g = ginibre(n * d, d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  const ComplexMatrix v = qr.householderQ() * ComplexMatrix::Identity(n * d, d);
  std::vector<ComplexMatrix> ops;
  for (Eigen::Index k = 0; k < n; ++k) ops.push_back(v.middleRows(k * d, d));
  return KrausChannel(std::move(ops), dims);
}

// ---------------------------------------------------------------------------
// Local protocols

enum class Party { Alice, Bob };

/// LOCC: no restriction. LQICC: Bob's instruments incoherent. LICC: both.
enum class Locality { LOCC, LQICC, LICC };

using Transcript = std::vector<std::size_t>;
using BranchPolicy = std::function<std::size_t(const Transcript&)>;

/// One party applies one of `branches`, chosen from the outcomes so far.
struct ProtocolRound {
  Party party = Party::Alice;
  std::vector<KrausChannel> branches;
  /// Empty policy selects branch 0.
  BranchPolicy policy;
};

struct LocalProtocol {
  Dims a_dims;
  Dims b_dims;
  /// Positions of the parties' subsystems in the global state. Empty means
  /// Alice holds the leading |a_dims| subsystems and Bob the next |b_dims|.
  Subsystems a_subsystems;
  Subsystems b_subsystems;
  Locality locality = Locality::LOCC;
  std::vector<ProtocolRound> rounds;
  /// Optional final label computed from the transcript.
  std::function<std::size_t(const Transcript&)> relabel;
};

struct ProtocolLeaf {
  double probability = 0.0;
  DensityMatrix state;
  Transcript transcript;
  std::size_t label = 0;
};

namespace detail {

inline void check_protocol(const LocalProtocol& p) {
  for (std::size_t r = 0; r < p.rounds.size(); ++r) {
    const auto& round = p.rounds[r];
    if (round.branches.empty()) {
      throw Error(ErrorCode::BadBranch, "run_protocol: round " + std::to_string(r) + " has no instrument");
    }
    const Dims& local = round.party == Party::Alice ? p.a_dims : p.b_dims;
    const bool must_be_incoherent =
        p.locality == Locality::LICC || (p.locality == Locality::LQICC && round.party == Party::Bob);
    for (const auto& ch : round.branches) {
      if (total_dim(ch.in_dims()) != total_dim(local) || total_dim(ch.out_dims()) != total_dim(local)) {
        throw Error(ErrorCode::DimensionMismatch, "run_protocol: round " + std::to_string(r) +
                                                      " instrument does not act on " + dims_string(local));
      }
      if (must_be_incoherent && !is_incoherent(ch)) {
        throw Error(ErrorCode::IncoherenceViolation, "run_protocol: round " + std::to_string(r) + " (" +
                                                         (round.party == Party::Alice ? "Alice" : "Bob") +
                                                         ") uses a coherent Kraus operator");
      }
    }
  }
}

inline std::size_t choose_branch(const ProtocolRound& round, const Transcript& t, std::size_t r) {
  const std::size_t b = round.policy ? round.policy(t) : 0;
  if (b >= round.branches.size()) {
    throw Error(ErrorCode::BadBranch, "run_protocol: round " + std::to_string(r) + " policy returned branch " +
                                          std::to_string(b) + " of " + std::to_string(round.branches.size()));
  }
  return b;
}

inline std::pair<Subsystems, Subsystems> placement(const LocalProtocol& p) {
  Subsystems a = p.a_subsystems.empty() ? leading(p.a_dims.size()) : p.a_subsystems;
  Subsystems b = p.b_subsystems.empty() ? leading(p.b_dims.size(), p.a_dims.size()) : p.b_subsystems;
  return {a, b};
}

}  // namespace detail

/// Depth-first expansion of every classical branch of the protocol.
inline std::vector<ProtocolLeaf> run_protocol(const LocalProtocol& p, const DensityMatrix& rho) {
  detail::check_protocol(p);
  const auto [a_subs, b_subs] = detail::placement(p);
  Subsystems both = a_subs;
  both.insert(both.end(), b_subs.begin(), b_subs.end());
  detail::validate_subsystems(rho.num_subsystems(), both, "run_protocol");
  if (detail::select_dims(rho.dims(), a_subs) != p.a_dims || detail::select_dims(rho.dims(), b_subs) != p.b_dims) {
    throw Error(ErrorCode::DimensionMismatch, "run_protocol: party dims do not match state dims " +
                                                  dims_string(rho.dims()));
  }

  std::vector<ProtocolLeaf> leaves;
  std::function<void(std::size_t, double, const DensityMatrix&, Transcript&)> expand =
      [&](std::size_t r, double prob, const DensityMatrix& state, Transcript& t) {
        if (r == p.rounds.size()) {
          leaves.push_back({prob, state, t, p.relabel ? p.relabel(t) : leaves.size()});
          return;
        }
        const auto& round = p.rounds[r];
        const auto& ch = round.branches[detail::choose_branch(round, t, r)];
        const Subsystems& targets = round.party == Party::Alice ? a_subs : b_subs;
        for (const auto& o : apply_instrument(ch, state, targets)) {
          t.push_back(o.outcome);
          expand(r + 1, prob * o.probability, o.state, t);
          t.pop_back();
        }
      };
  Transcript t;
  expand(0, 1.0, rho, t);
  return leaves;
}

/// Sum of p_leaf * state_leaf: the channel with the transcript discarded.
inline DensityMatrix average_state(const std::vector<ProtocolLeaf>& leaves) {
  ComplexMatrix m = ComplexMatrix::Zero(leaves.front().state.matrix().rows(), leaves.front().state.matrix().cols());
  for (const auto& l : leaves) m += l.probability * l.state.matrix();
  return DensityMatrix(m, leaves.front().state.dims());
}

/// Compiles the protocol into product form: one pair per classical path,
/// A_path and B_path being the composed local Kraus operators.
inline ProductKrausChannel to_product_channel(const LocalProtocol& p) {
  detail::check_protocol(p);
  const auto da = static_cast<Eigen::Index>(total_dim(p.a_dims));
  const auto db = static_cast<Eigen::Index>(total_dim(p.b_dims));
  std::vector<KrausPair> pairs;
  std::function<void(std::size_t, const ComplexMatrix&, const ComplexMatrix&, Transcript&)> expand =
      [&](std::size_t r, const ComplexMatrix& a, const ComplexMatrix& b, Transcript& t) {
        if (r == p.rounds.size()) {
          pairs.push_back({a, b});
          return;
        }
        const auto& round = p.rounds[r];
        const auto& ch = round.branches[detail::choose_branch(round, t, r)];
        for (std::size_t l = 0; l < ch.size(); ++l) {
          t.push_back(l);
          if (round.party == Party::Alice) {
            expand(r + 1, ch.ops()[l] * a, b, t);
          } else {
            expand(r + 1, a, ch.ops()[l] * b, t);
          }
          t.pop_back();
        }
      };
  Transcript t;
  expand(0, ComplexMatrix::Identity(da, da), ComplexMatrix::Identity(db, db), t);
  return ProductKrausChannel(std::move(pairs), p.a_dims, p.b_dims);
}

/// Alternating Alice/Bob rounds; each party's instrument is selected by the
/// other party's latest outcome. Instruments are incoherent where the
/// locality class demands it and Haar-random otherwise.
inline LocalProtocol random_local_protocol(const Dims& a_dims, const Dims& b_dims, std::size_t rounds,
                                           Locality locality, Rng& rng, std::size_t outcomes = 2) {
  if (rounds < 1) throw Error(ErrorCode::BadRank, "random_local_protocol: rounds must be >= 1");
  LocalProtocol p;
  p.a_dims = a_dims;
  p.b_dims = b_dims;
  p.locality = locality;
  for (std::size_t r = 0; r < rounds; ++r) {
    for (Party party : {Party::Alice, Party::Bob}) {
      const bool incoherent =
          locality == Locality::LICC || (locality == Locality::LQICC && party == Party::Bob);
      const Dims& dims = party == Party::Alice ? a_dims : b_dims;
      ProtocolRound round;
      round.party = party;
      const std::size_t n_branches = (r == 0 && party == Party::Alice) ? 1 : outcomes;
      for (std::size_t b = 0; b < n_branches; ++b) {
        round.branches.push_back(incoherent ? random_incoherent_channel(dims, outcomes, rng)
                                            : random_instrument(dims, outcomes, rng));
      }
      if (n_branches > 1) {
        round.policy = [n_branches](const Transcript& t) { return t.empty() ? std::size_t{0} : t.back() % n_branches; };
      }
      p.rounds.push_back(std::move(round));
    }
  }
  return p;
}

/// A random LQICC protocol; LQICC is contained in SQI.
inline LocalProtocol random_sqi_channel(const Dims& a_dims, const Dims& b_dims, std::size_t rounds,
                                        std::uint64_t seed) {
  Rng rng(seed);
  return random_local_protocol(a_dims, b_dims, rounds, Locality::LQICC, rng);
}

}  // namespace coherlab
