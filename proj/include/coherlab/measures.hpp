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

// Coherence and correlation quantifiers. All values are in bits.

#pragma once

#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coherlab/optimize.hpp"
#include "coherlab/qmat.hpp"
#include "coherlab/states.hpp"

namespace coherlab {

/// An A|B split of a state's subsystems. B is never empty.
class Bipartition {
 public:
  Bipartition(std::size_t num_subsystems, Subsystems a, Subsystems b)
      : n_(num_subsystems), a_(std::move(a)), b_(std::move(b)) {
    std::sort(a_.begin(), a_.end());
    std::sort(b_.begin(), b_.end());
    if (b_.empty()) throw Error(ErrorCode::BadSubsystemIndex, "Bipartition: B side is empty");
    Subsystems all = a_;
    all.insert(all.end(), b_.begin(), b_.end());
    detail::validate_subsystems(n_, all, "Bipartition");
    if (all.size() != n_) {
      throw Error(ErrorCode::BadSubsystemIndex, "Bipartition: A and B must cover all " + std::to_string(n_) +
                                                    " subsystems");
    }
  }

  /// B = last subsystem, A = the rest.
  static Bipartition last_is_b(std::size_t num_subsystems) {
    Subsystems a;
    for (std::size_t k = 0; k + 1 < num_subsystems; ++k) a.push_back(k);
    return Bipartition(num_subsystems, a, {num_subsystems - 1});
  }

  /// Parses "A=0;B=1,2" (either side may be omitted; the other becomes the complement).
  static Bipartition parse(std::string_view text, std::size_t num_subsystems) {
    std::optional<Subsystems> a, b;
    auto bad = [&](const std::string& why) {
      return Error(ErrorCode::Parse, "split '" + std::string(text) + "': " + why);
    };
    while (!text.empty()) {
      const auto semi = text.find(';');
      std::string_view part = text.substr(0, semi);
      text = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
      while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
      if (part.empty()) continue;
      if (part.size() < 2 || part[1] != '=' || (part[0] != 'A' && part[0] != 'B')) {
        throw bad("expected A=... or B=...");
      }
      Subsystems idx;
      std::string_view list = part.substr(2);
      while (!list.empty()) {
        const auto comma = list.find(',');
        std::string_view tok = list.substr(0, comma);
        list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc{} || ptr != tok.data() + tok.size()) throw bad("bad index '" + std::string(tok) + "'");
        idx.push_back(value);
      }
      (part[0] == 'A' ? a : b) = std::move(idx);
    }
    if (!a && !b) throw bad("empty split");
    if (!b) b = detail::complement(num_subsystems, *a);
    if (!a) a = detail::complement(num_subsystems, *b);
    return Bipartition(num_subsystems, *a, *b);
  }

  const Subsystems& a() const noexcept { return a_; }
  const Subsystems& b() const noexcept { return b_; }
  std::size_t num_subsystems() const noexcept { return n_; }

  std::string to_string() const {
    auto list = [](const Subsystems& s) {
      std::string out;
      for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k]);
      return out;
    };
    return "A=" + list(a_) + ";B=" + list(b_);
  }

 private:
  std::size_t n_;
  Subsystems a_;
  Subsystems b_;
};

/// A named scalar together with what produced it.
struct MeasureReport {
  std::string name;
  double value = 0.0;
  std::map<std::string, std::string> inputs;
  std::string method;  // "closed-form" | "optimized" | "oracle"
};

namespace detail {

inline void require_split_matches(const DensityMatrix& rho, const Bipartition& split, const char* who) {
  if (split.num_subsystems() != rho.num_subsystems()) {
    throw Error(ErrorCode::BadSubsystemIndex, std::string(who) + ": split covers " +
                                                  std::to_string(split.num_subsystems()) + " subsystems, state has " +
                                                  std::to_string(rho.num_subsystems()));
  }
}

/// Rounding noise in [-1e-9, 0) becomes 0; anything more negative is a bug.
inline double clamp_measure(double value, const char* who) {
  if (value >= 0.0) return value;
  if (value >= -1e-9) return 0.0;
  throw Error(ErrorCode::InternalConsistency, std::string(who) + " evaluated to " + std::to_string(value));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dephasing

/// Zeroes every entry whose row and column differ on any of `subsystems`.
inline ComplexMatrix dephase(const ComplexMatrix& m, const Dims& dims, const Subsystems& subsystems) {
  detail::validate_subsystems(dims.size(), subsystems, "dephase");
  if (subsystems.empty()) return m;
  const auto st = detail::strides(dims);
  const auto n = static_cast<std::size_t>(m.rows());
  std::vector<std::size_t> key(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    for (std::size_t s : subsystems) k = k * dims[s] + (i / st[s]) % dims[s];
    key[i] = k;
  }
  ComplexMatrix out = m;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (key[i] != key[j]) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
    }
  }
  return out;
}

inline DensityMatrix dephase(const DensityMatrix& rho, const Subsystems& subsystems) {
  return DensityMatrix(dephase(rho.matrix(), rho.dims(), subsystems), rho.dims());
}

inline Subsystems all_subsystems(const DensityMatrix& rho) {
  Subsystems s(rho.num_subsystems());
  std::iota(s.begin(), s.end(), std::size_t{0});
  return s;
}

/// Full dephasing in the product incoherent basis.
inline DensityMatrix dephase(const DensityMatrix& rho) { return dephase(rho, all_subsystems(rho)); }

// ---------------------------------------------------------------------------
// Relative-entropy quantifiers

/// C_r(rho) = S(Delta(rho)) - S(rho). Also the distillable coherence.
inline double relative_entropy_of_coherence(const DensityMatrix& rho) {
  const ComplexMatrix diag = dephase(rho.matrix(), rho.dims(), all_subsystems(rho));
  return detail::clamp_measure(entropy_of(diag) - von_neumann_entropy(rho), "relative_entropy_of_coherence");
}

inline double distillable_coherence(const DensityMatrix& rho) { return relative_entropy_of_coherence(rho); }

/// C_r of a pure state: Shannon entropy of the basis populations.
inline double relative_entropy_of_coherence(const PureState& psi) {
  return shannon_entropy(psi.amplitudes().cwiseAbs2());
}

/// QI relative entropy C_r^{A|B}(rho) = S(Delta^B(rho)) - S(rho).
inline double qi_relative_entropy(const DensityMatrix& rho, const Bipartition& split) {
  detail::require_split_matches(rho, split, "qi_relative_entropy");
  const ComplexMatrix deph = dephase(rho.matrix(), rho.dims(), split.b());
  return detail::clamp_measure(entropy_of(deph) - von_neumann_entropy(rho), "qi_relative_entropy");
}

struct OracleOptions {
  std::size_t starts = 32;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 3000;
};

/// Direct minimization of S(rho||sigma) over quantum-incoherent sigma =
/// sum_j p_j sigma_j^A (x) |j><j|^B. The probabilities come from a softmax,
/// each sigma_j^A from L L^dagger / Tr with L an unconstrained complex matrix.
/// Intended as an independent check of the closed form at small dimension.
inline double qi_relative_entropy_oracle(const DensityMatrix& rho, const Bipartition& split,
                                         const OracleOptions& opts = {}) {
  detail::require_split_matches(rho, split, "qi_relative_entropy_oracle");
  if (rho.dim() > 16) {
    throw Error(ErrorCode::DimensionTooLarge, "qi_relative_entropy_oracle: total dimension " +
                                                  std::to_string(rho.dim()) + " exceeds 16");
  }
  const Dims a_dims = detail::select_dims(rho.dims(), split.a());
  const Dims b_dims = detail::select_dims(rho.dims(), split.b());
  const auto da = static_cast<Eigen::Index>(total_dim(a_dims));
  const auto db = static_cast<Eigen::Index>(total_dim(b_dims));
  Subsystems order = split.a();
  order.insert(order.end(), split.b().begin(), split.b().end());
  // Work in (A, B) order; the relative entropy is invariant under the reordering.
  const ComplexMatrix rho_ab = permute_subsystems(rho.matrix(), rho.dims(), order);
  const double s_rho = von_neumann_entropy(rho);

  const Eigen::Index per_block = 2 * da * da;
  const Eigen::Index nparams = db + db * per_block;

  auto build_sigma = [&](const RealVector& x) {
    RealVector logits = x.head(db);
    logits.array() -= logits.maxCoeff();
    RealVector p = logits.array().exp();
    p /= p.sum();
    ComplexMatrix sigma = ComplexMatrix::Zero(da * db, da * db);
    for (Eigen::Index j = 0; j < db; ++j) {
      ComplexMatrix l(da, da);
      for (Eigen::Index r = 0; r < da; ++r) {
        for (Eigen::Index c = 0; c < da; ++c) {
          const Eigen::Index off = db + j * per_block + 2 * (r * da + c);
          l(r, c) = Complex(x(off), x(off + 1));
        }
      }
      ComplexMatrix block = l * l.adjoint();
      block /= block.trace().real();
      for (Eigen::Index r = 0; r < da; ++r) {
        for (Eigen::Index c = 0; c < da; ++c) sigma(r * db + j, c * db + j) = p(j) * block(r, c);
      }
    }
    return sigma;
  };
  const optimize::Objective objective = [&](const RealVector& x) {
    const ComplexMatrix sigma = build_sigma(x);
    if (!sigma.allFinite()) return std::numeric_limits<double>::infinity();
    return detail::relative_entropy_raw(rho_ab, s_rho, sigma);
  };

  Rng rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  optimize::NelderMeadOptions nm;
  nm.initial_step = 0.5;
  nm.max_iterations = opts.max_iterations;
  optimize::Minimum best;
  best.value = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < std::max<std::size_t>(1, opts.starts); ++s) {
    RealVector x0(nparams);
    for (auto& v : x0) v = normal(rng);
    optimize::Minimum m = optimize::nelder_mead(objective, x0, nm);
    if (m.value < best.value) best = std::move(m);
  }
  best = optimize::polish(objective, std::move(best), nm, 4);
  return best.value;
}

// ---------------------------------------------------------------------------
// Correlations

inline double mutual_information(const DensityMatrix& rho, const Bipartition& split) {
  detail::require_split_matches(rho, split, "mutual_information");
  if (split.a().empty()) return 0.0;
  const double sa = entropy_of(partial_trace(rho.matrix(), rho.dims(), split.a()));
  const double sb = entropy_of(partial_trace(rho.matrix(), rho.dims(), split.b()));
  return detail::clamp_measure(sa + sb - von_neumann_entropy(rho), "mutual_information");
}

/// delta^{A|B}(rho) = I(rho) - I(Delta^B(rho)).
inline double basis_dependent_discord(const DensityMatrix& rho, const Bipartition& split) {
  const double before = mutual_information(rho, split);
  const double after = mutual_information(dephase(rho, split.b()), split);
  return detail::clamp_measure(before - after, "basis_dependent_discord");
}

// ---------------------------------------------------------------------------
// Coherence of assistance

struct EnsembleMember {
  double probability = 0.0;
  PureState state;
};
using Ensemble = std::vector<EnsembleMember>;

struct AssistanceResult {
  double value = 0.0;
  Ensemble witness;
  std::string method = "optimized";
};

inline double average_coherence(const Ensemble& ensemble) {
  double avg = 0.0;
  for (const auto& m : ensemble) avg += m.probability * relative_entropy_of_coherence(m.state);
  return avg;
}

inline ComplexMatrix ensemble_average(const Ensemble& ensemble) {
  if (ensemble.empty()) return {};
  const auto d = static_cast<Eigen::Index>(ensemble.front().state.dim());
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (const auto& e : ensemble) m += e.probability * e.state.projector();
  return m;
}

struct AssistanceOptions {
  /// Number of random isometries sampled before local refinement.
  std::size_t budget = 64;
  std::uint64_t seed = 0;
  /// How many of the best random starts get refined.
  std::size_t refine = 4;
  std::size_t max_iterations = 1500;
};

/// Best pure-state decomposition found for max sum_k p_k C_r(psi_k). Every
/// decomposition with m members is sqrt(p_k)|psi_k> = sum_i W_ki sqrt(l_i)|v_i>
/// for an m x r isometry W over the eigen-pairs (l_i, v_i); m = d^2 here. The
/// eigen-ensemble and its Fourier rotation are always among the candidates,
/// so the value is a certified lower bound on the true maximum.
inline AssistanceResult coherence_of_assistance(const DensityMatrix& rho, const AssistanceOptions& opts = {}) {
  const EigenSystem es = eig_hermitian(rho.matrix());
  const auto d = static_cast<Eigen::Index>(rho.dim());
  Eigen::Index r = 0;
  while (r < es.values.size() && es.values(r) > 1e-12) ++r;
  const Dims flat{rho.dim()};

  AssistanceResult result;
  if (r <= 1) {
    result.witness.push_back({1.0, PureState::normalized(es.vectors.col(0), flat)});
    result.value = relative_entropy_of_coherence(result.witness.front().state);
    return result;
  }
  const Eigen::Index m = d * d;
  // Columns sqrt(l_i) v_i.
  ComplexMatrix weighted = es.vectors.leftCols(r) * es.values.head(r).cwiseSqrt().cast<Complex>().asDiagonal();

  auto isometry = [&](const ComplexMatrix& g) -> ComplexMatrix {
    const ComplexMatrix gram = g.adjoint() * g;
    return g * hermitian_function(gram, [](double x) { return x > 1e-300 ? 1.0 / std::sqrt(x) : 0.0; });
  };
  auto value_of = [&](const ComplexMatrix& w) {
    // Row k of (weighted * w^T) holds the unnormalized member k.
    const ComplexMatrix members = w * weighted.transpose();  // m x d
    double total = 0.0;
    for (Eigen::Index k = 0; k < members.rows(); ++k) {
      const RealVector pops = members.row(k).cwiseAbs2().transpose();
      const double p = pops.sum();
      if (p <= 1e-300) continue;
      for (Eigen::Index n = 0; n < pops.size(); ++n) {
        if (pops(n) > 0.0) total -= pops(n) * std::log2(pops(n) / p);
      }
    }
    return total;
  };
  auto unpack = [&](const RealVector& x) {
    ComplexMatrix g(m, r);
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index i = 0; i < r; ++i) g(k, i) = Complex(x(2 * (k * r + i)), x(2 * (k * r + i) + 1));
    }
    return g;
  };
  auto pack = [&](const ComplexMatrix& g) {
    RealVector x(2 * m * r);
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index i = 0; i < r; ++i) {
        x(2 * (k * r + i)) = g(k, i).real();
        x(2 * (k * r + i) + 1) = g(k, i).imag();
      }
    }
    return x;
  };
  const optimize::Objective objective = [&](const RealVector& x) { return -value_of(isometry(unpack(x))); };

  std::vector<optimize::Minimum> starts;
  {
    ComplexMatrix eigen_w = ComplexMatrix::Zero(m, r);
    eigen_w.topRows(r) = identity(static_cast<std::size_t>(r));
    ComplexMatrix fourier_w = ComplexMatrix::Zero(m, r);
    for (Eigen::Index j = 0; j < r; ++j) {
      for (Eigen::Index k = 0; k < r; ++k) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(r);
        fourier_w(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(r)), phase);
      }
    }
    for (const auto& w : {eigen_w, fourier_w}) {
      const RealVector x = pack(w);
      starts.push_back({x, objective(x), 0});
    }
  }
  Rng rng(opts.seed);
  std::vector<optimize::Minimum> sampled;
  for (std::size_t s = 0; s < opts.budget; ++s) {
    const RealVector x = pack(ginibre(m, r, rng));
    sampled.push_back({x, objective(x), 0});
  }
  std::sort(sampled.begin(), sampled.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  for (std::size_t s = 0; s < std::min(opts.refine, sampled.size()); ++s) starts.push_back(sampled[s]);

  optimize::NelderMeadOptions nm;
  nm.initial_step = 0.2;
  nm.max_iterations = opts.max_iterations;
  optimize::Minimum best = starts.front();
  for (const auto& s : starts) {
    optimize::Minimum refined = optimize::nelder_mead(objective, s.x, nm);
    if (s.value < refined.value) refined = s;
    if (refined.value < best.value) best = std::move(refined);
  }

  const ComplexMatrix w = isometry(unpack(best.x));
  const ComplexMatrix members = w * weighted.transpose();
  for (Eigen::Index k = 0; k < members.rows(); ++k) {
    const ComplexVector u = members.row(k).transpose();
    const double p = u.squaredNorm();
    if (p <= 1e-14) continue;
    result.witness.push_back({p, PureState::normalized(u, flat)});
  }
  result.value = average_coherence(result.witness);
  return result;
}

// ---------------------------------------------------------------------------
// Continuity

struct ContinuityBound {
  double bound = 0.0;
  double trace_distance = 0.0;
  /// |C_r^{X|Y}(rho) - C_r^{X|Y}(sigma)|
  double difference = 0.0;
  /// T <= 1/2, where the bound is monotone in T.
  bool monotone_regime = true;
};

/// 2 T log2(d_XY) + 2 h(T) with T the trace distance.
inline ContinuityBound continuity_bound(const DensityMatrix& rho, const DensityMatrix& sigma,
                                        const Bipartition& split) {
  if (rho.dims() != sigma.dims()) {
    throw Error(ErrorCode::DimensionMismatch, "continuity_bound: dims " + dims_string(rho.dims()) + " vs " +
                                                  dims_string(sigma.dims()));
  }
  ContinuityBound out;
  out.trace_distance = trace_distance(rho, sigma);
  const double t = std::min(out.trace_distance, 1.0);
  out.bound = 2.0 * t * std::log2(static_cast<double>(rho.dim())) + 2.0 * binary_entropy(t);
  out.difference = std::abs(qi_relative_entropy(rho, split) - qi_relative_entropy(sigma, split));
  out.monotone_regime = out.trace_distance <= 0.5;
  return out;
}

}  // namespace coherlab
