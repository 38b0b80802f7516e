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

// Executable versions of the distributed-coherence constructions: incoherent
// teleportation, assisted distillation, steering, the SQI -> SI and ancilla
// reductions, domino discrimination and the single-shot merging witness.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coherlab/channels.hpp"
#include "coherlab/measures.hpp"
#include "coherlab/states.hpp"

namespace coherlab {

struct ProtocolResult {
  std::vector<ProtocolLeaf> outcomes;
  std::map<std::string, double> metrics;
  /// Named operators the construction produces along the way.
  std::vector<std::pair<std::string, ComplexMatrix>> exhibits;

  double total_probability() const {
    double p = 0.0;
    for (const auto& o : outcomes) p += o.probability;
    return p;
  }
};

namespace detail {

inline ComplexMatrix pauli(int k) {
  ComplexMatrix m(2, 2);
  switch (k) {
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: m = identity(2);
  }
  return m;
}

inline double fidelity(const PureState& psi, const DensityMatrix& rho) {
  return psi.amplitudes().dot(rho.matrix() * psi.amplitudes()).real();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Incoherent teleportation

/// K_i = |00><phi_i| on Alice's two qubits, Bell states in bell_states() order.
inline std::vector<ComplexMatrix> teleport_alice_kraus() {
  std::vector<ComplexMatrix> ops;
  const ComplexVector zero = basis_vector(4, 0);
  for (const auto& bell : bell_states()) ops.push_back(outer(zero, bell.amplitudes()));
  return ops;
}

/// Bob's correction per Alice outcome: identity, sigma_3, sigma_1, i sigma_2.
inline std::vector<ComplexMatrix> teleport_corrections() {
  return {detail::pauli(0), detail::pauli(3), detail::pauli(1), Complex(0, 1) * detail::pauli(2)};
}

/// The LICC script: Alice (A', A) measures with K_i, Bob (B) corrects on i.
inline LocalProtocol teleport_protocol() {
  LocalProtocol p;
  p.a_dims = {2, 2};
  p.b_dims = {2};
  p.locality = Locality::LICC;
  p.rounds.push_back({Party::Alice, {KrausChannel(teleport_alice_kraus(), Dims{2, 2})}, {}});
  ProtocolRound bob{Party::Bob, {}, [](const Transcript& t) { return t.back(); }};
  for (const auto& u : teleport_corrections()) bob.branches.emplace_back(std::vector<ComplexMatrix>{u}, Dims{2});
  p.rounds.push_back(std::move(bob));
  return p;
}

/// Teleports a qubit through |phi+>^{AB} using only incoherent local
/// operations. Subsystem order is (A', A, B).
inline ProtocolResult incoherent_teleport(const PureState& psi) {
  if (psi.dims() != Dims{2}) {
    throw Error(ErrorCode::BadDimension, "incoherent_teleport: input must be one qubit, got dims " +
                                             dims_string(psi.dims()));
  }
  const DensityMatrix initial = tensor_product(psi, bell_states().front()).density();
  ProtocolResult result;
  result.outcomes = run_protocol(teleport_protocol(), initial);
  double min_fid = 1.0, min_p = 1.0, max_p = 0.0;
  for (const auto& leaf : result.outcomes) {
    const DensityMatrix bob = partial_trace(leaf.state, {2});
    min_fid = std::min(min_fid, detail::fidelity(psi, bob));
    min_p = std::min(min_p, leaf.probability);
    max_p = std::max(max_p, leaf.probability);
  }
  bool incoherent = true;
  for (const auto& k : teleport_alice_kraus()) incoherent = incoherent && is_incoherent_operator(k);
  result.metrics["min_fidelity"] = min_fid;
  result.metrics["min_probability"] = min_p;
  result.metrics["max_probability"] = max_p;
  result.metrics["total_probability"] = result.total_probability();
  result.metrics["branches"] = static_cast<double>(result.outcomes.size());
  result.metrics["alice_kraus_incoherent"] = incoherent ? 1.0 : 0.0;
  return result;
}

// ---------------------------------------------------------------------------
// Assisted distillation

/// Alice's incoherent measurement K_i = |i><e_i| realizing `ensemble` for
/// Bob. When the ensemble has more members than Alice's dimension the
/// |e_i> form a rank-one POVM and the labels wrap modulo d_A. Outcomes that
/// complete the instrument outside the Schmidt support never fire.
inline ProtocolResult assisted_distill_pure(const PureState& psi, const std::optional<Ensemble>& decomposition = {},
                                            const AssistanceOptions& opts = {}) {
  if (psi.dims().size() != 2) {
    throw Error(ErrorCode::BadDimension, "assisted_distill_pure: expected a bipartite state, got dims " +
                                             dims_string(psi.dims()));
  }
  const std::size_t da = psi.dims()[0], db = psi.dims()[1];
  const DensityMatrix rho = psi.density();
  const DensityMatrix rho_b = partial_trace(rho, {1});
  const Ensemble ensemble = decomposition ? *decomposition : coherence_of_assistance(rho_b, opts).witness;
  for (const auto& m : ensemble) {
    if (m.state.dim() != db) throw Error(ErrorCode::EnsembleMismatch, "assisted_distill_pure: member dimension");
  }
  const double mismatch = trace_norm(ensemble_average(ensemble) - rho_b.matrix());
  if (mismatch > 1e-8) {
    std::ostringstream os;
    os << "assisted_distill_pure: ensemble average differs from Bob's state by " << mismatch << " in trace norm";
    throw Error(ErrorCode::EnsembleMismatch, os.str());
  }

  // psi = sum_ab C_ab |a>|b>; (<e| (x) 1)|psi> = C^T conj(e).
  ComplexMatrix c(static_cast<Eigen::Index>(da), static_cast<Eigen::Index>(db));
  for (std::size_t a = 0; a < da; ++a) {
    for (std::size_t b = 0; b < db; ++b) {
      c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = psi.amplitudes()(static_cast<Eigen::Index>(a * db + b));
    }
  }
  const ComplexMatrix x = c.transpose();
  Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> solver(x);
  solver.setThreshold(1e-12);
  std::vector<ComplexMatrix> kraus;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const ComplexVector target = std::sqrt(ensemble[i].probability) * ensemble[i].state.amplitudes();
    const ComplexVector e_conj = solver.solve(target);
    kraus.push_back(outer(basis_vector(da, i % da), e_conj.conjugate()));
  }
  LocalProtocol p;
  p.a_dims = {da};
  p.b_dims = {db};
  p.locality = Locality::LICC;
  p.rounds.push_back({Party::Alice, {complete_incoherent_instrument(kraus, Dims{da}, Dims{da})}, {}});

  ProtocolResult result;
  result.outcomes = run_protocol(p, rho);
  double avg = 0.0;
  for (const auto& leaf : result.outcomes) {
    avg += leaf.probability * relative_entropy_of_coherence(partial_trace(leaf.state, {1}));
  }
  for (std::size_t i = 0; i < kraus.size(); ++i) result.exhibits.emplace_back("K_" + std::to_string(i), kraus[i]);
  result.metrics["average_coherence"] = avg;
  result.metrics["ensemble_average_coherence"] = average_coherence(ensemble);
  result.metrics["upper_bound"] = von_neumann_entropy(dephase(rho_b));
  result.metrics["total_probability"] = result.total_probability();
  return result;
}

/// Alice measures in the Fourier basis (after undoing `u` on A when given);
/// every outcome leaves Bob with coherence S(Delta^B(rho)) - S(rho).
inline ProtocolResult assisted_distill_mc(const DensityMatrix& rho, const std::optional<ComplexMatrix>& u = {}) {
  if (rho.dims().size() != 2 || rho.dims()[0] != rho.dims()[1]) {
    throw Error(ErrorCode::NotMaximallyCorrelated, "assisted_distill_mc: expected dims (d, d), got " +
                                                       dims_string(rho.dims()));
  }
  const std::size_t d = rho.dims()[0];
  const auto n = static_cast<Eigen::Index>(d);
  if (u && (u->rows() != n || u->cols() != n || max_abs(u->adjoint() * *u - identity(d)) > 1e-9)) {
    throw Error(ErrorCode::NotMaximallyCorrelated, "assisted_distill_mc: U is not a d x d unitary");
  }
  ComplexMatrix undone = rho.matrix();
  if (u) {
    const ComplexMatrix lifted = tensor_product(*u, identity(d));
    undone = lifted.adjoint() * undone * lifted;
  }
  double leak = 0.0;
  for (Eigen::Index r = 0; r < n * n; ++r) {
    for (Eigen::Index c = 0; c < n * n; ++c) {
      if (r / n != r % n || c / n != c % n) leak = std::max(leak, std::abs(undone(r, c)));
    }
  }
  if (leak > 1e-9) {
    std::ostringstream os;
    os << "assisted_distill_mc: state has weight " << leak << " outside span{|ii>}";
    throw Error(ErrorCode::NotMaximallyCorrelated, os.str());
  }

  const auto basis = fourier_mc_basis(d);
  std::vector<ComplexMatrix> kraus;
  for (std::size_t j = 0; j < d; ++j) {
    ComplexMatrix k = outer(basis_vector(d, j), basis[j].amplitudes());
    if (u) k = k * u->adjoint();
    kraus.push_back(std::move(k));
  }
  LocalProtocol p;
  p.a_dims = {d};
  p.b_dims = {d};
  p.locality = Locality::LICC;
  p.rounds.push_back({Party::Alice, {KrausChannel(kraus, Dims{d})}, {}});

  ProtocolResult result;
  result.outcomes = run_protocol(p, rho);
  const double target = qi_relative_entropy(rho, Bipartition(2, {0}, {1}));
  double deviation = 0.0, min_cr = std::numeric_limits<double>::infinity(), max_cr = 0.0;
  for (const auto& leaf : result.outcomes) {
    const double cr = relative_entropy_of_coherence(partial_trace(leaf.state, {1}));
    deviation = std::max(deviation, std::abs(cr - target));
    min_cr = std::min(min_cr, cr);
    max_cr = std::max(max_cr, cr);
  }
  for (std::size_t j = 0; j < d; ++j) {
    // U_j = sum_k exp(i phi_k^j)|k><k| maps Bob's outcome-j state back to the coefficient matrix.
    ComplexMatrix uj = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < d; ++k) {
      uj(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) =
          basis[j].amplitudes()(static_cast<Eigen::Index>(k)) * std::sqrt(static_cast<double>(d));
    }
    result.exhibits.emplace_back("U_" + std::to_string(j), uj);
  }
  result.metrics["target"] = target;
  result.metrics["max_deviation"] = deviation;
  result.metrics["min_coherence"] = min_cr;
  result.metrics["max_coherence"] = max_cr;
  result.metrics["total_probability"] = result.total_probability();
  return result;
}

// ---------------------------------------------------------------------------
// Steering

struct SteeringWitness {
  ComplexMatrix kraus_op;
  double probability = 0.0;
  DensityMatrix bob_post_state;
  double bob_coherence = 0.0;
  /// kraus_op completed to a full incoherent instrument; it is outcome 0.
  KrausChannel instrument;
};

struct SteeringOptions {
  std::size_t theta_grid = 64;
  double min_probability = 1e-10;
  double min_coherence = 1e-8;
  double offdiagonal_tol = 1e-8;
};

namespace detail {

inline double offdiagonal_max(const ComplexMatrix& m) {
  double x = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (r != c) x = std::max(x, std::abs(m(r, c)));
    }
  }
  return x;
}

struct SteeredBob {
  double probability = 0.0;
  ComplexMatrix unnormalized;
};

/// (<e| (x) 1) rho (|e> (x) 1) for a bipartite (A, B) state.
inline SteeredBob steer(const ComplexMatrix& rho, std::size_t da, std::size_t db, const ComplexVector& e) {
  const auto nb = static_cast<Eigen::Index>(db);
  ComplexMatrix bob = ComplexMatrix::Zero(nb, nb);
  for (std::size_t a = 0; a < da; ++a) {
    for (std::size_t a2 = 0; a2 < da; ++a2) {
      const Complex w = std::conj(e(static_cast<Eigen::Index>(a))) * e(static_cast<Eigen::Index>(a2));
      if (w == Complex{}) continue;
      bob += w * rho.block(static_cast<Eigen::Index>(a * db), static_cast<Eigen::Index>(a2 * db), nb, nb);
    }
  }
  return {bob.trace().real(), bob};
}

inline double steered_coherence(const SteeredBob& s, double min_probability, std::size_t db) {
  if (s.probability <= min_probability) return -1.0;
  const ComplexMatrix m = s.unnormalized / s.probability;
  return entropy_of(dephase(m, Dims{db}, {0})) - entropy_of(m);
}

}  // namespace detail

/// Finds an incoherent Alice operation that leaves Bob coherent with nonzero
/// probability. Empty iff the state is quantum-incoherent within tolerance.
inline std::optional<SteeringWitness> find_steering_measurement(const DensityMatrix& rho,
                                                                const SteeringOptions& opts = {}) {
  if (rho.dims().size() != 2) {
    throw Error(ErrorCode::BadDimension, "find_steering_measurement: expected dims (d_A, d_B), got " +
                                             dims_string(rho.dims()));
  }
  const std::size_t da = rho.dims()[0], db = rho.dims()[1];
  const auto na = static_cast<Eigen::Index>(da);
  const ComplexMatrix e = eig_hermitian(partial_trace(rho.matrix(), rho.dims(), {0})).vectors;
  // N_ij = (<e_i| (x) 1) rho (|e_j> (x) 1)
  auto block = [&](Eigen::Index i, Eigen::Index j) {
    const auto nb = static_cast<Eigen::Index>(db);
    ComplexMatrix n = ComplexMatrix::Zero(nb, nb);
    for (Eigen::Index a = 0; a < na; ++a) {
      for (Eigen::Index a2 = 0; a2 < na; ++a2) {
        n += std::conj(e(a, i)) * e(a2, j) * rho.matrix().block(a * nb, a2 * nb, nb, nb);
      }
    }
    return n;
  };

  auto make_witness = [&](const ComplexMatrix& kraus, const detail::SteeredBob& s, double coherence,
                          KrausChannel instrument) {
    return SteeringWitness{kraus, s.probability, DensityMatrix(s.unnormalized / s.probability, Dims{db}), coherence,
                           std::move(instrument)};
  };

  // Diagonal blocks: Alice measures in {|e_i>} with K_i = |i><e_i|.
  {
    std::optional<Eigen::Index> best;
    double best_c = opts.min_coherence;
    for (Eigen::Index i = 0; i < na; ++i) {
      const ComplexMatrix n = block(i, i);
      if (detail::offdiagonal_max(n) <= opts.offdiagonal_tol) continue;
      const double c = detail::steered_coherence({n.trace().real(), n}, opts.min_probability, db);
      if (c > best_c) {
        best_c = c;
        best = i;
      }
    }
    if (best) {
      std::vector<ComplexMatrix> ops;
      for (Eigen::Index i = 0; i < na; ++i) ops.push_back(outer(basis_vector(da, static_cast<std::size_t>(i)), e.col(i)));
      const auto s = detail::steer(rho.matrix(), da, db, e.col(*best));
      // Put the witness operator first.
      std::swap(ops[0], ops[static_cast<std::size_t>(*best)]);
      return make_witness(ops[0], s, best_c, KrausChannel(ops, Dims{da}));
    }
  }

  // Off-diagonal blocks: |e_P> = cos t|e_k> + sin t|e_l>, |e_Q> = cos t|e_k> + i sin t|e_l>.
  const double half_pi = std::numbers::pi / 2.0;
  const std::size_t grid = std::max<std::size_t>(opts.theta_grid, 2);
  double best_c = opts.min_coherence;
  std::optional<ComplexVector> best_vec;
  for (Eigen::Index k = 0; k < na; ++k) {
    for (Eigen::Index l = k + 1; l < na; ++l) {
      const ComplexMatrix nkl = block(k, l);
      const ComplexMatrix p = nkl + nkl.adjoint();
      const ComplexMatrix q = Complex(0, 1) * (nkl - nkl.adjoint());
      for (int variant = 0; variant < 2; ++variant) {
        if (detail::offdiagonal_max(variant == 0 ? p : q) <= opts.offdiagonal_tol) continue;
        const Complex phase = variant == 0 ? Complex(1.0) : Complex(0, 1);
        auto vec = [&](double t) -> ComplexVector { return std::cos(t) * e.col(k) + phase * std::sin(t) * e.col(l); };
        auto score = [&](double t) {
          return detail::steered_coherence(detail::steer(rho.matrix(), da, db, vec(t)), opts.min_probability, db);
        };
        const double h = half_pi / static_cast<double>(grid);
        double t_best = 0.5 * h, c_best = score(t_best);
        for (std::size_t g = 1; g < grid; ++g) {
          const double t = (static_cast<double>(g) + 0.5) * h;
          const double c = score(t);
          if (c > c_best) {
            c_best = c;
            t_best = t;
          }
        }
        // Golden-section refinement around the best grid point.
        double lo = std::max(t_best - h, 1e-12), hi = std::min(t_best + h, half_pi - 1e-12);
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
        double f1 = score(x1), f2 = score(x2);
        for (int it = 0; it < 60; ++it) {
          if (f1 < f2) {
            lo = x1; x1 = x2; f1 = f2; x2 = lo + inv_phi * (hi - lo); f2 = score(x2);
          } else {
            hi = x2; x2 = x1; f2 = f1; x1 = hi - inv_phi * (hi - lo); f1 = score(x1);
          }
        }
        const double t_ref = f1 > f2 ? x1 : x2;
        const double c_ref = std::max(f1, f2);
        const double t_final = c_ref > c_best ? t_ref : t_best;
        const double c_final = std::max(c_ref, c_best);
        if (c_final > best_c) {
          best_c = c_final;
          best_vec = vec(t_final);
        }
      }
    }
  }
  if (!best_vec) return std::nullopt;
  const ComplexMatrix kraus = outer(basis_vector(da, 0), *best_vec);
  const auto s = detail::steer(rho.matrix(), da, db, *best_vec);
  return make_witness(kraus, s, best_c, complete_incoherent_instrument({kraus}, Dims{da}, Dims{da}));
}

// ---------------------------------------------------------------------------
// Reductions

/// Pinches Alice's output in her incoherent basis: pairs (Pi_j A_i, B_i).
/// Bob's reduced state is unchanged for every input.
inline ProductKrausChannel sqi_to_si_reduce(const ProductKrausChannel& ch) {
  if (!classify(ch).separable_quantum_incoherent) {
    throw Error(ErrorCode::NotSQI, "sqi_to_si_reduce: some Bob operator is coherent");
  }
  std::vector<KrausPair> pairs;
  for (const auto& p : ch.pairs()) {
    for (Eigen::Index j = 0; j < p.a.rows(); ++j) {
      ComplexMatrix pinched = ComplexMatrix::Zero(p.a.rows(), p.a.cols());
      pinched.row(j) = p.a.row(j);
      if (max_abs(pinched) <= 1e-15) continue;
      pairs.push_back({std::move(pinched), p.b});
    }
  }
  return ProductKrausChannel(std::move(pairs), ch.a_in(), ch.b_in(), ch.a_out(), ch.b_out());
}

struct AncillaDims {
  std::size_t alice = 1;
  std::size_t bob = 1;
};

/// Removes incoherent ancillas initialized in |0>: each party's last
/// subsystem in `ch_tilde` is its ancilla. Returns pairs
/// A_klm = Tr_A'[A~_k (1 (x) |0><l|)], B_klm = Tr_B'[B~_k (1 (x) |0><m|)].
inline ProductKrausChannel ancilla_reduce(const ProductKrausChannel& ch_tilde, const AncillaDims& ancilla) {
  if (!classify(ch_tilde).separable_incoherent) {
    throw Error(ErrorCode::NotSI, "ancilla_reduce: channel is not separable incoherent");
  }
  auto split = [](const Dims& in, const Dims& out, std::size_t anc, const char* who) {
    if (in != out || in.size() < 2 || in.back() != anc) {
      throw Error(ErrorCode::DimensionMismatch, std::string("ancilla_reduce: ") + who + " dims " + dims_string(in) +
                                                    " must end with an ancilla of dimension " + std::to_string(anc));
    }
    return Dims(in.begin(), in.end() - 1);
  };
  const Dims a_data = split(ch_tilde.a_in(), ch_tilde.a_out(), ancilla.alice, "Alice");
  const Dims b_data = split(ch_tilde.b_in(), ch_tilde.b_out(), ancilla.bob, "Bob");

  auto contract = [](const ComplexMatrix& op, std::size_t data, std::size_t anc, std::size_t l) {
    const ComplexMatrix shift = tensor_product(identity(data), ComplexMatrix(outer(basis_vector(anc, 0), basis_vector(anc, l))));
    return partial_trace(ComplexMatrix(op * shift), Dims{data, anc}, {0});
  };
  const auto da = total_dim(a_data), db = total_dim(b_data);
  std::vector<KrausPair> pairs;
  for (const auto& p : ch_tilde.pairs()) {
    std::vector<ComplexMatrix> as, bs;
    for (std::size_t l = 0; l < ancilla.alice; ++l) {
      ComplexMatrix a = contract(p.a, da, ancilla.alice, l);
      if (max_abs(a) > 1e-15) as.push_back(std::move(a));
    }
    for (std::size_t m = 0; m < ancilla.bob; ++m) {
      ComplexMatrix b = contract(p.b, db, ancilla.bob, m);
      if (max_abs(b) > 1e-15) bs.push_back(std::move(b));
    }
    for (const auto& a : as) {
      for (const auto& b : bs) pairs.push_back({a, b});
    }
  }
  return ProductKrausChannel(std::move(pairs), a_data, b_data);
}

// ---------------------------------------------------------------------------
// Domino discrimination and merging

/// A_i (x) B_i = |i><alpha_i| (x) |i><beta_i| with 9-level output registers.
inline ProductKrausChannel domino_channel() {
  const DominoFamily f = domino_states();
  std::vector<KrausPair> pairs;
  for (std::size_t i = 0; i < 9; ++i) {
    const ComplexVector flag = basis_vector(9, i);
    pairs.push_back({outer(flag, f.alpha[i].amplitudes()), outer(flag, f.beta[i].amplitudes())});
  }
  return ProductKrausChannel(std::move(pairs), Dims{3}, Dims{3}, Dims{9}, Dims{9});
}

/// Runs the domino channel on any 3x3 state; outcome i is reported as label i + 1.
inline ProtocolResult discriminate_domino(const DensityMatrix& rho) {
  const ProductKrausChannel ch = domino_channel();
  const ChannelClass cls = classify(ch);
  ProtocolResult result;
  for (auto& o : apply_instrument(ch, rho)) {
    result.outcomes.push_back({o.probability, std::move(o.state), Transcript{o.outcome}, o.outcome + 1});
  }
  result.metrics["completeness_residual"] = ch.completeness_residual();
  result.metrics["si"] = cls.separable_incoherent ? 1.0 : 0.0;
  result.metrics["sqi"] = cls.separable_quantum_incoherent ? 1.0 : 0.0;
  result.metrics["total_probability"] = result.total_probability();
  return result;
}

/// Discriminates the domino state |psi_k>, k in 1..9.
inline ProtocolResult discriminate_domino(std::size_t input_index) {
  if (input_index < 1 || input_index > 9) {
    throw Error(ErrorCode::BadDimension, "discriminate_domino: index " + std::to_string(input_index) +
                                             " not in 1..9");
  }
  const DominoFamily f = domino_states();
  ProtocolResult result = discriminate_domino(f.states[input_index - 1].density());
  double correct = 0.0;
  const ComplexVector flag = basis_vector(9, input_index - 1);
  const ComplexMatrix expected = tensor_product(ComplexMatrix(outer(flag, flag)), ComplexMatrix(outer(flag, flag)));
  double gap = 0.0;
  for (const auto& o : result.outcomes) {
    if (o.label == input_index) {
      correct += o.probability;
      gap = trace_norm(o.state.matrix() - expected);
    }
  }
  result.metrics["correct_probability"] = correct;
  result.metrics["post_state_gap"] = correct > 0.0 ? gap : 2.0;
  return result;
}

/// K_ij = |alpha_i><alpha_i|^A (x) |beta_i><j|^A' (x) |0><beta_i|^B: Alice
/// holds (A, A'), Bob holds B.
inline ProductKrausChannel sqi_merging_channel() {
  const DominoFamily f = domino_states();
  std::vector<KrausPair> pairs;
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const ComplexMatrix a = tensor_product(f.alpha[i].projector(),
                                             ComplexMatrix(outer(f.beta[i].amplitudes(), basis_vector(3, j))));
      pairs.push_back({a, outer(basis_vector(3, 0), f.beta[i].amplitudes())});
    }
  }
  return ProductKrausChannel(std::move(pairs), Dims{3, 3}, Dims{3});
}

struct MergingWitness {
  MeasureReport r_given_ab;  // C_r^{R|AB}
  MeasureReport rb_given_a;  // C_r^{RB|A}
  /// C_r^{R|AB} > C_r^{RB|A}: no SI operation performs the merge.
  bool si_ruled_out = false;
  /// Trace-norm distance between the SQI merge output on (R, A, A') and the target.
  double merge_gap = 0.0;
  ChannelClass merge_class;
  /// Subsystems of (R, A, B, A') that carry the target's (R, A, B) after merging.
  Subsystems relabeling;
};

inline MergingWitness merging_witness() {
  const DensityMatrix rho = merging_state();
  MergingWitness w;
  const Bipartition r_ab(3, {0}, {1, 2});
  const Bipartition rb_a(3, {0, 2}, {1});
  w.r_given_ab = {"C_r^{R|AB}", qi_relative_entropy(rho, r_ab), {{"state", "merging"}, {"split", r_ab.to_string()}},
                  "closed-form"};
  w.rb_given_a = {"C_r^{RB|A}", qi_relative_entropy(rho, rb_a), {{"state", "merging"}, {"split", rb_a.to_string()}},
                  "closed-form"};
  w.si_ruled_out = w.r_given_ab.value > w.rb_given_a.value;

  // Order (R, A, B, A'); Alice holds A and A'.
  const DensityMatrix register0 = PureState(basis_vector(3, 0), Dims{3}).density();
  const DensityMatrix initial = tensor_product(rho, register0);
  const ProductKrausChannel ch = sqi_merging_channel();
  w.merge_class = classify(ch);
  const DensityMatrix final_state = apply(ch, initial, {1, 3}, {2});
  w.relabeling = {0, 1, 3};
  const DensityMatrix merged = partial_trace(final_state, w.relabeling);
  w.merge_gap = trace_norm(merged.matrix() - rho.matrix());
  return w;
}

}  // namespace coherlab
