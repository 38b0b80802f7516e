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

// Seeded property suites. Trial t of a suite started with seed s uses seed
// s + t, so any failure reruns in isolation with --seed (s + t) --trials 1.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coherlab/channels.hpp"
#include "coherlab/measures.hpp"
#include "coherlab/protocols.hpp"
#include "coherlab/states.hpp"

namespace coherlab::suites {

struct PropertyOutcome {
  std::string property;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::vector<std::uint64_t> failing_seeds;
  /// Largest violation observed; "passes" means worst <= tolerance.
  double worst = 0.0;
  double tolerance = 0.0;

  bool passed() const { return failures == 0; }
};

/// A trial returns its violation (<= 0 means satisfied with margin).
using Trial = std::function<double(std::uint64_t seed)>;

inline PropertyOutcome run_property(const std::string& name, std::size_t trials, std::uint64_t seed, double tolerance,
                                    const Trial& trial) {
  PropertyOutcome out{name, trials, 0, {}, -std::numeric_limits<double>::infinity(), tolerance};
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t s = seed + t;
    double v = 0.0;
    try {
      v = trial(s);
    } catch (const Error&) {
      v = std::numeric_limits<double>::infinity();
    }
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    out.worst = std::max(out.worst, v);
    if (v > tolerance) {
      ++out.failures;
      out.failing_seeds.push_back(s);
    }
  }
  if (trials == 0) out.worst = 0.0;
  return out;
}

namespace detail {

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Rank-random state on one of (2,2), (2,3), (3,2), (3,3).
inline DensityMatrix small_bipartite(Rng& rng) {
  const Dims dims{pick(rng, 2, 3), pick(rng, 2, 3)};
  return random_density(dims, pick(rng, 1, dims[0] * dims[1]), rng);
}

inline DensityMatrix non_qi_two_qubit(Rng& rng) {
  for (;;) {
    DensityMatrix rho = random_density(Dims{2, 2}, pick(rng, 1, 4), rng);
    if (trace_norm(rho.matrix() - dephase(rho, {1}).matrix()) > 1e-3) return rho;
  }
}

}  // namespace detail

// Each suite below returns one or more PropertyOutcome rows.

inline std::vector<PropertyOutcome> teleport(std::size_t trials, std::uint64_t seed) {
  return {run_property("teleport-fidelity", trials, seed, 1e-9, [](std::uint64_t s) {
    const ProtocolResult r = incoherent_teleport(random_pure(Dims{2}, s));
    double v = 1.0 - r.metrics.at("min_fidelity");
    v = std::max(v, std::abs(r.metrics.at("min_probability") - 0.25));
    v = std::max(v, std::abs(r.metrics.at("max_probability") - 0.25));
    return r.metrics.at("alice_kraus_incoherent") == 1.0 ? v : std::numeric_limits<double>::infinity();
  })};
}

inline std::vector<PropertyOutcome> mc_distill(std::size_t trials, std::uint64_t seed) {
  return {run_property("mc-distill-per-outcome", trials, seed, 1e-9, [](std::uint64_t s) {
    Rng rng(s);
    const DensityMatrix coeffs = random_density(Dims{3}, detail::pick(rng, 1, 3), rng);
    return assisted_distill_mc(maximally_correlated(coeffs.matrix())).metrics.at("max_deviation");
  })};
}

inline std::vector<PropertyOutcome> steering(std::size_t trials, std::uint64_t seed) {
  return {run_property("steering-non-qi-found", trials, seed, 0.0,
                       [](std::uint64_t s) {
                         Rng rng(s);
                         const auto w = find_steering_measurement(detail::non_qi_two_qubit(rng));
                         if (!w) return 1.0;
                         const bool ok = w->probability > 1e-10 && w->bob_coherence > 1e-8 &&
                                         is_incoherent_operator(w->kraus_op);
                         return ok ? 0.0 : 1.0;
                       }),
          run_property("steering-qi-none", trials, seed, 0.0, [](std::uint64_t s) {
            return find_steering_measurement(random_qi_state(Dims{2, 2}, s)) ? 1.0 : 0.0;
          })};
}

inline std::vector<PropertyOutcome> sqi_monotone(std::size_t trials, std::uint64_t seed) {
  return {run_property("sqi-monotonicity", trials, seed, 1e-9, [](std::uint64_t s) {
    Rng rng(s);
    const DensityMatrix rho = detail::small_bipartite(rng);
    const Dims a{rho.dims()[0]}, b{rho.dims()[1]};
    const LocalProtocol p = random_local_protocol(a, b, detail::pick(rng, 1, 2), Locality::LQICC, rng);
    const Bipartition split = Bipartition::last_is_b(2);
    const DensityMatrix out = average_state(run_protocol(p, rho));
    return qi_relative_entropy(out, split) - qi_relative_entropy(rho, split);
  })};
}

inline std::vector<PropertyOutcome> sqi_to_si(std::size_t trials, std::uint64_t seed) {
  return {run_property("sqi-to-si-bob-marginal", trials, seed, 1e-9, [](std::uint64_t s) {
    Rng rng(s);
    const DensityMatrix rho = detail::small_bipartite(rng);
    const Dims a{rho.dims()[0]}, b{rho.dims()[1]};
    const ProductKrausChannel sqi =
        to_product_channel(random_local_protocol(a, b, detail::pick(rng, 1, 2), Locality::LQICC, rng));
    const ProductKrausChannel si = sqi_to_si_reduce(sqi);
    if (!classify(si).separable_incoherent) return std::numeric_limits<double>::infinity();
    const DensityMatrix before = partial_trace(apply(sqi, rho), {1});
    const DensityMatrix after = partial_trace(apply(si, rho), {1});
    return trace_norm(before.matrix() - after.matrix());
  })};
}

inline std::vector<PropertyOutcome> ancilla(std::size_t trials, std::uint64_t seed) {
  return {run_property("ancilla-reduction", trials, seed, 1e-9, [](std::uint64_t s) {
    Rng rng(s);
    const std::size_t da = detail::pick(rng, 2, 3), db = detail::pick(rng, 2, 3);
    const AncillaDims anc{detail::pick(rng, 2, 3), detail::pick(rng, 2, 3)};
    const ProductKrausChannel tilde =
        to_product_channel(random_local_protocol(Dims{da, anc.alice}, Dims{db, anc.bob}, 1, Locality::LICC, rng));
    const ProductKrausChannel reduced = ancilla_reduce(tilde, anc);
    for (const auto& p : reduced.pairs()) {
      if (!is_incoherent_operator(p.a) || !is_incoherent_operator(p.b)) return std::numeric_limits<double>::infinity();
    }
    const DensityMatrix rho = random_density(Dims{da, db}, detail::pick(rng, 1, da * db), rng);
    // Order (A, B, A', B') with both ancillas in |0>.
    const DensityMatrix zeros = tensor_product(PureState(basis_vector(anc.alice, 0), Dims{anc.alice}).density(),
                                               PureState(basis_vector(anc.bob, 0), Dims{anc.bob}).density());
    const DensityMatrix extended = tensor_product(rho, zeros);
    const DensityMatrix direct = partial_trace(apply(tilde, extended, {0, 2}, {1, 3}), {0, 1});
    return trace_norm(apply(reduced, rho).matrix() - direct.matrix());
  })};
}

inline std::vector<PropertyOutcome> closed_form(std::size_t trials, std::uint64_t seed) {
  return {run_property("qire-closed-form", trials, seed, 1e-9, [](std::uint64_t s) {
    Rng rng(s);
    const DensityMatrix rho = detail::small_bipartite(rng);
    const double via_divergence = relative_entropy(rho, dephase(rho, {1}));
    return std::abs(via_divergence - qi_relative_entropy(rho, Bipartition::last_is_b(2)));
  })};
}

/// Violation is the distance outside [-1e-4, 1e-2] of (oracle - closed form).
inline std::vector<PropertyOutcome> oracle(std::size_t trials, std::uint64_t seed) {
  return {run_property("qire-oracle-window", trials, seed, 0.0, [](std::uint64_t s) {
    Rng rng(s);
    const DensityMatrix rho = random_density(Dims{2, 2}, detail::pick(rng, 1, 4), rng);
    const Bipartition split = Bipartition::last_is_b(2);
    OracleOptions opts;
    opts.seed = s;
    const double gap = qi_relative_entropy_oracle(rho, split, opts) - qi_relative_entropy(rho, split);
    return std::max(-1e-4 - gap, gap - 1e-2);
  })};
}

inline std::vector<PropertyOutcome> continuity(std::size_t trials, std::uint64_t seed) {
  return {run_property("continuity-bound", trials, seed, 1e-12, [](std::uint64_t s) {
    Rng rng(s);
    const DensityMatrix rho = detail::small_bipartite(rng);
    DensityMatrix sigma = random_density(rho.dims(), detail::pick(rng, 1, rho.dim()), rng);
    // Half the pairs are close, where the bound is tight.
    if (s % 2 == 0) {
      const double eps = std::uniform_real_distribution<double>(0.0, 0.1)(rng);
      sigma = DensityMatrix((1.0 - eps) * rho.matrix() + eps * sigma.matrix(), rho.dims());
    }
    const ContinuityBound b = continuity_bound(rho, sigma, Bipartition::last_is_b(2));
    return b.difference - b.bound;
  })};
}

inline std::vector<PropertyOutcome> chain(std::size_t trials, std::uint64_t seed) {
  return {run_property("assistance-below-dephased-entropy", trials, seed, 1e-9,
                       [](std::uint64_t s) {
                         Rng rng(s);
                         const DensityMatrix rho = random_density(Dims{2, 2}, detail::pick(rng, 1, 4), rng);
                         const DensityMatrix rho_b = partial_trace(rho, {1});
                         AssistanceOptions opts;
                         opts.seed = s;
                         return coherence_of_assistance(rho_b, opts).value - von_neumann_entropy(dephase(rho_b));
                       }),
          run_property("qire-nonnegative", trials, seed, 0.0,
                       [](std::uint64_t s) {
                         Rng rng(s);
                         return -qi_relative_entropy(detail::small_bipartite(rng), Bipartition::last_is_b(2));
                       }),
          run_property("pure-qire-equals-dephased-entropy", trials, seed, 1e-9, [](std::uint64_t s) {
            Rng rng(s);
            const Dims dims{detail::pick(rng, 2, 3), detail::pick(rng, 2, 3)};
            const DensityMatrix psi = random_pure(dims, rng).density();
            const double direct = von_neumann_entropy(dephase(partial_trace(psi, {1})));
            return std::abs(qi_relative_entropy(psi, Bipartition::last_is_b(2)) - direct);
          })};
}

struct SuiteEntry {
  const char* name;
  std::vector<PropertyOutcome> (*run)(std::size_t, std::uint64_t);
};

inline const std::vector<SuiteEntry>& registry() {
  static const std::vector<SuiteEntry> entries = {
      {"teleport", teleport},       {"mc-distill", mc_distill}, {"steering", steering},
      {"sqi-monotone", sqi_monotone}, {"sqi-to-si", sqi_to_si},  {"ancilla", ancilla},
      {"closed-form", closed_form}, {"oracle", oracle},         {"continuity", continuity},
      {"chain", chain},
  };
  return entries;
}

}  // namespace coherlab::suites
