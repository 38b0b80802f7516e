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

// Command-line front end. run() is the whole program minus main(), so it can
// be driven in-process.

#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coherlab/channels.hpp"
#include "coherlab/io.hpp"
#include "coherlab/measures.hpp"
#include "coherlab/protocols.hpp"
#include "coherlab/states.hpp"
#include "coherlab/suites.hpp"

namespace coherlab::cli {

enum ExitCode : int { kOk = 0, kParseError = 2, kInvariantError = 3, kCheckFailed = 4 };

/// One output row. Rows with an expected value are checks.
struct Row {
  std::string name;
  double value = 0.0;
  std::optional<double> expected;
  double tolerance = 0.0;

  bool is_check() const { return expected.has_value(); }
  bool passed() const { return !expected || (std::isfinite(value) && std::abs(value - *expected) <= tolerance); }
  std::string status() const { return expected ? (passed() ? "pass" : "fail") : "ok"; }
};

struct Options {
  std::string command;
  std::string name;
  std::string state_path;
  std::string builtin;
  std::string split;
  std::string channel_path;
  std::string input = "random";
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string format;
  double tol = 1e-9;
  std::string out_path;
  std::size_t index = 0;
};

struct Report {
  io::Json json;
  std::vector<Row> rows;

  bool all_passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.passed(); });
  }
};

namespace detail {

inline Error parse_error(const std::string& what) { return Error(ErrorCode::Parse, what); }

inline Row check(std::string name, double value, double expected, double tol) {
  return {std::move(name), value, expected, tol};
}

inline io::Json rows_json(const std::vector<Row>& rows) {
  io::Json checks = io::Json::array();
  for (const auto& r : rows) {
    if (!r.is_check()) continue;
    checks.push_back({{"name", r.name}, {"value", r.value}, {"expected", *r.expected},
                      {"tolerance", r.tolerance}, {"status", r.status()}});
  }
  return checks;
}

inline io::Json metrics_json(const std::map<std::string, double>& metrics) {
  io::Json m = io::Json::object();
  for (const auto& [k, v] : metrics) m[k] = v;
  return m;
}

inline std::string csv(const std::vector<Row>& rows) {
  std::string s = "name,value,expected,tolerance,status\n";
  for (const auto& r : rows) {
    s += r.name + "," + io::format_number(r.value) + ",";
    if (r.expected) s += io::format_number(*r.expected) + "," + io::format_number(r.tolerance);
    else s += ",";
    s += "," + r.status() + "\n";
  }
  return s;
}

inline std::string pretty(const std::vector<Row>& rows) {
  std::size_t width = 4;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "name" << "  " << std::setw(24) << "value"
     << std::setw(24) << "expected" << "status\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::setw(24)
       << std::setprecision(12) << r.value << std::setw(24)
       << (r.expected ? io::format_number(*r.expected) : std::string("-")) << r.status() << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Inputs

inline DensityMatrix builtin_state(const std::string& name) {
  if (name == "bell") return bell_states().front().density();
  if (name == "merging") return merging_state();
  if (name == "psi2") return maximally_coherent(2).density();
  if (name.rfind("domino:", 0) == 0) {
    std::size_t k = 0;
    try {
      k = std::stoul(name.substr(7));
    } catch (const std::exception&) {
      throw parse_error("builtin " + name + ": expected domino:1 .. domino:9");
    }
    if (k < 1 || k > 9) throw parse_error("builtin " + name + ": expected domino:1 .. domino:9");
    return domino_states().states[k - 1].density();
  }
  throw parse_error("unknown builtin state \"" + name + "\" (bell, merging, psi2, domino:k)");
}

inline std::optional<DensityMatrix> state_input(const Options& o) {
  if (!o.state_path.empty() && !o.builtin.empty()) throw parse_error("--state and --builtin are exclusive");
  if (!o.state_path.empty()) return io::state_from_json(io::load(o.state_path));
  if (!o.builtin.empty()) return builtin_state(o.builtin);
  return std::nullopt;
}

inline DensityMatrix require_state(const Options& o) {
  auto rho = state_input(o);
  if (!rho) throw parse_error("a state is required (--state PATH or --builtin NAME)");
  return *rho;
}

inline std::string state_label(const Options& o) {
  return o.state_path.empty() ? "builtin:" + o.builtin : o.state_path;
}

inline Bipartition split_for(const Options& o, std::size_t n) {
  return o.split.empty() ? Bipartition::last_is_b(n) : Bipartition::parse(o.split, n);
}

/// Rank-one density matrices are accepted where a pure state is needed.
inline PureState as_pure(const DensityMatrix& rho) {
  const EigenSystem es = eig_hermitian(rho.matrix());
  if (std::abs(es.values(0) - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "state is not pure (largest eigenvalue " << es.values(0) << ")";
    throw Error(ErrorCode::InvalidState, os.str());
  }
  return PureState(ComplexVector(es.vectors.col(0)), rho.dims());
}

inline io::AnyChannel builtin_channel(const std::string& name) {
  if (name == "domino") return domino_channel();
  if (name == "merge") return sqi_merging_channel();
  throw parse_error("unknown builtin channel \"" + name + "\" (domino, merge)");
}

inline std::optional<io::AnyChannel> channel_input(const Options& o) {
  if (!o.channel_path.empty()) return io::channel_from_json(io::load(o.channel_path));
  if (!o.builtin.empty()) return builtin_channel(o.builtin);
  return std::nullopt;
}

inline ProductKrausChannel require_product(const io::AnyChannel& ch) {
  if (const auto* p = std::get_if<ProductKrausChannel>(&ch)) return *p;
  throw parse_error("this protocol needs a channel of kind \"product\"");
}

inline std::size_t trials_or(const Options& o, std::size_t fallback) { return o.trials == 0 ? fallback : o.trials; }

inline io::Json leaves_json(const std::vector<ProtocolLeaf>& leaves) {
  io::Json arr = io::Json::array();
  for (const auto& l : leaves) {
    arr.push_back({{"probability", l.probability}, {"transcript", l.transcript}, {"label", l.label},
                   {"state", io::to_json(l.state)}});
  }
  return arr;
}

inline io::Json protocol_json(const std::string& name, const ProtocolResult& r, const std::vector<Row>& rows,
                              bool with_outcomes) {
  io::Json j = {{"protocol", name}, {"metrics", metrics_json(r.metrics)}, {"checks", rows_json(rows)}};
  if (with_outcomes) j["outcomes"] = leaves_json(r.outcomes);
  if (!r.exhibits.empty()) {
    io::Json ex = io::Json::object();
    for (const auto& [k, m] : r.exhibits) ex[k] = io::entries_to_json(m);
    j["operators"] = ex;
  }
  return j;
}

inline std::vector<Row> metric_rows(const ProtocolResult& r) {
  std::vector<Row> rows;
  for (const auto& [k, v] : r.metrics) rows.push_back({k, v, std::nullopt, 0.0});
  return rows;
}

// ---------------------------------------------------------------------------
// Commands

inline Report cmd_measure(const Options& o) {
  const DensityMatrix rho = require_state(o);
  const std::size_t n = rho.num_subsystems();
  io::Json inputs = {{"state", state_label(o)}};
  double value = 0.0;
  std::string method = "closed-form";
  const std::string& m = o.name;
  if (m == "cr") {
    value = relative_entropy_of_coherence(rho);
  } else if (m == "entropy") {
    value = von_neumann_entropy(rho);
  } else if (m == "qire" || m == "discord" || m == "mutual-info" || m == "qire-oracle") {
    const Bipartition split = split_for(o, n);
    inputs["split"] = split.to_string();
    if (m == "qire") value = qi_relative_entropy(rho, split);
    if (m == "discord") value = basis_dependent_discord(rho, split);
    if (m == "mutual-info") value = mutual_information(rho, split);
    if (m == "qire-oracle") {
      OracleOptions opts;
      opts.seed = o.seed;
      value = qi_relative_entropy_oracle(rho, split, opts);
      method = "oracle";
      inputs["seed"] = o.seed;
    }
  } else if (m == "assistance") {
    DensityMatrix target = rho;
    if (n > 1) {
      const Bipartition split = split_for(o, n);
      inputs["split"] = split.to_string();
      target = partial_trace(rho, split.b());
    }
    AssistanceOptions opts;
    opts.seed = o.seed;
    value = coherence_of_assistance(target, opts).value;
    method = "optimized";
    inputs["seed"] = o.seed;
  } else {
    throw parse_error("unknown measure \"" + m + "\" (cr, qire, discord, mutual-info, assistance, entropy, qire-oracle)");
  }
  Report r;
  r.json = {{"name", m}, {"value", value}, {"method", method}, {"inputs", inputs}};
  r.rows.push_back({m, value, std::nullopt, 0.0});
  return r;
}

inline Report protocol_teleport(const Options& o) {
  std::vector<PureState> inputs;
  const std::size_t trials = trials_or(o, 1);
  if (auto rho = state_input(o)) {
    inputs.push_back(as_pure(*rho));
  } else if (o.input == "random") {
    for (std::size_t t = 0; t < trials; ++t) inputs.push_back(random_pure(Dims{2}, o.seed + t));
  } else if (o.input == "zero") {
    inputs.emplace_back(basis_vector(2, 0), Dims{2});
  } else if (o.input == "psi2") {
    inputs.push_back(maximally_coherent(2));
  } else {
    throw parse_error("--input must be random, zero or psi2");
  }
  double min_fid = 1.0, min_p = 1.0, max_p = 0.0, incoherent = 1.0;
  ProtocolResult last;
  for (const auto& psi : inputs) {
    last = incoherent_teleport(psi);
    min_fid = std::min(min_fid, last.metrics.at("min_fidelity"));
    min_p = std::min(min_p, last.metrics.at("min_probability"));
    max_p = std::max(max_p, last.metrics.at("max_probability"));
    incoherent = std::min(incoherent, last.metrics.at("alice_kraus_incoherent"));
  }
  ProtocolResult summary;
  summary.metrics = {{"trials", static_cast<double>(inputs.size())}};
  if (inputs.size() == 1) summary = last;
  std::vector<Row> rows = {check("min_fidelity", min_fid, 1.0, o.tol), check("min_probability", min_p, 0.25, o.tol),
                           check("max_probability", max_p, 0.25, o.tol),
                           check("alice_kraus_incoherent", incoherent, 1.0, 0.0)};
  return {protocol_json("teleport", summary, rows, inputs.size() == 1), rows};
}

inline Report protocol_distill_pure(const Options& o) {
  const DensityMatrix rho = state_input(o).value_or(bell_states().front().density());
  AssistanceOptions opts;
  opts.seed = o.seed;
  const ProtocolResult r = assisted_distill_pure(as_pure(rho), std::nullopt, opts);
  std::vector<Row> rows = metric_rows(r);
  rows.push_back(check("average_matches_ensemble",
                       r.metrics.at("average_coherence") - r.metrics.at("ensemble_average_coherence"), 0.0, o.tol));
  rows.push_back(check("upper_bound_excess",
                       std::max(0.0, r.metrics.at("average_coherence") - r.metrics.at("upper_bound")), 0.0, o.tol));
  io::Json j = protocol_json("distill-pure", r, rows, true);
  j["method"] = "optimized";
  return {j, rows};
}

inline Report protocol_distill_mc(const Options& o) {
  DensityMatrix rho = bell_states().front().density();
  if (auto given = state_input(o)) {
    rho = *given;
  } else if (o.input == "random") {
    rho = maximally_correlated(random_density(Dims{3}, 3, o.seed).matrix());
  }
  const ProtocolResult r = assisted_distill_mc(rho);
  std::vector<Row> rows = metric_rows(r);
  rows.push_back(check("per_outcome_deviation", r.metrics.at("max_deviation"), 0.0, o.tol));
  return {protocol_json("distill-mc", r, rows, true), rows};
}

inline Report protocol_steer(const Options& o) {
  const DensityMatrix rho = state_input(o).value_or(bell_states().front().density());
  const auto w = find_steering_measurement(rho);
  io::Json j = {{"protocol", "steer"}, {"found", w.has_value()}};
  std::vector<Row> rows = {{"found", w ? 1.0 : 0.0, std::nullopt, 0.0}};
  if (w) {
    j["probability"] = w->probability;
    j["bob_coherence"] = w->bob_coherence;
    j["kraus_op"] = io::entries_to_json(w->kraus_op);
    j["bob_post_state"] = io::to_json(w->bob_post_state);
    j["instrument"] = io::to_json(w->instrument);
    rows.push_back({"probability", w->probability, std::nullopt, 0.0});
    rows.push_back({"bob_coherence", w->bob_coherence, std::nullopt, 0.0});
  }
  j["checks"] = io::Json::array();
  return {j, rows};
}

inline Report protocol_discriminate(const Options& o) {
  std::size_t index = o.index;
  if (!o.builtin.empty()) {
    if (o.builtin.rfind("domino:", 0) != 0) throw parse_error("discriminate takes --builtin domino:k");
    builtin_state(o.builtin);
    index = std::stoul(o.builtin.substr(7));
  }
  std::vector<Row> rows;
  io::Json per = io::Json::array();
  const std::size_t lo = index == 0 ? 1 : index, hi = index == 0 ? 9 : index;
  if (hi > 9) throw parse_error("--index must be in 1..9");
  for (std::size_t k = lo; k <= hi; ++k) {
    const ProtocolResult r = discriminate_domino(k);
    if (k == lo) {
      rows.push_back(check("completeness_residual", r.metrics.at("completeness_residual"), 0.0, o.tol));
      rows.push_back(check("si", r.metrics.at("si"), 1.0, 0.0));
      rows.push_back(check("sqi", r.metrics.at("sqi"), 1.0, 0.0));
    }
    const std::string tag = "psi_" + std::to_string(k);
    rows.push_back(check(tag + "_probability", r.metrics.at("correct_probability"), 1.0, o.tol));
    rows.push_back(check(tag + "_post_state_gap", r.metrics.at("post_state_gap"), 0.0, o.tol));
    per.push_back(protocol_json("discriminate", r, {}, index != 0));
    per.back()["input"] = k;
  }
  return {{{"protocol", "discriminate"}, {"runs", per}, {"checks", rows_json(rows)}}, rows};
}

inline Report protocol_merge_witness(const Options& o) {
  const MergingWitness w = merging_witness();
  std::vector<Row> rows = {check("C_r(R|AB)", w.r_given_ab.value, 8.0 / 9.0, o.tol),
                           check("C_r(RB|A)", w.rb_given_a.value, 4.0 / 9.0, o.tol),
                           check("si_ruled_out", w.si_ruled_out ? 1.0 : 0.0, 1.0, 0.0),
                           check("sqi_merge_gap", w.merge_gap, 0.0, o.tol),
                           check("merge_channel_sqi", w.merge_class.separable_quantum_incoherent ? 1.0 : 0.0, 1.0, 0.0)};
  auto report_json = [](const MeasureReport& m) {
    io::Json inputs = io::Json::object();
    for (const auto& [k, v] : m.inputs) inputs[k] = v;
    return io::Json{{"name", m.name}, {"value", m.value}, {"method", m.method}, {"inputs", inputs}};
  };
  io::Json j = {{"protocol", "merge-witness"},
                {"reports", {report_json(w.r_given_ab), report_json(w.rb_given_a)}},
                {"si_ruled_out", w.si_ruled_out},
                {"merge_gap", w.merge_gap},
                {"merge_channel", {{"si", w.merge_class.separable_incoherent},
                                   {"sqi", w.merge_class.separable_quantum_incoherent}}},
                {"relabeling", w.relabeling},
                {"checks", rows_json(rows)}};
  return {j, rows};
}

inline Report protocol_sqi_to_si(const Options& o) {
  const ProductKrausChannel ch = require_product(channel_input(o).value_or(domino_channel()));
  const ProductKrausChannel si = sqi_to_si_reduce(ch);
  Rng rng(o.seed);
  const Dims dims = concat_dims(ch.a_in(), ch.b_in());
  Subsystems bob;
  for (std::size_t i = 0; i < ch.b_out().size(); ++i) bob.push_back(ch.a_out().size() + i);
  double gap = 0.0;
  const std::size_t trials = trials_or(o, 10);
  for (std::size_t t = 0; t < trials; ++t) {
    const DensityMatrix rho = random_density(dims, total_dim(dims), rng);
    gap = std::max(gap, trace_norm(partial_trace(apply(ch, rho), bob).matrix() -
                                   partial_trace(apply(si, rho), bob).matrix()));
  }
  std::vector<Row> rows = {check("bob_marginal_gap", gap, 0.0, o.tol),
                           check("output_si", classify(si).separable_incoherent ? 1.0 : 0.0, 1.0, 0.0)};
  return {{{"protocol", "sqi-to-si"}, {"channel", io::to_json(si)}, {"trials", trials}, {"checks", rows_json(rows)}},
          rows};
}

inline Report protocol_ancilla_reduce(const Options& o) {
  Rng rng(o.seed);
  ProductKrausChannel tilde = [&] {
    if (auto ch = channel_input(o)) return require_product(*ch);
    return to_product_channel(random_local_protocol(Dims{2, 2}, Dims{2, 2}, 1, Locality::LICC, rng));
  }();
  if (tilde.a_in().size() < 2 || tilde.b_in().size() < 2) {
    throw parse_error("ancilla-reduce: each party's dims must end with its ancilla");
  }
  const AncillaDims anc{tilde.a_in().back(), tilde.b_in().back()};
  const ProductKrausChannel reduced = ancilla_reduce(tilde, anc);
  const Dims a_data(tilde.a_in().begin(), tilde.a_in().end() - 1);
  const Dims b_data(tilde.b_in().begin(), tilde.b_in().end() - 1);
  const std::size_t na = a_data.size(), nb = b_data.size();
  Subsystems a_targets, b_targets, keep;
  for (std::size_t i = 0; i < na; ++i) a_targets.push_back(i);
  a_targets.push_back(na + nb);
  for (std::size_t i = 0; i < nb; ++i) b_targets.push_back(na + i);
  b_targets.push_back(na + nb + 1);
  for (std::size_t i = 0; i < na + nb; ++i) keep.push_back(i);
  const DensityMatrix zeros = tensor_product(PureState(basis_vector(anc.alice, 0), Dims{anc.alice}).density(),
                                             PureState(basis_vector(anc.bob, 0), Dims{anc.bob}).density());
  const Dims data = concat_dims(a_data, b_data);
  double gap = 0.0;
  const std::size_t trials = trials_or(o, 10);
  for (std::size_t t = 0; t < trials; ++t) {
    const DensityMatrix rho = random_density(data, total_dim(data), rng);
    const DensityMatrix direct = partial_trace(apply(tilde, tensor_product(rho, zeros), a_targets, b_targets), keep);
    gap = std::max(gap, trace_norm(apply(reduced, rho).matrix() - direct.matrix()));
  }
  std::vector<Row> rows = {check("reduction_gap", gap, 0.0, o.tol),
                           check("output_si", classify(reduced).separable_incoherent ? 1.0 : 0.0, 1.0, 0.0)};
  return {{{"protocol", "ancilla-reduce"}, {"channel", io::to_json(reduced)}, {"trials", trials},
           {"checks", rows_json(rows)}},
          rows};
}

inline Report cmd_protocol(const Options& o) {
  const std::string& n = o.name;
  if (n == "teleport") return protocol_teleport(o);
  if (n == "distill-pure") return protocol_distill_pure(o);
  if (n == "distill-mc") return protocol_distill_mc(o);
  if (n == "steer") return protocol_steer(o);
  if (n == "discriminate") return protocol_discriminate(o);
  if (n == "merge-witness") return protocol_merge_witness(o);
  if (n == "sqi-to-si") return protocol_sqi_to_si(o);
  if (n == "ancilla-reduce") return protocol_ancilla_reduce(o);
  throw parse_error("unknown protocol \"" + n +
                    "\" (teleport, distill-pure, distill-mc, steer, discriminate, merge-witness, sqi-to-si, "
                    "ancilla-reduce)");
}

inline Report cmd_classify(const Options& o) {
  const auto ch = channel_input(o);
  if (!ch) throw parse_error("classify needs --channel PATH or --builtin domino|merge");
  io::Json j;
  std::vector<Row> rows;
  if (const auto* p = std::get_if<ProductKrausChannel>(&*ch)) {
    const ChannelClass c = classify(*p, o.tol);
    j = {{"incoherent", c.incoherent}, {"separable", c.separable}, {"si", c.separable_incoherent},
         {"sqi", c.separable_quantum_incoherent}};
  } else {
    // No product structure is given, so only the incoherence pattern is decided.
    j = {{"incoherent", is_incoherent(std::get<KrausChannel>(*ch), o.tol)}, {"separable", false}, {"si", false},
         {"sqi", false}};
  }
  for (const auto& [k, v] : j.items()) rows.push_back({k, v.get<bool>() ? 1.0 : 0.0, std::nullopt, 0.0});
  return {j, rows};
}

inline Report cmd_reproduce(const Options& o) {
  std::vector<Row> rows;
  const double tol = o.tol;
  rows.push_back(check("C_r(Psi_2)", relative_entropy_of_coherence(maximally_coherent(2)), 1.0, tol));
  rows.push_back(check("C_r^{A|B}(phi+)",
                       qi_relative_entropy(bell_states().front().density(), Bipartition::last_is_b(2)), 1.0, tol));
  const MergingWitness w = merging_witness();
  rows.push_back(check("merging C_r^{R|AB}", w.r_given_ab.value, 8.0 / 9.0, tol));
  rows.push_back(check("merging C_r^{RB|A}", w.rb_given_a.value, 4.0 / 9.0, tol));
  rows.push_back(check("merging SQI protocol gap", w.merge_gap, 0.0, tol));
  const ProductKrausChannel dom = domino_channel();
  rows.push_back(check("domino completeness residual", dom.completeness_residual(), 0.0, tol));
  rows.push_back(check("domino channel SI", classify(dom).separable_incoherent ? 1.0 : 0.0, 1.0, 0.0));
  for (std::size_t k = 1; k <= 9; ++k) {
    rows.push_back(check("domino psi_" + std::to_string(k) + " identified",
                         discriminate_domino(k).metrics.at("correct_probability"), 1.0, tol));
  }
  double min_fid = 1.0;
  for (std::size_t t = 0; t < 100; ++t) {
    min_fid = std::min(min_fid, incoherent_teleport(random_pure(Dims{2}, o.seed + t)).metrics.at("min_fidelity"));
  }
  rows.push_back(check("teleport min fidelity (100 random)", min_fid, 1.0, tol));
  rows.push_back(check("MC distillation phi+ per-outcome C_r",
                       assisted_distill_mc(bell_states().front().density()).metrics.at("min_coherence"), 1.0, tol));
  AssistanceOptions opts;
  opts.seed = o.seed;
  rows.push_back(check("C_a(1/2) [optimized]",
                       coherence_of_assistance(DensityMatrix::maximally_mixed(Dims{2}), opts).value, 1.0, 1e-6));
  io::Json table = io::Json::array();
  for (const auto& r : rows) {
    table.push_back({{"name", r.name}, {"value", r.value}, {"expected", *r.expected}, {"tolerance", r.tolerance},
                     {"status", r.status()}});
  }
  return {{{"reproduce", table}}, rows};
}

inline Report cmd_suite(const Options& o) {
  const std::size_t trials = trials_or(o, 100);
  std::vector<suites::PropertyOutcome> outcomes;
  bool known = false;
  for (const auto& e : suites::registry()) {
    if (o.name != "all" && o.name != e.name) continue;
    known = true;
    for (auto& p : e.run(trials, o.seed)) outcomes.push_back(std::move(p));
  }
  if (!known) {
    std::string names = "all";
    for (const auto& e : suites::registry()) names += std::string(", ") + e.name;
    throw parse_error("unknown suite \"" + o.name + "\" (" + names + ")");
  }
  io::Json arr = io::Json::array();
  std::vector<Row> rows;
  for (const auto& p : outcomes) {
    arr.push_back({{"property", p.property}, {"trials", p.trials}, {"failures", p.failures},
                   {"failing_seeds", p.failing_seeds}, {"worst", p.worst}, {"tolerance", p.tolerance}});
    std::string label = p.property + " failures (" + std::to_string(p.trials) + " trials";
    if (!p.failing_seeds.empty()) label += ", first failing seed " + std::to_string(p.failing_seeds.front());
    rows.push_back(check(label + ")", static_cast<double>(p.failures), 0.0, 0.0));
  }
  return {{{"suite", o.name}, {"seed", o.seed}, {"properties", arr}}, rows};
}

}  // namespace detail

/// Runs one command line (without the program name); returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"coherlab: coherence in distributed scenarios", "coherlab"};
  app.require_subcommand(1);
  const std::vector<std::string> formats = {"json", "csv", "pretty"};

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Seed for every stochastic step (default 0)");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember(formats));
    sub->add_option("--tol", o.tol, "Check tolerance (default 1e-9)")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out_path, "Write output to PATH instead of standard output");
  };
  auto state_flags = [&](CLI::App* sub) {
    sub->add_option("--state", o.state_path, "State file (JSON)");
    sub->add_option("--builtin", o.builtin, "bell | merging | psi2 | domino:k (domino | merge for channels)");
    sub->add_option("--split", o.split, "Bipartition, e.g. \"A=0;B=1,2\"; default B = last subsystem");
  };

  CLI::App* measure = app.add_subcommand("measure", "Evaluate a coherence measure");
  measure->add_option("name", o.name, "cr | qire | discord | mutual-info | assistance | entropy | qire-oracle")
      ->required();
  state_flags(measure);
  common(measure);

  CLI::App* protocol = app.add_subcommand("protocol", "Run a protocol and check its claims");
  protocol->add_option("name", o.name,
                       "teleport | distill-pure | distill-mc | steer | discriminate | merge-witness | sqi-to-si | "
                       "ancilla-reduce")
      ->required();
  state_flags(protocol);
  protocol->add_option("--channel", o.channel_path, "Channel file (JSON)");
  protocol->add_option("--input", o.input, "teleport/distill-mc input: random | zero | psi2");
  protocol->add_option("--trials", o.trials, "Number of random trials")->check(CLI::PositiveNumber);
  protocol->add_option("--index", o.index, "Domino state 1..9 (default: all)")->check(CLI::Range(1, 9));
  common(protocol);

  CLI::App* classify_cmd = app.add_subcommand("classify", "Classify a channel");
  classify_cmd->add_option("--channel", o.channel_path, "Channel file (JSON)");
  classify_cmd->add_option("--builtin", o.builtin, "domino | merge");
  common(classify_cmd);

  CLI::App* reproduce = app.add_subcommand("reproduce", "Recompute every closed-form value");
  common(reproduce);

  CLI::App* suite = app.add_subcommand("suite", "Run a seeded property suite");
  suite->add_option("name", o.name, "Suite name or \"all\"")->required();
  suite->add_option("--trials", o.trials, "Trials per property (default 100)")->check(CLI::PositiveNumber);
  common(suite);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  o.command = chosen->get_name();
  try {
    Report report;
    std::string default_format = "json";
    if (o.command == "measure") report = detail::cmd_measure(o);
    if (o.command == "protocol") report = detail::cmd_protocol(o);
    if (o.command == "classify") report = detail::cmd_classify(o);
    if (o.command == "reproduce") {
      report = detail::cmd_reproduce(o);
      default_format = "pretty";
    }
    if (o.command == "suite") {
      report = detail::cmd_suite(o);
      default_format = "pretty";
    }
    const std::string format = o.format.empty() ? default_format : o.format;
    std::string text;
    if (format == "json") text = io::dump(report.json) + "\n";
    if (format == "csv") text = detail::csv(report.rows);
    if (format == "pretty") text = detail::pretty(report.rows);
    if (o.out_path.empty()) {
      out << text;
    } else {
      std::ofstream file(o.out_path);
      if (!file) {
        err << "error: cannot write " << o.out_path << "\n";
        return kInvariantError;
      }
      file << text;
    }
    if (!report.all_passed()) {
      for (const auto& r : report.rows) {
        if (!r.passed()) err << "check failed: " << r.name << " = " << io::format_number(r.value) << "\n";
      }
      return kCheckFailed;
    }
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::Parse ? kParseError : kInvariantError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: Parse: " << e.what() << "\n";
    return kParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvariantError;
  }
}

}  // namespace coherlab::cli
