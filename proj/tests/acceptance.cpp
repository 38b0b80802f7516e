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

// Runs every acceptance criterion once with seed 0 and prints one line each.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "coherlab/coherlab.hpp"

namespace {

using namespace coherlab;
using suites::PropertyOutcome;

struct Verdict {
  bool ok;
  std::string detail;
};

Verdict from_outcomes(const std::vector<PropertyOutcome>& outcomes) {
  Verdict v{true, ""};
  std::ostringstream os;
  for (const auto& o : outcomes) {
    v.ok = v.ok && o.passed();
    if (!os.str().empty()) os << "; ";
    os << o.property << " " << (o.trials - o.failures) << "/" << o.trials << " worst=" << o.worst;
  }
  v.detail = os.str();
  return v;
}

Verdict merging_values() {
  const MergingWitness w = merging_witness();
  std::ostringstream os;
  os.precision(17);
  os << "R|AB=" << w.r_given_ab.value << " RB|A=" << w.rb_given_a.value;
  const bool ok = std::abs(w.r_given_ab.value - 8.0 / 9.0) <= 1e-9 && std::abs(w.rb_given_a.value - 4.0 / 9.0) <= 1e-9;
  return {ok, os.str()};
}

Verdict teleportation() {
  bool kraus = true;
  for (const auto& k : teleport_alice_kraus()) kraus = kraus && is_incoherent_operator(k);
  Verdict v = from_outcomes(suites::teleport(100, 0));
  v.ok = v.ok && kraus;
  v.detail += kraus ? "; alice kraus incoherent" : "; alice kraus NOT incoherent";
  return v;
}

Verdict domino() {
  const ProductKrausChannel ch = domino_channel();
  const ChannelClass c = classify(ch);
  double worst = 0.0;
  for (std::size_t k = 1; k <= 9; ++k) {
    worst = std::max(worst, std::abs(discriminate_domino(k).metrics.at("correct_probability") - 1.0));
  }
  const double residual = ch.completeness_residual();
  std::ostringstream os;
  os << "max |p-1|=" << worst << " residual=" << residual << " si=" << c.separable_incoherent
     << " sqi=" << c.separable_quantum_incoherent;
  return {worst <= 1e-9 && residual <= 1e-9 && c.separable_incoherent && c.separable_quantum_incoherent, os.str()};
}

Verdict closed_form() {
  std::vector<PropertyOutcome> outcomes = suites::closed_form(200, 0);
  for (auto& o : suites::oracle(20, 0)) outcomes.push_back(std::move(o));
  return from_outcomes(outcomes);
}

struct Criterion {
  const char* name;
  double limit_seconds;  // 0: no limit
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"merging-values", 1.0, merging_values},
      {"incoherent-teleportation", 1.0, teleportation},
      {"domino-discrimination", 1.0, domino},
      {"mc-distillation", 5.0, [] { return from_outcomes(suites::mc_distill(50, 0)); }},
      {"steering-witness", 10.0, [] { return from_outcomes(suites::steering(100, 0)); }},
      {"sqi-monotonicity", 30.0, [] { return from_outcomes(suites::sqi_monotone(200, 0)); }},
      {"sqi-and-ancilla-reductions", 30.0,
       [] {
         std::vector<PropertyOutcome> o = suites::sqi_to_si(100, 0);
         for (auto& p : suites::ancilla(100, 0)) o.push_back(std::move(p));
         return from_outcomes(o);
       }},
      {"closed-form-cross-validation", 120.0, closed_form},
      {"continuity-bound", 5.0, [] { return from_outcomes(suites::continuity(200, 0)); }},
      {"inequality-chain", 0.0, [] { return from_outcomes(suites::chain(100, 0)); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_seconds == 0.0 || secs < c.limit_seconds;
    const bool ok = v.ok && in_time;
    if (!ok) ++failed;
    std::printf("%s %s (%.3f s%s) %s\n", ok ? "PASS" : "FAIL", c.name, secs, in_time ? "" : ", over time limit",
                v.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
