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

// JSON state and channel files.
//
// State:   {"kind": "density"|"pure", "dims": [..], "matrix": [[re, im], ...]}
//          row-major entries for a density matrix, amplitudes for a pure state.
// Channel: {"kind": "kraus", "in_dims": [..], "out_dims": [..], "ops": [op, ...]}
//          {"kind": "product", "in_dims": {"a": [..], "b": [..]},
//           "out_dims": {"a": [..], "b": [..]}, "ops": [{"a": op, "b": op}, ...]}
//          with each op a row-major list of [re, im] pairs.

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "coherlab/channels.hpp"
#include "coherlab/qmat.hpp"

namespace coherlab::io {

using Json = nlohmann::json;

/// 17 significant digits, lowercase exponent; -0 prints as 0 and non-finite
/// values become null.
inline std::string format_number(double x) {
  if (!std::isfinite(x)) return "null";
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void write_canonical(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(k).dump();
        out += ':';
        write_canonical(v, out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        write_canonical(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float:
      out += format_number(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Compact dump with sorted keys and canonical numbers; stable under
/// dump -> parse -> dump.
inline std::string dump(const Json& j) {
  std::string out;
  detail::write_canonical(j, out);
  return out;
}

inline Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("invalid JSON: ") + e.what());
  }
}

inline Json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// ---------------------------------------------------------------------------
// Numbers and matrices

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json entries_to_json(const ComplexMatrix& m) {
  Json arr = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(to_json(m(r, c)));
  }
  return arr;
}

inline Json dims_to_json(const Dims& dims) { return Json(dims); }

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Parse, where + ": " + what);
}

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing \"") + key + "\"");
  return *it;
}

inline Complex complex_entry(const Json& e, const std::string& where) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
    fail(where, "entries must be [re, im] number pairs");
  }
  return {e[0].get<double>(), e[1].get<double>()};
}

}  // namespace detail

inline Dims dims_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) detail::fail(where, "dims must be a non-empty array");
  Dims dims;
  for (const auto& d : j) {
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) detail::fail(where, "dims must be positive integers");
    dims.push_back(d.get<std::size_t>());
  }
  return dims;
}

inline ComplexMatrix matrix_from_json(const Json& j, std::size_t rows, std::size_t cols, const std::string& where) {
  if (!j.is_array()) detail::fail(where, "expected an array of entries");
  if (j.size() != rows * cols) {
    detail::fail(where, "expected " + std::to_string(rows * cols) + " entries, got " + std::to_string(j.size()));
  }
  ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t k = 0; k < j.size(); ++k) {
    m(static_cast<Eigen::Index>(k / cols), static_cast<Eigen::Index>(k % cols)) = detail::complex_entry(j[k], where);
  }
  return m;
}

// ---------------------------------------------------------------------------
// States

inline Json to_json(const DensityMatrix& rho) {
  return {{"kind", "density"}, {"dims", dims_to_json(rho.dims())}, {"matrix", entries_to_json(rho.matrix())}};
}

inline Json to_json(const PureState& psi) {
  return {{"kind", "pure"}, {"dims", dims_to_json(psi.dims())}, {"matrix", entries_to_json(psi.amplitudes())}};
}

/// Pure files are returned as their projector. Structural problems throw
/// Parse; physically invalid content throws the state's own invariant error.
inline DensityMatrix state_from_json(const Json& j) {
  const std::string where = "state";
  const Json& kind = detail::field(j, "kind", where);
  if (!kind.is_string()) detail::fail(where, "\"kind\" must be a string");
  const Dims dims = dims_from_json(detail::field(j, "dims", where), where + ".dims");
  const std::size_t d = total_dim(dims);
  const Json& entries = detail::field(j, "matrix", where);
  if (kind == "density") return DensityMatrix(matrix_from_json(entries, d, d, where + ".matrix"), dims);
  if (kind == "pure") return PureState(ComplexVector(matrix_from_json(entries, d, 1, where + ".matrix")), dims).density();
  detail::fail(where, "unknown kind \"" + kind.get<std::string>() + "\"");
}

// ---------------------------------------------------------------------------
// Channels

inline Json to_json(const KrausChannel& ch) {
  Json ops = Json::array();
  for (const auto& k : ch.ops()) ops.push_back(entries_to_json(k));
  return {{"kind", "kraus"}, {"in_dims", ch.in_dims()}, {"out_dims", ch.out_dims()}, {"ops", ops}};
}

inline Json to_json(const ProductKrausChannel& ch) {
  Json ops = Json::array();
  for (const auto& p : ch.pairs()) ops.push_back({{"a", entries_to_json(p.a)}, {"b", entries_to_json(p.b)}});
  return {{"kind", "product"},
          {"in_dims", {{"a", ch.a_in()}, {"b", ch.b_in()}}},
          {"out_dims", {{"a", ch.a_out()}, {"b", ch.b_out()}}},
          {"ops", ops}};
}

using AnyChannel = std::variant<KrausChannel, ProductKrausChannel>;

inline AnyChannel channel_from_json(const Json& j) {
  const std::string where = "channel";
  const Json& kind = detail::field(j, "kind", where);
  const Json& ops = detail::field(j, "ops", where);
  if (!ops.is_array() || ops.empty()) detail::fail(where, "\"ops\" must be a non-empty array");
  const Json& in = detail::field(j, "in_dims", where);
  const Json& out = detail::field(j, "out_dims", where);
  if (kind == "kraus") {
    const Dims in_dims = dims_from_json(in, where + ".in_dims");
    const Dims out_dims = dims_from_json(out, where + ".out_dims");
    std::vector<ComplexMatrix> mats;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      mats.push_back(matrix_from_json(ops[k], total_dim(out_dims), total_dim(in_dims),
                                      where + ".ops[" + std::to_string(k) + "]"));
    }
    return KrausChannel(std::move(mats), in_dims, out_dims);
  }
  if (kind == "product") {
    const Dims a_in = dims_from_json(detail::field(in, "a", where + ".in_dims"), where + ".in_dims.a");
    const Dims b_in = dims_from_json(detail::field(in, "b", where + ".in_dims"), where + ".in_dims.b");
    const Dims a_out = dims_from_json(detail::field(out, "a", where + ".out_dims"), where + ".out_dims.a");
    const Dims b_out = dims_from_json(detail::field(out, "b", where + ".out_dims"), where + ".out_dims.b");
    std::vector<KrausPair> pairs;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const std::string at = where + ".ops[" + std::to_string(k) + "]";
      pairs.push_back({matrix_from_json(detail::field(ops[k], "a", at), total_dim(a_out), total_dim(a_in), at + ".a"),
                       matrix_from_json(detail::field(ops[k], "b", at), total_dim(b_out), total_dim(b_in), at + ".b")});
    }
    return ProductKrausChannel(std::move(pairs), a_in, b_in, a_out, b_out);
  }
  detail::fail(where, "\"kind\" must be \"kraus\" or \"product\"");
}

}  // namespace coherlab::io
