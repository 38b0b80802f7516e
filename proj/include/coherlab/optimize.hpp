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

// Derivative-free minimization used by the optimizer-backed measures. Thin
// RAII wrapper over GSL's nmsimplex2.

#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <functional>
#include <memory>
#include <vector>

#include "coherlab/qmat.hpp"

namespace coherlab::optimize {

using Objective = std::function<double(const RealVector&)>;

struct NelderMeadOptions {
  double initial_step = 0.3;
  std::size_t max_iterations = 2000;
  /// Stop when the simplex size drops below this.
  double size_tolerance = 1e-9;
};

struct Minimum {
  RealVector x;
  double value = 0.0;
  std::size_t iterations = 0;
};

namespace detail {

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

inline double trampoline(const gsl_vector* x, void* params) {
  const auto& f = *static_cast<const Objective*>(params);
  RealVector v(static_cast<Eigen::Index>(x->size));
  for (std::size_t k = 0; k < x->size; ++k) v(static_cast<Eigen::Index>(k)) = gsl_vector_get(x, k);
  const double value = f(v);
  return std::isfinite(value) ? value : GSL_POSINF;
}

}  // namespace detail

inline Minimum nelder_mead(const Objective& f, const RealVector& start, const NelderMeadOptions& opts = {}) {
  const auto n = static_cast<std::size_t>(start.size());
  Minimum best{start, f(start), 0};
  if (n == 0) return best;

  gsl_set_error_handler_off();
  std::unique_ptr<gsl_vector, detail::VectorDeleter> x(gsl_vector_alloc(n));
  std::unique_ptr<gsl_vector, detail::VectorDeleter> step(gsl_vector_alloc(n));
  for (std::size_t k = 0; k < n; ++k) gsl_vector_set(x.get(), k, start(static_cast<Eigen::Index>(k)));
  gsl_vector_set_all(step.get(), opts.initial_step);

  gsl_multimin_function fn;
  fn.n = n;
  fn.f = &detail::trampoline;
  fn.params = const_cast<Objective*>(&f);

  std::unique_ptr<gsl_multimin_fminimizer, detail::MinimizerDeleter> solver(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  if (gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), step.get()) != GSL_SUCCESS) return best;

  std::size_t iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver.get()), opts.size_tolerance) == GSL_SUCCESS) {
      break;
    }
  }
  const double value = gsl_multimin_fminimizer_minimum(solver.get());
  if (value < best.value) {
    const gsl_vector* xm = gsl_multimin_fminimizer_x(solver.get());
    for (std::size_t k = 0; k < n; ++k) best.x(static_cast<Eigen::Index>(k)) = gsl_vector_get(xm, k);
    best.value = value;
  }
  best.iterations = iter;
  return best;
}

/// Repeated Nelder-Mead from the incumbent until a restart stops improving.
inline Minimum polish(const Objective& f, Minimum incumbent, const NelderMeadOptions& opts, std::size_t restarts) {
  for (std::size_t r = 0; r < restarts; ++r) {
    NelderMeadOptions o = opts;
    o.initial_step = opts.initial_step / static_cast<double>(r + 2);
    Minimum next = nelder_mead(f, incumbent.x, o);
    const bool improved = next.value < incumbent.value - 1e-13;
    if (next.value < incumbent.value) incumbent = std::move(next);
    if (!improved) break;
  }
  return incumbent;
}

}  // namespace coherlab::optimize
