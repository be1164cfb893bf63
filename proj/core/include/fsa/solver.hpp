// Copyright 2026 The FSA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

#include "fsa/affine.hpp"

namespace fsa {

// Exact decision procedures for integer formulas. Every symbol and opaque
// term is an integer unknown; distinct opaque terms are unrelated.

struct SolverOptions {
  // Upper bound on constraints generated by a single query.
  int64_t budget = 4'000'000;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded() : Error("elimination too large") {}
  explicit BudgetExceeded(const std::string& what) : Error(what) {}
};

// Integer satisfiability of f && under. A budget abort answers true.
bool is_satisfiable(const Formula& f, const Formula& under = Formula::truth(),
                    const SolverOptions& opts = {});

// f && !g unsatisfiable. A budget abort answers false.
bool implies(const Formula& f, const Formula& g, const SolverOptions& opts = {});

// Quantifier-free equivalent of f over the integers. Throws BudgetExceeded.
Formula eliminate_exists(const Formula& f, const SolverOptions& opts = {});

// Solver work counters, for benchmarks and diagnostics.
struct SolverStats {
  int64_t sat_queries = 0;
  int64_t projections = 0;
};
SolverStats solver_stats();

}  // namespace fsa
