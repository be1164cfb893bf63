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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fsa/bindings.hpp"
#include "fsa/gse.hpp"
#include "fsa/lang.hpp"
#include "fsa/obligation.hpp"
#include "fsa/solver.hpp"

namespace fsa {

struct TransformSpec;

// Cells `array(index)` for some values of `vars` satisfying `constraint`.
struct Region {
  std::string array;
  std::vector<AffineExpr> index;
  std::vector<std::string> vars;
  Formula constraint;

  // The region as a formula over x1..xn.
  Formula membership(const std::vector<std::string>& cell) const;
  std::string str() const;
};

struct Footprint {
  std::vector<Region> reads;
  std::vector<Region> writes;
};

Footprint footprint(const Stmt& s, const Bindings& bindings);

// Bernstein's conditions, checked under the bindings.
bool disjoint_commute(const Stmt& s1, const Stmt& s2, const Bindings& bindings,
                      const SolverOptions& opts = {});

enum class Outcome { kLegal, kUnknown };
const char* to_string(Outcome o);

struct TraceStep {
  int depth = 0;
  std::string rule;  // FAST_PATH, COMPARE, SEQ, LOOP, IF, SWAP, BUDGET
  std::string left, right;
  std::string result;  // Legal, Unknown or descend
  std::string note;
  std::optional<CompareReport> compare;
  std::vector<TraceStep> children;
};

struct Verdict {
  Outcome outcome = Outcome::kUnknown;
  TraceStep trace;
  int max_depth_reached = 0;

  bool legal() const { return outcome == Outcome::kLegal; }
  std::string trace_text() const;
  // The first leaf that is not Legal, if any.
  const TraceStep* first_failure() const;
  // The first Compare step in the trace (in rule order).
  const TraceStep* first_compare() const;
};

struct CommuteOptions {
  int max_depth = 3;
  bool fast_path = true;
  // Compare is not attempted above this depth; the obligation itself is
  // depth 1, so 2 forces one destructuring step.
  int force_simplify = 0;
  SolverOptions solver;
};

Verdict commute(const Stmt& s1, const Stmt& s2, const Program& program, const Bindings& bindings,
                const std::set<std::string>& live, const CommuteOptions& opts = {},
                const std::string& name1 = "S1", const std::string& name2 = "S2");

Verdict check_obligation(const Obligation& ob, const Program& program,
                         const CommuteOptions& opts = {});

struct CheckResult {
  Outcome outcome = Outcome::kLegal;
  std::vector<Obligation> obligations;
  std::vector<Verdict> verdicts;

  bool legal() const { return outcome == Outcome::kLegal; }
};

// Throws Error when the spec does not apply to the program.
CheckResult check_transformation(const Program& p, const TransformSpec& t,
                                 const Bindings& extra = {}, const CommuteOptions& opts = {});

}  // namespace fsa
