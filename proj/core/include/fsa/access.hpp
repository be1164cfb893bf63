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

#include <set>
#include <string>
#include <vector>

#include "fsa/affine.hpp"
#include "fsa/lang.hpp"

namespace fsa {

// One array reference in a statement, with the loops around it (inside the
// statement) and the affine conditions under which it executes. Value
// predicates are dropped, so `context` over-approximates.
struct Access {
  std::string array;
  std::vector<AffineExpr> index;
  bool write = false;
  std::vector<std::string> loops;  // outermost first
  std::vector<int> loop_ids;       // unique per loop node
  Formula context;
};

// Loop variables that shadow a symbol already in scope are renamed first, so
// every loop variable in the result is distinct from enclosing ones.
std::vector<Access> collect_accesses(const Stmt& s);

// Loop range constraints for `var` under the loop header of `loop`. For a
// literal step other than +-1 with a single start bound a divisibility
// constraint is added; returns false if the range had to be widened.
bool loop_range(const Stmt& loop, const std::string& var, Formula* out);

// All symbols mentioned by the statement, including loop variables.
std::set<std::string> stmt_symbols(const Stmt& s);

// Renames loop variables of `s` that are in `taken` to fresh names.
Stmt rename_loops_apart(const Stmt& s, const std::set<std::string>& taken);

// Substitution that does not capture: bound loop variables clashing with
// symbols of the substituted values are renamed first.
Stmt instantiate(const Stmt& s, const Substitution& sub);

}  // namespace fsa
