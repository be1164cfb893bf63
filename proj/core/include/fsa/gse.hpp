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

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fsa/affine.hpp"
#include "fsa/bindings.hpp"
#include "fsa/lang.hpp"
#include "fsa/solver.hpp"
#include "fsa/symexpr.hpp"

namespace fsa {

// Conditional expression tree. Leaves are constants, index values, or the
// value of an array cell at the point reached so far (an input once the
// whole statement has been processed).
class CETree {
 public:
  enum class Kind { kLeaf, kOp, kApply, kCond };

  static CETree leaf(SymExpr e);
  static CETree op(char op, std::vector<CETree> kids);
  static CETree apply(std::string fn, std::vector<CETree> kids);
  static CETree cond(Formula guard, CETree then_tree, CETree else_tree);

  Kind kind() const;
  const SymExpr& leaf_expr() const;
  char op() const;
  const std::string& fn() const;
  const std::vector<CETree>& kids() const;  // kOp, kApply; kCond has {then, else}
  const Formula& guard() const;

  bool has_cond() const;
  // Requires !has_cond().
  SymExpr to_symexpr() const;
  void collect_apps(std::vector<Atom>& out) const;
  size_t size() const;
  std::string str() const;

  struct Node;

 private:
  explicit CETree(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

class NotSimple : public Error {
 public:
  using Error::Error;
};

// Pushes `tree` backwards through `s`. Throws NotSimple when a write cannot
// be inverted or the statement uses constructs outside the simple class.
CETree build_expr_tree(const Stmt& s, const CETree& tree);
// Tree for cell `array(index_vars...)` after `s`.
CETree build_expr_tree(const Stmt& s, const std::string& array,
                       const std::vector<std::string>& index_vars);

struct SimpleResult {
  bool simple = true;
  std::string reason;
};

// Simple: affine control, literal steps, invertible write maps, no
// loop-carried dependence (under `context`), and no write to an array used
// inside index terms.
SimpleResult is_simple(const Stmt& s, const Formula& context = Formula::truth(),
                       const SolverOptions& opts = {});

// Hoists conditionals above operators until every operator node is
// conditional-free.
CETree factor(const CETree& t);

struct GseCase {
  Formula guard;
  SymExpr value;
};

struct Gse {
  std::string array;
  std::vector<std::string> index_vars;
  std::vector<GseCase> cases;

  // One "GUARD  ==>  EXPR" line per case.
  std::string str() const;
};

// Factors the tree and collects the leaf regions whose path guard is
// satisfiable under `context`. Guards are the path conditions only.
Gse normalize_gse(const CETree& t, const Formula& context, std::string array = "",
                  std::vector<std::string> index_vars = {}, const SolverOptions& opts = {});

// Satisfiability of each case under `context`, pairwise disjointness, and
// coverage of the context.
bool gse_is_partition(const Gse& g, const Formula& context, const SolverOptions& opts = {});

struct Witness {
  std::string array;
  Formula guard;
  SymExpr left = SymExpr::constant(0);
  SymExpr right = SymExpr::constant(0);
  std::string str() const;
};

struct GseComparison {
  bool equal = true;
  int tested = 0;
  int non_empty = 0;
  int matched = 0;
  std::optional<Witness> witness;   // first mismatching region
  std::vector<Witness> mismatches;  // all of them
};

GseComparison compare_gses(const Gse& a, const Gse& b, const Formula& context,
                           const SolverOptions& opts = {});

struct ArrayComparison {
  std::string array;
  Gse left, right;
  GseComparison result;
};

struct CompareReport {
  bool equal = false;
  // Set when the pair could not be compared (not simple, different altered
  // sets, ...).
  std::string reason;
  std::vector<ArrayComparison> arrays;
  std::optional<Witness> witness;
};

// Decides whether s1 and s2 compute the same final values for every
// variable in `live` they alter. Declarations come from `program`.
CompareReport compare_programs(const Stmt& s1, const Stmt& s2, const Program& program,
                               const Bindings& bindings, const std::set<std::string>& live,
                               const SolverOptions& opts = {});

// GSE of `array` after the whole program body, over fresh target variables.
Gse program_gse(const Program& p, const std::string& array, const Bindings& bindings,
                const SolverOptions& opts = {});

// Ground bindings plus the facts instantiated at every term in `terms`.
Formula analysis_context(const Bindings& b, const SkolemTable& terms);
// Declared bounds of `decl` over `index_vars`.
Formula domain_formula(const ArrayDecl& decl, const std::vector<std::string>& index_vars);

}  // namespace fsa
