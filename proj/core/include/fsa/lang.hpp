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
#include "fsa/numeric.hpp"

namespace fsa {

struct Position {
  int line = 0;
  int column = 0;
  std::string str() const;
};

// Array cell or scalar reference. Indices are affine in loop variables and
// parameters, possibly containing opaque terms like p(j).
struct Ref {
  std::string name;
  std::vector<AffineExpr> indices;

  Ref substitute(const Substitution& sub) const;
  std::string str() const;
  bool operator==(const Ref& o) const;
};

// Numeric value expression.
class ValExpr {
 public:
  enum class Kind { kConst, kRead, kIndex, kOp, kApply };
  // kOp operators: '+', '-', '*', '/', and 'n' for unary negation.

  static ValExpr constant(Rational v);
  static ValExpr read(Ref r);
  static ValExpr index(AffineExpr e);
  static ValExpr op(char op, std::vector<ValExpr> operands);
  static ValExpr apply(std::string fn, std::vector<ValExpr> operands);

  Kind kind() const;
  const Rational& value() const;
  const Ref& ref() const;
  const AffineExpr& index_expr() const;
  char op() const;
  const std::string& fn() const;
  const std::vector<ValExpr>& operands() const;

  ValExpr substitute(const Substitution& sub) const;
  // Replaces every read of `name` by `with` (a reference rename).
  ValExpr rename_ref(const std::string& name, const std::vector<AffineExpr>& extra) const;
  void collect_reads(std::vector<Ref>& out) const;
  void collect_symbols(std::set<std::string>& out) const;
  std::string str() const;
  bool operator==(const ValExpr& o) const;

 private:
  struct Node;
  explicit ValExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Condition of an if statement: an affine formula, or a comparison of
// numeric values (pivot tests), combined with and/or/not.
class Pred {
 public:
  enum class Kind { kAffine, kValue, kAnd, kOr, kNot };

  static Pred affine(Formula f);
  static Pred value(ValExpr lhs, Rel rel, ValExpr rhs);
  static Pred conj(std::vector<Pred> parts);
  static Pred disj(std::vector<Pred> parts);
  static Pred negation(Pred p);

  Kind kind() const;
  const Formula& formula() const;
  const ValExpr& lhs() const;
  const ValExpr& rhs() const;
  Rel rel() const;
  const std::vector<Pred>& children() const;

  bool is_affine() const;
  // Requires is_affine().
  Formula to_formula() const;
  Pred substitute(const Substitution& sub) const;
  Pred rename_ref(const std::string& name, const std::vector<AffineExpr>& extra) const;
  void collect_reads(std::vector<Ref>& out) const;
  void collect_symbols(std::set<std::string>& out) const;
  std::string str() const;
  bool operator==(const Pred& o) const;

 private:
  struct Node;
  explicit Pred(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Loop step: a nonzero literal or a positive symbolic parameter.
struct Step {
  Int literal = 1;
  std::string symbol;

  bool is_symbolic() const { return !symbol.empty(); }
  std::string str() const { return is_symbolic() ? symbol : literal.str(); }
  bool operator==(const Step& o) const { return literal == o.literal && symbol == o.symbol; }
};

class Stmt {
 public:
  enum class Kind { kSeq, kFor, kIf, kAssign };

  static Stmt seq(std::vector<Stmt> parts, std::string label = "");
  // Iterates lower -> upper for positive steps and upper -> lower for
  // negative ones. The effective lower bound is the max of `lower`, the
  // effective upper bound the min of `upper`.
  static Stmt loop(std::string var, std::vector<AffineExpr> lower, std::vector<AffineExpr> upper,
                   Step step, Stmt body, std::string label = "");
  static Stmt branch(Pred cond, Stmt then_branch, std::optional<Stmt> else_branch,
                     std::string label = "");
  static Stmt assign(Ref lhs, ValExpr rhs, std::string label = "");

  Kind kind() const;
  const std::string& label() const;
  const Position& pos() const;
  Stmt with_label(std::string label) const;
  Stmt with_pos(Position pos) const;

  const std::vector<Stmt>& parts() const;  // kSeq
  const std::string& var() const;          // kFor
  const std::vector<AffineExpr>& lower() const;
  const std::vector<AffineExpr>& upper() const;
  const Step& step() const;
  const Stmt& body() const;
  const Pred& cond() const;  // kIf
  const Stmt& then_branch() const;
  bool has_else() const;
  const Stmt& else_branch() const;
  const Ref& lhs() const;  // kAssign
  const ValExpr& rhs() const;

  // Substitutes free symbols; loop variables bound inside are untouched.
  Stmt substitute(const Substitution& sub) const;
  // Appends `extra` indices to every reference to `name`.
  Stmt rename_ref(const std::string& name, const std::vector<AffineExpr>& extra) const;
  // Prefixes/suffixes labels: every label L becomes L + suffix.
  Stmt relabel(const std::string& suffix) const;
  Stmt strip_labels() const;

  bool operator==(const Stmt& o) const;
  bool operator!=(const Stmt& o) const { return !(*this == o); }

 private:
  struct Node;
  explicit Stmt(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

enum class ElemKind { kReal, kInt };
enum class IoRole { kIn, kOut, kInOut };

struct ArrayDecl {
  struct Dim {
    AffineExpr lo, hi;
  };
  std::string name;
  std::vector<Dim> dims;
  ElemKind elem = ElemKind::kReal;
  IoRole io = IoRole::kInOut;
  bool is_scalar = false;  // declared with `scalar`

  size_t rank() const { return dims.size(); }
};

struct Program {
  std::string name;
  std::vector<std::string> params;
  std::vector<Formula> assumes;
  std::vector<UniversalFact> facts;
  std::vector<ArrayDecl> decls;  // arrays and scalars in declaration order
  std::vector<std::string> outputs;
  Stmt body = Stmt::seq({});

  const ArrayDecl* find_decl(const std::string& name) const;
  bool is_param(const std::string& name) const;
  bool is_int_array(const std::string& name) const;
  Bindings bindings() const;
};

// Free-function queries over statements.

// Roots of all assignment targets.
std::set<std::string> altered_vars(const Stmt& s);
// Variables read anywhere (rhs, indices, conditions, opaque index terms).
std::set<std::string> read_vars(const Stmt& s);
// All variables touched.
std::set<std::string> touched_vars(const Stmt& s);
// Loop variables bound anywhere in s.
std::set<std::string> loop_vars(const Stmt& s);
// Every label in s, in pre-order.
std::vector<std::string> labels(const Stmt& s);
// Sub-statement with the given label.
std::optional<Stmt> find_label(const Stmt& s, const std::string& label);
// Replaces the sub-statement labeled `label` by `with`.
Stmt replace_label(const Stmt& s, const std::string& label, const Stmt& with);
// Replaces every statement structurally equal to `target`.
Stmt replace_stmt(const Stmt& s, const Stmt& target, const Stmt& with);
// Unique loop addressed by label or loop variable.
std::optional<Stmt> find_loop(const Stmt& s, const std::string& name);
Stmt replace_loop(const Stmt& s, const std::string& name, const Stmt& with);

// True if `scalar` may be read before being written by s.
bool exposed_read(const Stmt& s, const std::string& scalar);
// Rank-0 variables that s reads before writing (upward exposed).
std::set<std::string> exposed_scalars(const Stmt& s, const Program& p);

// Scalar expansion: a rank-0 variable that is not in `live`, not exposed in
// `s`, and written before read in every loop body containing it, gets the
// enclosing loop variables appended as indices (tmp -> tmp(k)). Returns the
// rewritten statement and the expanded names.
Stmt privatize(const Stmt& s, const Program& p, const std::set<std::string>& live,
               std::set<std::string>* expanded = nullptr);

struct Diagnostic {
  std::string message;
  Position pos;
  std::string str() const;
};

std::vector<Diagnostic> check_well_formed(const Program& p);

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, Position pos);
  const Position& pos() const { return pos_; }

 private:
  Position pos_;
};

Program parse_program(const std::string& text);
// Formula in the context of p (loop variables are not in scope; any
// undeclared identifier is taken as a free symbol).
Formula parse_formula(const std::string& text, const Program& p);
AffineExpr parse_affine(const std::string& text, const Program& p);
// A top-level `assume` text: a ground formula or a forall fact.
void parse_assumption(const std::string& text, const Program& p, std::vector<Formula>& ground,
                      std::vector<UniversalFact>& facts);

std::string print_program(const Program& p);
std::string print_stmt(const Stmt& s, int indent = 0);

}  // namespace fsa
