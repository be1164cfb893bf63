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

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fsa/numeric.hpp"

namespace fsa {

class AffineExpr;

// A variable of an affine expression. Either a plain symbol (loop variable,
// parameter, index symbol) or an opaque integer term such as p(l). Opaque
// terms are identified by their canonical text, so equal terms are the same
// atom everywhere.
class Atom {
 public:
  static Atom symbol(std::string name);
  static Atom app(std::string fn, std::vector<AffineExpr> args);

  bool is_symbol() const;
  bool is_app() const { return !is_symbol(); }
  // Symbol name, or function name for an application.
  const std::string& name() const;
  const std::vector<AffineExpr>& args() const;
  // Canonical text; the identity of the atom.
  const std::string& key() const;
  // Display text with arguments in their written order.
  std::string str() const;

  bool operator==(const Atom& o) const { return key() == o.key(); }
  bool operator<(const Atom& o) const { return key() < o.key(); }

 private:
  struct Node;
  explicit Atom(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

using Substitution = std::map<std::string, AffineExpr>;

// Sum of integer multiples of atoms plus an integer constant. Terms keep the
// order in which they were first introduced, which is the order used when
// printing; equality ignores term order.
class AffineExpr {
 public:
  AffineExpr() = default;
  static AffineExpr constant(Int c);
  static AffineExpr var(const std::string& name);
  static AffineExpr of(const Atom& a, Int coef = 1);

  const std::vector<std::pair<Atom, Int>>& terms() const { return terms_; }
  const Int& constant_term() const { return constant_; }
  Int coeff(const std::string& key) const;
  bool is_constant() const { return terms_.empty(); }
  // True iff the expression is exactly one symbol with coefficient 1.
  bool is_symbol() const;

  AffineExpr operator+(const AffineExpr& o) const;
  AffineExpr operator-(const AffineExpr& o) const;
  AffineExpr operator-() const;
  AffineExpr operator*(const Int& k) const;
  AffineExpr operator+(const Int& k) const;
  AffineExpr operator-(const Int& k) const;

  // Replaces symbols (also inside opaque-term arguments).
  AffineExpr substitute(const Substitution& sub) const;
  // True iff `sym` occurs, including inside opaque-term arguments.
  bool mentions(const std::string& sym) const;
  void collect_symbols(std::set<std::string>& out) const;
  // Opaque terms, innermost first, deduplicated by key.
  void collect_apps(std::vector<Atom>& out) const;

  std::string str() const;
  std::string canonical() const;

  bool operator==(const AffineExpr& o) const;
  bool operator!=(const AffineExpr& o) const { return !(*this == o); }

 private:
  void add_term(const Atom& a, const Int& c);

  std::vector<std::pair<Atom, Int>> terms_;
  Int constant_ = 0;
};

enum class Rel { kEq, kNe, kLt, kLe, kGt, kGe };

Rel negate(Rel r);
Rel mirror(Rel r);  // a r b  <=>  b mirror(r) a
const char* to_string(Rel r);
bool holds(Rel r, const Int& lhs, const Int& rhs);

// Quantifier-bearing integer formula over affine atoms.
class Formula {
 public:
  enum class Kind { kTrue, kFalse, kCmp, kDiv, kAnd, kOr, kNot, kExists };

  Formula();  // true
  static Formula truth();
  static Formula falsity();
  static Formula cmp(AffineExpr lhs, Rel rel, AffineExpr rhs);
  // expr mod modulus = residue, modulus > 0.
  static Formula divides(Int modulus, AffineExpr expr, Int residue = 0);
  static Formula conj(std::vector<Formula> parts);
  static Formula disj(std::vector<Formula> parts);
  static Formula negation(const Formula& f);
  static Formula exists(std::string var, Formula body);
  static Formula exists(const std::vector<std::string>& vars, Formula body);
  static Formula implication(const Formula& a, const Formula& b);

  Kind kind() const;
  bool is_true() const { return kind() == Kind::kTrue; }
  bool is_false() const { return kind() == Kind::kFalse; }

  const AffineExpr& lhs() const;
  const AffineExpr& rhs() const;
  Rel rel() const;
  const Int& modulus() const;
  const AffineExpr& expr() const;  // divisibility subject
  const Int& residue() const;
  const std::vector<Formula>& children() const;
  const std::string& var() const;
  const Formula& body() const;  // kNot, kExists

  // Capture-avoiding substitution of free symbols.
  Formula substitute(const Substitution& sub) const;
  void collect_free_symbols(std::set<std::string>& out) const;
  void collect_apps(std::vector<Atom>& out) const;
  bool mentions(const std::string& sym) const;
  bool has_quantifier() const;

  std::string str() const;
  bool operator==(const Formula& o) const { return str() == o.str(); }

  struct Node;

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula finish(std::shared_ptr<Node> n);
  std::shared_ptr<const Node> node_;
};

Formula operator&&(const Formula& a, const Formula& b);
Formula operator||(const Formula& a, const Formula& b);
Formula operator!(const Formula& a);

// Values for concrete evaluation. `app` receives evaluated arguments.
struct Valuation {
  std::function<Int(const std::string&)> symbol;
  std::function<Int(const std::string&, const std::vector<Int>&)> app;
};

Int evaluate(const AffineExpr& e, const Valuation& v);
// Existential quantifiers are decided by eliminating them first.
bool evaluate(const Formula& f, const Valuation& v);

// Returns a name not in `taken`, based on `base` ("k", "k1", ...).
std::string fresh_name(const std::string& base, const std::set<std::string>& taken);

}  // namespace fsa
