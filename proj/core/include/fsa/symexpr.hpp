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
#include <string>
#include <vector>

#include "fsa/affine.hpp"
#include "fsa/numeric.hpp"

namespace fsa {

// Value of a program in terms of its inputs. kInput is the value of an array
// cell before execution (printed A_in(...)); kIndex is an integer-valued
// affine expression used as data.
class SymExpr {
 public:
  enum class Kind { kConst, kInput, kIndex, kOp, kApply };

  static SymExpr constant(Rational v);
  static SymExpr input(std::string array, std::vector<AffineExpr> index);
  static SymExpr index(AffineExpr e);
  // '+', '-', '*', '/' binary; 'n' unary negation.
  static SymExpr op(char op, std::vector<SymExpr> operands);
  static SymExpr apply(std::string fn, std::vector<SymExpr> operands);

  Kind kind() const;
  const Rational& value() const;
  const std::string& array() const;
  const std::vector<AffineExpr>& indices() const;
  const AffineExpr& index_expr() const;
  char op() const;
  const std::string& fn() const;
  const std::vector<SymExpr>& operands() const;

  SymExpr substitute(const Substitution& sub) const;
  void collect_apps(std::vector<Atom>& out) const;
  std::string str() const;
  // Structural identity (index vectors compared as normalized affine maps).
  bool operator==(const SymExpr& o) const;

 private:
  struct Node;
  explicit SymExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct SymValuation {
  std::function<Rational(const std::string& array, const std::vector<Int>& idx)> input;
  Valuation index;
};

// Throws Error on division by zero.
Rational evaluate(const SymExpr& e, const SymValuation& v);

// Multivariate polynomial with rational coefficients over opaque atoms:
// input reads, index symbols, applications and non-constant quotients.
class CanonExpr {
 public:
  using Monomial = std::vector<std::pair<std::string, int>>;  // sorted by key

  const std::map<Monomial, Rational>& terms() const { return terms_; }
  const std::map<std::string, SymExpr>& atoms() const { return atoms_; }
  bool is_constant() const;
  std::string str() const;
  // The polynomial rebuilt as an expression (sum of products of atoms).
  SymExpr to_symexpr() const;

  bool operator==(const CanonExpr& o) const { return terms_ == o.terms_; }
  bool operator!=(const CanonExpr& o) const { return !(*this == o); }

 private:
  friend class Canonicalizer;
  std::map<Monomial, Rational> terms_;
  std::map<std::string, SymExpr> atoms_;
};

CanonExpr canon(const SymExpr& e);
bool equal(const SymExpr& a, const SymExpr& b);

}  // namespace fsa
