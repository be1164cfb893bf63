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

#include "fsa/affine.hpp"

#include <algorithm>
#include <sstream>

#include "fsa/solver.hpp"

namespace fsa {

struct Atom::Node {
  bool app = false;
  std::string name;
  std::vector<AffineExpr> args;
  std::string key;
};

Atom Atom::symbol(std::string name) {
  auto n = std::make_shared<Node>();
  n->name = std::move(name);
  n->key = n->name;
  return Atom(std::move(n));
}

Atom Atom::app(std::string fn, std::vector<AffineExpr> args) {
  auto n = std::make_shared<Node>();
  n->app = true;
  n->name = std::move(fn);
  n->args = std::move(args);
  std::string key = n->name + "(";
  for (size_t i = 0; i < n->args.size(); ++i) {
    if (i) key += ",";
    key += n->args[i].canonical();
  }
  n->key = key + ")";
  return Atom(std::move(n));
}

bool Atom::is_symbol() const { return !node_->app; }
const std::string& Atom::name() const { return node_->name; }
const std::vector<AffineExpr>& Atom::args() const { return node_->args; }
const std::string& Atom::key() const { return node_->key; }

std::string Atom::str() const {
  if (!node_->app) return node_->name;
  if (node_->name == "*" && node_->args.size() == 2) {
    auto side = [](const AffineExpr& e) {
      return e.terms().size() + (e.constant_term() != 0) > 1 ? "(" + e.str() + ")" : e.str();
    };
    return side(node_->args[0]) + "*" + side(node_->args[1]);
  }
  std::string s = node_->name + "(";
  for (size_t i = 0; i < node_->args.size(); ++i) {
    if (i) s += ",";
    s += node_->args[i].str();
  }
  return s + ")";
}

// ---------------------------------------------------------------------------
// AffineExpr

AffineExpr AffineExpr::constant(Int c) {
  AffineExpr e;
  e.constant_ = std::move(c);
  return e;
}

AffineExpr AffineExpr::var(const std::string& name) { return of(Atom::symbol(name)); }

AffineExpr AffineExpr::of(const Atom& a, Int coef) {
  AffineExpr e;
  e.add_term(a, coef);
  return e;
}

void AffineExpr::add_term(const Atom& a, const Int& c) {
  if (c == 0) return;
  for (auto it = terms_.begin(); it != terms_.end(); ++it) {
    if (it->first == a) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
      return;
    }
  }
  terms_.emplace_back(a, c);
}

Int AffineExpr::coeff(const std::string& key) const {
  for (const auto& [a, c] : terms_) {
    if (a.key() == key) return c;
  }
  return 0;
}

bool AffineExpr::is_symbol() const {
  return constant_ == 0 && terms_.size() == 1 && terms_[0].second == 1 &&
         terms_[0].first.is_symbol();
}

AffineExpr AffineExpr::operator+(const AffineExpr& o) const {
  AffineExpr r = *this;
  for (const auto& [a, c] : o.terms_) r.add_term(a, c);
  r.constant_ += o.constant_;
  return r;
}

AffineExpr AffineExpr::operator-(const AffineExpr& o) const { return *this + (-o); }

AffineExpr AffineExpr::operator-() const { return *this * Int(-1); }

AffineExpr AffineExpr::operator*(const Int& k) const {
  AffineExpr r;
  if (k == 0) return r;
  r.terms_ = terms_;
  for (auto& t : r.terms_) t.second *= k;
  r.constant_ = constant_ * k;
  return r;
}

AffineExpr AffineExpr::operator+(const Int& k) const {
  AffineExpr r = *this;
  r.constant_ += k;
  return r;
}

AffineExpr AffineExpr::operator-(const Int& k) const {
  AffineExpr r = *this;
  r.constant_ -= k;
  return r;
}

AffineExpr AffineExpr::substitute(const Substitution& sub) const {
  if (sub.empty()) return *this;
  AffineExpr r = constant(constant_);
  for (const auto& [a, c] : terms_) {
    if (a.is_symbol()) {
      auto it = sub.find(a.name());
      if (it != sub.end()) {
        r = r + it->second * c;
        continue;
      }
      r.add_term(a, c);
    } else {
      std::vector<AffineExpr> args;
      args.reserve(a.args().size());
      for (const auto& x : a.args()) args.push_back(x.substitute(sub));
      r.add_term(Atom::app(a.name(), std::move(args)), c);
    }
  }
  return r;
}

bool AffineExpr::mentions(const std::string& sym) const {
  for (const auto& [a, c] : terms_) {
    if (a.is_symbol()) {
      if (a.name() == sym) return true;
    } else {
      for (const auto& x : a.args()) {
        if (x.mentions(sym)) return true;
      }
    }
  }
  return false;
}

void AffineExpr::collect_symbols(std::set<std::string>& out) const {
  for (const auto& [a, c] : terms_) {
    if (a.is_symbol()) {
      out.insert(a.name());
    } else {
      for (const auto& x : a.args()) x.collect_symbols(out);
    }
  }
}

void AffineExpr::collect_apps(std::vector<Atom>& out) const {
  for (const auto& [a, c] : terms_) {
    if (a.is_symbol()) continue;
    for (const auto& x : a.args()) x.collect_apps(out);
    bool seen = std::any_of(out.begin(), out.end(), [&](const Atom& b) { return b == a; });
    if (!seen) out.push_back(a);
  }
}

namespace {

std::string render(const std::vector<std::pair<Atom, Int>>& terms, const Int& constant) {
  std::string s;
  for (const auto& [a, c] : terms) {
    Int mag = fsa::abs(c);
    if (s.empty()) {
      if (c < 0) s += "-";
    } else {
      s += c < 0 ? " - " : " + ";
    }
    if (mag != 1) s += mag.str() + "*";
    s += a.str();
  }
  if (s.empty()) return constant.str();
  if (constant > 0) s += " + " + constant.str();
  if (constant < 0) s += " - " + Int(-constant).str();
  return s;
}

}  // namespace

std::string AffineExpr::str() const { return render(terms_, constant_); }

std::string AffineExpr::canonical() const {
  auto sorted = terms_;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  // Canonical text must not depend on display order of nested arguments.
  std::string s;
  for (const auto& [a, c] : sorted) {
    if (!s.empty() || c < 0) s += c < 0 ? "-" : "+";
    if (fsa::abs(c) != 1) s += fsa::abs(c).str() + "*";
    s += a.key();
  }
  if (s.empty()) return constant_.str();
  if (constant_ > 0) s += "+" + constant_.str();
  if (constant_ < 0) s += constant_.str();
  return s;
}

bool AffineExpr::operator==(const AffineExpr& o) const {
  if (constant_ != o.constant_ || terms_.size() != o.terms_.size()) {
    return false;
  }
  for (const auto& [a, c] : terms_) {
    if (o.coeff(a.key()) != c) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Rel

Rel negate(Rel r) {
  switch (r) {
    case Rel::kEq:
      return Rel::kNe;
    case Rel::kNe:
      return Rel::kEq;
    case Rel::kLt:
      return Rel::kGe;
    case Rel::kLe:
      return Rel::kGt;
    case Rel::kGt:
      return Rel::kLe;
    case Rel::kGe:
      return Rel::kLt;
  }
  return r;
}

Rel mirror(Rel r) {
  switch (r) {
    case Rel::kLt:
      return Rel::kGt;
    case Rel::kLe:
      return Rel::kGe;
    case Rel::kGt:
      return Rel::kLt;
    case Rel::kGe:
      return Rel::kLe;
    default:
      return r;
  }
}

const char* to_string(Rel r) {
  switch (r) {
    case Rel::kEq:
      return "=";
    case Rel::kNe:
      return "!=";
    case Rel::kLt:
      return "<";
    case Rel::kLe:
      return "<=";
    case Rel::kGt:
      return ">";
    case Rel::kGe:
      return ">=";
  }
  return "?";
}

bool holds(Rel r, const Int& a, const Int& b) {
  switch (r) {
    case Rel::kEq:
      return a == b;
    case Rel::kNe:
      return a != b;
    case Rel::kLt:
      return a < b;
    case Rel::kLe:
      return a <= b;
    case Rel::kGt:
      return a > b;
    case Rel::kGe:
      return a >= b;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Formula

struct Formula::Node {
  Kind kind = Kind::kTrue;
  AffineExpr lhs, rhs;
  Rel rel = Rel::kEq;
  Int modulus, residue;
  std::vector<Formula> kids;
  std::string var;
  mutable std::string text;  // memoized str()
};

namespace {

const std::shared_ptr<const Formula::Node>& true_node() {
  static const auto n = [] {
    auto p = std::make_shared<Formula::Node>();
    p->kind = Formula::Kind::kTrue;
    p->text = "true";
    return std::shared_ptr<const Formula::Node>(p);
  }();
  return n;
}

const std::shared_ptr<const Formula::Node>& false_node() {
  static const auto n = [] {
    auto p = std::make_shared<Formula::Node>();
    p->kind = Formula::Kind::kFalse;
    p->text = "false";
    return std::shared_ptr<const Formula::Node>(p);
  }();
  return n;
}

}  // namespace

Formula::Formula() : node_(true_node()) {}

// Renders the text once, before the node becomes shared, so later str()
// calls are read-only.
Formula Formula::finish(std::shared_ptr<Node> n) {
  Formula f(std::move(n));
  f.str();
  return f;
}
Formula Formula::truth() { return Formula(true_node()); }
Formula Formula::falsity() { return Formula(false_node()); }

Formula Formula::cmp(AffineExpr lhs, Rel rel, AffineExpr rhs) {
  AffineExpr d = lhs - rhs;
  if (d.is_constant()) {
    return holds(rel, d.constant_term(), Int(0)) ? truth() : falsity();
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::kCmp;
  n->lhs = std::move(lhs);
  n->rel = rel;
  n->rhs = std::move(rhs);
  return finish(std::move(n));
}

Formula Formula::divides(Int modulus, AffineExpr expr, Int residue) {
  modulus = fsa::abs(modulus);
  if (modulus == 0) throw Error("divisibility by zero");
  residue = mod(residue, modulus);
  if (modulus == 1) return truth();
  if (expr.is_constant()) {
    return mod(expr.constant_term(), modulus) == residue ? truth() : falsity();
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::kDiv;
  n->modulus = std::move(modulus);
  n->lhs = std::move(expr);
  n->residue = std::move(residue);
  return finish(std::move(n));
}

Formula Formula::conj(std::vector<Formula> parts) {
  std::vector<Formula> flat;
  std::set<std::string> seen;
  for (auto& p : parts) {
    if (p.is_true()) continue;
    if (p.is_false()) return falsity();
    if (p.kind() == Kind::kAnd) {
      for (const auto& q : p.children()) {
        if (seen.insert(q.str()).second) flat.push_back(q);
      }
    } else if (seen.insert(p.str()).second) {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return truth();
  if (flat.size() == 1) return flat[0];
  auto n = std::make_shared<Node>();
  n->kind = Kind::kAnd;
  n->kids = std::move(flat);
  return finish(std::move(n));
}

Formula Formula::disj(std::vector<Formula> parts) {
  std::vector<Formula> flat;
  std::set<std::string> seen;
  for (auto& p : parts) {
    if (p.is_false()) continue;
    if (p.is_true()) return truth();
    if (p.kind() == Kind::kOr) {
      for (const auto& q : p.children()) {
        if (seen.insert(q.str()).second) flat.push_back(q);
      }
    } else if (seen.insert(p.str()).second) {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return falsity();
  if (flat.size() == 1) return flat[0];
  auto n = std::make_shared<Node>();
  n->kind = Kind::kOr;
  n->kids = std::move(flat);
  return finish(std::move(n));
}

Formula Formula::negation(const Formula& f) {
  switch (f.kind()) {
    case Kind::kTrue:
      return falsity();
    case Kind::kFalse:
      return truth();
    case Kind::kCmp:
      return cmp(f.lhs(), negate(f.rel()), f.rhs());
    case Kind::kNot:
      return f.body();
    default:
      break;
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::kNot;
  n->kids = {f};
  return finish(std::move(n));
}

Formula Formula::exists(std::string var, Formula body) {
  if (!body.mentions(var)) return body;
  auto n = std::make_shared<Node>();
  n->kind = Kind::kExists;
  n->var = std::move(var);
  n->kids = {std::move(body)};
  return finish(std::move(n));
}

Formula Formula::exists(const std::vector<std::string>& vars, Formula body) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
    body = exists(*it, std::move(body));
  }
  return body;
}

Formula Formula::implication(const Formula& a, const Formula& b) { return disj({negation(a), b}); }

Formula::Kind Formula::kind() const { return node_->kind; }
const AffineExpr& Formula::lhs() const { return node_->lhs; }
const AffineExpr& Formula::rhs() const { return node_->rhs; }
Rel Formula::rel() const { return node_->rel; }
const Int& Formula::modulus() const { return node_->modulus; }
const AffineExpr& Formula::expr() const { return node_->lhs; }
const Int& Formula::residue() const { return node_->residue; }
const std::vector<Formula>& Formula::children() const { return node_->kids; }
const std::string& Formula::var() const { return node_->var; }
const Formula& Formula::body() const { return node_->kids.at(0); }

Formula Formula::substitute(const Substitution& sub) const {
  if (sub.empty()) return *this;
  switch (kind()) {
    case Kind::kTrue:
    case Kind::kFalse:
      return *this;
    case Kind::kCmp:
      return cmp(lhs().substitute(sub), rel(), rhs().substitute(sub));
    case Kind::kDiv:
      return divides(modulus(), expr().substitute(sub), residue());
    case Kind::kAnd:
    case Kind::kOr: {
      std::vector<Formula> parts;
      for (const auto& c : children()) parts.push_back(c.substitute(sub));
      return kind() == Kind::kAnd ? conj(std::move(parts)) : disj(std::move(parts));
    }
    case Kind::kNot:
      return negation(body().substitute(sub));
    case Kind::kExists: {
      Substitution inner = sub;
      inner.erase(var());
      // Rename the bound variable if a replacement would capture it.
      std::set<std::string> incoming;
      for (const auto& [k, v] : inner) {
        if (body().mentions(k)) v.collect_symbols(incoming);
      }
      std::string bound = var();
      if (incoming.count(bound)) {
        std::set<std::string> taken = incoming;
        body().collect_free_symbols(taken);
        for (const auto& [k, v] : inner) taken.insert(k);
        bound = fresh_name(var(), taken);
        inner[var()] = AffineExpr::var(bound);
      }
      return exists(bound, body().substitute(inner));
    }
  }
  return *this;
}

void Formula::collect_free_symbols(std::set<std::string>& out) const {
  switch (kind()) {
    case Kind::kTrue:
    case Kind::kFalse:
      return;
    case Kind::kCmp:
      lhs().collect_symbols(out);
      rhs().collect_symbols(out);
      return;
    case Kind::kDiv:
      expr().collect_symbols(out);
      return;
    case Kind::kAnd:
    case Kind::kOr:
      for (const auto& c : children()) c.collect_free_symbols(out);
      return;
    case Kind::kNot:
      body().collect_free_symbols(out);
      return;
    case Kind::kExists: {
      std::set<std::string> inner;
      body().collect_free_symbols(inner);
      inner.erase(var());
      out.insert(inner.begin(), inner.end());
      return;
    }
  }
}

void Formula::collect_apps(std::vector<Atom>& out) const {
  switch (kind()) {
    case Kind::kCmp:
      lhs().collect_apps(out);
      rhs().collect_apps(out);
      return;
    case Kind::kDiv:
      expr().collect_apps(out);
      return;
    case Kind::kAnd:
    case Kind::kOr:
    case Kind::kNot:
    case Kind::kExists:
      for (const auto& c : children()) c.collect_apps(out);
      return;
    default:
      return;
  }
}

bool Formula::mentions(const std::string& sym) const {
  std::set<std::string> syms;
  collect_free_symbols(syms);
  return syms.count(sym) > 0;
}

bool Formula::has_quantifier() const {
  if (kind() == Kind::kExists) return true;
  for (const auto& c : children()) {
    if (c.has_quantifier()) return true;
  }
  return false;
}

namespace {

std::string wrapped(const Formula& f, bool wrap_and) {
  using K = Formula::Kind;
  bool wrap = f.kind() == K::kOr || f.kind() == K::kExists || (wrap_and && f.kind() == K::kAnd);
  return wrap ? "(" + f.str() + ")" : f.str();
}

}  // namespace

std::string Formula::str() const {
  if (!node_->text.empty()) return node_->text;
  std::string s;
  switch (kind()) {
    case Kind::kTrue:
      s = "true";
      break;
    case Kind::kFalse:
      s = "false";
      break;
    case Kind::kCmp:
      s = lhs().str() + " " + to_string(rel()) + " " + rhs().str();
      break;
    case Kind::kDiv:
      s = expr().str() + " mod " + modulus().str() + " = " + residue().str();
      if (expr().terms().size() > 1 || !expr().constant_term().is_zero()) {
        s = "(" + expr().str() + ") mod " + modulus().str() + " = " + residue().str();
      }
      break;
    case Kind::kAnd:
    case Kind::kOr: {
      const char* sep = kind() == Kind::kAnd ? " and " : " or ";
      for (size_t i = 0; i < children().size(); ++i) {
        if (i) s += sep;
        s += wrapped(children()[i], kind() == Kind::kOr);
      }
      break;
    }
    case Kind::kNot:
      s = "not (" + body().str() + ")";
      break;
    case Kind::kExists:
      s = "exists " + var() + ": " + body().str();
      break;
  }
  node_->text = s;
  return s;
}

Formula operator&&(const Formula& a, const Formula& b) { return Formula::conj({a, b}); }
Formula operator||(const Formula& a, const Formula& b) { return Formula::disj({a, b}); }
Formula operator!(const Formula& a) { return Formula::negation(a); }

// ---------------------------------------------------------------------------
// Evaluation

Int evaluate(const AffineExpr& e, const Valuation& v) {
  Int r = e.constant_term();
  for (const auto& [a, c] : e.terms()) {
    if (a.is_symbol()) {
      r += c * v.symbol(a.name());
    } else {
      std::vector<Int> args;
      for (const auto& x : a.args()) args.push_back(evaluate(x, v));
      if (!v.app) throw Error("no valuation for opaque term " + a.str());
      r += c * v.app(a.name(), args);
    }
  }
  return r;
}

bool evaluate(const Formula& f, const Valuation& v) {
  switch (f.kind()) {
    case Formula::Kind::kTrue:
      return true;
    case Formula::Kind::kFalse:
      return false;
    case Formula::Kind::kCmp:
      return holds(f.rel(), evaluate(f.lhs(), v), evaluate(f.rhs(), v));
    case Formula::Kind::kDiv:
      return mod(evaluate(f.expr(), v), f.modulus()) == f.residue();
    case Formula::Kind::kAnd:
      for (const auto& c : f.children()) {
        if (!evaluate(c, v)) return false;
      }
      return true;
    case Formula::Kind::kOr:
      for (const auto& c : f.children()) {
        if (evaluate(c, v)) return true;
      }
      return false;
    case Formula::Kind::kNot:
      return !evaluate(f.body(), v);
    case Formula::Kind::kExists:
      return evaluate(eliminate_exists(f), v);
  }
  return false;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
  if (!taken.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string cand = base + std::to_string(i);
    if (!taken.count(cand)) return cand;
  }
}

}  // namespace fsa
