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

#include "fsa/symexpr.hpp"

#include <algorithm>
#include <optional>

namespace fsa {

struct SymExpr::Node {
  Kind kind = Kind::kConst;
  Rational value;
  std::string name;  // array or function
  std::vector<AffineExpr> indices;
  AffineExpr index;
  char op = 0;
  std::vector<SymExpr> operands;
};

SymExpr SymExpr::constant(Rational v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  return SymExpr(n);
}

SymExpr SymExpr::input(std::string array, std::vector<AffineExpr> index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kInput;
  n->name = std::move(array);
  n->indices = std::move(index);
  return SymExpr(n);
}

SymExpr SymExpr::index(AffineExpr e) {
  if (e.is_constant()) return constant(Rational(e.constant_term()));
  auto n = std::make_shared<Node>();
  n->kind = Kind::kIndex;
  n->index = std::move(e);
  return SymExpr(n);
}

SymExpr SymExpr::op(char op, std::vector<SymExpr> operands) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kOp;
  n->op = op;
  n->operands = std::move(operands);
  return SymExpr(n);
}

SymExpr SymExpr::apply(std::string fn, std::vector<SymExpr> operands) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kApply;
  n->name = std::move(fn);
  n->operands = std::move(operands);
  return SymExpr(n);
}

SymExpr::Kind SymExpr::kind() const { return node_->kind; }
const Rational& SymExpr::value() const { return node_->value; }
const std::string& SymExpr::array() const { return node_->name; }
const std::vector<AffineExpr>& SymExpr::indices() const { return node_->indices; }
const AffineExpr& SymExpr::index_expr() const { return node_->index; }
char SymExpr::op() const { return node_->op; }
const std::string& SymExpr::fn() const { return node_->name; }
const std::vector<SymExpr>& SymExpr::operands() const { return node_->operands; }

SymExpr SymExpr::substitute(const Substitution& sub) const {
  switch (kind()) {
    case Kind::kConst:
      return *this;
    case Kind::kInput: {
      std::vector<AffineExpr> idx;
      for (const auto& e : indices()) idx.push_back(e.substitute(sub));
      return input(array(), std::move(idx));
    }
    case Kind::kIndex:
      return index(index_expr().substitute(sub));
    case Kind::kOp:
    case Kind::kApply: {
      std::vector<SymExpr> ops;
      for (const auto& o : operands()) ops.push_back(o.substitute(sub));
      return kind() == Kind::kOp ? op(op(), std::move(ops)) : apply(fn(), std::move(ops));
    }
  }
  return *this;
}

void SymExpr::collect_apps(std::vector<Atom>& out) const {
  switch (kind()) {
    case Kind::kConst:
      break;
    case Kind::kInput:
      for (const auto& e : indices()) e.collect_apps(out);
      break;
    case Kind::kIndex:
      index_expr().collect_apps(out);
      break;
    default:
      for (const auto& o : operands()) o.collect_apps(out);
  }
}

namespace {

int precedence(const SymExpr& e) {
  if (e.kind() == SymExpr::Kind::kConst && e.value() < 0) return 3;
  if (e.kind() != SymExpr::Kind::kOp) return 4;
  switch (e.op()) {
    case '+':
    case '-':
      return 1;
    case '*':
    case '/':
      return 2;
    default:
      return 3;
  }
}

std::string wrap(const SymExpr& e, int min_prec) {
  std::string s = e.str();
  if (precedence(e) < min_prec) return "(" + s + ")";
  return s;
}

std::string index_list(const std::vector<AffineExpr>& idx) {
  std::string s;
  for (size_t i = 0; i < idx.size(); ++i) {
    if (i) s += ",";
    s += idx[i].str();
  }
  return s;
}

}  // namespace

std::string SymExpr::str() const {
  switch (kind()) {
    case Kind::kConst:
      return to_string(value());
    case Kind::kInput:
      if (indices().empty()) return array() + "_in";
      return array() + "_in(" + index_list(indices()) + ")";
    case Kind::kIndex: {
      std::string s = index_expr().str();
      return index_expr().is_symbol() ? s : "(" + s + ")";
    }
    case Kind::kApply: {
      std::string s = fn() + "(";
      for (size_t i = 0; i < operands().size(); ++i) {
        if (i) s += ", ";
        s += operands()[i].str();
      }
      return s + ")";
    }
    case Kind::kOp: {
      const auto& o = operands();
      if (op() == 'n') return "-" + wrap(o[0], 3);
      int p = precedence(*this);
      return wrap(o[0], p) + " " + std::string(1, op()) + " " + wrap(o[1], p + 1);
    }
  }
  return "";
}

bool SymExpr::operator==(const SymExpr& o) const {
  if (node_ == o.node_) return true;
  if (kind() != o.kind()) return false;
  switch (kind()) {
    case Kind::kConst:
      return value() == o.value();
    case Kind::kInput:
      return array() == o.array() && indices() == o.indices();
    case Kind::kIndex:
      return index_expr() == o.index_expr();
    case Kind::kOp:
      return op() == o.op() && operands() == o.operands();
    case Kind::kApply:
      return fn() == o.fn() && operands() == o.operands();
  }
  return false;
}

Rational evaluate(const SymExpr& e, const SymValuation& v) {
  switch (e.kind()) {
    case SymExpr::Kind::kConst:
      return e.value();
    case SymExpr::Kind::kInput: {
      std::vector<Int> idx;
      for (const auto& i : e.indices()) idx.push_back(evaluate(i, v.index));
      return v.input(e.array(), idx);
    }
    case SymExpr::Kind::kIndex:
      return Rational(evaluate(e.index_expr(), v.index));
    case SymExpr::Kind::kApply: {
      if (e.fn() == "abs" && e.operands().size() == 1) {
        Rational x = evaluate(e.operands()[0], v);
        return x < 0 ? Rational(-x) : x;
      }
      throw Error("unknown function '" + e.fn() + "'");
    }
    case SymExpr::Kind::kOp: {
      const auto& o = e.operands();
      if (e.op() == 'n') return -evaluate(o[0], v);
      Rational a = evaluate(o[0], v);
      Rational b = evaluate(o[1], v);
      switch (e.op()) {
        case '+':
          return a + b;
        case '-':
          return a - b;
        case '*':
          return a * b;
        case '/':
          if (b == 0) throw Error("division by zero");
          return a / b;
      }
      throw Error("bad operator");
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

class Canonicalizer {
 public:
  using Poly = std::map<CanonExpr::Monomial, Rational>;

  CanonExpr run(const SymExpr& e) {
    CanonExpr out;
    out.terms_ = walk(e);
    for (const auto& [mono, c] : out.terms_) {
      for (const auto& [key, exp] : mono) out.atoms_.emplace(key, atoms_.at(key));
    }
    return out;
  }

 private:
  static Poly constant(const Rational& c) {
    Poly p;
    if (c != 0) p[{}] = c;
    return p;
  }

  Poly atom(const std::string& key, const SymExpr& e) {
    atoms_.emplace(key, e);
    Poly p;
    p[{{key, 1}}] = 1;
    return p;
  }

  static Poly add(Poly a, const Poly& b, const Rational& scale = 1) {
    for (const auto& [m, c] : b) {
      Rational& slot = a[m];
      slot += c * scale;
      if (slot == 0) a.erase(m);
    }
    return a;
  }

  static CanonExpr::Monomial mono_mul(const CanonExpr::Monomial& a, const CanonExpr::Monomial& b) {
    std::map<std::string, int> acc;
    for (const auto& [k, e] : a) acc[k] += e;
    for (const auto& [k, e] : b) acc[k] += e;
    return CanonExpr::Monomial(acc.begin(), acc.end());
  }

  static Poly mul(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ma, ca] : a) {
      for (const auto& [mb, cb] : b) {
        auto m = mono_mul(ma, mb);
        Rational& slot = out[m];
        slot += ca * cb;
        if (slot == 0) out.erase(m);
      }
    }
    return out;
  }

  static bool is_const(const Poly& p, Rational* value) {
    if (p.empty()) {
      *value = 0;
      return true;
    }
    if (p.size() == 1 && p.begin()->first.empty()) {
      *value = p.begin()->second;
      return true;
    }
    return false;
  }

  // A canonical operand rebuilt as an expression, with its key.
  std::pair<std::string, SymExpr> sub_canon(const SymExpr& e) {
    CanonExpr c;
    c.terms_ = walk(e);
    for (const auto& [mono, k] : c.terms_) {
      for (const auto& [key, exp] : mono) c.atoms_.emplace(key, atoms_.at(key));
    }
    return {c.str(), c.to_symexpr()};
  }

  Poly walk(const SymExpr& e) {
    switch (e.kind()) {
      case SymExpr::Kind::kConst:
        return constant(e.value());
      case SymExpr::Kind::kInput: {
        std::string key = e.array() + "_in(";
        for (size_t i = 0; i < e.indices().size(); ++i) {
          if (i) key += ",";
          key += e.indices()[i].canonical();
        }
        return atom(key + ")", e);
      }
      case SymExpr::Kind::kIndex: {
        const AffineExpr& a = e.index_expr();
        Poly p = constant(Rational(a.constant_term()));
        for (const auto& [at, c] : a.terms()) {
          p = add(p, atom("#" + at.key(), SymExpr::index(AffineExpr::of(at))), Rational(c));
        }
        return p;
      }
      case SymExpr::Kind::kApply: {
        std::string key = e.fn() + "(";
        std::vector<SymExpr> args;
        for (size_t i = 0; i < e.operands().size(); ++i) {
          auto [k, s] = sub_canon(e.operands()[i]);
          if (i) key += ", ";
          key += k;
          args.push_back(s);
        }
        return atom(key + ")", SymExpr::apply(e.fn(), std::move(args)));
      }
      case SymExpr::Kind::kOp:
        break;
    }
    const auto& o = e.operands();
    switch (e.op()) {
      case 'n':
        return add(Poly{}, walk(o[0]), -1);
      case '+':
        return add(walk(o[0]), walk(o[1]));
      case '-':
        return add(walk(o[0]), walk(o[1]), -1);
      case '*':
        return mul(walk(o[0]), walk(o[1]));
      case '/': {
        Poly den = walk(o[1]);
        Rational c;
        if (is_const(den, &c) && c != 0) return add(Poly{}, walk(o[0]), 1 / c);
        auto [kn, sn] = sub_canon(o[0]);
        auto [kd, sd] = sub_canon(o[1]);
        return atom("(" + kn + ")/(" + kd + ")", SymExpr::op('/', {sn, sd}));
      }
    }
    throw Error("bad operator");
  }

  std::map<std::string, SymExpr> atoms_;
};

bool CanonExpr::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

std::string CanonExpr::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  bool first = true;
  for (const auto& [mono, c] : terms_) {
    Rational mag = c < 0 ? Rational(-c) : c;
    if (first) {
      if (c < 0) s += "-";
    } else {
      s += c < 0 ? " - " : " + ";
    }
    first = false;
    std::string body;
    for (const auto& [key, exp] : mono) {
      if (!body.empty()) body += "*";
      body += key;
      if (exp > 1) body += "^" + std::to_string(exp);
    }
    if (body.empty()) {
      s += to_string(mag);
    } else if (mag == 1) {
      s += body;
    } else {
      s += to_string(mag) + "*" + body;
    }
  }
  return s;
}

SymExpr CanonExpr::to_symexpr() const {
  std::optional<SymExpr> sum;
  for (const auto& [mono, c] : terms_) {
    std::optional<SymExpr> prod;
    if (c != 1 || mono.empty()) prod = SymExpr::constant(c);
    for (const auto& [key, exp] : mono) {
      for (int i = 0; i < exp; ++i) {
        const SymExpr& a = atoms_.at(key);
        prod = prod ? SymExpr::op('*', {*prod, a}) : a;
      }
    }
    sum = sum ? SymExpr::op('+', {*sum, *prod}) : *prod;
  }
  return sum ? *sum : SymExpr::constant(0);
}

CanonExpr canon(const SymExpr& e) { return Canonicalizer().run(e); }

bool equal(const SymExpr& a, const SymExpr& b) { return canon(a) == canon(b); }

}  // namespace fsa
