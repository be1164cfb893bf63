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

#include "fsa/lang.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace fsa {

std::string Position::str() const { return std::to_string(line) + ":" + std::to_string(column); }

// ---------------------------------------------------------------------------
// Ref

Ref Ref::substitute(const Substitution& sub) const {
  Ref r{name, {}};
  for (const auto& i : indices) r.indices.push_back(i.substitute(sub));
  return r;
}

std::string Ref::str() const {
  if (indices.empty()) return name;
  std::string s = name + "(";
  for (size_t i = 0; i < indices.size(); ++i) {
    if (i) s += ",";
    s += indices[i].str();
  }
  return s + ")";
}

bool Ref::operator==(const Ref& o) const { return name == o.name && indices == o.indices; }

// ---------------------------------------------------------------------------
// ValExpr

struct ValExpr::Node {
  Kind kind = Kind::kConst;
  Rational value;
  std::optional<Ref> ref;
  AffineExpr index;
  char op = 0;
  std::string fn;
  std::vector<ValExpr> kids;
};

ValExpr ValExpr::constant(Rational v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kConst;
  n->value = std::move(v);
  return ValExpr(std::move(n));
}

ValExpr ValExpr::read(Ref r) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kRead;
  n->ref = std::move(r);
  return ValExpr(std::move(n));
}

ValExpr ValExpr::index(AffineExpr e) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kIndex;
  n->index = std::move(e);
  return ValExpr(std::move(n));
}

ValExpr ValExpr::op(char op, std::vector<ValExpr> operands) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kOp;
  n->op = op;
  n->kids = std::move(operands);
  return ValExpr(std::move(n));
}

ValExpr ValExpr::apply(std::string fn, std::vector<ValExpr> operands) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kApply;
  n->fn = std::move(fn);
  n->kids = std::move(operands);
  return ValExpr(std::move(n));
}

ValExpr::Kind ValExpr::kind() const { return node_->kind; }
const Rational& ValExpr::value() const { return node_->value; }
const Ref& ValExpr::ref() const { return *node_->ref; }
const AffineExpr& ValExpr::index_expr() const { return node_->index; }
char ValExpr::op() const { return node_->op; }
const std::string& ValExpr::fn() const { return node_->fn; }
const std::vector<ValExpr>& ValExpr::operands() const { return node_->kids; }

ValExpr ValExpr::substitute(const Substitution& sub) const {
  switch (kind()) {
    case Kind::kConst:
      return *this;
    case Kind::kRead:
      return read(ref().substitute(sub));
    case Kind::kIndex:
      return index(index_expr().substitute(sub));
    case Kind::kOp:
    case Kind::kApply: {
      std::vector<ValExpr> kids;
      for (const auto& k : operands()) kids.push_back(k.substitute(sub));
      return kind() == Kind::kOp ? op(op(), std::move(kids)) : apply(fn(), std::move(kids));
    }
  }
  return *this;
}

ValExpr ValExpr::rename_ref(const std::string& name, const std::vector<AffineExpr>& extra) const {
  switch (kind()) {
    case Kind::kConst:
    case Kind::kIndex:
      return *this;
    case Kind::kRead: {
      if (ref().name != name) return *this;
      Ref r = ref();
      r.indices.insert(r.indices.end(), extra.begin(), extra.end());
      return read(std::move(r));
    }
    case Kind::kOp:
    case Kind::kApply: {
      std::vector<ValExpr> kids;
      for (const auto& k : operands()) kids.push_back(k.rename_ref(name, extra));
      return kind() == Kind::kOp ? op(op(), std::move(kids)) : apply(fn(), std::move(kids));
    }
  }
  return *this;
}

void ValExpr::collect_reads(std::vector<Ref>& out) const {
  if (kind() == Kind::kRead) out.push_back(ref());
  for (const auto& k : operands()) k.collect_reads(out);
}

void ValExpr::collect_symbols(std::set<std::string>& out) const {
  switch (kind()) {
    case Kind::kRead:
      for (const auto& i : ref().indices) i.collect_symbols(out);
      break;
    case Kind::kIndex:
      index_expr().collect_symbols(out);
      break;
    default:
      break;
  }
  for (const auto& k : operands()) k.collect_symbols(out);
}

namespace {

int precedence(const ValExpr& e) {
  switch (e.kind()) {
    case ValExpr::Kind::kOp:
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
    case ValExpr::Kind::kIndex:
      return e.index_expr().terms().size() + (e.index_expr().constant_term() != 0) > 1 ||
                     (!e.index_expr().terms().empty() && e.index_expr().terms()[0].second < 0)
                 ? 1
                 : 4;
    case ValExpr::Kind::kConst:
      return (boost::multiprecision::denominator(e.value()) != 1 || e.value() < 0) ? 0 : 4;
    default:
      return 4;
  }
}

std::string paren_if(const ValExpr& e, bool cond) { return cond ? "(" + e.str() + ")" : e.str(); }

}  // namespace

std::string ValExpr::str() const {
  switch (kind()) {
    case Kind::kConst: {
      std::string s = to_string(value());
      return s;
    }
    case Kind::kRead:
      return ref().str();
    case Kind::kIndex:
      return index_expr().str();
    case Kind::kApply: {
      std::string s = fn() + "(";
      for (size_t i = 0; i < operands().size(); ++i) {
        if (i) s += ", ";
        s += operands()[i].str();
      }
      return s + ")";
    }
    case Kind::kOp: {
      if (op() == 'n') {
        return "-" + paren_if(operands()[0], precedence(operands()[0]) < 3);
      }
      int p = precedence(*this);
      const ValExpr& l = operands()[0];
      const ValExpr& r = operands()[1];
      // Left-associative: the right operand needs parentheses at equal
      // precedence.
      return paren_if(l, precedence(l) < p) + " " + std::string(1, op()) + " " +
             paren_if(r, precedence(r) <= p);
    }
  }
  return "";
}

bool ValExpr::operator==(const ValExpr& o) const {
  if (kind() != o.kind()) return false;
  switch (kind()) {
    case Kind::kConst:
      return value() == o.value();
    case Kind::kRead:
      return ref() == o.ref();
    case Kind::kIndex:
      return index_expr() == o.index_expr();
    case Kind::kOp:
      if (op() != o.op()) return false;
      break;
    case Kind::kApply:
      if (fn() != o.fn()) return false;
      break;
  }
  return operands() == o.operands();
}

// ---------------------------------------------------------------------------
// Pred

struct Pred::Node {
  Kind kind = Kind::kAffine;
  Formula formula;
  std::optional<ValExpr> lhs, rhs;
  Rel rel = Rel::kEq;
  std::vector<Pred> kids;
};

Pred Pred::affine(Formula f) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kAffine;
  n->formula = std::move(f);
  return Pred(std::move(n));
}

Pred Pred::value(ValExpr lhs, Rel rel, ValExpr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kValue;
  n->lhs = std::move(lhs);
  n->rel = rel;
  n->rhs = std::move(rhs);
  return Pred(std::move(n));
}

namespace {

Pred junction(Pred::Kind k, std::vector<Pred> parts) {
  bool all_affine = std::all_of(parts.begin(), parts.end(),
                                [](const Pred& p) { return p.kind() == Pred::Kind::kAffine; });
  if (all_affine) {
    std::vector<Formula> fs;
    for (const auto& p : parts) fs.push_back(p.formula());
    return Pred::affine(k == Pred::Kind::kAnd ? Formula::conj(std::move(fs))
                                              : Formula::disj(std::move(fs)));
  }
  return k == Pred::Kind::kAnd ? Pred::conj(std::move(parts)) : Pred::disj(std::move(parts));
}

}  // namespace

Pred Pred::conj(std::vector<Pred> parts) {
  if (parts.size() == 1) return parts[0];
  auto n = std::make_shared<Node>();
  n->kind = Kind::kAnd;
  n->kids = std::move(parts);
  return Pred(std::move(n));
}

Pred Pred::disj(std::vector<Pred> parts) {
  if (parts.size() == 1) return parts[0];
  auto n = std::make_shared<Node>();
  n->kind = Kind::kOr;
  n->kids = std::move(parts);
  return Pred(std::move(n));
}

Pred Pred::negation(Pred p) {
  if (p.kind() == Kind::kAffine) return affine(Formula::negation(p.formula()));
  if (p.kind() == Kind::kNot) return p.children()[0];
  auto n = std::make_shared<Node>();
  n->kind = Kind::kNot;
  n->kids = {std::move(p)};
  return Pred(std::move(n));
}

Pred::Kind Pred::kind() const { return node_->kind; }
const Formula& Pred::formula() const { return node_->formula; }
const ValExpr& Pred::lhs() const { return *node_->lhs; }
const ValExpr& Pred::rhs() const { return *node_->rhs; }
Rel Pred::rel() const { return node_->rel; }
const std::vector<Pred>& Pred::children() const { return node_->kids; }

bool Pred::is_affine() const {
  switch (kind()) {
    case Kind::kAffine:
      return true;
    case Kind::kValue:
      return false;
    default:
      return std::all_of(children().begin(), children().end(),
                         [](const Pred& p) { return p.is_affine(); });
  }
}

Formula Pred::to_formula() const {
  switch (kind()) {
    case Kind::kAffine:
      return formula();
    case Kind::kValue:
      throw Error("value comparison is not an affine formula: " + str());
    case Kind::kAnd:
    case Kind::kOr: {
      std::vector<Formula> fs;
      for (const auto& c : children()) fs.push_back(c.to_formula());
      return kind() == Kind::kAnd ? Formula::conj(std::move(fs)) : Formula::disj(std::move(fs));
    }
    case Kind::kNot:
      return Formula::negation(children()[0].to_formula());
  }
  return Formula::truth();
}

Pred Pred::substitute(const Substitution& sub) const {
  switch (kind()) {
    case Kind::kAffine:
      return affine(formula().substitute(sub));
    case Kind::kValue:
      return value(lhs().substitute(sub), rel(), rhs().substitute(sub));
    case Kind::kNot:
      return negation(children()[0].substitute(sub));
    default: {
      std::vector<Pred> ps;
      for (const auto& c : children()) ps.push_back(c.substitute(sub));
      return junction(kind(), std::move(ps));
    }
  }
}

Pred Pred::rename_ref(const std::string& name, const std::vector<AffineExpr>& extra) const {
  switch (kind()) {
    case Kind::kAffine:
      return *this;
    case Kind::kValue:
      return value(lhs().rename_ref(name, extra), rel(), rhs().rename_ref(name, extra));
    case Kind::kNot:
      return negation(children()[0].rename_ref(name, extra));
    default: {
      std::vector<Pred> ps;
      for (const auto& c : children()) ps.push_back(c.rename_ref(name, extra));
      return kind() == Kind::kAnd ? conj(std::move(ps)) : disj(std::move(ps));
    }
  }
}

void Pred::collect_reads(std::vector<Ref>& out) const {
  if (kind() == Kind::kValue) {
    lhs().collect_reads(out);
    rhs().collect_reads(out);
  }
  for (const auto& c : children()) c.collect_reads(out);
}

void Pred::collect_symbols(std::set<std::string>& out) const {
  switch (kind()) {
    case Kind::kAffine:
      formula().collect_free_symbols(out);
      break;
    case Kind::kValue:
      lhs().collect_symbols(out);
      rhs().collect_symbols(out);
      break;
    default:
      for (const auto& c : children()) c.collect_symbols(out);
  }
}

std::string Pred::str() const {
  switch (kind()) {
    case Kind::kAffine:
      return formula().str();
    case Kind::kValue:
      return lhs().str() + " " + to_string(rel()) + " " + rhs().str();
    case Kind::kNot:
      return "not (" + children()[0].str() + ")";
    default: {
      std::string s;
      const char* sep = kind() == Kind::kAnd ? " and " : " or ";
      for (size_t i = 0; i < children().size(); ++i) {
        if (i) s += sep;
        const Pred& c = children()[i];
        bool wrap = c.kind() == Kind::kOr || c.kind() == Kind::kAnd ||
                    (c.kind() == Kind::kAffine && (c.formula().kind() == Formula::Kind::kOr ||
                                                   c.formula().kind() == Formula::Kind::kAnd ||
                                                   c.formula().kind() == Formula::Kind::kExists));
        s += wrap ? "(" + c.str() + ")" : c.str();
      }
      return s;
    }
  }
}

bool Pred::operator==(const Pred& o) const {
  if (kind() != o.kind()) return false;
  switch (kind()) {
    case Kind::kAffine:
      return formula() == o.formula();
    case Kind::kValue:
      return lhs() == o.lhs() && rel() == o.rel() && rhs() == o.rhs();
    default:
      return children() == o.children();
  }
}

// ---------------------------------------------------------------------------
// Stmt

struct Stmt::Node {
  Kind kind = Kind::kSeq;
  std::string label;
  Position pos;
  std::vector<Stmt> kids;
  std::string var;
  std::vector<AffineExpr> lower, upper;
  Step step;
  std::optional<Pred> cond;
  bool has_else = false;
  std::optional<Ref> lhs;
  std::optional<ValExpr> rhs;
};

Stmt Stmt::seq(std::vector<Stmt> parts, std::string label) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kSeq;
  n->kids = std::move(parts);
  n->label = std::move(label);
  return Stmt(std::move(n));
}

Stmt Stmt::loop(std::string var, std::vector<AffineExpr> lower, std::vector<AffineExpr> upper,
                Step step, Stmt body, std::string label) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kFor;
  n->var = std::move(var);
  n->lower = std::move(lower);
  n->upper = std::move(upper);
  n->step = std::move(step);
  if (body.kind() != Kind::kSeq || !body.label().empty()) body = seq({body});
  n->kids = {std::move(body)};
  n->label = std::move(label);
  return Stmt(std::move(n));
}

Stmt Stmt::branch(Pred cond, Stmt then_branch, std::optional<Stmt> else_branch, std::string label) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kIf;
  n->cond = std::move(cond);
  if (then_branch.kind() != Kind::kSeq || !then_branch.label().empty()) {
    then_branch = seq({then_branch});
  }
  n->kids = {std::move(then_branch)};
  if (else_branch) {
    Stmt e = *else_branch;
    if (e.kind() != Kind::kSeq || !e.label().empty()) e = seq({e});
    n->kids.push_back(std::move(e));
    n->has_else = true;
  }
  n->label = std::move(label);
  return Stmt(std::move(n));
}

Stmt Stmt::assign(Ref lhs, ValExpr rhs, std::string label) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kAssign;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->label = std::move(label);
  return Stmt(std::move(n));
}

Stmt::Kind Stmt::kind() const { return node_->kind; }
const std::string& Stmt::label() const { return node_->label; }
const Position& Stmt::pos() const { return node_->pos; }

Stmt Stmt::with_label(std::string label) const {
  auto n = std::make_shared<Node>(*node_);
  n->label = std::move(label);
  return Stmt(std::move(n));
}

Stmt Stmt::with_pos(Position pos) const {
  auto n = std::make_shared<Node>(*node_);
  n->pos = pos;
  return Stmt(std::move(n));
}

const std::vector<Stmt>& Stmt::parts() const { return node_->kids; }
const std::string& Stmt::var() const { return node_->var; }
const std::vector<AffineExpr>& Stmt::lower() const { return node_->lower; }
const std::vector<AffineExpr>& Stmt::upper() const { return node_->upper; }
const Step& Stmt::step() const { return node_->step; }
const Stmt& Stmt::body() const { return node_->kids.at(0); }
const Pred& Stmt::cond() const { return *node_->cond; }
const Stmt& Stmt::then_branch() const { return node_->kids.at(0); }
bool Stmt::has_else() const { return node_->has_else; }
const Stmt& Stmt::else_branch() const { return node_->kids.at(1); }
const Ref& Stmt::lhs() const { return *node_->lhs; }
const ValExpr& Stmt::rhs() const { return *node_->rhs; }

namespace {

std::vector<AffineExpr> subst_all(const std::vector<AffineExpr>& es, const Substitution& sub) {
  std::vector<AffineExpr> out;
  for (const auto& e : es) out.push_back(e.substitute(sub));
  return out;
}

Stmt rebuild(const Stmt& s, std::vector<Stmt> kids) {
  switch (s.kind()) {
    case Stmt::Kind::kSeq:
      return Stmt::seq(std::move(kids), s.label()).with_pos(s.pos());
    case Stmt::Kind::kFor:
      return Stmt::loop(s.var(), s.lower(), s.upper(), s.step(), kids[0], s.label())
          .with_pos(s.pos());
    case Stmt::Kind::kIf:
      return Stmt::branch(s.cond(), kids[0],
                          kids.size() > 1 ? std::optional<Stmt>(kids[1]) : std::nullopt, s.label())
          .with_pos(s.pos());
    case Stmt::Kind::kAssign:
      return s;
  }
  return s;
}

}  // namespace

Stmt Stmt::substitute(const Substitution& sub) const {
  if (sub.empty()) return *this;
  switch (kind()) {
    case Kind::kSeq: {
      std::vector<Stmt> kids;
      for (const auto& k : parts()) kids.push_back(k.substitute(sub));
      return seq(std::move(kids), label()).with_pos(pos());
    }
    case Kind::kFor: {
      Substitution inner = sub;
      inner.erase(var());
      Step st = step();
      if (st.is_symbolic()) {
        auto it = sub.find(st.symbol);
        if (it != sub.end()) {
          if (it->second.is_symbol()) {
            st.symbol = it->second.terms()[0].first.name();
          } else if (it->second.is_constant()) {
            st.literal = it->second.constant_term();
            st.symbol.clear();
          }
        }
      }
      return loop(var(), subst_all(lower(), sub), subst_all(upper(), sub), st,
                  body().substitute(inner), label())
          .with_pos(pos());
    }
    case Kind::kIf:
      return branch(cond().substitute(sub), then_branch().substitute(sub),
                    has_else() ? std::optional<Stmt>(else_branch().substitute(sub)) : std::nullopt,
                    label())
          .with_pos(pos());
    case Kind::kAssign:
      return assign(lhs().substitute(sub), rhs().substitute(sub), label()).with_pos(pos());
  }
  return *this;
}

Stmt Stmt::rename_ref(const std::string& name, const std::vector<AffineExpr>& extra) const {
  switch (kind()) {
    case Kind::kAssign: {
      Ref l = lhs();
      if (l.name == name) l.indices.insert(l.indices.end(), extra.begin(), extra.end());
      return assign(std::move(l), rhs().rename_ref(name, extra), label()).with_pos(pos());
    }
    case Kind::kIf: {
      std::vector<Stmt> kids;
      for (const auto& k : node_->kids) kids.push_back(k.rename_ref(name, extra));
      return branch(cond().rename_ref(name, extra), kids[0],
                    kids.size() > 1 ? std::optional<Stmt>(kids[1]) : std::nullopt, label())
          .with_pos(pos());
    }
    default: {
      std::vector<Stmt> kids;
      for (const auto& k : node_->kids) kids.push_back(k.rename_ref(name, extra));
      return rebuild(*this, std::move(kids));
    }
  }
}

Stmt Stmt::relabel(const std::string& suffix) const {
  std::vector<Stmt> kids;
  for (const auto& k : node_->kids) kids.push_back(k.relabel(suffix));
  Stmt r = kind() == Kind::kAssign ? *this : rebuild(*this, std::move(kids));
  return label().empty() ? r : r.with_label(label() + suffix);
}

Stmt Stmt::strip_labels() const {
  std::vector<Stmt> kids;
  for (const auto& k : node_->kids) kids.push_back(k.strip_labels());
  Stmt r = kind() == Kind::kAssign ? *this : rebuild(*this, std::move(kids));
  return r.with_label("");
}

bool Stmt::operator==(const Stmt& o) const {
  if (node_ == o.node_) return true;
  if (kind() != o.kind() || label() != o.label()) return false;
  if (node_->kids.size() != o.node_->kids.size()) return false;
  for (size_t i = 0; i < node_->kids.size(); ++i) {
    if (node_->kids[i] != o.node_->kids[i]) return false;
  }
  switch (kind()) {
    case Kind::kSeq:
      return true;
    case Kind::kFor:
      return var() == o.var() && lower() == o.lower() && upper() == o.upper() && step() == o.step();
    case Kind::kIf:
      return cond() == o.cond();
    case Kind::kAssign:
      return lhs() == o.lhs() && rhs() == o.rhs();
  }
  return false;
}

// ---------------------------------------------------------------------------
// Program

const ArrayDecl* Program::find_decl(const std::string& n) const {
  for (const auto& d : decls) {
    if (d.name == n) return &d;
  }
  return nullptr;
}

bool Program::is_param(const std::string& n) const {
  return std::find(params.begin(), params.end(), n) != params.end();
}

bool Program::is_int_array(const std::string& n) const {
  const ArrayDecl* d = find_decl(n);
  return d && d->elem == ElemKind::kInt;
}

Bindings Program::bindings() const {
  Bindings b;
  b.ground = Formula::conj(assumes);
  b.facts = facts;
  return b;
}

// ---------------------------------------------------------------------------
// Queries

namespace {

void walk(const Stmt& s, const std::function<void(const Stmt&)>& fn) {
  fn(s);
  switch (s.kind()) {
    case Stmt::Kind::kSeq:
      for (const auto& p : s.parts()) walk(p, fn);
      break;
    case Stmt::Kind::kFor:
      walk(s.body(), fn);
      break;
    case Stmt::Kind::kIf:
      walk(s.then_branch(), fn);
      if (s.has_else()) walk(s.else_branch(), fn);
      break;
    case Stmt::Kind::kAssign:
      break;
  }
}

void apps_of(const AffineExpr& e, std::set<std::string>& out) {
  std::vector<Atom> apps;
  e.collect_apps(apps);
  for (const auto& a : apps) out.insert(a.name());
}

void formula_apps(const Formula& f, std::set<std::string>& out) {
  std::vector<Atom> apps;
  f.collect_apps(apps);
  for (const auto& a : apps) out.insert(a.name());
}

}  // namespace

std::set<std::string> altered_vars(const Stmt& s) {
  std::set<std::string> out;
  walk(s, [&](const Stmt& x) {
    if (x.kind() == Stmt::Kind::kAssign) out.insert(x.lhs().name);
  });
  return out;
}

std::set<std::string> read_vars(const Stmt& s) {
  std::set<std::string> out;
  auto ref_reads = [&](const Ref& r) {
    for (const auto& i : r.indices) apps_of(i, out);
  };
  walk(s, [&](const Stmt& x) {
    switch (x.kind()) {
      case Stmt::Kind::kAssign: {
        ref_reads(x.lhs());
        std::vector<Ref> reads;
        x.rhs().collect_reads(reads);
        for (const auto& r : reads) {
          out.insert(r.name);
          ref_reads(r);
        }
        std::set<std::string> syms;
        std::function<void(const ValExpr&)> idx = [&](const ValExpr& e) {
          if (e.kind() == ValExpr::Kind::kIndex) apps_of(e.index_expr(), out);
          for (const auto& k : e.operands()) idx(k);
        };
        idx(x.rhs());
        break;
      }
      case Stmt::Kind::kFor:
        for (const auto& e : x.lower()) apps_of(e, out);
        for (const auto& e : x.upper()) apps_of(e, out);
        break;
      case Stmt::Kind::kIf: {
        std::vector<Ref> reads;
        x.cond().collect_reads(reads);
        for (const auto& r : reads) {
          out.insert(r.name);
          ref_reads(r);
        }
        std::function<void(const Pred&)> affine = [&](const Pred& p) {
          if (p.kind() == Pred::Kind::kAffine) formula_apps(p.formula(), out);
          for (const auto& c : p.children()) affine(c);
        };
        affine(x.cond());
        break;
      }
      default:
        break;
    }
  });
  return out;
}

std::set<std::string> touched_vars(const Stmt& s) {
  std::set<std::string> out = altered_vars(s);
  auto r = read_vars(s);
  out.insert(r.begin(), r.end());
  return out;
}

std::set<std::string> loop_vars(const Stmt& s) {
  std::set<std::string> out;
  walk(s, [&](const Stmt& x) {
    if (x.kind() == Stmt::Kind::kFor) out.insert(x.var());
  });
  return out;
}

std::vector<std::string> labels(const Stmt& s) {
  std::vector<std::string> out;
  walk(s, [&](const Stmt& x) {
    if (!x.label().empty()) out.push_back(x.label());
  });
  return out;
}

std::optional<Stmt> find_label(const Stmt& s, const std::string& label) {
  std::optional<Stmt> found;
  walk(s, [&](const Stmt& x) {
    if (!found && x.label() == label) found = x;
  });
  return found;
}

namespace {

Stmt replace_where(const Stmt& s, const std::function<bool(const Stmt&)>& match, const Stmt& with) {
  if (match(s)) return with;
  switch (s.kind()) {
    case Stmt::Kind::kAssign:
      return s;
    case Stmt::Kind::kSeq: {
      std::vector<Stmt> kids;
      for (const auto& p : s.parts()) kids.push_back(replace_where(p, match, with));
      return rebuild(s, std::move(kids));
    }
    case Stmt::Kind::kFor:
      return rebuild(s, {replace_where(s.body(), match, with)});
    case Stmt::Kind::kIf: {
      std::vector<Stmt> kids = {replace_where(s.then_branch(), match, with)};
      if (s.has_else()) kids.push_back(replace_where(s.else_branch(), match, with));
      return rebuild(s, std::move(kids));
    }
  }
  return s;
}

}  // namespace

Stmt replace_label(const Stmt& s, const std::string& label, const Stmt& with) {
  return replace_where(s, [&](const Stmt& x) { return x.label() == label; }, with);
}

Stmt replace_stmt(const Stmt& s, const Stmt& target, const Stmt& with) {
  return replace_where(s, [&](const Stmt& x) { return x == target; }, with);
}

std::optional<Stmt> find_loop(const Stmt& s, const std::string& name) {
  std::optional<Stmt> by_label;
  std::vector<Stmt> by_var;
  walk(s, [&](const Stmt& x) {
    if (x.kind() != Stmt::Kind::kFor) return;
    if (!by_label && x.label() == name) by_label = x;
    if (x.var() == name) by_var.push_back(x);
  });
  if (by_label) return by_label;
  if (by_var.size() == 1) return by_var[0];
  return std::nullopt;
}

Stmt replace_loop(const Stmt& s, const std::string& name, const Stmt& with) {
  std::optional<Stmt> target = find_loop(s, name);
  if (!target) throw Error("no unique loop '" + name + "'");
  return replace_where(s, [&](const Stmt& x) { return x == *target; }, with);
}

namespace {

struct Exposure {
  bool exposed = false;
  bool must_write = false;
};

bool pred_reads(const Pred& p, const std::string& v) {
  std::vector<Ref> reads;
  p.collect_reads(reads);
  return std::any_of(reads.begin(), reads.end(), [&](const Ref& r) { return r.name == v; });
}

Exposure exposure(const Stmt& s, const std::string& v) {
  switch (s.kind()) {
    case Stmt::Kind::kAssign: {
      std::vector<Ref> reads;
      s.rhs().collect_reads(reads);
      bool r = std::any_of(reads.begin(), reads.end(), [&](const Ref& x) { return x.name == v; });
      return {r, s.lhs().name == v};
    }
    case Stmt::Kind::kSeq: {
      Exposure acc;
      for (const auto& p : s.parts()) {
        Exposure e = exposure(p, v);
        acc.exposed = acc.exposed || (!acc.must_write && e.exposed);
        acc.must_write = acc.must_write || e.must_write;
      }
      return acc;
    }
    case Stmt::Kind::kIf: {
      Exposure t = exposure(s.then_branch(), v);
      Exposure e = s.has_else() ? exposure(s.else_branch(), v) : Exposure{};
      return {pred_reads(s.cond(), v) || t.exposed || e.exposed, t.must_write && e.must_write};
    }
    case Stmt::Kind::kFor:
      return {exposure(s.body(), v).exposed, false};
  }
  return {};
}

}  // namespace

bool exposed_read(const Stmt& s, const std::string& scalar) { return exposure(s, scalar).exposed; }

std::set<std::string> exposed_scalars(const Stmt& s, const Program& p) {
  std::set<std::string> out;
  for (const auto& d : p.decls) {
    if (d.rank() == 0 && exposed_read(s, d.name)) out.insert(d.name);
  }
  return out;
}

namespace {

// Enclosing-loop paths of every reference to v.
void ref_paths(const Stmt& s, const std::string& v, std::vector<std::string>& path,
               std::set<std::vector<std::string>>& out, bool& exposed_in_loop) {
  switch (s.kind()) {
    case Stmt::Kind::kAssign: {
      std::vector<Ref> reads;
      s.rhs().collect_reads(reads);
      bool touches = s.lhs().name == v || std::any_of(reads.begin(), reads.end(),
                                                      [&](const Ref& r) { return r.name == v; });
      if (touches) out.insert(path);
      return;
    }
    case Stmt::Kind::kSeq:
      for (const auto& p : s.parts()) ref_paths(p, v, path, out, exposed_in_loop);
      return;
    case Stmt::Kind::kIf:
      if (pred_reads(s.cond(), v)) out.insert(path);
      ref_paths(s.then_branch(), v, path, out, exposed_in_loop);
      if (s.has_else()) ref_paths(s.else_branch(), v, path, out, exposed_in_loop);
      return;
    case Stmt::Kind::kFor: {
      if (touched_vars(s.body()).count(v) && exposed_read(s.body(), v)) {
        exposed_in_loop = true;
      }
      path.push_back(s.var());
      ref_paths(s.body(), v, path, out, exposed_in_loop);
      path.pop_back();
      return;
    }
  }
}

}  // namespace

Stmt privatize(const Stmt& s, const Program& p, const std::set<std::string>& live,
               std::set<std::string>* expanded) {
  Stmt out = s;
  for (const auto& v : altered_vars(s)) {
    const ArrayDecl* d = p.find_decl(v);
    if (!d || d->rank() != 0 || live.count(v) || exposed_read(s, v)) continue;
    std::vector<std::string> path;
    std::set<std::vector<std::string>> paths;
    bool exposed_in_loop = false;
    ref_paths(s, v, path, paths, exposed_in_loop);
    if (exposed_in_loop || paths.size() != 1 || paths.begin()->empty()) continue;
    std::vector<AffineExpr> extra;
    for (const auto& lv : *paths.begin()) extra.push_back(AffineExpr::var(lv));
    out = out.rename_ref(v, extra);
    if (expanded) expanded->insert(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Well-formedness

std::string Diagnostic::str() const { return pos.line > 0 ? pos.str() + ": " + message : message; }

namespace {

class WellFormed {
 public:
  explicit WellFormed(const Program& p) : p_(p) {}

  std::vector<Diagnostic> run() {
    std::set<std::string> names;
    for (const auto& x : p_.params) declare(names, x);
    for (const auto& d : p_.decls) {
      declare(names, d.name);
      for (const auto& dim : d.dims) {
        for (const auto* e : {&dim.lo, &dim.hi}) {
          std::set<std::string> syms;
          e->collect_symbols(syms);
          std::vector<Atom> apps;
          e->collect_apps(apps);
          for (const auto& s : syms) {
            if (!p_.is_param(s))
              add("bound of " + d.name + " references non-parameter '" + s + "'", {});
          }
          if (!apps.empty()) add("bound of " + d.name + " is not affine in parameters", {});
        }
      }
    }
    for (const auto& o : p_.outputs) {
      if (!p_.find_decl(o)) add("output '" + o + "' is not a declared array or scalar", {});
    }
    for (const auto& f : p_.assumes) check_formula(f, {}, {});
    for (const auto& fact : p_.facts) {
      std::set<std::string> bound;
      for (const auto& r : fact.ranges) bound.insert(r.var);
      check_formula(fact.conclusion, bound, {});
    }
    std::set<std::string> seen_labels;
    for (const auto& l : labels(p_.body)) {
      if (!seen_labels.insert(l).second) add("duplicate label '" + l + "'", {});
    }
    stmt(p_.body, {});
    return std::move(diags_);
  }

 private:
  void add(std::string msg, Position pos) { diags_.push_back({std::move(msg), pos}); }

  void declare(std::set<std::string>& names, const std::string& n) {
    if (!names.insert(n).second) add("duplicate declaration of '" + n + "'", {});
  }

  void check_affine(const AffineExpr& e, const std::set<std::string>& scope, Position pos) {
    std::set<std::string> syms;
    e.collect_symbols(syms);
    for (const auto& s : syms) {
      if (!scope.count(s) && !p_.is_param(s)) {
        add("undeclared identifier '" + s + "'", pos);
      }
    }
    std::vector<Atom> apps;
    e.collect_apps(apps);
    for (const auto& a : apps) {
      if (a.name() == "*") {
        add("non-affine index " + a.str(), pos);
        continue;
      }
      const ArrayDecl* d = p_.find_decl(a.name());
      if (!d) {
        add("undeclared function '" + a.name() + "'", pos);
      } else if (d->elem != ElemKind::kInt) {
        add("opaque index term " + a.str() + " reads a non-integer array", pos);
      } else if (d->rank() != a.args().size()) {
        add("arity mismatch for " + a.name(), pos);
      }
    }
  }

  void check_formula(const Formula& f, const std::set<std::string>& scope, Position pos) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::kCmp:
        check_affine(f.lhs(), scope, pos);
        check_affine(f.rhs(), scope, pos);
        break;
      case K::kDiv:
        check_affine(f.expr(), scope, pos);
        break;
      case K::kExists: {
        auto inner = scope;
        inner.insert(f.var());
        check_formula(f.body(), inner, pos);
        break;
      }
      default:
        for (const auto& c : f.children()) check_formula(c, scope, pos);
    }
  }

  void check_ref(const Ref& r, const std::set<std::string>& scope, Position pos) {
    const ArrayDecl* d = p_.find_decl(r.name);
    if (!d) {
      add("undeclared array '" + r.name + "'", pos);
      return;
    }
    if (d->rank() != r.indices.size()) {
      add("arity mismatch for " + r.name + ": expected " + std::to_string(d->rank()) +
              " indices, got " + std::to_string(r.indices.size()),
          pos);
    }
    for (const auto& i : r.indices) check_affine(i, scope, pos);
  }

  void check_val(const ValExpr& e, const std::set<std::string>& scope, Position pos) {
    switch (e.kind()) {
      case ValExpr::Kind::kRead:
        check_ref(e.ref(), scope, pos);
        break;
      case ValExpr::Kind::kIndex:
        check_affine(e.index_expr(), scope, pos);
        break;
      case ValExpr::Kind::kApply:
        if (e.fn() != "abs" || e.operands().size() != 1) {
          add("undeclared function '" + e.fn() + "'", pos);
        }
        break;
      case ValExpr::Kind::kOp: {
        size_t want = e.op() == 'n' ? 1 : 2;
        if (e.operands().size() != want) add("operator arity", pos);
        break;
      }
      default:
        break;
    }
    for (const auto& k : e.operands()) check_val(k, scope, pos);
  }

  void check_pred(const Pred& c, const std::set<std::string>& scope, Position pos) {
    switch (c.kind()) {
      case Pred::Kind::kAffine:
        check_formula(c.formula(), scope, pos);
        break;
      case Pred::Kind::kValue:
        check_val(c.lhs(), scope, pos);
        check_val(c.rhs(), scope, pos);
        break;
      default:
        for (const auto& k : c.children()) check_pred(k, scope, pos);
    }
  }

  void stmt(const Stmt& s, std::set<std::string> scope) {
    switch (s.kind()) {
      case Stmt::Kind::kSeq:
        for (const auto& p : s.parts()) stmt(p, scope);
        break;
      case Stmt::Kind::kFor: {
        if (scope.count(s.var()) || p_.is_param(s.var()) || p_.find_decl(s.var())) {
          add("loop variable '" + s.var() + "' shadows another declaration", s.pos());
        }
        for (const auto& e : s.lower()) check_affine(e, scope, s.pos());
        for (const auto& e : s.upper()) check_affine(e, scope, s.pos());
        if (s.lower().empty() || s.upper().empty()) add("loop without bounds", s.pos());
        if (s.step().is_symbolic()) {
          if (!p_.is_param(s.step().symbol)) {
            add("symbolic step '" + s.step().symbol + "' is not a parameter", s.pos());
          }
        } else if (s.step().literal == 0) {
          add("zero loop step", s.pos());
        }
        std::vector<const Stmt*> assigns;
        walk(s.body(), [&](const Stmt& x) {
          if (x.kind() == Stmt::Kind::kAssign && x.lhs().name == s.var()) {
            add("loop variable assigned: '" + s.var() + "'", x.pos());
          }
        });
        scope.insert(s.var());
        stmt(s.body(), scope);
        break;
      }
      case Stmt::Kind::kIf:
        check_pred(s.cond(), scope, s.pos());
        stmt(s.then_branch(), scope);
        if (s.has_else()) stmt(s.else_branch(), scope);
        break;
      case Stmt::Kind::kAssign:
        if (scope.count(s.lhs().name) || p_.is_param(s.lhs().name)) {
          add(std::string(scope.count(s.lhs().name) ? "loop variable assigned: '"
                                                    : "parameter assigned: '") +
                  s.lhs().name + "'",
              s.pos());
          break;
        }
        check_ref(s.lhs(), scope, s.pos());
        check_val(s.rhs(), scope, s.pos());
        break;
    }
  }

  const Program& p_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<Diagnostic> check_well_formed(const Program& p) { return WellFormed(p).run(); }

}  // namespace fsa
