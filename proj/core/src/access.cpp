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

#include "fsa/access.hpp"

namespace fsa {

namespace {

void symbols_of(const std::vector<AffineExpr>& es, std::set<std::string>& out) {
  for (const auto& e : es) e.collect_symbols(out);
}

void collect_symbols(const Stmt& s, std::set<std::string>& out) {
  switch (s.kind()) {
    case Stmt::Kind::kSeq:
      for (const auto& p : s.parts()) collect_symbols(p, out);
      break;
    case Stmt::Kind::kFor:
      out.insert(s.var());
      symbols_of(s.lower(), out);
      symbols_of(s.upper(), out);
      if (s.step().is_symbolic()) out.insert(s.step().symbol);
      collect_symbols(s.body(), out);
      break;
    case Stmt::Kind::kIf:
      s.cond().collect_symbols(out);
      collect_symbols(s.then_branch(), out);
      if (s.has_else()) collect_symbols(s.else_branch(), out);
      break;
    case Stmt::Kind::kAssign:
      symbols_of(s.lhs().indices, out);
      s.rhs().collect_symbols(out);
      break;
  }
}

class Collector {
 public:
  explicit Collector(const Stmt& root) : taken_(stmt_symbols(root)) {}

  void walk(const Stmt& s) {
    switch (s.kind()) {
      case Stmt::Kind::kSeq:
        for (const auto& p : s.parts()) walk(p);
        break;
      case Stmt::Kind::kFor: {
        for (const auto& e : s.lower()) app_reads(e);
        for (const auto& e : s.upper()) app_reads(e);
        std::string v = s.var();
        Stmt body = s.body();
        bool shadows = false;
        for (const auto& l : loops_) shadows |= l == v;
        if (shadows) {
          v = fresh_name(v, taken_);
          taken_.insert(v);
          body = body.substitute({{s.var(), AffineExpr::var(v)}});
        }
        Formula range;
        loop_range(s, v, &range);
        Formula saved = ctx_;
        ctx_ = ctx_ && range;
        loops_.push_back(v);
        ids_.push_back(next_id_++);
        walk(body);
        loops_.pop_back();
        ids_.pop_back();
        ctx_ = saved;
        break;
      }
      case Stmt::Kind::kIf: {
        pred_reads(s.cond());
        Formula saved = ctx_;
        bool affine = s.cond().is_affine();
        if (affine) ctx_ = saved && s.cond().to_formula();
        walk(s.then_branch());
        if (s.has_else()) {
          ctx_ = affine ? saved && !s.cond().to_formula() : saved;
          walk(s.else_branch());
        }
        ctx_ = saved;
        break;
      }
      case Stmt::Kind::kAssign:
        for (const auto& e : s.lhs().indices) app_reads(e);
        value_reads(s.rhs());
        add(s.lhs().name, s.lhs().indices, true);
        break;
    }
  }

  std::vector<Access> out;

 private:
  void add(const std::string& array, const std::vector<AffineExpr>& index, bool write) {
    out.push_back(Access{array, index, write, loops_, ids_, ctx_});
  }

  void app_reads(const AffineExpr& e) {
    std::vector<Atom> apps;
    e.collect_apps(apps);
    for (const auto& a : apps) add(a.name(), a.args(), false);
  }

  void formula_reads(const Formula& f) {
    std::vector<Atom> apps;
    f.collect_apps(apps);
    for (const auto& a : apps) add(a.name(), a.args(), false);
  }

  void value_reads(const ValExpr& e) {
    switch (e.kind()) {
      case ValExpr::Kind::kRead:
        for (const auto& i : e.ref().indices) app_reads(i);
        add(e.ref().name, e.ref().indices, false);
        break;
      case ValExpr::Kind::kIndex:
        app_reads(e.index_expr());
        break;
      case ValExpr::Kind::kConst:
        break;
      default:
        for (const auto& o : e.operands()) value_reads(o);
    }
  }

  void pred_reads(const Pred& p) {
    switch (p.kind()) {
      case Pred::Kind::kAffine:
        formula_reads(p.formula());
        break;
      case Pred::Kind::kValue:
        value_reads(p.lhs());
        value_reads(p.rhs());
        break;
      default:
        for (const auto& c : p.children()) pred_reads(c);
    }
  }

  std::set<std::string> taken_;
  std::vector<std::string> loops_;
  std::vector<int> ids_;
  int next_id_ = 0;
  Formula ctx_;
};

}  // namespace

std::vector<Access> collect_accesses(const Stmt& s) {
  Collector c(s);
  c.walk(s);
  return std::move(c.out);
}

bool loop_range(const Stmt& loop, const std::string& var, Formula* out) {
  AffineExpr v = AffineExpr::var(var);
  std::vector<Formula> parts;
  for (const auto& lo : loop.lower()) parts.push_back(Formula::cmp(lo, Rel::kLe, v));
  for (const auto& up : loop.upper()) parts.push_back(Formula::cmp(v, Rel::kLe, up));
  bool exact = true;
  const Step& st = loop.step();
  if (st.is_symbolic()) {
    exact = false;
  } else if (st.literal > 1 || st.literal < -1) {
    Int m = abs(st.literal);
    if (st.literal > 0 && loop.lower().size() == 1) {
      parts.push_back(Formula::divides(m, v - loop.lower()[0]));
    } else if (st.literal < 0 && loop.upper().size() == 1) {
      parts.push_back(Formula::divides(m, loop.upper()[0] - v));
    } else {
      exact = false;
    }
  }
  *out = Formula::conj(std::move(parts));
  return exact;
}

std::set<std::string> stmt_symbols(const Stmt& s) {
  std::set<std::string> out;
  collect_symbols(s, out);
  return out;
}

Stmt rename_loops_apart(const Stmt& s, const std::set<std::string>& taken) {
  switch (s.kind()) {
    case Stmt::Kind::kSeq: {
      std::vector<Stmt> parts;
      for (const auto& p : s.parts()) parts.push_back(rename_loops_apart(p, taken));
      return Stmt::seq(std::move(parts), s.label()).with_pos(s.pos());
    }
    case Stmt::Kind::kFor: {
      std::string v = s.var();
      Stmt body = s.body();
      if (taken.count(v)) {
        std::set<std::string> avoid = taken;
        auto mine = stmt_symbols(s);
        avoid.insert(mine.begin(), mine.end());
        v = fresh_name(v, avoid);
        body = body.substitute({{s.var(), AffineExpr::var(v)}});
      }
      return Stmt::loop(v, s.lower(), s.upper(), s.step(), rename_loops_apart(body, taken),
                        s.label())
          .with_pos(s.pos());
    }
    case Stmt::Kind::kIf:
      return Stmt::branch(s.cond(), rename_loops_apart(s.then_branch(), taken),
                          s.has_else()
                              ? std::optional<Stmt>(rename_loops_apart(s.else_branch(), taken))
                              : std::nullopt,
                          s.label())
          .with_pos(s.pos());
    case Stmt::Kind::kAssign:
      return s;
  }
  return s;
}

Stmt instantiate(const Stmt& s, const Substitution& sub) {
  std::set<std::string> taken;
  for (const auto& [k, v] : sub) v.collect_symbols(taken);
  return rename_loops_apart(s, taken).substitute(sub);
}

}  // namespace fsa
