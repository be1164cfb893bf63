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

#include "fsa/gse.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "fsa/access.hpp"

namespace fsa {

struct CETree::Node {
  Kind kind = Kind::kLeaf;
  SymExpr leaf = SymExpr::constant(0);
  char op = 0;
  std::string fn;
  std::vector<CETree> kids;
  Formula guard;
  bool has_cond = false;
  size_t size = 1;
};

CETree CETree::leaf(SymExpr e) {
  auto n = std::make_shared<Node>();
  n->leaf = std::move(e);
  return CETree(n);
}

namespace {

std::shared_ptr<CETree::Node> interior(CETree::Kind k, std::vector<CETree> kids) {
  auto n = std::make_shared<CETree::Node>();
  n->kind = k;
  n->has_cond = k == CETree::Kind::kCond;
  for (const auto& c : kids) {
    n->has_cond = n->has_cond || c.has_cond();
    n->size += c.size();
  }
  n->kids = std::move(kids);
  return n;
}

}  // namespace

CETree CETree::op(char op, std::vector<CETree> kids) {
  auto n = interior(Kind::kOp, std::move(kids));
  n->op = op;
  return CETree(n);
}

CETree CETree::apply(std::string fn, std::vector<CETree> kids) {
  auto n = interior(Kind::kApply, std::move(kids));
  n->fn = std::move(fn);
  return CETree(n);
}

CETree CETree::cond(Formula guard, CETree then_tree, CETree else_tree) {
  auto n = interior(Kind::kCond, {std::move(then_tree), std::move(else_tree)});
  n->guard = std::move(guard);
  return CETree(n);
}

CETree::Kind CETree::kind() const { return node_->kind; }
const SymExpr& CETree::leaf_expr() const { return node_->leaf; }
char CETree::op() const { return node_->op; }
const std::string& CETree::fn() const { return node_->fn; }
const std::vector<CETree>& CETree::kids() const { return node_->kids; }
const Formula& CETree::guard() const { return node_->guard; }
bool CETree::has_cond() const { return node_->has_cond; }
size_t CETree::size() const { return node_->size; }

SymExpr CETree::to_symexpr() const {
  switch (kind()) {
    case Kind::kLeaf:
      return leaf_expr();
    case Kind::kOp:
    case Kind::kApply: {
      std::vector<SymExpr> ops;
      for (const auto& k : kids()) ops.push_back(k.to_symexpr());
      return kind() == Kind::kOp ? SymExpr::op(op(), std::move(ops))
                                 : SymExpr::apply(fn(), std::move(ops));
    }
    case Kind::kCond:
      break;
  }
  throw Error("conditional tree has no single value");
}

void CETree::collect_apps(std::vector<Atom>& out) const {
  switch (kind()) {
    case Kind::kLeaf:
      leaf_expr().collect_apps(out);
      break;
    case Kind::kCond:
      guard().collect_apps(out);
      [[fallthrough]];
    default:
      for (const auto& k : kids()) k.collect_apps(out);
  }
}

std::string CETree::str() const {
  switch (kind()) {
    case Kind::kLeaf:
      return leaf_expr().str();
    case Kind::kCond:
      return "Cond(" + guard().str() + ", " + kids()[0].str() + ", " + kids()[1].str() + ")";
    case Kind::kApply: {
      std::string s = fn() + "(";
      for (size_t i = 0; i < kids().size(); ++i) s += (i ? ", " : "") + kids()[i].str();
      return s + ")";
    }
    case Kind::kOp:
      if (op() == 'n') return "-(" + kids()[0].str() + ")";
      return "(" + kids()[0].str() + " " + std::string(1, op()) + " " + kids()[1].str() + ")";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Index-map inversion.

namespace {

// Affine expression with rational coefficients over atom keys.
struct RatAffine {
  std::map<std::string, Rational> coef;
  Rational constant;

  void add(const RatAffine& o, const Rational& k) {
    for (const auto& [a, c] : o.coef) {
      Rational& slot = coef[a];
      slot += c * k;
      if (slot == 0) coef.erase(a);
    }
    constant += o.constant * k;
  }
};

// Solves index_j(bound) = target_j for the bound variables that occur
// linearly in the write index. Variables left undetermined, or determined
// with non-integral coefficients, are absent from the result.
Substitution invert(const std::vector<AffineExpr>& write_index,
                    const std::vector<AffineExpr>& target, const std::vector<std::string>& bound) {
  std::set<std::string> bound_set(bound.begin(), bound.end());
  std::map<std::string, Atom> atoms;
  std::vector<std::string> unknowns;
  struct Row {
    std::map<std::string, Rational> a;  // unknown -> coefficient
    RatAffine rhs;
  };
  std::vector<Row> rows;
  for (size_t j = 0; j < write_index.size(); ++j) {
    const AffineExpr& f = write_index[j];
    bool usable = true;
    Row row;
    RatAffine rest;
    for (const auto& [atom, c] : f.terms()) {
      if (atom.is_symbol() && bound_set.count(atom.name())) {
        row.a[atom.name()] += Rational(c);
        if (std::find(unknowns.begin(), unknowns.end(), atom.name()) == unknowns.end()) {
          unknowns.push_back(atom.name());
        }
      } else {
        for (const auto& b : bound) {
          usable = usable && !(atom.is_app() && AffineExpr::of(atom).mentions(b));
        }
        atoms.emplace(atom.key(), atom);
        rest.coef[atom.key()] += Rational(c);
      }
    }
    if (!usable) continue;
    rest.constant = Rational(f.constant_term());
    RatAffine rhs;
    for (const auto& [atom, c] : target[j].terms()) {
      atoms.emplace(atom.key(), atom);
      rhs.coef[atom.key()] += Rational(c);
    }
    rhs.constant = Rational(target[j].constant_term());
    rhs.add(rest, -1);
    row.rhs = rhs;
    rows.push_back(std::move(row));
  }

  // Gauss-Jordan elimination.
  std::map<std::string, size_t> pivot_row;
  size_t next = 0;
  for (const auto& u : unknowns) {
    size_t pr = next;
    while (pr < rows.size() && (!rows[pr].a.count(u) || rows[pr].a[u] == 0)) ++pr;
    if (pr == rows.size()) continue;
    std::swap(rows[pr], rows[next]);
    Row& p = rows[next];
    Rational inv = 1 / p.a[u];
    for (auto& [v, c] : p.a) c *= inv;
    RatAffine scaled;
    scaled.add(p.rhs, inv);
    p.rhs = scaled;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (r == next || !rows[r].a.count(u) || rows[r].a[u] == 0) continue;
      Rational k = rows[r].a[u];
      for (const auto& [v, c] : p.a) {
        Rational& slot = rows[r].a[v];
        slot -= k * c;
      }
      rows[r].rhs.add(p.rhs, -k);
    }
    pivot_row[u] = next++;
  }

  Substitution sol;
  for (const auto& [u, r] : pivot_row) {
    const Row& row = rows[r];
    bool alone = true;
    for (const auto& [v, c] : row.a) alone = alone && (v == u || c == 0);
    if (!alone) continue;
    bool integral = denominator(row.rhs.constant) == 1;
    for (const auto& [k, c] : row.rhs.coef) integral = integral && denominator(c) == 1;
    if (!integral) continue;
    AffineExpr e = AffineExpr::constant(numerator(row.rhs.constant));
    for (const auto& [k, c] : row.rhs.coef) e = e + AffineExpr::of(atoms.at(k), numerator(c));
    sol[u] = e;
  }
  return sol;
}

void value_symbols(const ValExpr& e, std::set<std::string>& out) { e.collect_symbols(out); }

void tree_symbols(const CETree& t, std::set<std::string>& out) {
  switch (t.kind()) {
    case CETree::Kind::kLeaf: {
      const SymExpr& e = t.leaf_expr();
      if (e.kind() == SymExpr::Kind::kInput) {
        for (const auto& i : e.indices()) i.collect_symbols(out);
      } else if (e.kind() == SymExpr::Kind::kIndex) {
        e.index_expr().collect_symbols(out);
      }
      break;
    }
    case CETree::Kind::kCond:
      t.guard().collect_free_symbols(out);
      [[fallthrough]];
    default:
      for (const auto& k : t.kids()) tree_symbols(k, out);
  }
}

void tree_arrays(const CETree& t, std::set<std::string>& out) {
  if (t.kind() == CETree::Kind::kLeaf) {
    if (t.leaf_expr().kind() == SymExpr::Kind::kInput) out.insert(t.leaf_expr().array());
    return;
  }
  for (const auto& k : t.kids()) tree_arrays(k, out);
}

struct BuildCtx {
  Formula cond;
  std::vector<std::string> bound;
};

CETree value_tree(const ValExpr& e, const Substitution& sub) {
  switch (e.kind()) {
    case ValExpr::Kind::kConst:
      return CETree::leaf(SymExpr::constant(e.value()));
    case ValExpr::Kind::kRead: {
      std::vector<AffineExpr> idx;
      for (const auto& i : e.ref().indices) idx.push_back(i.substitute(sub));
      return CETree::leaf(SymExpr::input(e.ref().name, std::move(idx)));
    }
    case ValExpr::Kind::kIndex:
      return CETree::leaf(SymExpr::index(e.index_expr().substitute(sub)));
    case ValExpr::Kind::kOp:
    case ValExpr::Kind::kApply: {
      std::vector<CETree> kids;
      for (const auto& o : e.operands()) kids.push_back(value_tree(o, sub));
      return e.kind() == ValExpr::Kind::kOp ? CETree::op(e.op(), std::move(kids))
                                            : CETree::apply(e.fn(), std::move(kids));
    }
  }
  throw Error("bad value");
}

class TreeBuilder {
 public:
  CETree through(const Stmt& s, const CETree& t, const BuildCtx& ctx) {
    switch (s.kind()) {
      case Stmt::Kind::kSeq: {
        CETree out = t;
        for (auto it = s.parts().rbegin(); it != s.parts().rend(); ++it) {
          out = through(*it, out, ctx);
        }
        return out;
      }
      case Stmt::Kind::kFor: {
        if (s.step().is_symbolic()) throw NotSimple("symbolic step in loop " + s.var());
        if (!touches(s, t)) return t;
        std::set<std::string> taken;
        tree_symbols(t, taken);
        ctx.cond.collect_free_symbols(taken);
        taken.insert(ctx.bound.begin(), ctx.bound.end());
        std::string v = s.var();
        Stmt body = s.body();
        if (taken.count(v)) {
          auto mine = stmt_symbols(s);
          taken.insert(mine.begin(), mine.end());
          v = fresh_name(v, taken);
          body = body.substitute({{s.var(), AffineExpr::var(v)}});
        }
        Formula range;
        if (!loop_range(s, v, &range)) {
          throw NotSimple("stepped loop " + s.var() + " with several start bounds");
        }
        BuildCtx inner{ctx.cond && range, ctx.bound};
        inner.bound.push_back(v);
        return through(body, t, inner);
      }
      case Stmt::Kind::kIf: {
        if (!s.cond().is_affine()) throw NotSimple("non-affine predicate " + s.cond().str());
        if (!touches(s, t)) return t;
        Formula p = s.cond().to_formula();
        CETree out = through(s.then_branch(), t, BuildCtx{ctx.cond && p, ctx.bound});
        if (s.has_else()) {
          out = through(s.else_branch(), out, BuildCtx{ctx.cond && !p, ctx.bound});
        }
        return out;
      }
      case Stmt::Kind::kAssign:
        return assign(s, t, ctx);
    }
    return t;
  }

 private:
  static bool touches(const Stmt& s, const CETree& t) {
    std::set<std::string> arrays;
    tree_arrays(t, arrays);
    for (const auto& a : altered_vars(s)) {
      if (arrays.count(a)) return true;
    }
    return false;
  }

  CETree assign(const Stmt& s, const CETree& t, const BuildCtx& ctx) {
    switch (t.kind()) {
      case CETree::Kind::kLeaf:
        return assign_leaf(s, t, ctx);
      case CETree::Kind::kCond:
        return CETree::cond(t.guard(), assign(s, t.kids()[0], ctx), assign(s, t.kids()[1], ctx));
      case CETree::Kind::kOp:
      case CETree::Kind::kApply: {
        std::vector<CETree> kids;
        for (const auto& k : t.kids()) kids.push_back(assign(s, k, ctx));
        return t.kind() == CETree::Kind::kOp ? CETree::op(t.op(), std::move(kids))
                                             : CETree::apply(t.fn(), std::move(kids));
      }
    }
    return t;
  }

  CETree assign_leaf(const Stmt& s, const CETree& t, const BuildCtx& ctx) {
    const SymExpr& e = t.leaf_expr();
    if (e.kind() != SymExpr::Kind::kInput || e.array() != s.lhs().name) return t;
    const auto& f = s.lhs().indices;
    std::vector<Formula> parts = {ctx.cond};
    for (size_t j = 0; j < f.size(); ++j) {
      parts.push_back(Formula::cmp(f[j], Rel::kEq, e.indices()[j]));
    }
    Formula guard = Formula::conj(std::move(parts));
    if (!ctx.bound.empty()) {
      guard = Formula::exists(ctx.bound, guard);
      try {
        guard = eliminate_exists(guard);
      } catch (const BudgetExceeded&) {
      }
    }
    if (guard.is_false()) return t;

    Substitution sol = invert(f, e.indices(), ctx.bound);
    std::set<std::string> used;
    value_symbols(s.rhs(), used);
    for (const auto& b : ctx.bound) {
      if (used.count(b) && !sol.count(b)) {
        throw NotSimple("write " + s.lhs().str() + " cannot be inverted for " + b);
      }
    }
    CETree rhs = value_tree(s.rhs(), sol);
    if (guard.is_true()) return rhs;
    return CETree::cond(guard, rhs, t);
  }
};

std::vector<std::string> target_vars(size_t rank, const std::set<std::string>& taken) {
  std::vector<std::string> out;
  if (rank == 1) {
    out.push_back(fresh_name("k", taken));
    return out;
  }
  std::set<std::string> t = taken;
  for (size_t i = 1; i <= rank; ++i) {
    std::string v = fresh_name("k" + std::to_string(i), t);
    t.insert(v);
    out.push_back(v);
  }
  return out;
}

}  // namespace

CETree build_expr_tree(const Stmt& s, const CETree& tree) {
  return TreeBuilder().through(s, tree, BuildCtx{});
}

CETree build_expr_tree(const Stmt& s, const std::string& array,
                       const std::vector<std::string>& index_vars) {
  std::vector<AffineExpr> idx;
  for (const auto& v : index_vars) idx.push_back(AffineExpr::var(v));
  return build_expr_tree(s, CETree::leaf(SymExpr::input(array, std::move(idx))));
}

// ---------------------------------------------------------------------------

namespace {

std::string find_unsupported(const Stmt& s) {
  switch (s.kind()) {
    case Stmt::Kind::kSeq:
      for (const auto& p : s.parts()) {
        std::string r = find_unsupported(p);
        if (!r.empty()) return r;
      }
      return "";
    case Stmt::Kind::kFor: {
      if (s.step().is_symbolic()) return "symbolic step in loop " + s.var();
      Formula dummy;
      if (!loop_range(s, s.var(), &dummy)) {
        return "stepped loop " + s.var() + " with several start bounds";
      }
      return find_unsupported(s.body());
    }
    case Stmt::Kind::kIf: {
      if (!s.cond().is_affine()) return "non-affine predicate " + s.cond().str();
      std::string r = find_unsupported(s.then_branch());
      if (r.empty() && s.has_else()) r = find_unsupported(s.else_branch());
      return r;
    }
    case Stmt::Kind::kAssign:
      return "";
  }
  return "";
}

std::string check_invertible(const Stmt& s, std::vector<std::string>& bound,
                             std::set<std::string>& taken) {
  switch (s.kind()) {
    case Stmt::Kind::kSeq:
      for (const auto& p : s.parts()) {
        std::string r = check_invertible(p, bound, taken);
        if (!r.empty()) return r;
      }
      return "";
    case Stmt::Kind::kFor: {
      bound.push_back(s.var());
      std::string r = check_invertible(s.body(), bound, taken);
      bound.pop_back();
      return r;
    }
    case Stmt::Kind::kIf: {
      std::string r = check_invertible(s.then_branch(), bound, taken);
      if (r.empty() && s.has_else()) r = check_invertible(s.else_branch(), bound, taken);
      return r;
    }
    case Stmt::Kind::kAssign: {
      std::vector<AffineExpr> target;
      for (size_t j = 0; j < s.lhs().indices.size(); ++j) {
        std::string v = fresh_name("t", taken);
        taken.insert(v);
        target.push_back(AffineExpr::var(v));
      }
      Substitution sol = invert(s.lhs().indices, target, bound);
      std::set<std::string> used;
      s.rhs().collect_symbols(used);
      for (const auto& b : bound) {
        if (used.count(b) && !sol.count(b)) {
          return "write " + s.lhs().str() + " cannot be inverted for " + b;
        }
      }
      return "";
    }
  }
  return "";
}

Formula rename_formula(const Formula& f, const Substitution& sub) { return f.substitute(sub); }

}  // namespace

SimpleResult is_simple(const Stmt& s, const Formula& context, const SolverOptions& opts) {
  std::string r = find_unsupported(s);
  if (!r.empty()) return {false, r};

  std::vector<Access> acc = collect_accesses(s);
  std::set<std::string> altered = altered_vars(s);
  for (const auto& a : acc) {
    std::vector<Atom> apps;
    for (const auto& i : a.index) i.collect_apps(apps);
    a.context.collect_apps(apps);
    for (const auto& app : apps) {
      if (altered.count(app.name())) {
        return {false, "index array '" + app.name() + "' is modified"};
      }
    }
  }

  // Loop-carried dependences: two different iterations of the same loop
  // touching a common cell, at least one of them writing.
  for (size_t x = 0; x < acc.size(); ++x) {
    const Access& w = acc[x];
    if (!w.write) continue;
    for (size_t y = 0; y < acc.size(); ++y) {
      const Access& a = acc[y];
      if (a.array != w.array || (a.write && y < x)) continue;
      size_t common = 0;
      while (common < w.loop_ids.size() && common < a.loop_ids.size() &&
             w.loop_ids[common] == a.loop_ids[common]) {
        ++common;
      }
      for (size_t d = 0; d < common; ++d) {
        Substitution s1, s2;
        for (size_t i = d; i < w.loops.size(); ++i) {
          s1[w.loops[i]] = AffineExpr::var(w.loops[i] + "'1");
        }
        for (size_t i = d; i < a.loops.size(); ++i) {
          s2[a.loops[i]] = AffineExpr::var(a.loops[i] + "'2");
        }
        std::vector<Formula> parts = {context, rename_formula(w.context, s1),
                                      rename_formula(a.context, s2),
                                      Formula::cmp(s1[w.loops[d]], Rel::kNe, s2[a.loops[d]])};
        for (size_t j = 0; j < w.index.size(); ++j) {
          parts.push_back(
              Formula::cmp(w.index[j].substitute(s1), Rel::kEq, a.index[j].substitute(s2)));
        }
        bool dep = true;
        try {
          dep = is_satisfiable(Formula::conj(std::move(parts)), Formula::truth(), opts);
        } catch (const BudgetExceeded&) {
        }
        if (dep) {
          return {false, "loop-carried dependence on " + w.array + " in loop " + w.loops[d]};
        }
      }
    }
  }
  std::vector<std::string> bound;
  std::set<std::string> taken = stmt_symbols(s);
  context.collect_free_symbols(taken);
  r = check_invertible(s, bound, taken);
  if (!r.empty()) return {false, r};

  return {};
}

// ---------------------------------------------------------------------------

namespace {

CETree hoist(const CETree& t) {
  // Children are already factored: conditionals sit at their roots.
  const auto& kids = t.kids();
  for (size_t i = 0; i < kids.size(); ++i) {
    if (kids[i].kind() != CETree::Kind::kCond) continue;
    auto with = [&](const CETree& k) {
      std::vector<CETree> ks = kids;
      ks[i] = k;
      CETree n = t.kind() == CETree::Kind::kOp ? CETree::op(t.op(), std::move(ks))
                                               : CETree::apply(t.fn(), std::move(ks));
      return hoist(n);
    };
    return CETree::cond(kids[i].guard(), with(kids[i].kids()[0]), with(kids[i].kids()[1]));
  }
  return t;
}

}  // namespace

CETree factor(const CETree& t) {
  if (!t.has_cond()) return t;
  switch (t.kind()) {
    case CETree::Kind::kLeaf:
      return t;
    case CETree::Kind::kCond:
      return CETree::cond(t.guard(), factor(t.kids()[0]), factor(t.kids()[1]));
    case CETree::Kind::kOp:
    case CETree::Kind::kApply: {
      std::vector<CETree> kids;
      for (const auto& k : t.kids()) kids.push_back(factor(k));
      return hoist(t.kind() == CETree::Kind::kOp ? CETree::op(t.op(), std::move(kids))
                                                 : CETree::apply(t.fn(), std::move(kids)));
    }
  }
  return t;
}

namespace {

bool sat(const Formula& f, const Formula& context, const SolverOptions& opts) {
  try {
    return is_satisfiable(f, context, opts);
  } catch (const BudgetExceeded&) {
    return true;
  }
}

// Drops conjuncts that the context already implies.
class GuardSimplifier {
 public:
  GuardSimplifier(const Formula& context, const SolverOptions& opts)
      : context_(context), opts_(opts) {}

  Formula operator()(const Formula& g) {
    auto it = cache_.find(g.str());
    if (it != cache_.end()) return it->second;
    Formula out = g;
    switch (g.kind()) {
      case Formula::Kind::kAnd: {
        std::vector<Formula> keep;
        for (const auto& c : g.children()) keep.push_back((*this)(c));
        out = Formula::conj(std::move(keep));
        break;
      }
      case Formula::Kind::kNot:
        out = !(*this)(g.body());
        break;
      case Formula::Kind::kCmp:
      case Formula::Kind::kDiv:
        if (holds(g)) {
          out = Formula::truth();
        } else if (holds(!g)) {
          out = Formula::falsity();
        }
        break;
      default:
        break;
    }
    cache_.emplace(g.str(), out);
    return out;
  }

 private:
  bool holds(const Formula& c) {
    try {
      return implies(context_, c, opts_);
    } catch (const BudgetExceeded&) {
      return false;
    }
  }

  const Formula& context_;
  const SolverOptions& opts_;
  std::map<std::string, Formula> cache_;
};

void collect_regions(const CETree& t, std::vector<Formula>& path, const Formula& context,
                     const SolverOptions& opts, GuardSimplifier& simplify,
                     std::vector<GseCase>& out) {
  if (t.kind() != CETree::Kind::kCond) {
    std::vector<Formula> shown;
    for (const auto& f : path) {
      if (!f.is_true()) shown.push_back(f);
    }
    out.push_back(GseCase{Formula::conj(std::move(shown)), t.to_symexpr()});
    return;
  }
  Formula g = simplify(t.guard());
  for (int branch = 0; branch < 2; ++branch) {
    path.push_back(branch == 0 ? g : !g);
    if (sat(Formula::conj(path), context, opts)) {
      collect_regions(t.kids()[branch], path, context, opts, simplify, out);
    }
    path.pop_back();
  }
}

}  // namespace

std::string Gse::str() const {
  std::ostringstream out;
  for (const auto& c : cases) out << c.guard.str() << "  ==>  " << c.value.str() << "\n";
  return out.str();
}

Gse normalize_gse(const CETree& t, const Formula& context, std::string array,
                  std::vector<std::string> index_vars, const SolverOptions& opts) {
  Gse g{std::move(array), std::move(index_vars), {}};
  if (!sat(Formula::truth(), context, opts)) return g;
  std::vector<Formula> path;
  GuardSimplifier simplify(context, opts);
  collect_regions(factor(t), path, context, opts, simplify, g.cases);
  return g;
}

bool gse_is_partition(const Gse& g, const Formula& context, const SolverOptions& opts) {
  std::vector<Formula> all;
  for (size_t i = 0; i < g.cases.size(); ++i) {
    if (!is_satisfiable(g.cases[i].guard, context, opts)) return false;
    for (size_t j = i + 1; j < g.cases.size(); ++j) {
      if (is_satisfiable(g.cases[i].guard && g.cases[j].guard, context, opts)) return false;
    }
    all.push_back(g.cases[i].guard);
  }
  return !is_satisfiable(!Formula::disj(std::move(all)), context, opts);
}

std::string Witness::str() const {
  return array + ": where " + guard.str() + ": " + left.str() + " vs " + right.str();
}

namespace {

void collect_leaves(const SymExpr& e, std::map<std::string, SymExpr>& out) {
  switch (e.kind()) {
    case SymExpr::Kind::kInput:
    case SymExpr::Kind::kIndex:
      out.emplace(e.str(), e);
      break;
    case SymExpr::Kind::kConst:
      break;
    default:
      for (const auto& o : e.operands()) collect_leaves(o, out);
  }
}

SymExpr replace_leaves(const SymExpr& e, const std::map<std::string, SymExpr>& rep) {
  switch (e.kind()) {
    case SymExpr::Kind::kInput:
    case SymExpr::Kind::kIndex: {
      auto it = rep.find(e.str());
      return it == rep.end() ? e : it->second;
    }
    case SymExpr::Kind::kConst:
      return e;
    case SymExpr::Kind::kOp:
    case SymExpr::Kind::kApply: {
      std::vector<SymExpr> ops;
      for (const auto& o : e.operands()) ops.push_back(replace_leaves(o, rep));
      return e.kind() == SymExpr::Kind::kOp ? SymExpr::op(e.op(), std::move(ops))
                                            : SymExpr::apply(e.fn(), std::move(ops));
    }
  }
  return e;
}

// Equality of two values inside a region: leaves whose indices coincide
// everywhere in the region are identified before comparing.
bool equal_in_region(const SymExpr& x, const SymExpr& y, const Formula& region,
                     const SolverOptions& opts) {
  if (equal(x, y)) return true;
  std::map<std::string, SymExpr> leaves;
  collect_leaves(x, leaves);
  collect_leaves(y, leaves);
  std::vector<SymExpr> reps;
  std::map<std::string, SymExpr> rep;
  for (const auto& [key, leaf] : leaves) {
    for (const auto& r : reps) {
      Formula same;
      if (leaf.kind() != r.kind()) continue;
      if (leaf.kind() == SymExpr::Kind::kInput) {
        if (leaf.array() != r.array() || leaf.indices().size() != r.indices().size()) continue;
        std::vector<Formula> eqs;
        for (size_t i = 0; i < leaf.indices().size(); ++i) {
          eqs.push_back(Formula::cmp(leaf.indices()[i], Rel::kEq, r.indices()[i]));
        }
        same = Formula::conj(std::move(eqs));
      } else {
        same = Formula::cmp(leaf.index_expr(), Rel::kEq, r.index_expr());
      }
      bool holds = false;
      try {
        holds = implies(region, same, opts);
      } catch (const BudgetExceeded&) {
      }
      if (holds) {
        rep.emplace(key, r);
        break;
      }
    }
    if (!rep.count(key)) reps.push_back(leaf);
  }
  if (rep.empty()) return false;
  return equal(replace_leaves(x, rep), replace_leaves(y, rep));
}

}  // namespace

GseComparison compare_gses(const Gse& a, const Gse& b, const Formula& context,
                           const SolverOptions& opts) {
  GseComparison r;
  for (const auto& ca : a.cases) {
    for (const auto& cb : b.cases) {
      ++r.tested;
      Formula both = ca.guard && cb.guard;
      if (!sat(both, context, opts)) continue;
      ++r.non_empty;
      if (equal_in_region(ca.value, cb.value, context && both, opts)) {
        ++r.matched;
        continue;
      }
      r.equal = false;
      r.mismatches.push_back(Witness{a.array, both, ca.value, cb.value});
      if (!r.witness) r.witness = r.mismatches.back();
    }
  }
  return r;
}

Formula analysis_context(const Bindings& b, const SkolemTable& terms) {
  return instantiate_bindings(b, terms);
}

Formula domain_formula(const ArrayDecl& decl, const std::vector<std::string>& index_vars) {
  std::vector<Formula> parts;
  for (size_t i = 0; i < decl.dims.size() && i < index_vars.size(); ++i) {
    AffineExpr v = AffineExpr::var(index_vars[i]);
    parts.push_back(Formula::cmp(decl.dims[i].lo, Rel::kLe, v));
    parts.push_back(Formula::cmp(v, Rel::kLe, decl.dims[i].hi));
  }
  return Formula::conj(std::move(parts));
}

CompareReport compare_programs(const Stmt& s1, const Stmt& s2, const Program& program,
                               const Bindings& bindings, const std::set<std::string>& live,
                               const SolverOptions& opts) {
  CompareReport rep;
  Stmt p1 = privatize(s1, program, live);
  Stmt p2 = privatize(s2, program, live);

  SkolemTable stmt_terms;
  for (const Stmt* s : {&p1, &p2}) {
    for (const auto& a : collect_accesses(*s)) {
      for (const auto& i : a.index) stmt_terms.add_all(i);
    }
  }
  stmt_terms.add_all(bindings.ground);
  Formula base = analysis_context(bindings, stmt_terms);
  for (const Stmt* s : {&p1, &p2}) {
    SimpleResult sr = is_simple(*s, base, opts);
    if (!sr.simple) {
      rep.reason = "not simple: " + sr.reason;
      return rep;
    }
  }
  std::set<std::string> alt1 = altered_vars(p1), alt2 = altered_vars(p2);
  std::set<std::string> live1, live2;
  for (const auto& v : alt1)
    if (live.count(v)) live1.insert(v);
  for (const auto& v : alt2)
    if (live.count(v)) live2.insert(v);
  if (live1 != live2) {
    rep.reason = "different live variables altered";
    return rep;
  }

  std::set<std::string> taken = stmt_symbols(p1);
  auto more = stmt_symbols(p2);
  taken.insert(more.begin(), more.end());
  bindings.ground.collect_free_symbols(taken);
  for (const auto& l : loop_vars(p1)) taken.erase(l);
  for (const auto& l : loop_vars(p2)) taken.erase(l);
  for (const auto& p : program.params) taken.insert(p);

  rep.equal = true;
  for (const auto& array : live1) {
    const ArrayDecl* decl = program.find_decl(array);
    if (!decl) throw Error("undeclared variable '" + array + "'");
    std::vector<std::string> vars = target_vars(decl->rank(), taken);
    CETree t1 = CETree::leaf(SymExpr::constant(0)), t2 = t1;
    try {
      t1 = build_expr_tree(p1, array, vars);
      t2 = build_expr_tree(p2, array, vars);
    } catch (const NotSimple& e) {
      rep.equal = false;
      rep.reason = std::string("not simple: ") + e.what();
      return rep;
    }
    SkolemTable terms = stmt_terms;
    std::vector<Atom> apps;
    t1.collect_apps(apps);
    t2.collect_apps(apps);
    for (const auto& a : apps) terms.add(a);
    Formula ctx = analysis_context(bindings, terms) && domain_formula(*decl, vars);
    ArrayComparison ac{array,
                       normalize_gse(t1, ctx, array, vars, opts),
                       normalize_gse(t2, ctx, array, vars, opts),
                       {}};
    ac.result = compare_gses(ac.left, ac.right, ctx, opts);
    if (!ac.result.equal) {
      rep.equal = false;
      if (!rep.witness) rep.witness = ac.result.witness;
    }
    rep.arrays.push_back(std::move(ac));
  }
  return rep;
}

Gse program_gse(const Program& p, const std::string& array, const Bindings& bindings,
                const SolverOptions& opts) {
  const ArrayDecl* decl = p.find_decl(array);
  if (!decl) throw Error("undeclared variable '" + array + "'");
  std::set<std::string> live(p.outputs.begin(), p.outputs.end());
  for (const auto& d : p.decls) {
    if (d.rank() > 0) live.insert(d.name);
  }
  Stmt body = privatize(p.body, p, live);
  std::set<std::string> taken = stmt_symbols(body);
  bindings.ground.collect_free_symbols(taken);
  for (const auto& x : p.params) taken.insert(x);
  std::vector<std::string> vars = target_vars(decl->rank(), taken);
  CETree t = build_expr_tree(body, array, vars);
  SkolemTable terms;
  std::vector<Atom> apps;
  t.collect_apps(apps);
  for (const auto& a : apps) terms.add(a);
  terms.add_all(bindings.ground);
  Formula ctx = analysis_context(bindings, terms) && domain_formula(*decl, vars);
  return normalize_gse(t, ctx, array, vars, opts);
}

}  // namespace fsa
