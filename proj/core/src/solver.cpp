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

#include "fsa/solver.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace fsa {
namespace {

thread_local SolverStats g_stats;

enum class CK { kEq, kGeq, kDiv };

// kEq: a.x + c = 0; kGeq: a.x + c >= 0; kDiv: m | a.x + c.
struct Con {
  CK k = CK::kGeq;
  std::vector<Int> a;
  Int c = 0;
  Int m = 0;
};

using Conj = std::vector<Con>;

class Budget {
 public:
  explicit Budget(int64_t n) : left_(n) {}
  void spend(int64_t n) {
    left_ -= n;
    if (left_ < 0) throw BudgetExceeded();
  }

 private:
  int64_t left_;
};

// Interning of atoms to solver variable slots.
class Space {
 public:
  int intern(const Atom& a) {
    auto it = index_.find(a.key());
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(atoms_.size());
    atoms_.push_back(a);
    index_.emplace(a.key(), id);
    return id;
  }
  int size() const { return static_cast<int>(atoms_.size()); }
  const Atom& atom(int i) const { return atoms_[i]; }
  std::string fresh() { return "$" + std::to_string(counter_++); }

 private:
  std::vector<Atom> atoms_;
  std::unordered_map<std::string, int> index_;
  int counter_ = 0;
};

// Constraint with sparse coefficients, before the variable count is known.
struct SCon {
  CK k = CK::kGeq;
  std::map<int, Int> a;
  Int c = 0;
  Int m = 0;
};

struct NNode {
  enum T { kCon, kAnd, kOr, kTrue, kFalse } t = kTrue;
  SCon con;
  std::vector<NNode> kids;
};

NNode leaf(SCon c) {
  NNode n;
  n.t = NNode::kCon;
  n.con = std::move(c);
  return n;
}

NNode junction(NNode::T t, std::vector<NNode> kids) {
  NNode n;
  n.t = t;
  n.kids = std::move(kids);
  return n;
}

NNode constant_node(bool v) {
  NNode n;
  n.t = v ? NNode::kTrue : NNode::kFalse;
  return n;
}

Formula eliminate_impl(const Formula& f, Budget& budget);

class Converter {
 public:
  Converter(Space& space, Budget& budget) : space_(space), budget_(budget) {}

  NNode convert(const Formula& f, bool neg) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::kTrue:
        return constant_node(!neg);
      case K::kFalse:
        return constant_node(neg);
      case K::kCmp:
        return convert_cmp(f.lhs() - f.rhs(), neg ? negate(f.rel()) : f.rel());
      case K::kDiv: {
        SCon base = linear(f.expr());
        if (!neg) {
          SCon d = base;
          d.k = CK::kDiv;
          d.m = f.modulus();
          d.c -= f.residue();
          return leaf(std::move(d));
        }
        std::vector<NNode> alts;
        for (Int r = 0; r < f.modulus(); ++r) {
          if (r == f.residue()) continue;
          SCon d = base;
          d.k = CK::kDiv;
          d.m = f.modulus();
          d.c -= r;
          alts.push_back(leaf(std::move(d)));
        }
        return junction(NNode::kOr, std::move(alts));
      }
      case K::kAnd:
      case K::kOr: {
        std::vector<NNode> kids;
        for (const auto& c : f.children()) kids.push_back(convert(c, neg));
        bool is_and = (f.kind() == K::kAnd) != neg;
        return junction(is_and ? NNode::kAnd : NNode::kOr, std::move(kids));
      }
      case K::kNot:
        return convert(f.body(), !neg);
      case K::kExists: {
        if (neg) return convert(eliminate_impl(f, budget_), true);
        std::string v = space_.fresh();
        return convert(f.body().substitute({{f.var(), AffineExpr::var(v)}}), false);
      }
    }
    return constant_node(true);
  }

 private:
  SCon linear(const AffineExpr& e) {
    SCon s;
    for (const auto& [a, c] : e.terms()) s.a[space_.intern(a)] += c;
    s.c = e.constant_term();
    return s;
  }

  NNode convert_cmp(const AffineExpr& d, Rel r) {
    SCon s = linear(d);
    auto geq = [](SCon x) {
      x.k = CK::kGeq;
      return leaf(std::move(x));
    };
    auto negated = [](SCon x) {
      for (auto& [i, v] : x.a) v = -v;
      x.c = -x.c;
      return x;
    };
    switch (r) {
      case Rel::kEq:
        s.k = CK::kEq;
        return leaf(std::move(s));
      case Rel::kGe:
        return geq(s);
      case Rel::kGt:
        s.c -= 1;
        return geq(s);
      case Rel::kLe:
        return geq(negated(s));
      case Rel::kLt: {
        SCon n = negated(s);
        n.c -= 1;
        return geq(n);
      }
      case Rel::kNe: {
        SCon lo = s;
        lo.c -= 1;
        SCon hi = negated(s);
        hi.c -= 1;
        return junction(NNode::kOr, {geq(lo), geq(hi)});
      }
    }
    return constant_node(true);
  }

  Space& space_;
  Budget& budget_;
};

Con densify(const SCon& s, int n) {
  Con c;
  c.k = s.k;
  c.a.assign(n, Int(0));
  for (const auto& [i, v] : s.a) c.a[i] += v;
  c.c = s.c;
  c.m = s.m;
  return c;
}

bool all_zero(const std::vector<Int>& a) {
  return std::all_of(a.begin(), a.end(), [](const Int& v) { return v == 0; });
}

Int coef_gcd(const std::vector<Int>& a) {
  Int g = 0;
  for (const auto& v : a) {
    if (v != 0) g = gcd(g, v);
  }
  return g;
}

// Normalizes in place. Returns false if the conjunction is unsatisfiable.
bool normalize(Conj& cs) {
  Conj out;
  std::map<std::vector<Int>, Int> geq;  // coefficients -> tightest constant
  std::map<std::vector<Int>, Int> eqs;
  for (auto& con : cs) {
    switch (con.k) {
      case CK::kEq: {
        Int g = coef_gcd(con.a);
        if (g == 0) {
          if (con.c != 0) return false;
          continue;
        }
        if (con.c % g != 0) return false;
        for (auto& v : con.a) v /= g;
        con.c /= g;
        auto first = std::find_if(con.a.begin(), con.a.end(), [](const Int& v) { return v != 0; });
        if (*first < 0) {
          for (auto& v : con.a) v = -v;
          con.c = -con.c;
        }
        auto [it, fresh] = eqs.emplace(con.a, con.c);
        if (!fresh && it->second != con.c) return false;
        break;
      }
      case CK::kGeq: {
        Int g = coef_gcd(con.a);
        if (g == 0) {
          if (con.c < 0) return false;
          continue;
        }
        for (auto& v : con.a) v /= g;
        con.c = floor_div(con.c, g);
        auto [it, fresh] = geq.emplace(con.a, con.c);
        if (!fresh && con.c < it->second) it->second = con.c;
        break;
      }
      case CK::kDiv: {
        con.m = fsa::abs(con.m);
        for (auto& v : con.a) v = mod(v, con.m);
        con.c = mod(con.c, con.m);
        if (all_zero(con.a)) {
          if (con.c != 0) return false;
          continue;
        }
        Int g = gcd(coef_gcd(con.a), gcd(con.c, con.m));
        if (g > 1) {
          for (auto& v : con.a) v /= g;
          con.c /= g;
          con.m /= g;
        }
        if (con.m == 1) continue;
        out.push_back(con);
        break;
      }
    }
  }
  // Opposing inequalities: a.x + c >= 0 and -a.x + d >= 0.
  for (auto& [a, c] : geq) {
    std::vector<Int> neg = a;
    for (auto& v : neg) v = -v;
    auto it = geq.find(neg);
    if (it == geq.end()) continue;
    Int sum = c + it->second;
    if (sum < 0) return false;
    if (sum == 0) {
      std::vector<Int> e = a;
      Int ec = c;
      auto first = std::find_if(e.begin(), e.end(), [](const Int& v) { return v != 0; });
      if (*first < 0) {
        for (auto& v : e) v = -v;
        ec = -ec;
      }
      auto [jt, fresh] = eqs.emplace(e, ec);
      if (!fresh && jt->second != ec) return false;
    }
  }
  for (const auto& [a, c] : eqs) {
    Con e;
    e.k = CK::kEq;
    e.a = a;
    e.c = c;
    out.push_back(std::move(e));
  }
  for (const auto& [a, c] : geq) {
    // Inequalities implied by an equality are redundant.
    bool implied = false;
    for (const auto& [ea, ec] : eqs) {
      if (ea == a) {
        if (c - ec < 0) return false;  // a.x = -ec, need -ec + c >= 0
        implied = true;
        break;
      }
      std::vector<Int> neg = ea;
      for (auto& v : neg) v = -v;
      if (neg == a) {
        if (c + ec < 0) return false;
        implied = true;
        break;
      }
    }
    if (implied) continue;
    Con g;
    g.k = CK::kGeq;
    g.a = a;
    g.c = c;
    out.push_back(std::move(g));
  }
  cs = std::move(out);
  return true;
}

// con := con with x replaced by (e.x + ec); e[x] must be zero.
Con substitute(const Con& con, int x, const std::vector<Int>& e, const Int& ec) {
  Con r = con;
  const Int b = con.a[x];
  if (b == 0) return r;
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] += b * e[i];
  r.a[x] = 0;
  r.c += b * ec;
  return r;
}

Con scaled(const Con& con, const Int& s) {
  Con r = con;
  for (auto& v : r.a) v *= s;
  r.c *= s;
  if (r.k == CK::kDiv) r.m *= s;
  return r;
}

// Eliminates x from an equality-bearing conjunction.
Conj eliminate_by_equality(const Conj& cs, int x, Budget& budget) {
  size_t best = cs.size();
  for (size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].k != CK::kEq || cs[i].a[x] == 0) continue;
    if (best == cs.size() || fsa::abs(cs[i].a[x]) < fsa::abs(cs[best].a[x])) {
      best = i;
    }
  }
  const Con& eq = cs[best];
  const Int a = eq.a[x];
  const Int mag = fsa::abs(a);
  const Int sgn = a < 0 ? -1 : 1;
  Conj out;
  budget.spend(static_cast<int64_t>(cs.size()) + 1);
  for (size_t i = 0; i < cs.size(); ++i) {
    if (i == best) continue;
    const Con& k = cs[i];
    const Int b = k.a[x];
    if (b == 0) {
      out.push_back(k);
      continue;
    }
    // |a| (b x + f) with |a| x = -sgn g.
    Con r = scaled(k, mag);
    for (size_t j = 0; j < r.a.size(); ++j) r.a[j] -= b * sgn * eq.a[j];
    r.c -= b * sgn * eq.c;
    r.a[x] = 0;
    out.push_back(std::move(r));
  }
  if (mag > 1) {
    Con d;
    d.k = CK::kDiv;
    d.m = mag;
    d.a = eq.a;
    d.a[x] = 0;
    d.c = eq.c;
    out.push_back(std::move(d));
  }
  return out;
}

// Eliminates x when it occurs in divisibility constraints, by enumerating
// the residues above the least lower (or below the greatest upper) bound.
std::vector<Conj> eliminate_with_divisibility(const Conj& cs, int x, Budget& budget) {
  Conj rest, rel;
  Int delta = 1;
  for (const auto& con : cs) {
    if (con.a[x] == 0) {
      rest.push_back(con);
    } else {
      rel.push_back(con);
      delta = lcm(delta, con.a[x]);
    }
  }
  Int period = delta;
  for (auto& con : rel) {
    Int s = delta / fsa::abs(con.a[x]);
    con = scaled(con, s);
    con.a[x] = con.a[x] > 0 ? 1 : -1;
    if (con.k == CK::kDiv) period = lcm(period, con.m);
  }
  if (delta > 1) {
    Con d;
    d.k = CK::kDiv;
    d.a.assign(cs.front().a.size(), Int(0));
    d.a[x] = 1;
    d.m = delta;
    rel.push_back(std::move(d));
  }
  std::vector<const Con*> lowers, uppers;
  for (const auto& con : rel) {
    if (con.k != CK::kGeq) continue;
    (con.a[x] > 0 ? lowers : uppers).push_back(&con);
  }
  const int64_t p = to_int64(period);
  std::vector<std::pair<std::vector<Int>, Int>> anchors;  // y = e.x + ec + dir*t
  int dir = 1;
  if (!lowers.empty() && (lowers.size() <= uppers.size() || uppers.empty())) {
    for (const Con* l : lowers) {
      std::vector<Int> e = l->a;
      for (auto& v : e) v = -v;
      e[x] = 0;
      anchors.emplace_back(std::move(e), -l->c);
    }
  } else if (!uppers.empty()) {
    dir = -1;
    for (const Con* u : uppers) {
      std::vector<Int> e = u->a;
      e[x] = 0;
      anchors.emplace_back(std::move(e), u->c);
    }
  } else {
    anchors.emplace_back(std::vector<Int>(cs.front().a.size(), Int(0)), Int(0));
  }
  budget.spend(static_cast<int64_t>(anchors.size()) * p * static_cast<int64_t>(rel.size() + 1));
  std::vector<Conj> out;
  for (const auto& [e, ec] : anchors) {
    for (int64_t t = 0; t < p; ++t) {
      Conj piece = rest;
      Int c = ec + Int(dir * t);
      for (const auto& con : rel) piece.push_back(substitute(con, x, e, c));
      out.push_back(std::move(piece));
    }
  }
  return out;
}

// Eliminates x occurring only in inequalities.
std::vector<Conj> eliminate_inequalities(const Conj& cs, int x, Budget& budget) {
  Conj rest;
  std::vector<const Con*> lowers, uppers;
  for (const auto& con : cs) {
    if (con.a[x] == 0) {
      rest.push_back(con);
    } else {
      (con.a[x] > 0 ? lowers : uppers).push_back(&con);
    }
  }
  if (lowers.empty() || uppers.empty()) return {rest};
  bool exact = true;
  Int max_up = 0;
  for (const Con* u : uppers) max_up = std::max(max_up, Int(-u->a[x]));
  for (const Con* l : lowers) {
    for (const Con* u : uppers) {
      if (l->a[x] != 1 && u->a[x] != -1) exact = false;
    }
  }
  budget.spend(static_cast<int64_t>(lowers.size() * uppers.size()) + 1);
  auto combine = [&](const Con& l, const Con& u, const Int& slack) {
    // l: a x + L >= 0, u: -b x + U >= 0  =>  b L + a U >= slack
    Int a = l.a[x], b = -u.a[x];
    Con r;
    r.k = CK::kGeq;
    r.a.resize(l.a.size());
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = b * l.a[i] + a * u.a[i];
    r.a[x] = 0;
    r.c = b * l.c + a * u.c - slack;
    return r;
  };
  Conj real = rest;
  for (const Con* l : lowers) {
    for (const Con* u : uppers) real.push_back(combine(*l, *u, 0));
  }
  if (exact) return {real};

  std::vector<Conj> out;
  Conj dark = rest;
  for (const Con* l : lowers) {
    for (const Con* u : uppers) {
      Int a = l->a[x], b = -u->a[x];
      dark.push_back(combine(*l, *u, (a - 1) * (b - 1)));
    }
  }
  out.push_back(std::move(dark));
  for (const Con* l : lowers) {
    Int a = l->a[x];
    Int top = floor_div(a * max_up - a - max_up, max_up);
    budget.spend(to_int64(top) + 1);
    for (Int i = 0; i <= top; ++i) {
      Conj piece = cs;
      Con e = *l;
      e.k = CK::kEq;
      e.c -= i;
      piece.push_back(std::move(e));
      out.push_back(std::move(piece));
    }
  }
  return out;
}

std::vector<Conj> project(const Conj& cs, int x, Budget& budget) {
  ++g_stats.projections;
  bool has_eq = false, has_div = false;
  for (const auto& con : cs) {
    if (con.a[x] == 0) continue;
    if (con.k == CK::kEq) has_eq = true;
    if (con.k == CK::kDiv) has_div = true;
  }
  if (has_eq) return {eliminate_by_equality(cs, x, budget)};
  if (has_div) return eliminate_with_divisibility(cs, x, budget);
  return eliminate_inequalities(cs, x, budget);
}

// Picks the cheapest variable to eliminate, or -1 if none occurs.
int choose_variable(const Conj& cs) {
  if (cs.empty()) return -1;
  const size_t n = cs.front().a.size();
  int best = -1;
  int64_t best_cost = 0;
  for (size_t x = 0; x < n; ++x) {
    int64_t lo = 0, up = 0, eq = 0, eq_unit = 0, div = 0;
    bool lo_big = false, up_big = false;
    for (const auto& con : cs) {
      const Int& a = con.a[x];
      if (a == 0) continue;
      switch (con.k) {
        case CK::kEq:
          ++eq;
          if (fsa::abs(a) == 1) ++eq_unit;
          break;
        case CK::kDiv:
          ++div;
          break;
        case CK::kGeq:
          if (a > 0) {
            ++lo;
            lo_big |= a != 1;
          } else {
            ++up;
            up_big |= a != -1;
          }
          break;
      }
    }
    if (lo + up + eq + div == 0) continue;
    int64_t cost;
    if (eq_unit) {
      cost = 0;
    } else if (eq) {
      cost = 1;
    } else if (div) {
      cost = 100000 + std::min(lo, up) * 1000;
    } else if (lo == 0 || up == 0) {
      cost = 0;
    } else if (!(lo_big && up_big)) {
      cost = 10 + lo * up - lo - up;
    } else {
      cost = 1000 + lo * up;
    }
    if (best < 0 || cost < best_cost) {
      best = static_cast<int>(x);
      best_cost = cost;
    }
  }
  return best;
}

bool conj_sat(Conj cs, Budget& budget) {
  for (;;) {
    if (!normalize(cs)) return false;
    int x = choose_variable(cs);
    if (x < 0) return true;
    auto pieces = project(cs, x, budget);
    if (pieces.size() == 1) {
      cs = std::move(pieces.front());
      continue;
    }
    for (auto& p : pieces) {
      if (conj_sat(std::move(p), budget)) return true;
    }
    return false;
  }
}

bool search(Conj cs, std::vector<const NNode*> pending, int n, Budget& budget) {
  std::vector<const NNode*> ors;
  while (!pending.empty()) {
    const NNode* node = pending.back();
    pending.pop_back();
    switch (node->t) {
      case NNode::kTrue:
        break;
      case NNode::kFalse:
        return false;
      case NNode::kCon:
        cs.push_back(densify(node->con, n));
        break;
      case NNode::kAnd:
        for (const auto& k : node->kids) pending.push_back(&k);
        break;
      case NNode::kOr:
        ors.push_back(node);
        break;
    }
  }
  if (!conj_sat(cs, budget)) return false;
  if (ors.empty()) return true;
  const NNode* branch = ors.back();
  ors.pop_back();
  for (const auto& alt : branch->kids) {
    std::vector<const NNode*> next = ors;
    next.push_back(&alt);
    if (search(cs, std::move(next), n, budget)) return true;
  }
  return false;
}

void to_dnf(const NNode& node, int n, std::vector<Conj>& out, Budget& budget) {
  switch (node.t) {
    case NNode::kTrue:
      out.push_back({});
      return;
    case NNode::kFalse:
      return;
    case NNode::kCon:
      out.push_back({densify(node.con, n)});
      return;
    case NNode::kOr:
      for (const auto& k : node.kids) to_dnf(k, n, out, budget);
      return;
    case NNode::kAnd: {
      std::vector<Conj> acc = {{}};
      for (const auto& k : node.kids) {
        std::vector<Conj> part;
        to_dnf(k, n, part, budget);
        std::vector<Conj> next;
        budget.spend(static_cast<int64_t>(acc.size() * part.size()));
        for (const auto& a : acc) {
          for (const auto& b : part) {
            Conj c = a;
            c.insert(c.end(), b.begin(), b.end());
            next.push_back(std::move(c));
          }
        }
        acc = std::move(next);
      }
      out.insert(out.end(), acc.begin(), acc.end());
      return;
    }
  }
}

Formula to_formula(const Con& con, const Space& space) {
  AffineExpr pos, neg;
  for (size_t i = 0; i < con.a.size(); ++i) {
    if (con.a[i] > 0) pos = pos + AffineExpr::of(space.atom(static_cast<int>(i)), con.a[i]);
    if (con.a[i] < 0) neg = neg + AffineExpr::of(space.atom(static_cast<int>(i)), -con.a[i]);
  }
  switch (con.k) {
    case CK::kGeq: {
      // neg - min(c,0) <= pos + max(c,0)
      AffineExpr lhs = con.c < 0 ? neg + Int(-con.c) : neg;
      AffineExpr rhs = con.c > 0 ? pos + con.c : pos;
      return Formula::cmp(lhs, Rel::kLe, rhs);
    }
    case CK::kEq: {
      AffineExpr lhs = con.c > 0 ? pos + con.c : pos;
      AffineExpr rhs = con.c < 0 ? neg + Int(-con.c) : neg;
      if (lhs.is_constant() && !rhs.is_constant()) std::swap(lhs, rhs);
      return Formula::cmp(lhs, Rel::kEq, rhs);
    }
    case CK::kDiv:
      return Formula::divides(con.m, pos - neg, -con.c);
  }
  return Formula::truth();
}

// Existential over `var` of a quantifier-free body.
Formula eliminate_one(const std::string& var, const Formula& body, Budget& budget) {
  using K = Formula::Kind;
  if (!body.mentions(var)) return body;
  std::vector<Atom> apps;
  body.collect_apps(apps);
  for (const auto& a : apps) {
    if (AffineExpr::of(a).mentions(var)) {
      throw BudgetExceeded("opaque term " + a.str() + " depends on quantified variable " + var);
    }
  }
  if (body.kind() == K::kOr) {
    std::vector<Formula> parts;
    for (const auto& c : body.children()) {
      parts.push_back(eliminate_one(var, c, budget));
    }
    return Formula::disj(std::move(parts));
  }
  std::vector<Formula> conjuncts;
  if (body.kind() == K::kAnd) {
    conjuncts = body.children();
  } else {
    conjuncts = {body};
  }
  // A unit-coefficient equality pins the variable: substitute it away.
  for (size_t i = 0; i < conjuncts.size(); ++i) {
    const Formula& c = conjuncts[i];
    if (c.kind() != K::kCmp || c.rel() != Rel::kEq) continue;
    AffineExpr d = c.lhs() - c.rhs();
    Int a = d.coeff(var);
    if (a != 1 && a != -1) continue;
    // var = -(d - a var)/a
    AffineExpr rest = d - AffineExpr::var(var) * a;
    AffineExpr value = rest * Int(-a);
    std::vector<Formula> parts;
    for (size_t j = 0; j < conjuncts.size(); ++j) {
      if (j != i) parts.push_back(conjuncts[j].substitute({{var, value}}));
    }
    return Formula::conj(std::move(parts));
  }
  std::vector<Formula> keep, involved;
  for (const auto& c : conjuncts) {
    (c.mentions(var) ? involved : keep).push_back(c);
  }
  Space space;
  int x = space.intern(Atom::symbol(var));
  Converter conv(space, budget);
  NNode node = conv.convert(Formula::conj(involved), false);
  const int n = space.size();
  std::vector<Conj> dnf;
  to_dnf(node, n, dnf, budget);
  std::vector<Conj> work = std::move(dnf), done;
  while (!work.empty()) {
    Conj c = std::move(work.back());
    work.pop_back();
    if (!normalize(c)) continue;
    bool present = std::any_of(c.begin(), c.end(), [&](const Con& k) { return k.a[x] != 0; });
    if (!present) {
      if (conj_sat(c, budget)) done.push_back(std::move(c));
      continue;
    }
    for (auto& p : project(c, x, budget)) work.push_back(std::move(p));
  }
  std::vector<Formula> alts;
  std::reverse(done.begin(), done.end());
  for (const auto& c : done) {
    std::vector<Formula> atoms;
    for (const auto& con : c) atoms.push_back(to_formula(con, space));
    alts.push_back(Formula::conj(std::move(atoms)));
  }
  keep.push_back(Formula::disj(std::move(alts)));
  return Formula::conj(std::move(keep));
}

Formula eliminate_impl(const Formula& f, Budget& budget) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::kAnd:
    case K::kOr: {
      std::vector<Formula> parts;
      for (const auto& c : f.children()) parts.push_back(eliminate_impl(c, budget));
      return f.kind() == K::kAnd ? Formula::conj(std::move(parts))
                                 : Formula::disj(std::move(parts));
    }
    case K::kNot:
      return Formula::negation(eliminate_impl(f.body(), budget));
    case K::kExists:
      return eliminate_one(f.var(), eliminate_impl(f.body(), budget), budget);
    default:
      return f;
  }
}

}  // namespace

bool is_satisfiable(const Formula& f, const Formula& under, const SolverOptions& opts) {
  ++g_stats.sat_queries;
  Budget budget(opts.budget);
  try {
    Space space;
    Converter conv(space, budget);
    NNode root = junction(NNode::kAnd, {conv.convert(f, false), conv.convert(under, false)});
    return search({}, {&root}, space.size(), budget);
  } catch (const BudgetExceeded&) {
    return true;
  }
}

bool implies(const Formula& f, const Formula& g, const SolverOptions& opts) {
  ++g_stats.sat_queries;
  Budget budget(opts.budget);
  try {
    Space space;
    Converter conv(space, budget);
    NNode root = junction(NNode::kAnd, {conv.convert(f, false), conv.convert(g, true)});
    return !search({}, {&root}, space.size(), budget);
  } catch (const BudgetExceeded&) {
    return false;
  }
}

Formula eliminate_exists(const Formula& f, const SolverOptions& opts) {
  Budget budget(opts.budget);
  return eliminate_impl(f, budget);
}

SolverStats solver_stats() { return g_stats; }

}  // namespace fsa
