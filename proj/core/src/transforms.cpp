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

#include "fsa/transforms.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>

#include "fsa/access.hpp"
#include "fsa/solver.hpp"

namespace fsa {

// ---------------------------------------------------------------------------
// Surface syntax

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '[' || c == '(') ++depth;
    if (c == ']' || c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<std::vector<Int>> parse_matrix(const std::string& text) {
  std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    throw Error("expected a matrix like [[1,0],[0,1]]");
  }
  std::vector<std::vector<Int>> rows;
  for (const auto& row : split_top(t.substr(1, t.size() - 2), ',')) {
    if (row.size() < 2 || row.front() != '[' || row.back() != ']') {
      throw Error("expected a matrix row like [1,0]");
    }
    std::vector<Int> r;
    for (const auto& x : split_top(row.substr(1, row.size() - 2), ',')) {
      try {
        r.push_back(Int(x));
      } catch (const std::exception&) {
        throw Error("bad matrix entry '" + x + "'");
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void expect_args(const std::vector<std::string>& a, size_t n, const std::string& what) {
  if (a.size() != n) throw Error(what + " expects " + std::to_string(n) + " arguments");
  for (const auto& x : a) {
    if (x.empty()) throw Error(what + ": empty argument");
  }
}

Int determinant(std::vector<std::vector<Rational>> m) {
  size_t n = m.size();
  Rational det = 1;
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    while (piv < n && m[piv][c] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (size_t r = c + 1; r < n; ++r) {
      Rational f = m[r][c] / m[c][c];
      for (size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return numerator(det);
}

}  // namespace

TransformSpec TransformSpec::parse(const std::string& text) {
  std::string t = trim(text);
  size_t open = t.find('(');
  if (open == std::string::npos || t.back() != ')') {
    throw Error("malformed transformation '" + text + "'");
  }
  std::string name = trim(t.substr(0, open));
  std::string inner = t.substr(open + 1, t.size() - open - 2);
  TransformSpec s;
  if (name == "distribute") {
    auto semi = split_top(inner, ';');
    if (semi.size() != 2) throw Error("distribute expects distribute(loop;A,B|C,D)");
    s.kind = Kind::kDistribute;
    s.loops = {semi[0]};
    auto groups = split_top(semi[1], '|');
    if (groups.size() != 2) throw Error("distribute expects two groups separated by '|'");
    s.labels = split_top(groups[0], ',');
    s.second_group = split_top(groups[1], ',');
    expect_args(s.loops, 1, name);
  } else if (name == "fuse") {
    s.kind = Kind::kFuse;
    s.loops = split_top(inner, ',');
    expect_args(s.loops, 1, name);
  } else if (name == "reverse") {
    s.kind = Kind::kReverse;
    s.loops = split_top(inner, ',');
    expect_args(s.loops, 1, name);
  } else if (name == "interchange") {
    s.kind = Kind::kInterchange;
    s.loops = split_top(inner, ',');
    expect_args(s.loops, 2, name);
  } else if (name == "stripmine") {
    s.kind = Kind::kStripmine;
    auto a = split_top(inner, ',');
    expect_args(a, 2, name);
    s.loops = {a[0]};
    s.blocks = {a[1]};
  } else if (name == "split") {
    s.kind = Kind::kSplit;
    auto a = split_top(inner, ',');
    expect_args(a, 2, name);
    s.loops = {a[0]};
    s.split_point = a[1];
  } else if (name == "peel") {
    s.kind = Kind::kPeel;
    auto a = split_top(inner, ',');
    expect_args(a, 2, name);
    if (a[1] != "first" && a[1] != "last") throw Error("peel expects 'first' or 'last'");
    s.loops = {a[0]};
    s.peel_first = a[1] == "first";
  } else if (name == "tile") {
    s.kind = Kind::kTile;
    auto semi = split_top(inner, ';');
    if (semi.size() != 2) throw Error("tile expects tile(i,j;Bi,Bj)");
    s.loops = split_top(semi[0], ',');
    s.blocks = split_top(semi[1], ',');
    expect_args(s.loops, 2, name);
    expect_args(s.blocks, 2, name);
  } else if (name == "reorder") {
    s.kind = Kind::kReorder;
    s.labels = split_top(inner, ',');
    expect_args(s.labels, 2, name);
  } else if (name == "linear" || name == "skew") {
    s.kind = Kind::kLinear;
    if (name == "skew") {
      s.loops = split_top(inner, ',');
      expect_args(s.loops, 2, name);
      s.matrix = {{1, 0}, {1, 1}};
    } else {
      auto semi = split_top(inner, ';');
      if (semi.size() != 2) throw Error("linear expects linear(i,j;[[a,b],[c,d]])");
      s.loops = split_top(semi[0], ',');
      s.matrix = parse_matrix(semi[1]);
    }
    size_t n = s.loops.size();
    if (n == 0 || s.matrix.size() != n) throw Error("matrix size does not match the loop nest");
    std::vector<std::vector<Rational>> m;
    for (const auto& row : s.matrix) {
      if (row.size() != n) throw Error("matrix must be square");
      m.emplace_back(row.begin(), row.end());
    }
    Int det = determinant(m);
    if (det != 1 && det != -1) throw Error("matrix is not unimodular");
  } else {
    throw Error("unknown transformation '" + name + "'");
  }
  return s;
}

std::string TransformSpec::str() const {
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
  };
  switch (kind) {
    case Kind::kReorder:
      return "reorder(" + join(labels) + ")";
    case Kind::kDistribute:
      return "distribute(" + loops[0] + ";" + join(labels) + "|" + join(second_group) + ")";
    case Kind::kFuse:
      return "fuse(" + loops[0] + ")";
    case Kind::kReverse:
      return "reverse(" + loops[0] + ")";
    case Kind::kInterchange:
      return "interchange(" + join(loops) + ")";
    case Kind::kStripmine:
      return "stripmine(" + loops[0] + "," + blocks[0] + ")";
    case Kind::kSplit:
      return "split(" + loops[0] + "," + split_point + ")";
    case Kind::kPeel:
      return "peel(" + loops[0] + (peel_first ? ",first)" : ",last)");
    case Kind::kTile:
      return "tile(" + join(loops) + ";" + join(blocks) + ")";
    case Kind::kLinear: {
      std::string m = "[";
      for (size_t r = 0; r < matrix.size(); ++r) {
        m += r ? ",[" : "[";
        for (size_t c = 0; c < matrix[r].size(); ++c) {
          m += (c ? "," : "") + matrix[r][c].str();
        }
        m += "]";
      }
      return "linear(" + join(loops) + ";" + m + "])";
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// Program navigation

namespace {

struct Site {
  Formula context;                 // enclosing loop ranges and affine predicates
  std::vector<std::string> loops;  // enclosing loop variables
};

bool locate(const Stmt& s, const std::function<bool(const Stmt&)>& match, const Formula& ctx,
            std::vector<std::string>& loops, Site* out) {
  if (match(s)) {
    *out = Site{ctx, loops};
    return true;
  }
  switch (s.kind()) {
    case Stmt::Kind::kSeq:
      for (const auto& p : s.parts()) {
        if (locate(p, match, ctx, loops, out)) return true;
      }
      return false;
    case Stmt::Kind::kFor: {
      Formula range;
      loop_range(s, s.var(), &range);
      loops.push_back(s.var());
      bool found = locate(s.body(), match, ctx && range, loops, out);
      loops.pop_back();
      return found;
    }
    case Stmt::Kind::kIf: {
      bool affine = s.cond().is_affine();
      Formula f = affine ? s.cond().to_formula() : Formula::truth();
      if (locate(s.then_branch(), match, affine ? ctx && f : ctx, loops, out)) return true;
      return s.has_else() && locate(s.else_branch(), match, affine ? ctx && !f : ctx, loops, out);
    }
    case Stmt::Kind::kAssign:
      return false;
  }
  return false;
}

Site site_of(const Program& p, const Stmt& target) {
  Site site;
  std::vector<std::string> loops;
  if (!locate(
          p.body, [&](const Stmt& x) { return x == target; }, Formula::conj(p.assumes), loops,
          &site)) {
    throw Error("statement not found in program");
  }
  return site;
}

Stmt require_loop(const Program& p, const std::string& name) {
  auto l = find_loop(p.body, name);
  if (!l) throw Error("no unique loop '" + name + "'");
  return *l;
}

Stmt unwrap(const Stmt& s) {
  Stmt x = s;
  while (x.kind() == Stmt::Kind::kSeq && x.parts().size() == 1 && x.parts()[0].label().empty()) {
    x = x.parts()[0];
  }
  return x;
}

// The loop directly nested in `outer` whose variable or label is `name`.
Stmt inner_loop(const Stmt& outer, const std::string& name) {
  Stmt body = outer.body();
  while (body.kind() == Stmt::Kind::kSeq && body.parts().size() == 1) body = body.parts()[0];
  if (body.kind() != Stmt::Kind::kFor || (body.var() != name && body.label() != name)) {
    throw Error("loop '" + name + "' is not perfectly nested in '" + outer.var() + "'");
  }
  return body;
}

std::set<std::string> all_symbols(const Program& p) {
  std::set<std::string> out = stmt_symbols(p.body);
  auto lv = loop_vars(p.body);
  out.insert(lv.begin(), lv.end());
  for (const auto& x : p.params) out.insert(x);
  for (const auto& d : p.decls) out.insert(d.name);
  for (const auto& f : p.assumes) f.collect_free_symbols(out);
  return out;
}

std::string fresh(const std::string& base, std::set<std::string>& taken) {
  std::string v = fresh_name(base, taken);
  taken.insert(v);
  return v;
}

int step_sign(const Stmt& loop) {
  if (loop.step().is_symbolic()) return 1;
  return loop.step().literal < 0 ? -1 : 1;
}

// Formula saying iteration `a` of `loop` runs before iteration `b`.
Formula runs_before(const Stmt& loop, const AffineExpr& a, const AffineExpr& b) {
  return step_sign(loop) > 0 ? Formula::cmp(a, Rel::kLt, b) : Formula::cmp(a, Rel::kGt, b);
}

Formula range_of(const Stmt& loop, const std::string& v) {
  Formula f;
  loop_range(loop, v, &f);
  return f;
}

std::set<std::string> live_for(const Program& p, const Stmt& target) {
  std::set<std::string> live(p.outputs.begin(), p.outputs.end());
  Stmt outside = replace_stmt(p.body, target, Stmt::seq({}));
  auto outside_reads = read_vars(outside);
  Stmt body = target.kind() == Stmt::Kind::kFor ? target.body() : target;
  for (const auto& d : p.decls) {
    if (!d.is_scalar && d.rank() > 0) {
      live.insert(d.name);
    } else if (outside_reads.count(d.name) || exposed_read(body, d.name)) {
      live.insert(d.name);
    }
  }
  return live;
}

std::string instance_name(const Stmt& s, const std::string& fallback,
                          const std::vector<std::string>& args) {
  std::string base = s.label().empty() ? fallback : s.label();
  if (args.empty()) return base;
  std::string out = base + "(";
  for (size_t i = 0; i < args.size(); ++i) out += (i ? "," : "") + args[i];
  return out + ")";
}

std::string group_name(const std::vector<Stmt>& parts, const std::vector<std::string>& args) {
  if (parts.size() == 1) return instance_name(parts[0], "S", args);
  std::string base = "{";
  for (size_t i = 0; i < parts.size(); ++i) {
    base += (i ? "," : "") + (parts[i].label().empty() ? "_" : parts[i].label());
  }
  base += "}";
  return instance_name(Stmt::seq({}, base), base, args);
}

Stmt group_stmt(const std::vector<Stmt>& parts) {
  return parts.size() == 1 ? parts[0] : Stmt::seq(parts);
}

struct DistributeSplit {
  Stmt loop = Stmt::seq({});
  std::vector<Stmt> first, second;
};

DistributeSplit distribute_split(const Program& p, const TransformSpec& t) {
  DistributeSplit d;
  d.loop = require_loop(p, t.loops[0]);
  Stmt body = d.loop.body();
  if (body.kind() != Stmt::Kind::kSeq) throw Error("loop body is not a statement sequence");
  const auto& parts = body.parts();
  size_t i = 0;
  for (const auto& l : t.labels) {
    if (i >= parts.size() || parts[i].label() != l) {
      throw Error("'" + l + "' is not the next part of the loop body");
    }
    d.first.push_back(parts[i++]);
  }
  for (const auto& l : t.second_group) {
    if (i >= parts.size() || parts[i].label() != l) {
      throw Error("'" + l + "' is not the next part of the loop body");
    }
    d.second.push_back(parts[i++]);
  }
  if (i != parts.size()) throw Error("the two groups must cover the loop body");
  if (d.first.empty() || d.second.empty()) throw Error("distribution groups must be non-empty");
  return d;
}

// Finds the Seq that has two adjacent loops matching `name` with equal headers.
std::optional<std::pair<Stmt, size_t>> fusable(const Stmt& s, const std::string& name) {
  std::optional<std::pair<Stmt, size_t>> found;
  std::function<void(const Stmt&)> go = [&](const Stmt& x) {
    if (found) return;
    switch (x.kind()) {
      case Stmt::Kind::kSeq: {
        const auto& ps = x.parts();
        for (size_t i = 0; i + 1 < ps.size() && !found; ++i) {
          const Stmt& a = ps[i];
          const Stmt& b = ps[i + 1];
          if (a.kind() != Stmt::Kind::kFor || b.kind() != Stmt::Kind::kFor) continue;
          if (a.var() != name && a.label() != name) continue;
          if (a.var() != b.var() || !(a.lower() == b.lower()) || !(a.upper() == b.upper()) ||
              !(a.step() == b.step())) {
            continue;
          }
          found = std::make_pair(x, i);
        }
        for (const auto& p : ps) go(p);
        break;
      }
      case Stmt::Kind::kFor:
        go(x.body());
        break;
      case Stmt::Kind::kIf:
        go(x.then_branch());
        if (x.has_else()) go(x.else_branch());
        break;
      case Stmt::Kind::kAssign:
        break;
    }
  };
  go(s);
  return found;
}

std::optional<std::pair<Stmt, std::pair<size_t, size_t>>> reorder_site(const Stmt& s,
                                                                       const std::string& a,
                                                                       const std::string& b) {
  std::optional<std::pair<Stmt, std::pair<size_t, size_t>>> found;
  std::function<void(const Stmt&)> go = [&](const Stmt& x) {
    if (found) return;
    switch (x.kind()) {
      case Stmt::Kind::kSeq: {
        const auto& ps = x.parts();
        size_t ia = ps.size(), ib = ps.size();
        for (size_t i = 0; i < ps.size(); ++i) {
          if (ps[i].label() == a) ia = i;
          if (ps[i].label() == b) ib = i;
        }
        if (ia < ps.size() && ib < ps.size() && ia != ib) {
          found = std::make_pair(x, std::make_pair(std::min(ia, ib), std::max(ia, ib)));
          return;
        }
        for (const auto& p : ps) go(p);
        break;
      }
      case Stmt::Kind::kFor:
        go(x.body());
        break;
      case Stmt::Kind::kIf:
        go(x.then_branch());
        if (x.has_else()) go(x.else_branch());
        break;
      case Stmt::Kind::kAssign:
        break;
    }
  };
  go(s);
  return found;
}

Formula lex_less(const std::vector<AffineExpr>& a, const std::vector<AffineExpr>& b) {
  std::vector<Formula> alts;
  for (size_t k = 0; k < a.size(); ++k) {
    std::vector<Formula> parts;
    for (size_t j = 0; j < k; ++j) parts.push_back(Formula::cmp(a[j], Rel::kEq, b[j]));
    parts.push_back(Formula::cmp(a[k], Rel::kLt, b[k]));
    alts.push_back(Formula::conj(std::move(parts)));
  }
  return Formula::disj(std::move(alts));
}

std::vector<AffineExpr> mat_vec(const std::vector<std::vector<Int>>& m,
                                const std::vector<AffineExpr>& v) {
  std::vector<AffineExpr> out;
  for (const auto& row : m) {
    AffineExpr e;
    for (size_t c = 0; c < row.size(); ++c) e = e + v[c] * row[c];
    out.push_back(e);
  }
  return out;
}

std::vector<AffineExpr> vars_of(const std::vector<std::string>& names) {
  std::vector<AffineExpr> out;
  for (const auto& n : names) out.push_back(AffineExpr::var(n));
  return out;
}

// The perfectly nested loops named by `names`, outermost first.
std::vector<Stmt> nest_of(const Program& p, const std::vector<std::string>& names) {
  std::vector<Stmt> nest{require_loop(p, names[0])};
  for (size_t i = 1; i < names.size(); ++i) nest.push_back(inner_loop(nest.back(), names[i]));
  return nest;
}

// Ranges of a nest instance where loop k uses vars[k].
Formula nest_range(const std::vector<Stmt>& nest, const std::vector<std::string>& vars) {
  Substitution sub;
  std::vector<Formula> parts;
  for (size_t k = 0; k < nest.size(); ++k) {
    parts.push_back(range_of(nest[k], vars[k]).substitute(sub));
    sub[nest[k].var()] = AffineExpr::var(vars[k]);
  }
  return Formula::conj(std::move(parts));
}

Substitution nest_sub(const std::vector<Stmt>& nest, const std::vector<std::string>& vars) {
  Substitution sub;
  for (size_t k = 0; k < nest.size(); ++k) sub[nest[k].var()] = AffineExpr::var(vars[k]);
  return sub;
}

}  // namespace

// ---------------------------------------------------------------------------
// Obligations

std::vector<Obligation> obligations_for(const Program& p, const TransformSpec& t) {
  std::vector<Obligation> out;
  std::set<std::string> taken = all_symbols(p);
  Bindings base = p.bindings();
  auto make = [&](const Stmt& target, Stmt left, std::string ln, Stmt right, std::string rn,
                  Formula cond, bool right_first, std::string prov) {
    Site site = site_of(p, target);
    Obligation ob;
    ob.left = std::move(left);
    ob.right = std::move(right);
    ob.left_name = std::move(ln);
    ob.right_name = std::move(rn);
    ob.bindings = base;
    ob.bindings.ground = site.context && cond;
    ob.live = live_for(p, target);
    ob.right_first = right_first;
    ob.provenance = std::move(prov);
    try {
      if (!is_satisfiable(ob.bindings.ground)) return;
    } catch (const BudgetExceeded&) {
    }
    out.push_back(std::move(ob));
  };

  switch (t.kind) {
    case TransformSpec::Kind::kStripmine:
    case TransformSpec::Kind::kSplit:
    case TransformSpec::Kind::kPeel:
      apply(p, t);
      return out;
    case TransformSpec::Kind::kDistribute: {
      DistributeSplit d = distribute_split(p, t);
      std::string l = fresh("l", taken), m = fresh("m", taken);
      const std::string& v = d.loop.var();
      Formula cond = range_of(d.loop, l) && range_of(d.loop, m) &&
                     runs_before(d.loop, AffineExpr::var(m), AffineExpr::var(l));
      make(d.loop, instantiate(group_stmt(d.first), {{v, AffineExpr::var(l)}}),
           group_name(d.first, {l}), instantiate(group_stmt(d.second), {{v, AffineExpr::var(m)}}),
           group_name(d.second, {m}), cond, true, t.str() + ": instances " + l + " > " + m);
      return out;
    }
    case TransformSpec::Kind::kFuse: {
      auto f = fusable(p.body, t.loops[0]);
      if (!f) throw Error("no adjacent loops '" + t.loops[0] + "' with equal headers");
      const Stmt& a = f->first.parts()[f->second];
      const Stmt& b = f->first.parts()[f->second + 1];
      std::string l = fresh("l", taken), m = fresh("m", taken);
      Formula cond = range_of(a, l) && range_of(a, m) &&
                     runs_before(a, AffineExpr::var(m), AffineExpr::var(l));
      Stmt la = unwrap(a.body()), rb = unwrap(b.body());
      make(a, instantiate(a.body(), {{a.var(), AffineExpr::var(l)}}), instance_name(la, "S1", {l}),
           instantiate(b.body(), {{b.var(), AffineExpr::var(m)}}), instance_name(rb, "S2", {m}),
           cond, false, t.str() + ": instances " + l + " > " + m);
      return out;
    }
    case TransformSpec::Kind::kReverse: {
      Stmt loop = require_loop(p, t.loops[0]);
      const std::string& v = loop.var();
      std::string a = fresh(v + "1", taken), b = fresh(v + "2", taken);
      Formula cond = range_of(loop, a) && range_of(loop, b) &&
                     runs_before(loop, AffineExpr::var(a), AffineExpr::var(b));
      Stmt body = unwrap(loop.body());
      make(loop, instantiate(loop.body(), {{v, AffineExpr::var(a)}}), instance_name(body, "S", {a}),
           instantiate(loop.body(), {{v, AffineExpr::var(b)}}), instance_name(body, "S", {b}), cond,
           false, t.str());
      return out;
    }
    case TransformSpec::Kind::kReorder: {
      auto r = reorder_site(p.body, t.labels[0], t.labels[1]);
      if (!r)
        throw Error("labels '" + t.labels[0] + "' and '" + t.labels[1] +
                    "' are not parts of one sequence");
      const auto& parts = r->first.parts();
      size_t lo = r->second.first, hi = r->second.second;
      int n = static_cast<int>(hi - lo + 1);
      std::vector<int> perm(n);
      for (int i = 0; i < n; ++i) perm[i] = i + 1;
      std::swap(perm[0], perm[n - 1]);
      for (const auto& [i, j] : reordered_pairs(n, perm)) {
        const Stmt& a = parts[lo + i - 1];
        const Stmt& b = parts[lo + j - 1];
        make(r->first, a, instance_name(a, "S" + std::to_string(lo + i), {}), b,
             instance_name(b, "S" + std::to_string(lo + j), {}), Formula::truth(), false, t.str());
      }
      return out;
    }
    case TransformSpec::Kind::kInterchange:
    case TransformSpec::Kind::kLinear:
    case TransformSpec::Kind::kTile: {
      auto nest = nest_of(p, t.loops);
      for (const auto& l : nest) {
        if (l.step().is_symbolic() || (l.step().literal != 1 && l.step().literal != -1)) {
          throw Error("loop '" + l.var() + "' must have unit step");
        }
      }
      Stmt body = nest.back().body();
      std::vector<std::string> x, y;
      for (const auto& l : nest) x.push_back(fresh(l.var() + "1", taken));
      for (const auto& l : nest) y.push_back(fresh(l.var() + "2", taken));
      // Iteration order in the original nest; negative steps flip a coordinate.
      auto order = [&](const std::vector<std::string>& v) {
        std::vector<AffineExpr> out;
        for (size_t k = 0; k < nest.size(); ++k) {
          out.push_back(AffineExpr::var(v[k]) * Int(step_sign(nest[k])));
        }
        return out;
      };
      Formula cond = nest_range(nest, x) && nest_range(nest, y) && lex_less(order(x), order(y));
      if (t.kind == TransformSpec::Kind::kInterchange) {
        cond = cond && Formula::cmp(order(y)[1], Rel::kLt, order(x)[1]);
      } else if (t.kind == TransformSpec::Kind::kLinear) {
        cond = cond && lex_less(mat_vec(t.matrix, vars_of(y)), mat_vec(t.matrix, vars_of(x)));
      } else {
        std::vector<std::string> ox, oy;
        std::vector<Formula> origin;
        for (size_t k = 0; k < 2; ++k) {
          ox.push_back(fresh(nest[k].var() + "T1", taken));
          oy.push_back(fresh(nest[k].var() + "T2", taken));
        }
        for (size_t k = 0; k < 2; ++k) {
          AffineExpr lo = nest[k].lower()[0];
          const std::string& blk = t.blocks[k];
          bool literal = std::isdigit(static_cast<unsigned char>(blk[0]));
          AffineExpr bsz = literal ? AffineExpr::constant(Int(blk)) : AffineExpr::var(blk);
          for (const auto& [o, v] : {std::make_pair(ox[k], x[k]), std::make_pair(oy[k], y[k])}) {
            AffineExpr O = AffineExpr::var(o), V = AffineExpr::var(v);
            origin.push_back(Formula::cmp(lo, Rel::kLe, O));
            origin.push_back(Formula::cmp(O, Rel::kLe, V));
            origin.push_back(Formula::cmp(V, Rel::kLe, O + bsz - Int(1)));
            if (literal) origin.push_back(Formula::divides(Int(blk), O - lo));
          }
        }
        std::vector<AffineExpr> tx{AffineExpr::var(ox[0]), AffineExpr::var(ox[1]),
                                   AffineExpr::var(x[0]), AffineExpr::var(x[1])};
        std::vector<AffineExpr> ty{AffineExpr::var(oy[0]), AffineExpr::var(oy[1]),
                                   AffineExpr::var(y[0]), AffineExpr::var(y[1])};
        std::vector<std::string> origins = ox;
        origins.insert(origins.end(), oy.begin(), oy.end());
        cond =
            cond && Formula::exists(origins, Formula::conj(std::move(origin)) && lex_less(ty, tx));
      }
      Stmt ib = unwrap(body);
      make(nest[0], instantiate(body, nest_sub(nest, x)), instance_name(ib, "S", x),
           instantiate(body, nest_sub(nest, y)), instance_name(ib, "S", y), cond, false, t.str());
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Application

namespace {

// Bound simplification: drops bounds implied by another bound under `ctx`.
std::vector<AffineExpr> prune_bounds(std::vector<AffineExpr> bounds, const Formula& ctx,
                                     bool lower) {
  std::vector<AffineExpr> out;
  for (size_t i = 0; i < bounds.size(); ++i) {
    bool redundant = false;
    for (size_t j = 0; j < bounds.size() && !redundant; ++j) {
      if (i == j) continue;
      if (bounds[i] == bounds[j]) {
        redundant = j < i;
        continue;
      }
      Formula dominated = lower ? Formula::cmp(bounds[j], Rel::kGe, bounds[i])
                                : Formula::cmp(bounds[j], Rel::kLe, bounds[i]);
      try {
        // A bound already dropped can not justify dropping another one.
        bool kept_j = std::find(out.begin(), out.end(), bounds[j]) != out.end() || j > i;
        redundant = kept_j && implies(ctx, dominated);
      } catch (const BudgetExceeded&) {
      }
    }
    if (!redundant) out.push_back(bounds[i]);
  }
  return out;
}

Program with_block_param(Program p, const std::string& block) {
  if (block.empty() || std::isdigit(static_cast<unsigned char>(block[0]))) {
    if (block.empty() || Int(block) < 1) throw Error("block size must be positive");
    return p;
  }
  if (p.is_param(block)) return p;
  if (all_symbols(p).count(block)) {
    throw Error("block size '" + block + "' clashes with an existing name");
  }
  p.params.push_back(block);
  p.assumes.push_back(Formula::cmp(AffineExpr::var(block), Rel::kGe, AffineExpr::constant(1)));
  return p;
}

Step block_step(const std::string& block) {
  Step s;
  if (std::isdigit(static_cast<unsigned char>(block[0]))) {
    s.literal = Int(block);
  } else {
    s.symbol = block;
  }
  return s;
}

AffineExpr block_expr(const std::string& block) {
  if (std::isdigit(static_cast<unsigned char>(block[0]))) return AffineExpr::constant(Int(block));
  return AffineExpr::var(block);
}

void require_unit_step(const Stmt& loop) {
  if (loop.step().is_symbolic() || loop.step().literal != 1) {
    throw Error("loop '" + loop.var() + "' must have step 1");
  }
}

// Loop nest over new variables u = T x, with bounds by Fourier-Motzkin
// elimination. Requires unit coefficients on every eliminated variable.
Stmt transform_nest(const std::vector<Stmt>& nest, const std::vector<std::vector<Int>>& T,
                    const std::vector<std::string>& new_vars, const Stmt& body) {
  size_t n = nest.size();
  std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n));
  {
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(2 * n));
    for (size_t r = 0; r < n; ++r) {
      for (size_t c = 0; c < n; ++c) a[r][c] = Rational(T[r][c]);
      a[r][n + r] = 1;
    }
    for (size_t c = 0; c < n; ++c) {
      size_t piv = c;
      while (piv < n && a[piv][c] == 0) ++piv;
      if (piv == n) throw Error("matrix is singular");
      std::swap(a[piv], a[c]);
      Rational d = a[c][c];
      for (auto& x : a[c]) x /= d;
      for (size_t r = 0; r < n; ++r) {
        if (r == c || a[r][c] == 0) continue;
        Rational f = a[r][c];
        for (size_t k = 0; k < 2 * n; ++k) a[r][k] -= f * a[c][k];
      }
    }
    for (size_t r = 0; r < n; ++r) {
      for (size_t c = 0; c < n; ++c) inv[r][c] = a[r][n + c];
    }
  }
  Substitution old_of_new;
  for (size_t r = 0; r < n; ++r) {
    AffineExpr e;
    for (size_t c = 0; c < n; ++c) {
      if (denominator(inv[r][c]) != 1) throw Error("matrix inverse is not integral");
      e = e + AffineExpr::var(new_vars[c]) * numerator(inv[r][c]);
    }
    old_of_new[nest[r].var()] = e;
  }
  // Constraints e >= 0 over the new variables.
  std::vector<AffineExpr> cons;
  for (size_t k = 0; k < n; ++k) {
    AffineExpr v = AffineExpr::var(nest[k].var());
    for (const auto& lo : nest[k].lower()) cons.push_back((v - lo).substitute(old_of_new));
    for (const auto& up : nest[k].upper()) cons.push_back((up - v).substitute(old_of_new));
  }
  std::vector<std::vector<AffineExpr>> lowers(n), uppers(n);
  for (size_t d = n; d-- > 0;) {
    const std::string& u = new_vars[d];
    std::vector<AffineExpr> pos, neg, rest;
    for (const auto& c : cons) {
      Int k = c.coeff(u);
      if (k == 0) {
        rest.push_back(c);
      } else if (k == 1) {
        pos.push_back(c);
      } else if (k == -1) {
        neg.push_back(c);
      } else {
        throw Error("transformed bounds need a non-unit coefficient");
      }
    }
    AffineExpr uv = AffineExpr::var(u);
    for (const auto& c : pos) lowers[d].push_back(uv - c);  // u >= u - c
    for (const auto& c : neg) uppers[d].push_back(c + uv);  // u <= c + u
    if (lowers[d].empty() || uppers[d].empty()) throw Error("transformed loop is unbounded");
    for (const auto& a : pos) {
      for (const auto& b : neg) {
        AffineExpr s = a + b;
        if (!s.is_constant()) rest.push_back(s);
      }
    }
    cons = std::move(rest);
  }
  Stmt out = body.substitute(old_of_new);
  for (size_t d = n; d-- > 0;) {
    std::string label = d == 0 ? nest[0].label() : "";
    out = Stmt::loop(new_vars[d], lowers[d], uppers[d], Step{}, out, label);
  }
  return out;
}

// Splices unlabeled sequences into their parent sequence.
Stmt flatten(const Stmt& s) {
  switch (s.kind()) {
    case Stmt::Kind::kSeq: {
      std::vector<Stmt> parts;
      for (const auto& q : s.parts()) {
        Stmt f = flatten(q);
        if (f.kind() == Stmt::Kind::kSeq && f.label().empty()) {
          for (const auto& r : f.parts()) parts.push_back(r);
        } else {
          parts.push_back(f);
        }
      }
      return Stmt::seq(std::move(parts), s.label()).with_pos(s.pos());
    }
    case Stmt::Kind::kFor:
      return Stmt::loop(s.var(), s.lower(), s.upper(), s.step(), flatten(s.body()), s.label())
          .with_pos(s.pos());
    case Stmt::Kind::kIf:
      return Stmt::branch(
                 s.cond(), flatten(s.then_branch()),
                 s.has_else() ? std::optional<Stmt>(flatten(s.else_branch())) : std::nullopt,
                 s.label())
          .with_pos(s.pos());
    case Stmt::Kind::kAssign:
      return s;
  }
  return s;
}

Program rewrite(const Program& p, const TransformSpec& t);

}  // namespace

Program apply(const Program& p, const TransformSpec& t) {
  Program out = rewrite(p, t);
  out.body = flatten(out.body);
  return out;
}

namespace {

Program rewrite(const Program& p, const TransformSpec& t) {
  Program out = p;
  std::set<std::string> taken = all_symbols(p);
  switch (t.kind) {
    case TransformSpec::Kind::kDistribute: {
      DistributeSplit d = distribute_split(p, t);
      Stmt a = Stmt::loop(d.loop.var(), d.loop.lower(), d.loop.upper(), d.loop.step(),
                          Stmt::seq(d.first), d.loop.label());
      Stmt b = Stmt::loop(d.loop.var(), d.loop.lower(), d.loop.upper(), d.loop.step(),
                          Stmt::seq(d.second));
      out.body = replace_loop(p.body, t.loops[0], Stmt::seq({a, b}));
      return out;
    }
    case TransformSpec::Kind::kFuse: {
      auto f = fusable(p.body, t.loops[0]);
      if (!f) throw Error("no adjacent loops '" + t.loops[0] + "' with equal headers");
      const auto& parts = f->first.parts();
      const Stmt& a = parts[f->second];
      const Stmt& b = parts[f->second + 1];
      std::vector<Stmt> body;
      for (const Stmt* x : {&a, &b}) {
        Stmt inner = instantiate(x->body(), {{x->var(), AffineExpr::var(a.var())}});
        if (inner.kind() == Stmt::Kind::kSeq && inner.label().empty()) {
          for (const auto& q : inner.parts()) body.push_back(q);
        } else {
          body.push_back(inner);
        }
      }
      std::vector<Stmt> np;
      for (size_t i = 0; i < parts.size(); ++i) {
        if (i == f->second) {
          np.push_back(
              Stmt::loop(a.var(), a.lower(), a.upper(), a.step(), Stmt::seq(body), a.label()));
        } else if (i != f->second + 1) {
          np.push_back(parts[i]);
        }
      }
      out.body = replace_stmt(p.body, f->first, Stmt::seq(np, f->first.label()));
      return out;
    }
    case TransformSpec::Kind::kReverse: {
      Stmt loop = require_loop(p, t.loops[0]);
      if (loop.step().is_symbolic() || (loop.step().literal != 1 && loop.step().literal != -1)) {
        throw Error("reverse needs a unit step");
      }
      Step st = loop.step();
      st.literal = -st.literal;
      out.body = replace_loop(
          p.body, t.loops[0],
          Stmt::loop(loop.var(), loop.lower(), loop.upper(), st, loop.body(), loop.label()));
      return out;
    }
    case TransformSpec::Kind::kReorder: {
      auto r = reorder_site(p.body, t.labels[0], t.labels[1]);
      if (!r)
        throw Error("labels '" + t.labels[0] + "' and '" + t.labels[1] +
                    "' are not parts of one sequence");
      std::vector<Stmt> parts = r->first.parts();
      std::swap(parts[r->second.first], parts[r->second.second]);
      out.body = replace_stmt(p.body, r->first, Stmt::seq(parts, r->first.label()));
      return out;
    }
    case TransformSpec::Kind::kStripmine: {
      Stmt loop = require_loop(p, t.loops[0]);
      require_unit_step(loop);
      if (loop.lower().size() != 1) throw Error("stripmine needs a single lower bound");
      out = with_block_param(out, t.blocks[0]);
      const std::string& v = loop.var();
      std::string vb = fresh(v + "B", taken);
      AffineExpr VB = AffineExpr::var(vb);
      std::vector<AffineExpr> inner_up{VB + block_expr(t.blocks[0]) - Int(1)};
      for (const auto& u : loop.upper()) inner_up.push_back(u);
      Stmt inner = Stmt::loop(v, {VB}, inner_up, Step{}, loop.body(), loop.label());
      Stmt outer = Stmt::loop(vb, loop.lower(), loop.upper(), block_step(t.blocks[0]), inner);
      out.body = replace_loop(p.body, t.loops[0], outer);
      return out;
    }
    case TransformSpec::Kind::kSplit: {
      Stmt loop = require_loop(p, t.loops[0]);
      require_unit_step(loop);
      AffineExpr at = parse_affine(t.split_point, p);
      Site site = site_of(p, loop);
      Formula ctx = site.context && range_of(loop, loop.var());
      std::vector<AffineExpr> up1 = loop.upper(), lo2 = loop.lower();
      up1.push_back(at - Int(1));
      lo2.push_back(at);
      up1 = prune_bounds(up1, site.context, false);
      lo2 = prune_bounds(lo2, site.context, true);
      (void)ctx;
      std::string l1 = loop.label().empty() ? "" : loop.label() + ".1";
      std::string l2 = loop.label().empty() ? "" : loop.label() + ".2";
      Stmt a = Stmt::loop(loop.var(), loop.lower(), up1, loop.step(), loop.body(), l1);
      Stmt b = Stmt::loop(loop.var(), lo2, loop.upper(), loop.step(), loop.body(), l2);
      out.body = replace_loop(p.body, t.loops[0], Stmt::seq({a, b}));
      return out;
    }
    case TransformSpec::Kind::kPeel: {
      Stmt loop = require_loop(p, t.loops[0]);
      require_unit_step(loop);
      std::vector<Formula> nonempty;
      for (const auto& lo : loop.lower()) {
        for (const auto& up : loop.upper()) nonempty.push_back(Formula::cmp(lo, Rel::kLe, up));
      }
      Pred guard = Pred::affine(Formula::conj(nonempty));
      Stmt result = Stmt::seq({});
      if (t.peel_first) {
        if (loop.lower().size() != 1) throw Error("peel first needs a single lower bound");
        AffineExpr lo = loop.lower()[0];
        Stmt once = Stmt::branch(
            guard, instantiate(loop.body(), {{loop.var(), lo}}).relabel(".first"), std::nullopt);
        Stmt rest = Stmt::loop(loop.var(), {lo + Int(1)}, loop.upper(), loop.step(), loop.body(),
                               loop.label());
        result = Stmt::seq({once, rest});
      } else {
        if (loop.upper().size() != 1) throw Error("peel last needs a single upper bound");
        AffineExpr up = loop.upper()[0];
        Stmt rest = Stmt::loop(loop.var(), loop.lower(), {up - Int(1)}, loop.step(), loop.body(),
                               loop.label());
        Stmt once = Stmt::branch(
            guard, instantiate(loop.body(), {{loop.var(), up}}).relabel(".last"), std::nullopt);
        result = Stmt::seq({rest, once});
      }
      out.body = replace_loop(p.body, t.loops[0], result);
      return out;
    }
    case TransformSpec::Kind::kInterchange:
    case TransformSpec::Kind::kLinear: {
      auto nest = nest_of(p, t.loops);
      for (const auto& l : nest) require_unit_step(l);
      std::vector<std::vector<Int>> T = t.matrix;
      std::vector<std::string> vars;
      if (t.kind == TransformSpec::Kind::kInterchange) {
        T = {{0, 1}, {1, 0}};
        vars = {nest[1].var(), nest[0].var()};
      } else {
        std::set<std::string> used;
        for (size_t r = 0; r < T.size(); ++r) {
          std::string name;
          for (size_t c = 0; c < T[r].size(); ++c) {
            bool unit = T[r][c] == 1;
            for (size_t k = 0; k < T[r].size(); ++k) unit = unit && (k == c || T[r][k] == 0);
            if (unit && !used.count(nest[c].var())) name = nest[c].var();
          }
          if (name.empty()) name = fresh(nest[r].var() + "t", taken);
          used.insert(name);
          vars.push_back(name);
        }
      }
      Stmt replaced = transform_nest(nest, T, vars, nest.back().body());
      out.body = replace_stmt(p.body, nest[0], replaced);
      return out;
    }
    case TransformSpec::Kind::kTile: {
      auto nest = nest_of(p, t.loops);
      for (const auto& l : nest) require_unit_step(l);
      for (const auto& l : nest) {
        if (l.lower().size() != 1) throw Error("tile needs single lower bounds");
      }
      auto mentions_outer = [&](const std::vector<AffineExpr>& es) {
        return std::any_of(es.begin(), es.end(),
                           [&](const AffineExpr& e) { return e.mentions(nest[0].var()); });
      };
      if (mentions_outer(nest[1].lower()) || mentions_outer(nest[1].upper())) {
        throw Error("tile needs a rectangular nest");
      }
      for (const auto& b : t.blocks) out = with_block_param(out, b);
      std::string ot = fresh(nest[0].var() + "T", taken);
      std::string it = fresh(nest[1].var() + "T", taken);
      auto point = [&](const Stmt& l, const std::string& tv, const std::string& blk,
                       const Stmt& body) {
        std::vector<AffineExpr> up{AffineExpr::var(tv) + block_expr(blk) - Int(1)};
        for (const auto& u : l.upper()) up.push_back(u);
        return Stmt::loop(l.var(), {AffineExpr::var(tv)}, up, Step{}, body, l.label());
      };
      Stmt inner = point(nest[1], it, t.blocks[1], nest[1].body());
      Stmt middle = point(nest[0], ot, t.blocks[0], inner);
      Stmt tiles_in =
          Stmt::loop(it, nest[1].lower(), nest[1].upper(), block_step(t.blocks[1]), middle);
      Stmt tiles =
          Stmt::loop(ot, nest[0].lower(), nest[0].upper(), block_step(t.blocks[0]), tiles_in);
      out.body = replace_stmt(p.body, nest[0], tiles);
      return out;
    }
  }
  return out;
}

}  // namespace

std::set<std::pair<int, int>> reordered_pairs(int n, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != n) throw Error("permutation size mismatch");
  std::vector<int> seen(n + 1, 0);
  for (int x : perm) {
    if (x < 1 || x > n || seen[x]++) throw Error("not a permutation");
  }
  std::set<std::pair<int, int>> out;
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      if (perm[i - 1] > perm[j - 1]) out.insert({i, j});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dependence baseline

std::string Dependence::str() const {
  return kind + " dependence on " + array + " from " + source + " to " + sink;
}

DependenceReport dependence_legality(const Program& p, const TransformSpec& t) {
  DependenceReport rep;
  for (const auto& ob : obligations_for(p, t)) {
    const Stmt& first = ob.right_first ? ob.right : ob.left;
    const Stmt& second = ob.right_first ? ob.left : ob.right;
    std::string src = ob.right_first ? ob.right_name : ob.left_name;
    std::string dst = ob.right_first ? ob.left_name : ob.right_name;
    std::vector<Access> a1, a2;
    for (auto a : collect_accesses(first)) {
      Substitution sub;
      for (auto& l : a.loops) sub[l] = AffineExpr::var(l + "'s");
      for (auto& i : a.index) i = i.substitute(sub);
      a.context = a.context.substitute(sub);
      a1.push_back(std::move(a));
    }
    for (auto a : collect_accesses(second)) {
      Substitution sub;
      for (auto& l : a.loops) sub[l] = AffineExpr::var(l + "'t");
      for (auto& i : a.index) i = i.substitute(sub);
      a.context = a.context.substitute(sub);
      a2.push_back(std::move(a));
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& x : a1) {
      for (const auto& y : a2) {
        if ((!x.write && !y.write) || x.array != y.array) continue;
        std::string kind = x.write && y.write ? "output" : x.write ? "flow" : "anti";
        if (seen.count({kind, x.array})) continue;
        std::vector<Formula> parts{ob.bindings.ground, x.context, y.context};
        bool overlap = true;
        if (x.index.size() == y.index.size()) {
          for (size_t k = 0; k < x.index.size(); ++k) {
            parts.push_back(Formula::cmp(x.index[k], Rel::kEq, y.index[k]));
          }
          try {
            overlap = is_satisfiable(Formula::conj(std::move(parts)));
          } catch (const BudgetExceeded&) {
            overlap = true;
          }
        }
        if (!overlap) continue;
        seen.insert({kind, x.array});
        rep.dependences.push_back(Dependence{src, dst, kind, x.array});
      }
    }
  }
  rep.legal = rep.dependences.empty();
  return rep;
}

}  // namespace fsa
