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

#include "fsa/analyzer.hpp"

#include <algorithm>
#include <sstream>

#include "fsa/access.hpp"
#include "fsa/transforms.hpp"

namespace fsa {

std::string Obligation::str() const {
  std::string out = "commute(" + left_name + ", " + right_name + ")";
  if (!bindings.ground.is_true()) out += " where " + bindings.ground.str();
  return out;
}

Formula Region::membership(const std::vector<std::string>& cell) const {
  std::vector<Formula> parts{constraint};
  for (size_t k = 0; k < index.size() && k < cell.size(); ++k) {
    parts.push_back(Formula::cmp(index[k], Rel::kEq, AffineExpr::var(cell[k])));
  }
  return Formula::exists(vars, Formula::conj(std::move(parts)));
}

std::string Region::str() const {
  std::string out = array;
  if (!index.empty()) {
    out += "(";
    for (size_t k = 0; k < index.size(); ++k) {
      if (k) out += ",";
      out += index[k].str();
    }
    out += ")";
  }
  if (!constraint.is_true()) out += " | " + constraint.str();
  return out;
}

namespace {

SkolemTable access_terms(const std::vector<Access>& accesses, const Formula& ground) {
  SkolemTable t;
  for (const auto& a : accesses) {
    for (const auto& i : a.index) t.add_all(i);
    t.add_all(a.context);
  }
  t.add_all(ground);
  return t;
}

Access rename_access(const Access& a, const std::string& suffix) {
  Substitution sub;
  for (const auto& l : a.loops) sub[l] = AffineExpr::var(l + suffix);
  Access out = a;
  for (auto& i : out.index) i = i.substitute(sub);
  for (auto& l : out.loops) l += suffix;
  out.context = a.context.substitute(sub);
  return out;
}

bool may_overlap(const Access& a, const Access& b, const Formula& base, const SolverOptions& opts) {
  if (a.array != b.array) return false;
  if (a.index.size() != b.index.size()) return true;
  std::vector<Formula> parts{a.context, b.context};
  for (size_t k = 0; k < a.index.size(); ++k) {
    parts.push_back(Formula::cmp(a.index[k], Rel::kEq, b.index[k]));
  }
  try {
    return is_satisfiable(Formula::conj(std::move(parts)), base, opts);
  } catch (const BudgetExceeded&) {
    return true;
  }
}

}  // namespace

Footprint footprint(const Stmt& s, const Bindings& bindings) {
  Footprint fp;
  for (const auto& a : collect_accesses(s)) {
    Region r{a.array, a.index, a.loops, a.context};
    (void)bindings;
    (a.write ? fp.writes : fp.reads).push_back(std::move(r));
  }
  return fp;
}

bool disjoint_commute(const Stmt& s1, const Stmt& s2, const Bindings& bindings,
                      const SolverOptions& opts) {
  std::vector<Access> a1, a2;
  for (const auto& a : collect_accesses(s1)) a1.push_back(rename_access(a, "'a"));
  for (const auto& a : collect_accesses(s2)) a2.push_back(rename_access(a, "'b"));
  std::vector<Access> all = a1;
  all.insert(all.end(), a2.begin(), a2.end());
  Formula base = analysis_context(bindings, access_terms(all, bindings.ground));
  for (const auto& x : a1) {
    for (const auto& y : a2) {
      if (!x.write && !y.write) continue;
      if (may_overlap(x, y, base, opts)) return false;
    }
  }
  return true;
}

const char* to_string(Outcome o) { return o == Outcome::kLegal ? "Legal" : "Unknown"; }

namespace {

void print_step(const TraceStep& t, std::ostringstream& out) {
  out << std::string(2 * std::max(0, t.depth - 1), ' ') << "[depth " << t.depth << "] " << t.rule
      << "(" << t.left << ", " << t.right << ") -> "
      << (t.children.empty() ? t.result : std::string("descend"));
  if (!t.note.empty()) out << "  ; " << t.note;
  out << "\n";
  if (t.compare && t.compare->witness) {
    out << std::string(2 * std::max(0, t.depth - 1) + 4, ' ') << "witness "
        << t.compare->witness->str() << "\n";
  }
  for (const auto& c : t.children) print_step(c, out);
}

const TraceStep* find_failure(const TraceStep& t) {
  if (t.result == "Legal") return nullptr;
  if (t.children.empty()) return &t;
  for (const auto& c : t.children) {
    if (const TraceStep* f = find_failure(c)) return f;
  }
  return &t;
}

const TraceStep* find_compare(const TraceStep& t) {
  if (t.rule == "COMPARE") return &t;
  for (const auto& c : t.children) {
    if (const TraceStep* f = find_compare(c)) return f;
  }
  return nullptr;
}

}  // namespace

std::string Verdict::trace_text() const {
  std::ostringstream out;
  print_step(trace, out);
  return out.str();
}

const TraceStep* Verdict::first_failure() const {
  if (outcome == Outcome::kLegal) return nullptr;
  const TraceStep* f = find_failure(trace);
  return f ? f : &trace;
}

const TraceStep* Verdict::first_compare() const { return find_compare(trace); }

namespace {

std::string args_of(const std::string& name) {
  size_t p = name.find('(');
  return p == std::string::npos ? "" : name.substr(p);
}

std::string base_of(const std::string& name) {
  size_t p = name.find('(');
  return p == std::string::npos ? name : name.substr(0, p);
}

std::string with_arg(const std::string& name, const std::string& var) {
  if (!name.empty() && name.back() == ')') {
    return name.substr(0, name.size() - 1) + "," + var + ")";
  }
  return name + "(" + var + ")";
}

std::string part_name(const std::string& parent, const Stmt& part, size_t idx) {
  if (!part.label().empty()) return part.label() + args_of(parent);
  return base_of(parent) + "." + std::to_string(idx + 1) + args_of(parent);
}

int rank_for_force(const Stmt& s) {
  switch (s.kind()) {
    case Stmt::Kind::kFor:
      return 3;
    case Stmt::Kind::kIf:
      return 2;
    case Stmt::Kind::kSeq:
      return s.parts().size() > 1 ? 1 : 0;
    case Stmt::Kind::kAssign:
      return 0;
  }
  return 0;
}

// Arrays referenced inside index terms, loop bounds, or predicates of `s`.
std::set<std::string> control_reads(const Stmt& s) {
  std::set<std::string> out;
  auto from_affine = [&](const AffineExpr& e) {
    std::vector<Atom> apps;
    e.collect_apps(apps);
    for (const auto& a : apps) out.insert(a.name());
  };
  switch (s.kind()) {
    case Stmt::Kind::kFor:
      for (const auto& e : s.lower()) from_affine(e);
      for (const auto& e : s.upper()) from_affine(e);
      break;
    case Stmt::Kind::kIf: {
      std::vector<Ref> reads;
      s.cond().collect_reads(reads);
      for (const auto& r : reads) {
        out.insert(r.name);
        for (const auto& i : r.indices) from_affine(i);
      }
      if (s.cond().is_affine()) {
        std::vector<Atom> apps;
        s.cond().to_formula().collect_apps(apps);
        for (const auto& a : apps) out.insert(a.name());
      }
      break;
    }
    default:
      break;
  }
  return out;
}

// An array read by the loop bounds or predicate of `s1` at a cell that `s2`
// may write.
std::optional<std::string> control_conflict(const Stmt& s1, const Stmt& s2, const Bindings& b,
                                            const SolverOptions& opts) {
  auto blocked = control_reads(s1);
  auto alt = altered_vars(s2);
  std::optional<std::string> shared;
  for (const auto& a : blocked) {
    if (alt.count(a)) {
      shared = a;
      break;
    }
  }
  if (!shared) return std::nullopt;
  Stmt header = s1.kind() == Stmt::Kind::kFor
                    ? Stmt::loop(s1.var(), s1.lower(), s1.upper(), s1.step(), Stmt::seq({}))
                    : Stmt::branch(s1.cond(), Stmt::seq({}), std::nullopt);
  if (disjoint_commute(header, s2, b, opts)) return std::nullopt;
  return shared;
}

class Commuter {
 public:
  Commuter(const Program& p, const CommuteOptions& o) : p_(p), o_(o) {
    max_ = std::max(o.max_depth, o.force_simplify);
  }

  int max_reached = 0;

  TraceStep run(Stmt s1, std::string n1, Stmt s2, std::string n2, const Bindings& b,
                const std::set<std::string>& live, int depth) {
    s1 = unwrap(s1, n1);
    s2 = unwrap(s2, n2);
    max_reached = std::max(max_reached, depth);
    TraceStep t;
    t.depth = depth;
    t.left = n1;
    t.right = n2;
    if (depth > max_) {
      t.rule = "BUDGET";
      t.result = "Unknown";
      t.note = "depth limit " + std::to_string(max_);
      return t;
    }
    if (o_.fast_path && disjoint_commute(s1, s2, b, o_.solver)) {
      t.rule = "FAST_PATH";
      t.result = "Legal";
      return t;
    }
    bool forced = depth < o_.force_simplify;
    bool simple1 = simple(s1, s2, b, live, true);
    bool simple2 = simple(s2, s1, b, live, false);
    if (!forced && simple1 && simple2) return compare(t, s1, s2, b, live);
    bool swap;
    if (forced) {
      swap = rank_for_force(s2) > rank_for_force(s1);
      if (!swap && rank_for_force(s1) == 0) {
        if (simple1 && simple2) return compare(t, s1, s2, b, live);
        t.rule = "COMPARE";
        t.result = "Unknown";
        t.note = "nothing left to destructure";
        return t;
      }
    } else {
      swap = simple1 && !simple2;
    }
    if (swap) {
      t.rule = "SWAP";
      t.children.push_back(run(s2, n2, s1, n1, b, live, depth));
      t.result = t.children.back().result == "Legal" ? "Legal" : "Unknown";
      return t;
    }
    return destructure(t, s1, n1, s2, n2, b, live, depth);
  }

 private:
  Stmt unwrap(Stmt s, std::string& name) {
    while (s.kind() == Stmt::Kind::kSeq && s.parts().size() == 1) {
      Stmt inner = s.parts()[0];
      if (!inner.label().empty()) name = inner.label() + args_of(name);
      s = inner;
    }
    return s;
  }

  Formula context_for(const Stmt& a, const Stmt& c, const Bindings& b) {
    std::vector<Access> all = collect_accesses(a);
    auto more = collect_accesses(c);
    all.insert(all.end(), more.begin(), more.end());
    return analysis_context(b, access_terms(all, b.ground));
  }

  bool simple(const Stmt& s, const Stmt& other, const Bindings& b,
              const std::set<std::string>& live, bool) {
    Stmt ps = privatize(s, p_, live);
    return is_simple(ps, context_for(s, other, b), o_.solver).simple;
  }

  TraceStep compare(TraceStep t, const Stmt& s1, const Stmt& s2, const Bindings& b,
                    const std::set<std::string>& live) {
    t.rule = "COMPARE";
    CompareReport rep;
    try {
      rep = compare_programs(Stmt::seq({s1, s2}), Stmt::seq({s2, s1}), p_, b, live, o_.solver);
    } catch (const BudgetExceeded& e) {
      rep.equal = false;
      rep.reason = std::string("solver budget: ") + e.what();
    }
    t.result = rep.equal ? "Legal" : "Unknown";
    if (!rep.reason.empty()) {
      t.note = rep.reason;
    } else {
      std::string n;
      for (const auto& ac : rep.arrays) {
        if (!n.empty()) n += ", ";
        n += ac.array + ": " + std::to_string(ac.left.cases.size()) + "/" +
             std::to_string(ac.right.cases.size()) + " cases, " +
             std::to_string(ac.result.matched) + "/" + std::to_string(ac.result.non_empty) +
             " matched";
      }
      t.note = n;
    }
    t.compare = std::move(rep);
    return t;
  }

  void finish(TraceStep& t) {
    bool ok = !t.children.empty();
    for (const auto& c : t.children) ok = ok && c.result == "Legal";
    t.result = ok ? "Legal" : "Unknown";
  }

  TraceStep destructure(TraceStep t, const Stmt& s1, const std::string& n1, const Stmt& s2,
                        const std::string& n2, const Bindings& b, const std::set<std::string>& live,
                        int depth) {
    switch (s1.kind()) {
      case Stmt::Kind::kSeq: {
        t.rule = "SEQ";
        const auto& parts = s1.parts();
        for (size_t i = 0; i < parts.size(); ++i) {
          std::set<std::string> l = live;
          for (size_t j = i + 1; j < parts.size(); ++j) {
            auto r = read_vars(parts[j]);
            l.insert(r.begin(), r.end());
          }
          t.children.push_back(run(parts[i], part_name(n1, parts[i], i), s2, n2, b, l, depth + 1));
          if (t.children.back().result != "Legal") break;
        }
        if (parts.empty()) {
          t.result = "Legal";
          return t;
        }
        finish(t);
        return t;
      }
      case Stmt::Kind::kFor: {
        t.rule = "LOOP";
        if (auto a = control_conflict(s1, s2, b, o_.solver)) {
          t.result = "Unknown";
          t.note = "loop bounds read '" + *a + "' which the other side alters";
          return t;
        }
        std::set<std::string> taken = stmt_symbols(s2);
        b.ground.collect_free_symbols(taken);
        for (const auto& x : p_.params) taken.insert(x);
        for (const auto& x : stmt_symbols(s1)) {
          if (x != s1.var()) taken.insert(x);
        }
        auto inner_loops = loop_vars(s1.body());
        taken.insert(inner_loops.begin(), inner_loops.end());
        std::string v = fresh_name(s1.var(), taken);
        Stmt body = instantiate(s1.body(), {{s1.var(), AffineExpr::var(v)}});
        Formula range;
        loop_range(s1, v, &range);
        std::set<std::string> l = live;
        for (const auto& r : read_vars(body)) {
          const ArrayDecl* d = p_.find_decl(r);
          if (d && d->rank() == 0 && !exposed_read(body, r)) continue;
          l.insert(r);
        }
        t.children.push_back(run(body, with_arg(n1, v), s2, n2, b.with(range), l, depth + 1));
        finish(t);
        return t;
      }
      case Stmt::Kind::kIf: {
        t.rule = "IF";
        if (auto a = control_conflict(s1, s2, b, o_.solver)) {
          t.result = "Unknown";
          t.note = "predicate reads '" + *a + "' which the other side alters";
          return t;
        }
        bool affine = s1.cond().is_affine();
        Formula f = affine ? s1.cond().to_formula() : Formula::truth();
        t.children.push_back(
            run(s1.then_branch(), n1 + "[then]", s2, n2, affine ? b.with(f) : b, live, depth + 1));
        if (s1.has_else() && t.children.back().result == "Legal") {
          t.children.push_back(run(s1.else_branch(), n1 + "[else]", s2, n2, affine ? b.with(!f) : b,
                                   live, depth + 1));
        }
        finish(t);
        return t;
      }
      case Stmt::Kind::kAssign:
        break;
    }
    t.rule = "COMPARE";
    t.result = "Unknown";
    t.note = "not simple and nothing left to destructure";
    return t;
  }

  const Program& p_;
  const CommuteOptions& o_;
  int max_ = 3;
};

}  // namespace

Verdict commute(const Stmt& s1, const Stmt& s2, const Program& program, const Bindings& bindings,
                const std::set<std::string>& live, const CommuteOptions& opts,
                const std::string& name1, const std::string& name2) {
  Commuter c(program, opts);
  Verdict v;
  v.trace = c.run(s1, name1, s2, name2, bindings, live, 1);
  v.outcome = v.trace.result == "Legal" ? Outcome::kLegal : Outcome::kUnknown;
  v.max_depth_reached = c.max_reached;
  return v;
}

Verdict check_obligation(const Obligation& ob, const Program& program, const CommuteOptions& opts) {
  return commute(ob.left, ob.right, program, ob.bindings, ob.live, opts, ob.left_name,
                 ob.right_name);
}

CheckResult check_transformation(const Program& p, const TransformSpec& t, const Bindings& extra,
                                 const CommuteOptions& opts) {
  CheckResult res;
  res.obligations = obligations_for(p, t);
  for (auto& ob : res.obligations) {
    ob.bindings.ground = ob.bindings.ground && extra.ground;
    ob.bindings.facts.insert(ob.bindings.facts.end(), extra.facts.begin(), extra.facts.end());
    res.verdicts.push_back(check_obligation(ob, p, opts));
    if (!res.verdicts.back().legal()) res.outcome = Outcome::kUnknown;
  }
  return res;
}

}  // namespace fsa
