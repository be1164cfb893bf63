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

#include "fsa/interp.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <sstream>

namespace fsa {

const Rational& Store::get(const std::string& name, const std::vector<Int>& index) const {
  auto a = cells.find(name);
  if (a == cells.end()) throw EvalError("unknown variable '" + name + "'", "");
  auto c = a->second.find(index);
  if (c == a->second.end()) {
    std::string idx;
    for (size_t i = 0; i < index.size(); ++i) idx += (i ? "," : "") + index[i].str();
    throw EvalError("uninitialized cell " + name + "(" + idx + ")", "");
  }
  return c->second;
}

void Store::set(const std::string& name, const std::vector<Int>& index, Rational v) {
  cells[name][index] = std::move(v);
}

namespace {

std::string cell_str(const std::string& name, const std::vector<Int>& index) {
  if (index.empty()) return name;
  std::string out = name + "(";
  for (size_t i = 0; i < index.size(); ++i) out += (i ? "," : "") + index[i].str();
  return out + ")";
}

Valuation param_valuation(const Store& s) {
  Valuation v;
  v.symbol = [&s](const std::string& n) -> Int {
    auto it = s.params.find(n);
    if (it == s.params.end()) throw EvalError("unbound symbol '" + n + "'", "");
    return it->second;
  };
  return v;
}

class Interpreter {
 public:
  Interpreter(const Program& p, Store& s) : p_(p), s_(s) {
    for (const auto& d : p.decls) ext_[d.name] = extents(d, s);
  }

  void run(const Stmt& st) {
    std::string saved = label_;
    if (!st.label().empty()) label_ = st.label();
    switch (st.kind()) {
      case Stmt::Kind::kSeq:
        for (const auto& q : st.parts()) run(q);
        break;
      case Stmt::Kind::kFor: {
        std::optional<Int> lo, hi;
        for (const auto& e : st.lower()) {
          Int v = index(e);
          if (!lo || v > *lo) lo = v;
        }
        for (const auto& e : st.upper()) {
          Int v = index(e);
          if (!hi || v < *hi) hi = v;
        }
        Int step = st.step().is_symbolic() ? symbol(st.step().symbol) : st.step().literal;
        if (step == 0) throw EvalError("zero loop step", label_);
        if (st.step().is_symbolic() && step < 0) throw EvalError("negative symbolic step", label_);
        auto saved_var =
            env_.find(st.var()) == env_.end() ? std::nullopt : std::optional<Int>(env_[st.var()]);
        if (step > 0) {
          for (Int v = *lo; v <= *hi; v += step) {
            env_[st.var()] = v;
            run(st.body());
          }
        } else {
          for (Int v = *hi; v >= *lo; v += step) {
            env_[st.var()] = v;
            run(st.body());
          }
        }
        if (saved_var) {
          env_[st.var()] = *saved_var;
        } else {
          env_.erase(st.var());
        }
        break;
      }
      case Stmt::Kind::kIf:
        if (pred(st.cond())) {
          run(st.then_branch());
        } else if (st.has_else()) {
          run(st.else_branch());
        }
        break;
      case Stmt::Kind::kAssign: {
        Rational v = value(st.rhs());
        auto idx = indices(st.lhs());
        const ArrayDecl* d = p_.find_decl(st.lhs().name);
        if (d && d->elem == ElemKind::kInt && denominator(v) != 1) {
          throw EvalError("non-integer value stored in " + st.lhs().name, label_);
        }
        s_.set(st.lhs().name, idx, std::move(v));
        break;
      }
    }
    label_ = saved;
  }

 private:
  Int symbol(const std::string& n) {
    auto e = env_.find(n);
    if (e != env_.end()) return e->second;
    auto p = s_.params.find(n);
    if (p != s_.params.end()) return p->second;
    throw EvalError("unbound symbol '" + n + "'", label_);
  }

  Valuation valuation() {
    Valuation v;
    v.symbol = [this](const std::string& n) { return symbol(n); };
    v.app = [this](const std::string& fn, const std::vector<Int>& args) -> Int {
      if (fn == "*" && args.size() == 2) return args[0] * args[1];
      const Rational& r = read(fn, args);
      if (denominator(r) != 1) throw EvalError("non-integer index value in " + fn, label_);
      return numerator(r);
    };
    return v;
  }

  Int index(const AffineExpr& e) { return fsa::evaluate(e, valuation()); }

  std::vector<Int> indices(const Ref& r) {
    std::vector<Int> idx;
    for (const auto& e : r.indices) idx.push_back(index(e));
    check_bounds(r.name, idx);
    return idx;
  }

  void check_bounds(const std::string& name, const std::vector<Int>& idx) {
    auto it = ext_.find(name);
    if (it == ext_.end()) throw EvalError("undeclared variable '" + name + "'", label_);
    const auto& ex = it->second;
    if (ex.size() != idx.size()) throw EvalError("rank mismatch for " + name, label_);
    for (size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < ex[k].first || idx[k] > ex[k].second) {
        throw EvalError("index out of bounds: " + cell_str(name, idx), label_);
      }
    }
  }

  const Rational& read(const std::string& name, const std::vector<Int>& idx) {
    check_bounds(name, idx);
    try {
      return s_.get(name, idx);
    } catch (const EvalError& e) {
      throw EvalError(e.what(), label_);
    }
  }

  Rational value(const ValExpr& e) {
    switch (e.kind()) {
      case ValExpr::Kind::kConst:
        return e.value();
      case ValExpr::Kind::kRead:
        return read(e.ref().name, indices(e.ref()));
      case ValExpr::Kind::kIndex:
        return Rational(index(e.index_expr()));
      case ValExpr::Kind::kOp: {
        const auto& ops = e.operands();
        if (e.op() == 'n') return -value(ops[0]);
        Rational acc = value(ops[0]);
        for (size_t i = 1; i < ops.size(); ++i) {
          Rational r = value(ops[i]);
          switch (e.op()) {
            case '+':
              acc += r;
              break;
            case '-':
              acc -= r;
              break;
            case '*':
              acc *= r;
              break;
            case '/':
              if (r == 0) throw EvalError("division by zero", label_);
              acc /= r;
              break;
            default:
              throw EvalError(std::string("unknown operator ") + e.op(), label_);
          }
        }
        return acc;
      }
      case ValExpr::Kind::kApply: {
        if (e.fn() == "abs" && e.operands().size() == 1) {
          Rational v = value(e.operands()[0]);
          return v < 0 ? Rational(-v) : v;
        }
        throw EvalError("unknown function '" + e.fn() + "'", label_);
      }
    }
    return 0;
  }

  bool pred(const Pred& p) {
    switch (p.kind()) {
      case Pred::Kind::kAffine:
        return fsa::evaluate(p.formula(), valuation());
      case Pred::Kind::kValue: {
        Rational a = value(p.lhs()), b = value(p.rhs());
        switch (p.rel()) {
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
      case Pred::Kind::kAnd:
        for (const auto& c : p.children()) {
          if (!pred(c)) return false;
        }
        return true;
      case Pred::Kind::kOr:
        for (const auto& c : p.children()) {
          if (pred(c)) return true;
        }
        return false;
      case Pred::Kind::kNot:
        return !pred(p.children()[0]);
    }
    return false;
  }

  const Program& p_;
  Store& s_;
  std::map<std::string, std::vector<std::pair<Int, Int>>> ext_;
  std::map<std::string, Int> env_;
  std::string label_;
};

struct Unassigned {};

// Evaluates `fact` over all instantiations; instantiations reading cells
// not yet present are skipped when `partial` is set.
bool fact_holds(const UniversalFact& fact, const Store& s, bool partial) {
  std::map<std::string, Int> env;
  Valuation v;
  v.symbol = [&](const std::string& n) -> Int {
    auto e = env.find(n);
    if (e != env.end()) return e->second;
    auto p = s.params.find(n);
    if (p != s.params.end()) return p->second;
    throw EvalError("unbound symbol '" + n + "' in assumption", "");
  };
  v.app = [&](const std::string& fn, const std::vector<Int>& args) -> Int {
    if (fn == "*" && args.size() == 2) return args[0] * args[1];
    auto a = s.cells.find(fn);
    if (a == s.cells.end()) {
      if (partial) throw Unassigned{};
      throw EvalError("unknown array '" + fn + "' in assumption", "");
    }
    auto c = a->second.find(args);
    if (c == a->second.end()) {
      if (partial) throw Unassigned{};
      throw EvalError("assumption reads outside " + fn, "");
    }
    return numerator(c->second);
  };
  std::function<bool(size_t)> go = [&](size_t k) -> bool {
    if (k == fact.ranges.size()) {
      try {
        return fsa::evaluate(fact.conclusion, v);
      } catch (const Unassigned&) {
        return true;
      }
    }
    const auto& r = fact.ranges[k];
    Int lo, hi;
    try {
      lo = fsa::evaluate(r.lo, v);
      hi = fsa::evaluate(r.hi, v);
    } catch (const Unassigned&) {
      return true;
    }
    for (Int x = lo; x <= hi; ++x) {
      env[r.var] = x;
      if (!go(k + 1)) return false;
    }
    env.erase(r.var);
    return true;
  };
  return go(0);
}

bool ground_holds(const Formula& f, const Store& s) {
  Valuation v = param_valuation(s);
  v.app = [&s](const std::string& fn, const std::vector<Int>& args) -> Int {
    if (fn == "*" && args.size() == 2) return args[0] * args[1];
    return numerator(s.get(fn, args));
  };
  return fsa::evaluate(f, v);
}

void enumerate(const std::vector<std::pair<Int, Int>>& ex,
               const std::function<void(const std::vector<Int>&)>& fn) {
  std::vector<Int> idx(ex.size());
  std::function<void(size_t)> go = [&](size_t k) {
    if (k == ex.size()) {
      fn(idx);
      return;
    }
    for (Int x = ex[k].first; x <= ex[k].second; ++x) {
      idx[k] = x;
      go(k + 1);
    }
  };
  go(0);
}

}  // namespace

std::vector<std::pair<Int, Int>> extents(const ArrayDecl& decl, const Store& s) {
  Valuation v = param_valuation(s);
  std::vector<std::pair<Int, Int>> out;
  for (const auto& d : decl.dims) out.emplace_back(evaluate(d.lo, v), evaluate(d.hi, v));
  return out;
}

Store evaluate(const Program& p, const Store& in) {
  Store s = in;
  Interpreter it(p, s);
  it.run(p.body);
  return s;
}

bool satisfies(const Program& p, const Store& s, const Bindings& extra) {
  try {
    for (const auto& f : p.assumes) {
      if (!ground_holds(f, s)) return false;
    }
    if (!ground_holds(extra.ground, s)) return false;
    for (const auto* facts : {&p.facts, &extra.facts}) {
      for (const auto& f : *facts) {
        if (!fact_holds(f, s, false)) return false;
      }
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

Store gen_instance(const Program& p, const InstanceSpec& spec, uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](Int lo, Int hi) {
    std::uniform_int_distribution<int64_t> d(to_int64(lo), to_int64(hi));
    return Int(d(rng));
  };
  auto nonzero = [&]() {
    Int num = uniform(1, 9) * (uniform(0, 1) == 0 ? -1 : 1);
    Int den = uniform(1, 4);
    return Rational(num, den);
  };
  std::vector<UniversalFact> facts = p.facts;
  facts.insert(facts.end(), spec.extra.facts.begin(), spec.extra.facts.end());
  for (int attempt = 0; attempt < spec.attempts; ++attempt) {
    Store s;
    for (const auto& name : p.params) {
      auto fixed = spec.params.find(name);
      if (fixed != spec.params.end()) {
        s.params[name] = fixed->second;
        continue;
      }
      auto r = spec.ranges.find(name);
      s.params[name] = r != spec.ranges.end() ? uniform(r->second.first, r->second.second)
                                              : uniform(1, spec.max_param);
    }
    bool ok = true;
    Valuation pv = param_valuation(s);
    for (const auto& f : p.assumes) {
      std::vector<Atom> apps;
      f.collect_apps(apps);
      if (apps.empty() && !evaluate(f, pv)) ok = false;
    }
    if (!ok) continue;
    // Range for integer array values: the union of declared index ranges.
    std::optional<Int> vlo, vhi;
    for (const auto& d : p.decls) {
      for (const auto& [lo, hi] : extents(d, s)) {
        if (!vlo || lo < *vlo) vlo = lo;
        if (!vhi || hi > *vhi) vhi = hi;
      }
    }
    if (!vlo) vlo = Int(1), vhi = spec.max_param;
    for (const auto& d : p.decls) {
      auto ex = extents(d, s);
      bool empty_dim =
          std::any_of(ex.begin(), ex.end(), [](const auto& e) { return e.first > e.second; });
      s.cells[d.name];
      if (empty_dim) continue;
      enumerate(ex, [&](const std::vector<Int>& idx) {
        if (!ok) return;
        if (d.elem != ElemKind::kInt) {
          s.set(d.name, idx, nonzero());
          return;
        }
        for (int tries = 0; tries < 200; ++tries) {
          s.set(d.name, idx, Rational(uniform(*vlo, *vhi)));
          bool good = true;
          for (const auto& f : facts) good = good && fact_holds(f, s, true);
          if (good) return;
        }
        ok = false;
      });
      if (!ok) break;
    }
    if (ok && satisfies(p, s, spec.extra)) return s;
  }
  throw Error("instance sampling budget exhausted");
}

namespace {

Program merged_constraints(const Program& p1, const Program& p2) {
  Program m = p1;
  for (const auto& x : p2.params) {
    if (!m.is_param(x)) m.params.push_back(x);
  }
  std::set<std::string> seen;
  for (const auto& f : m.assumes) seen.insert(f.str());
  for (const auto& f : p2.assumes) {
    if (seen.insert(f.str()).second) m.assumes.push_back(f);
  }
  std::set<std::string> fseen;
  for (const auto& f : m.facts) fseen.insert(f.str());
  for (const auto& f : p2.facts) {
    if (fseen.insert(f.str()).second) m.facts.push_back(f);
  }
  return m;
}

}  // namespace

FuzzResult equiv_fuzz(const Program& p1, const Program& p2, const InstanceSpec& spec, int trials,
                      uint64_t seed) {
  FuzzResult res;
  Program gen = merged_constraints(p1, p2);
  std::vector<std::string> outputs = p1.outputs;
  uint64_t next = seed;
  int budget = trials * 20 + 100;
  while (res.trials < trials) {
    if (budget-- <= 0) throw Error("too many instances rejected by the first program");
    Store in = gen_instance(gen, spec, next++);
    Store o1;
    try {
      o1 = evaluate(p1, in);
    } catch (const EvalError&) {
      ++res.resampled;
      continue;
    }
    ++res.trials;
    Store o2;
    try {
      o2 = evaluate(p2, in);
    } catch (const EvalError& e) {
      res.equivalent = false;
      res.counterexample = in;
      res.diagnosis = std::string("second program failed: ") + e.what();
      return res;
    }
    for (const auto& name : outputs) {
      const auto& c1 = o1.cells[name];
      const auto& c2 = o2.cells[name];
      for (const auto& [idx, v] : c1) {
        auto it = c2.find(idx);
        if (it == c2.end() || it->second != v) {
          res.equivalent = false;
          res.counterexample = in;
          res.diagnosis = cell_str(name, idx) + ": " + to_string(v) + " vs " +
                          (it == c2.end() ? std::string("missing") : to_string(it->second));
          return res;
        }
      }
    }
  }
  return res;
}

std::string dump_store(const Store& s) {
  std::ostringstream out;
  for (const auto& [n, v] : s.params) out << n << "=" << v << "\n";
  for (const auto& [n, cells] : s.cells) {
    for (const auto& [idx, v] : cells) out << cell_str(n, idx) << "=" << to_string(v) << "\n";
  }
  return out.str();
}

Store load_store(const std::string& text, const Program& p) {
  Store s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  for (const auto& d : p.decls) s.cells[d.name];
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("line " + std::to_string(lineno) + ": expected name=value");
    }
    std::string lhs = line.substr(0, eq), rhs = line.substr(eq + 1);
    std::string name = lhs;
    std::vector<Int> idx;
    auto open = lhs.find('(');
    if (open != std::string::npos) {
      if (lhs.back() != ')') throw Error("line " + std::to_string(lineno) + ": bad index");
      name = lhs.substr(0, open);
      std::string inside = lhs.substr(open + 1, lhs.size() - open - 2);
      std::stringstream parts(inside);
      std::string x;
      while (std::getline(parts, x, ',')) idx.push_back(Int(x));
    }
    Rational v;
    try {
      v = parse_rational(rhs);
    } catch (const std::exception&) {
      throw Error("line " + std::to_string(lineno) + ": bad value '" + rhs + "'");
    }
    if (p.is_param(name)) {
      if (denominator(v) != 1) throw Error("parameter " + name + " must be an integer");
      s.params[name] = numerator(v);
    } else if (p.find_decl(name)) {
      s.set(name, idx, v);
    } else {
      throw Error("line " + std::to_string(lineno) + ": unknown name '" + name + "'");
    }
  }
  return s;
}

}  // namespace fsa
