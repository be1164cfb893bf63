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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include "formula_gen.hpp"
#include "fsa/analyzer.hpp"
#include "fsa/gse.hpp"
#include "fsa/interp.hpp"
#include "fsa/solver.hpp"
#include "fsa/transforms.hpp"
#include "program_gen.hpp"
#include "test_util.hpp"

namespace fsa {
namespace {

using testing::load;

constexpr double kRunningExampleSeconds = 2.0;
constexpr double kBlockedLuSeconds = 10.0;
constexpr int kFuzzInstances = 200;
constexpr int kLemmaCases = 500;
constexpr int kSolverFormulas = 1000;
constexpr int kPipelineTrials = 100;

struct Report {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CheckResult timed_check(const Program& p, const std::string& spec, const CommuteOptions& opts,
                        double* seconds) {
  auto t0 = std::chrono::steady_clock::now();
  CheckResult r = check_transformation(p, TransformSpec::parse(spec), {}, opts);
  *seconds = seconds_since(t0);
  return r;
}

void running_example(Report& o) {
  double with_s = 0, without_s = 0;
  CheckResult with = timed_check(load("pivot_swap.fsa"), "distribute(j;S1|S2)", {}, &with_s);
  CheckResult without =
      timed_check(load("pivot_swap_unconstrained.fsa"), "distribute(j;S1|S2)", {}, &without_s);
  o.detail << "with pivot fact " << to_string(with.outcome) << " (" << with_s << " s), without "
           << to_string(without.outcome) << " (" << without_s << " s)";
  o.require(with.legal(), "Legal with the pivot fact");
  o.require(!without.legal(), "Unknown without the pivot fact");
  o.require(with_s < kRunningExampleSeconds && without_s < kRunningExampleSeconds,
            "runtime under 2 s");
}

// True when some mismatch covers the point l = i = k (with p(l) != l) and
// its two sides are A_in(p(l)) / A_in(m) and A_in(p(l)) there.
bool has_row_l_witness(const std::vector<Witness>& mismatches) {
  const std::map<std::string, Int> point = {{"N", 6}, {"m", 2}, {"l", 3}, {"i", 3}, {"k", 3}};
  Valuation v;
  v.symbol = [&](const std::string& s) { return point.at(s); };
  v.app = [](const std::string&, const std::vector<Int>& args) -> Int {
    return args[0] == 3 ? Int(5) : args[0];
  };
  SymValuation sv{[](const std::string&, const std::vector<Int>& idx) {
                    return Rational(Int(10) + idx[0] * idx[0]);
                  },
                  v};
  const Rational pl = 10 + 25, m = 10 + 4;
  for (const auto& w : mismatches) {
    if (!evaluate(w.guard, v)) continue;
    Rational a = evaluate(w.left, sv), b = evaluate(w.right, sv);
    if ((a == pl / m && b == pl) || (a == pl && b == pl / m)) return true;
  }
  return false;
}

void depth_failure(Report& o) {
  CommuteOptions opts;
  opts.force_simplify = 2;
  Program p = load("pivot_swap.fsa");
  CheckResult r = check_transformation(p, TransformSpec::parse("distribute(j;S1|S2)"), {}, opts);
  o.require(!r.legal(), "Unknown");
  const TraceStep* f = r.verdicts.empty() ? nullptr : r.verdicts[0].first_failure();
  o.require(f && f->rule == "COMPARE" && f->compare, "failing step is a Compare");
  if (!o.pass) return;
  std::string listing;
  std::vector<Witness> all;
  for (const auto& a : f->compare->arrays) {
    for (const auto& w : a.result.mismatches) {
      listing += w.str() + "\n";
      all.push_back(w);
    }
  }
  o.detail << to_string(r.outcome) << " at " << f->rule << "(" << f->left << ", " << f->right
           << "), " << all.size() << " mismatching regions";
  o.require(has_row_l_witness(all), "witness A_in(p(l))/A_in(m) vs A_in(p(l)) at i = l");
  std::string golden =
      testing::read_file(std::string(FSA_GOLDEN_DIR) + "/pivot_force2_witnesses.golden");
  o.require(listing == golden, "witness text matches golden");
}

// Each case of `g` is equivalent, under `ctx`, to exactly one display guard.
bool guards_match(const Gse& g, const std::vector<Formula>& display, const Formula& ctx) {
  if (g.cases.size() != display.size()) return false;
  std::vector<bool> used(display.size(), false);
  for (const auto& c : g.cases) {
    bool found = false;
    for (size_t d = 0; d < display.size() && !found; ++d) {
      if (used[d]) continue;
      if (implies(ctx && c.guard, display[d]) && implies(ctx && display[d], c.guard)) {
        used[d] = found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

void gse_shape(Report& o) {
  // Hand-written reference guards. Where k = l = p(l) the k = p(l) row takes
  // precedence; both rows give the same value there.
  Program upd = load("swap_then_update.fsa");
  Gse g1 = program_gse(upd, "A", upd.bindings());
  Program swp = load("swap.fsa");
  Gse g2 = program_gse(swp, "A", swp.bindings());
  auto with_k = [](const std::string& text, const Gse& g) {
    std::string out = text;
    const std::string& k = g.index_vars.at(0);
    for (size_t pos = 0; (pos = out.find('k', pos)) != std::string::npos; pos += k.size()) {
      out.replace(pos, 1, k);
    }
    return out;
  };
  auto ctx_for = [&](const Program& p, const Gse& g) {
    return p.bindings().ground &&
           parse_formula(with_k("1 <= k and k <= N and l <= p(l) and p(l) <= N", g), p);
  };
  std::vector<Formula> a1;
  for (const char* text :
       {"1 <= k and k <= m and m < N", "1 <= m and m < k and k = p(l)",
        "1 <= m and m < k and k = l and k != p(l)", "1 <= m and m < k and k != l and k != p(l)"}) {
    a1.push_back(parse_formula(with_k(text, g1), upd));
  }
  std::vector<Formula> aswap;
  for (const char* text : {"k != l and k != p(l)", "k = p(l)", "k = l and k != p(l)"}) {
    aswap.push_back(parse_formula(with_k(text, g2), swp));
  }
  o.detail << "swap then update " << g1.cases.size() << " cases, swap " << g2.cases.size()
           << " cases";
  o.require(g1.cases.size() == 4, "4 cases after swap and update");
  o.require(g2.cases.size() == 3, "3 cases after swap");
  o.require(guards_match(g1, a1, ctx_for(upd, g1)), "update guards equivalent to display");
  o.require(guards_match(g2, aswap, ctx_for(swp, g2)), "swap guards equivalent to display");
}

void scalar_reorder(Report& o) {
  Program a = load("reorder_a.fsa");
  Program b = load("reorder_b.fsa");
  CompareReport r = compare_programs(a.body, b.body, a, a.bindings(), {"a", "b"});
  DependenceReport d = dependence_legality(a, TransformSpec::parse("reorder(S1,S3)"));
  o.detail << "compare " << (r.equal ? "equal" : "not equal") << ", deps "
           << (d.legal ? "legal" : "illegal") << " (" << d.dependences.size()
           << " reordered dependences)";
  o.require(r.equal, "compare equal");
  o.require(!d.legal, "deps illegal");
}

void blocked_lu(Report& o) {
  double s = 0;
  CheckResult r = timed_check(load("lu_blocked.fsa"), "distribute(j;B1|B2)", {}, &s);
  o.detail << to_string(r.outcome) << " in " << s << " s";
  o.require(r.legal(), "Legal");
  o.require(s < kBlockedLuSeconds, "runtime under 10 s");
  const TraceStep* c = nullptr;
  std::function<void(const TraceStep&)> find = [&](const TraceStep& t) {
    if (t.compare && t.left.rfind("B1.c", 0) == 0) c = &t;
    for (const auto& ch : t.children) find(ch);
  };
  if (!r.verdicts.empty()) find(r.verdicts[0].trace);
  o.require(c != nullptr, "B1.c against B2 is compared");
  if (!c) return;
  const ArrayComparison* a = nullptr;
  for (const auto& x : c->compare->arrays) {
    if (x.array == "A") a = &x;
  }
  o.require(a != nullptr, "array A compared");
  if (!a) return;
  o.detail << "; B1.c vs B2: cases " << a->left.cases.size() << "/" << a->right.cases.size()
           << ", tested " << a->result.tested << ", non-empty " << a->result.non_empty
           << ", matched " << a->result.matched;
  o.require(a->left.cases.size() == 6 && a->right.cases.size() == 6, "6 cases per side");
  o.require(a->result.tested == 36, "36 pairs tested");
  o.require(a->result.non_empty == 6 && a->result.matched == 6, "6 non-empty, 6 matched");
}

void dependence_baseline(Report& o) {
  struct Case {
    const char* file;
    const char* spec;
  } cases[] = {{"pivot_swap.fsa", "distribute(j;S1|S2)"},
               {"lu_blocked.fsa", "distribute(j;B1|B2)"}};
  for (const auto& c : cases) {
    Program p = load(c.file);
    TransformSpec t = TransformSpec::parse(c.spec);
    DependenceReport d = dependence_legality(p, t);
    bool legal = check_transformation(p, t).legal();
    o.detail << c.file << ": deps " << (d.legal ? "legal" : "illegal") << ", check "
             << (legal ? "Legal" : "Unknown") << "; ";
    o.require(!d.legal, std::string(c.file) + " deps illegal");
    o.require(d.dependences.size() > 0, std::string(c.file) + " dependence reported");
    o.require(legal, std::string(c.file) + " check Legal");
  }
}

void soundness_fuzz(Report& o) {
  struct Case {
    const char* file;
    const char* spec;
  } cases[] = {
      {"pivot_swap.fsa", "distribute(j;S1|S2)"},
      {"pivot_swap.fsa", "stripmine(j,B)"},
      {"pivot_swap.fsa", "peel(j,last)"},
      {"pivot_swap.fsa", "reverse(j)"},
      {"pivot_swap_unconstrained.fsa", "distribute(j;S1|S2)"},
      {"pivot_swap_distributed.fsa", "fuse(j)"},
      {"lu.fsa", "stripmine(j,B)"},
      {"lu.fsa", "split(U,j+2)"},
      {"lu.fsa", "peel(U,first)"},
      {"lu.fsa", "reverse(U)"},
      {"lu.fsa", "distribute(j;B1|U)"},
      {"lu_blocked.fsa", "distribute(j;B1|B2)"},
      {"lu_blocked.fsa", "reverse(B2)"},
      {"reorder_a.fsa", "reorder(S1,S2)"},
      {"reorder_a.fsa", "reorder(S2,S3)"},
      {"reorder_a.fsa", "reorder(S1,S3)"},
  };
  int legal = 0, failures = 0;
  std::string unknown;
  for (const auto& c : cases) {
    Program p = load(c.file);
    TransformSpec t = TransformSpec::parse(c.spec);
    if (!check_transformation(p, t).legal()) {
      unknown += std::string(unknown.empty() ? "" : ", ") + c.file + " " + c.spec;
      continue;
    }
    ++legal;
    InstanceSpec spec;
    if (p.params.size() > 0) spec.ranges["N"] = {2, 8};
    FuzzResult f = equiv_fuzz(p, apply(p, t), spec, kFuzzInstances, 1);
    if (!f.equivalent || f.trials != kFuzzInstances) {
      ++failures;
      o.detail << c.file << " " << c.spec << ": " << f.diagnosis << "; ";
    }
  }
  o.detail << legal << " Legal corpus transformations, " << failures
           << " with counterexamples over " << kFuzzInstances
           << " instances each; Unknown: " << unknown;
  o.require(legal >= 8, "at least 8 Legal corpus cases");
  o.require(failures == 0, "no counterexamples");
}

void lemma_property(Report& o) {
  testing::StraightLineGen gen(2026);
  int commuting = 0, failures = 0;
  for (int c = 0; c < kLemmaCases; ++c) {
    auto r = testing::lemma_case(gen, testing::PairOracle::kInterpreter, 8, c);
    if (!r.all_commute) continue;
    ++commuting;
    if (!r.equivalent) ++failures;
  }
  o.detail << kLemmaCases << " cases, " << commuting << " with all reordered pairs commuting, "
           << failures << " failures";
  o.require(commuting > 50, "enough commuting cases");
  o.require(failures == 0, "permuted programs equivalent");
}

void solver_oracle(Report& o) {
  testing::FormulaGen gen(99);
  const std::vector<std::string> names = {"a", "b", "c", "d"};
  int sat_mismatch = 0, qe_mismatch = 0;
  for (int n = 0; n < kSolverFormulas; ++n) {
    std::vector<std::string> vars(names.begin(), names.begin() + gen.uniform(1, 4));
    Formula f = gen.formula(vars, vars.size() == 4 ? 2 : 3);
    Formula boxed = f;
    for (const auto& v : vars) boxed = boxed && testing::FormulaGen::box(v);
    bool expected =
        testing::any_assignment(vars, [&](auto& env) { return testing::brute_eval(f, env); });
    if (is_satisfiable(boxed) != expected) ++sat_mismatch;
    Formula q = eliminate_exists(f);
    bool differs = q.has_quantifier() || testing::any_assignment(vars, [&](auto& env) {
                     return testing::brute_eval(f, env) != testing::brute_eval(q, env);
                   });
    if (differs) ++qe_mismatch;
  }
  o.detail << kSolverFormulas << " formulas, " << sat_mismatch << " satisfiability and "
           << qe_mismatch << " elimination disagreements";
  o.require(sat_mismatch == 0 && qe_mismatch == 0, "agreement with enumeration");
}

void lu_pipeline(Report& o) {
  Program lu = load("lu.fsa");
  Program p = lu;
  for (const char* s :
       {"stripmine(j,B)", "split(U,jB+B)", "distribute(j;B1,U.1|U.2)", "tile(U.2,i;B,B)"}) {
    TransformSpec t = TransformSpec::parse(s);
    bool legal = check_transformation(p, t).legal();
    o.require(legal, std::string(s) + " Legal");
    p = apply(p, t);
    o.require(check_well_formed(p).empty(), std::string(s) + " well formed");
  }
  InstanceSpec spec;
  spec.params = {{"N", 8}, {"B", 3}};
  FuzzResult f = equiv_fuzz(lu, p, spec, kPipelineTrials, 1);
  o.detail << "4 steps Legal and well formed, fuzz at N=8 B=3: " << f.trials << " trials, "
           << (f.equivalent ? "equivalent" : "counterexample: " + f.diagnosis);
  o.require(f.equivalent && f.trials == kPipelineTrials, "equivalent to point LU");
}

}  // namespace
}  // namespace fsa

int main() {
  struct Criterion {
    const char* name;
    std::function<void(fsa::Report&)> run;
  };
  const Criterion criteria[] = {
      {"running example legality", fsa::running_example},
      {"forced depth failure witness", fsa::depth_failure},
      {"GSE case structure", fsa::gse_shape},
      {"scalar reordering", fsa::scalar_reorder},
      {"blocked LU distribution", fsa::blocked_lu},
      {"dependence baseline is conservative", fsa::dependence_baseline},
      {"soundness fuzzing over the corpus", fsa::soundness_fuzz},
      {"commuting inversions preserve meaning", fsa::lemma_property},
      {"solver agrees with enumeration", fsa::solver_oracle},
      {"blocked LU pipeline", fsa::lu_pipeline},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    fsa::Report o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    double s = fsa::seconds_since(t0);
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << index << ". " << c.name << " ("
              << std::fixed;
    std::cout.precision(2);
    std::cout << s << " s): ";
    std::cout.unsetf(std::ios::fixed);
    std::cout.precision(6);
    std::cout << o.detail.str() << std::endl;
  }
  std::cout << failed << " of " << index << " criteria failed" << std::endl;
  return failed == 0 ? 0 : 1;
}
