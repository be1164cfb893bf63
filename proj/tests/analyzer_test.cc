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

#include <gtest/gtest.h>

#include <random>

#include "fsa/interp.hpp"
#include "fsa/transforms.hpp"
#include "test_util.hpp"

namespace fsa {
namespace {

using testing::load;

Stmt labeled(const Program& p, const std::string& label) {
  auto s = find_label(p.body, label);
  if (!s) throw Error("no statement " + label);
  return *s;
}

bool in_region(const std::vector<Region>& regions, const std::vector<Int>& cell,
               const std::map<std::string, Int>& env) {
  Valuation v;
  v.symbol = [&](const std::string& n) -> Int {
    if (n == "x1") return cell[0];
    if (n == "x2") return cell[1];
    return env.at(n);
  };
  v.app = [](const std::string&, const std::vector<Int>&) -> Int { return 0; };
  for (const auto& r : regions) {
    if (evaluate(r.membership({"x1", "x2"}), v)) return true;
  }
  return false;
}

TEST(Footprint, ColumnScaling) {
  Program p = load("lu.fsa");
  Stmt s = labeled(p, "B1.d");
  Footprint f = footprint(s, p.bindings());
  std::map<std::string, Int> env{{"N", 5}, {"j", 2}};
  for (int x1 = 1; x1 <= 5; ++x1) {
    for (int x2 = 1; x2 <= 5; ++x2) {
      bool written = x2 == 2 && x1 >= 3;
      EXPECT_EQ(in_region(f.writes, {x1, x2}, env), written) << x1 << "," << x2;
      bool read = written || (x1 == 2 && x2 == 2);
      EXPECT_EQ(in_region(f.reads, {x1, x2}, env), read) << x1 << "," << x2;
    }
  }
}

TEST(Footprint, EmptyLoopTouchesNothing) {
  Program p = load("lu.fsa");
  Footprint f = footprint(labeled(p, "B1.d"), p.bindings());
  std::map<std::string, Int> env{{"N", 4}, {"j", 4}};
  for (int x1 = 1; x1 <= 4; ++x1) {
    for (int x2 = 1; x2 <= 4; ++x2) {
      EXPECT_FALSE(in_region(f.writes, {x1, x2}, env));
    }
  }
}

Obligation only_obligation(const Program& p, const std::string& spec) {
  auto obs = obligations_for(p, TransformSpec::parse(spec));
  if (obs.size() != 1) throw Error("expected one obligation");
  return obs.front();
}

TEST(DisjointCommute, BlockedLuParts) {
  Program p = load("lu_blocked.fsa");
  Obligation ob = only_obligation(p, "distribute(j;B1|B2)");
  Stmt b1 = *find_label(ob.left, "B1.d");
  Stmt b1c = *find_label(ob.left, "B1.c");
  EXPECT_TRUE(disjoint_commute(b1, ob.right, ob.bindings));
  EXPECT_FALSE(disjoint_commute(b1c, ob.right, ob.bindings));
}

TEST(DisjointCommute, DifferentArrays) {
  Program p = parse_program(R"(
program t(N) {
  array A[1..N]: real inout;
  array B[1..N]: real inout;
  outputs {A, B};
  S1: for i = 1 to N { A(i) = A(i) * 2; }
  S2: for i = 1 to N { B(i) = B(i) + 1; }
})");
  EXPECT_TRUE(disjoint_commute(labeled(p, "S1"), labeled(p, "S2"), p.bindings()));
}

TEST(DisjointCommute, ReadReadIsNotAConflict) {
  Program p = parse_program(R"(
program t(N) {
  assume N >= 2;
  array A[1..N]: real inout;
  array B[1..N]: real inout;
  array C[1..N]: real inout;
  outputs {B, C};
  S1: B(1) = A(1);
  S2: C(1) = A(1);
})");
  EXPECT_TRUE(disjoint_commute(labeled(p, "S1"), labeled(p, "S2"), p.bindings()));
}

// Random pairs of small affine statements over one array.
std::string random_stmt(std::mt19937_64& rng, const std::string& label) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  if (pick(0, 1) == 0) {
    return label + ": A(" + std::to_string(pick(1, 6)) + ") = A(" + std::to_string(pick(1, 6)) +
           ") * 2 + 1;\n";
  }
  int lo = pick(1, 3);
  int hi = lo + pick(0, 2);
  return label + ": for i = " + std::to_string(lo) + " to " + std::to_string(hi) + " { A(i + " +
         std::to_string(pick(0, 2)) + ") = A(i + " + std::to_string(pick(0, 3)) + ") + " +
         std::to_string(pick(1, 5)) + "; }\n";
}

Program pair_program(const std::string& first, const std::string& second) {
  return parse_program(
      "program t(N) {\n  assume N >= 8;\n  array A[1..N]: real inout;\n"
      "  outputs {A};\n" +
      first + second + "}\n");
}

TEST(DisjointCommute, SoundAgainstInterpreter) {
  std::mt19937_64 rng(11);
  int claimed = 0;
  for (int trial = 0; trial < 150; ++trial) {
    std::string a = random_stmt(rng, "S1");
    std::string b = random_stmt(rng, "S2");
    Program p = pair_program(a, b);
    if (!disjoint_commute(labeled(p, "S1"), labeled(p, "S2"), p.bindings())) continue;
    ++claimed;
    Program q = pair_program(b, a);
    InstanceSpec spec;
    spec.ranges["N"] = {8, 9};
    FuzzResult r = equiv_fuzz(p, q, spec, 10, trial);
    ASSERT_TRUE(r.equivalent) << a << b;
  }
  EXPECT_GT(claimed, 20);
}

TEST(Commute, FullAnalysisSoundAgainstInterpreter) {
  std::mt19937_64 rng(5);
  int legal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::string a = random_stmt(rng, "S1");
    std::string b = random_stmt(rng, "S2");
    Program p = pair_program(a, b);
    CommuteOptions opts;
    opts.fast_path = false;
    Verdict v = commute(labeled(p, "S1"), labeled(p, "S2"), p, p.bindings(), {"A"}, opts);
    Program q = pair_program(b, a);
    InstanceSpec spec;
    spec.ranges["N"] = {8, 9};
    FuzzResult r = equiv_fuzz(p, q, spec, 10, trial);
    if (v.legal()) {
      ++legal;
      ASSERT_TRUE(r.equivalent) << a << b << v.trace_text();
    }
  }
  EXPECT_GT(legal, 20);
}

TEST(Commute, PivotSwapDistribution) {
  Program p = load("pivot_swap.fsa");
  CheckResult r = check_transformation(p, TransformSpec::parse("distribute(j;S1|S2)"));
  ASSERT_EQ(r.verdicts.size(), 1u);
  EXPECT_TRUE(r.legal()) << r.verdicts[0].trace_text();
  const TraceStep* c = r.verdicts[0].first_compare();
  ASSERT_NE(c, nullptr);
  EXPECT_TRUE(c->compare->equal);
}

TEST(Commute, UnconstrainedPivotIsUnknown) {
  Program p = load("pivot_swap_unconstrained.fsa");
  CheckResult r = check_transformation(p, TransformSpec::parse("distribute(j;S1|S2)"));
  EXPECT_FALSE(r.legal());
  const TraceStep* f = r.verdicts[0].first_failure();
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->result, "Unknown");
}

TEST(Commute, ForcedDestructuringLosesThePivotFact) {
  Program p = load("pivot_swap.fsa");
  CommuteOptions opts;
  opts.fast_path = false;
  opts.force_simplify = 2;
  CheckResult r = check_transformation(p, TransformSpec::parse("distribute(j;S1|S2)"), {}, opts);
  EXPECT_FALSE(r.legal());
  const TraceStep& root = r.verdicts[0].trace;
  EXPECT_EQ(root.rule, "SWAP");
  const TraceStep* f = r.verdicts[0].first_failure();
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->rule, "COMPARE");
  EXPECT_EQ(f->depth, 2);
  ASSERT_TRUE(f->compare.has_value());
  ASSERT_TRUE(f->compare->witness.has_value());
  EXPECT_NE(f->compare->witness->str().find("i = l"), std::string::npos);
}

TEST(Commute, BudgetStopsDestructuring) {
  Program p = load("lu_blocked.fsa");
  CommuteOptions opts;
  opts.max_depth = 1;
  CheckResult r = check_transformation(p, TransformSpec::parse("distribute(j;B1|B2)"), {}, opts);
  EXPECT_FALSE(r.legal());
  EXPECT_EQ(r.verdicts[0].max_depth_reached, 2);
  const TraceStep* f = r.verdicts[0].first_failure();
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->rule, "BUDGET");
}

TEST(Commute, BlockedLuDistribution) {
  Program p = load("lu_blocked.fsa");
  CheckResult r = check_transformation(p, TransformSpec::parse("distribute(j;B1|B2)"));
  ASSERT_EQ(r.verdicts.size(), 1u);
  EXPECT_TRUE(r.legal()) << r.verdicts[0].trace_text();
  EXPECT_EQ(r.verdicts[0].max_depth_reached, 2);
}

TEST(Commute, PointLuDistributionIsNotProven) {
  Program p = load("lu.fsa");
  CheckResult r = check_transformation(p, TransformSpec::parse("distribute(j;B1|U)"));
  EXPECT_FALSE(r.legal());
}

struct Case {
  const char* file;
  const char* spec;
};

const Case kCorpus[] = {
    {"pivot_swap.fsa", "distribute(j;S1|S2)"},
    {"pivot_swap_unconstrained.fsa", "distribute(j;S1|S2)"},
    {"lu_blocked.fsa", "distribute(j;B1|B2)"},
    {"reorder_a.fsa", "reorder(S1,S2)"},
    {"reorder_a.fsa", "reorder(S1,S3)"},
};

TEST(Commute, SymmetricOnCorpus) {
  for (const auto& c : kCorpus) {
    Program p = load(c.file);
    for (const auto& ob : obligations_for(p, TransformSpec::parse(c.spec))) {
      Verdict ab = commute(ob.left, ob.right, p, ob.bindings, ob.live);
      Verdict ba = commute(ob.right, ob.left, p, ob.bindings, ob.live);
      EXPECT_EQ(ab.outcome, ba.outcome) << c.file << " " << c.spec;
    }
  }
}

TEST(Commute, MonotoneInDepth) {
  for (const auto& c : kCorpus) {
    Program p = load(c.file);
    TransformSpec t = TransformSpec::parse(c.spec);
    bool was_legal = false;
    for (int d = 1; d <= 4; ++d) {
      CommuteOptions opts;
      opts.max_depth = d;
      bool legal = check_transformation(p, t, {}, opts).legal();
      EXPECT_TRUE(legal || !was_legal) << c.file << " depth " << d;
      was_legal = legal;
    }
  }
}

TEST(Commute, FastPathOnlySavesDepth) {
  for (const auto& c : kCorpus) {
    Program p = load(c.file);
    TransformSpec t = TransformSpec::parse(c.spec);
    CommuteOptions slow;
    slow.fast_path = false;
    slow.max_depth = 6;
    EXPECT_EQ(check_transformation(p, t).outcome, check_transformation(p, t, {}, slow).outcome)
        << c.file << " " << c.spec;
  }
}

TEST(Commute, ReorderedScalars) {
  Program p = load("reorder_a.fsa");
  EXPECT_TRUE(check_transformation(p, TransformSpec::parse("reorder(S1,S2)")).legal());
  EXPECT_FALSE(check_transformation(p, TransformSpec::parse("reorder(S1,S3)")).legal());
}

TEST(Commute, ExtraAssumptionIsUsed) {
  Program p = load("pivot_swap_unconstrained.fsa");
  Bindings extra;
  std::vector<Formula> ground;
  parse_assumption("forall j in [1, N]: j <= p(j) <= N", p, ground, extra.facts);
  extra.ground = Formula::conj(ground);
  CheckResult r = check_transformation(p, TransformSpec::parse("distribute(j;S1|S2)"), extra);
  EXPECT_TRUE(r.legal());
}

TEST(Verdict, TraceTextListsRules) {
  Program p = load("lu_blocked.fsa");
  CheckResult r = check_transformation(p, TransformSpec::parse("distribute(j;B1|B2)"));
  std::string text = r.verdicts[0].trace_text();
  EXPECT_NE(text.find("[depth 1] SEQ(B1(l), B2(m)) -> descend"), std::string::npos) << text;
  EXPECT_NE(text.find("COMPARE(B1.c(l), B2(m)) -> Legal"), std::string::npos) << text;
}

}  // namespace
}  // namespace fsa
