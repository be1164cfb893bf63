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

#include <gtest/gtest.h>

#include <set>

#include "fsa/gse.hpp"
#include "fsa/transforms.hpp"
#include "test_util.hpp"

namespace fsa {
namespace {

using testing::load;

Store fig2_store(Int n, const std::vector<int>& p, const std::vector<Rational>& a) {
  Store s;
  s.params["N"] = n;
  for (size_t i = 0; i < p.size(); ++i) s.set("p", {Int(i + 1)}, Rational(p[i]));
  for (size_t i = 0; i < a.size(); ++i) s.set("A", {Int(i + 1)}, a[i]);
  s.set("tmp", {}, 0);
  return s;
}

TEST(Evaluate, ScalarSequence) {
  Program p = load("reorder_a.fsa");
  Store in;
  in.set("a", {}, Rational(3, 2));
  in.set("b", {}, Rational(-5));
  Store out = evaluate(p, in);
  EXPECT_EQ(out.get("a", {}), 2 * (Rational(3, 2) + Rational(-5)));
  EXPECT_EQ(out.get("b", {}), 2 * Rational(-5));
}

TEST(Evaluate, SingleRowSelfSwapIsIdentity) {
  Program p = load("pivot_swap.fsa");
  Store in = fig2_store(1, {1}, {Rational(7, 3)});
  Store out = evaluate(p, in);
  EXPECT_EQ(out.get("A", {1}), Rational(7, 3));
}

TEST(Evaluate, HandComputedPivotSwap) {
  // N=3, p=(2,3,3), A=(1,2,4): swap 1<->2 gives (2,1,4), divide tail by 2
  // gives (2,1/2,2); swap 2<->3 gives (2,2,1/2), divide A(3) by A(2) gives
  // (2,2,1/4); last iteration swaps 3 with itself.
  Program p = load("pivot_swap.fsa");
  Store out = evaluate(p, fig2_store(3, {2, 3, 3}, {1, 2, 4}));
  EXPECT_EQ(out.get("A", {1}), Rational(2));
  EXPECT_EQ(out.get("A", {2}), Rational(2));
  EXPECT_EQ(out.get("A", {3}), Rational(1, 4));
}

TEST(Evaluate, DistributedPivotSwapAgreesOnExample) {
  Program a = load("pivot_swap.fsa");
  Program b = load("pivot_swap_distributed.fsa");
  Store in = fig2_store(3, {2, 3, 3}, {Rational(3, 4), Rational(-2), Rational(5, 3)});
  EXPECT_EQ(evaluate(a, in).cells.at("A"), evaluate(b, in).cells.at("A"));
}

TEST(Evaluate, DivisionByZeroNamesTheStatement) {
  Program p = load("pivot_swap.fsa");
  try {
    evaluate(p, fig2_store(2, {1, 2}, {0, 1}));
    FAIL() << "expected an error";
  } catch (const EvalError& e) {
    EXPECT_EQ(e.label(), "S2");
    EXPECT_NE(std::string(e.what()).find("division by zero"), std::string::npos);
  }
}

TEST(Evaluate, OutOfBoundsIsAnError) {
  Program p = load("pivot_swap.fsa");
  EXPECT_THROW(evaluate(p, fig2_store(2, {5, 2}, {1, 1})), EvalError);
}

TEST(Evaluate, AbsAndNegativeStep) {
  Program p = parse_program(R"(
program t(N) {
  array A[1..N]: real inout;
  scalar s;
  outputs {A, s};
  s = 0;
  for i = N to 1 step -1 {
    s = s * 2 + abs(A(i));
  }
})");
  Store in;
  in.params["N"] = 3;
  in.set("A", {1}, -1);
  in.set("A", {2}, Rational(1, 2));
  in.set("A", {3}, -3);
  in.set("s", {}, 5);
  // s = ((0*2 + 3)*2 + 1/2)*2 + 1
  EXPECT_EQ(evaluate(p, in).get("s", {}), Rational(14));
}

TEST(Evaluate, IsDeterministic) {
  Program p = load("lu.fsa");
  Store in = gen_instance(p, InstanceSpec{{{"N", 5}}, {}, 8, {}, 1000}, 42);
  EXPECT_EQ(evaluate(p, in), evaluate(p, in));
}

TEST(GenInstance, PivotConstraintHolds) {
  Program p = load("pivot_swap.fsa");
  InstanceSpec spec;
  spec.params["N"] = 4;
  Store s = gen_instance(p, spec, 1);
  for (int j = 1; j <= 4; ++j) {
    Rational v = s.get("p", {j});
    EXPECT_GE(v, j);
    EXPECT_LE(v, 4);
  }
}

TEST(GenInstance, FalseConstraintExhaustsBudget) {
  Program p = load("pivot_swap.fsa");
  InstanceSpec spec;
  spec.extra.ground = Formula::falsity();
  spec.attempts = 20;
  EXPECT_THROW(gen_instance(p, spec, 1), Error);
}

TEST(GenInstance, ManySeedsSatisfyConstraints) {
  Program p = load("lu.fsa");
  InstanceSpec spec;
  spec.params["N"] = 5;
  std::set<std::string> distinct;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Store s = gen_instance(p, spec, seed);
    ASSERT_TRUE(satisfies(p, s));
    for (const auto& [idx, v] : s.cells.at("A")) ASSERT_NE(v, 0);
    distinct.insert(dump_store(s));
  }
  EXPECT_GT(distinct.size(), 90u);
}

TEST(GenInstance, SameSeedSameInstance) {
  Program p = load("pivot_swap.fsa");
  EXPECT_EQ(gen_instance(p, {}, 9), gen_instance(p, {}, 9));
}

TEST(Fuzz, DistributionWithPivotConstraint) {
  Program a = load("pivot_swap.fsa");
  Program b = load("pivot_swap_distributed.fsa");
  InstanceSpec spec;
  spec.ranges["N"] = {2, 8};
  FuzzResult r = equiv_fuzz(a, b, spec, 200, 3);
  EXPECT_TRUE(r.equivalent) << r.diagnosis;
  EXPECT_EQ(r.trials, 200);
}

TEST(Fuzz, UnconstrainedPivotFindsCounterexample) {
  Program a = load("pivot_swap_unconstrained.fsa");
  Program b = apply(a, TransformSpec::parse("distribute(j;S1|S2)"));
  InstanceSpec spec;
  spec.ranges["N"] = {2, 4};
  FuzzResult r = equiv_fuzz(a, b, spec, 200, 3);
  ASSERT_FALSE(r.equivalent);
  ASSERT_TRUE(r.counterexample.has_value());
  // Some row precedes its pivot.
  const Store& s = *r.counterexample;
  bool below = false;
  for (const auto& [idx, v] : s.cells.at("p")) below = below || v < Rational(idx[0]);
  EXPECT_TRUE(below);
}

TEST(Fuzz, ProgramAgainstItself) {
  Program a = load("lu.fsa");
  FuzzResult r = equiv_fuzz(a, a, {}, 30, 1);
  EXPECT_TRUE(r.equivalent);
}

TEST(Store, DumpLoadRoundTrip) {
  Program p = load("lu.fsa");
  Store s = gen_instance(p, {}, 5);
  EXPECT_EQ(load_store(dump_store(s), p), s);
}

TEST(Store, LoadRejectsUnknownNames) {
  Program p = load("pivot_swap.fsa");
  EXPECT_THROW(load_store("Q(1)=2\n", p), Error);
  EXPECT_THROW(load_store("A(1)=x\n", p), Error);
}

// The GSE of the whole program, evaluated at each cell, matches the
// interpreter on random instances.
void expect_gse_faithful(const std::string& file) {
  Program p = load(file);
  int checked = 0;
  for (const auto& array : p.outputs) {
    const ArrayDecl* d = p.find_decl(array);
    if (d->elem == ElemKind::kInt) continue;
    Gse g = program_gse(p, array, p.bindings());
    InstanceSpec spec;
    spec.max_param = 6;
    for (uint64_t seed = 0; seed < 100; ++seed) {
      Store in = gen_instance(p, spec, seed);
      Store out;
      try {
        out = evaluate(p, in);
      } catch (const EvalError&) {
        continue;
      }
      for (const auto& [idx, v] : out.cells.at(array)) {
        Valuation val;
        val.symbol = [&](const std::string& n) -> Int {
          for (size_t k = 0; k < g.index_vars.size(); ++k) {
            if (g.index_vars[k] == n) return idx[k];
          }
          return in.params.at(n);
        };
        val.app = [&](const std::string& fn, const std::vector<Int>& args) {
          return numerator(in.get(fn, args));
        };
        int hits = 0;
        for (const auto& c : g.cases) {
          if (!evaluate(c.guard, val)) continue;
          ++hits;
          SymValuation sv{
              [&](const std::string& a, const std::vector<Int>& i) { return in.get(a, i); }, val};
          ASSERT_EQ(evaluate(c.value, sv), v) << file << " seed " << seed;
        }
        ASSERT_EQ(hits, 1) << file << " seed " << seed;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(GseFaithful, Swap) { expect_gse_faithful("swap.fsa"); }
TEST(GseFaithful, SwapThenUpdate) { expect_gse_faithful("swap_then_update.fsa"); }
TEST(GseFaithful, UpdateThenSwap) { expect_gse_faithful("update_then_swap.fsa"); }
TEST(GseFaithful, Scalars) { expect_gse_faithful("reorder_a.fsa"); }

}  // namespace
}  // namespace fsa
