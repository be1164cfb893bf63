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

#include <gtest/gtest.h>

#include "formula_gen.hpp"

namespace fsa {
namespace {

using testing::any_assignment;
using testing::brute_eval;
using testing::FormulaGen;

AffineExpr V(const std::string& s) { return AffineExpr::var(s); }
AffineExpr C(int c) { return AffineExpr::constant(c); }
Formula Le(AffineExpr a, AffineExpr b) { return Formula::cmp(a, Rel::kLe, b); }
Formula Lt(AffineExpr a, AffineExpr b) { return Formula::cmp(a, Rel::kLt, b); }
Formula Eq(AffineExpr a, AffineExpr b) { return Formula::cmp(a, Rel::kEq, b); }
AffineExpr P(const std::string& arg) { return AffineExpr::of(Atom::app("p", {V(arg)})); }

TEST(EliminateExists, UnitEqualitySubstitutes) {
  Formula f =
      Formula::exists("j", Le(V("m") + 1, V("j")) && Le(V("j"), V("N")) && Eq(V("k"), V("j")));
  Formula g = eliminate_exists(f);
  EXPECT_EQ(g.str(), "m + 1 <= k and k <= N");
}

TEST(EliminateExists, NonUnitEqualityLeavesDivisibility) {
  Formula f = Formula::exists("x", Eq(V("x") * 2, V("k")));
  Formula g = eliminate_exists(f);
  EXPECT_EQ(g.str(), "k mod 2 = 0");
}

TEST(EliminateExists, GroundIntervalWithIntegerPoint) {
  Formula f = Formula::exists("j", Le(C(2), V("j") * 3) && Le(V("j") * 3, C(7)));
  EXPECT_TRUE(eliminate_exists(f).is_true());
  Formula empty = Formula::exists("j", Le(C(4), V("j") * 3) && Le(V("j") * 3, C(5)));
  EXPECT_TRUE(eliminate_exists(empty).is_false());
}

TEST(EliminateExists, OpaqueTermOverBoundVariableIsRejected) {
  Formula f = Formula::exists("j", Eq(V("k"), P("j")));
  EXPECT_THROW(eliminate_exists(f), BudgetExceeded);
}

TEST(IsSatisfiable, DisjointSwapGuards) {
  // 1 <= m < k = l <= N  against  1 <= k <= m < N
  Formula g1 = Le(C(1), V("m")) && Lt(V("m"), V("k")) && Eq(V("k"), V("l")) && Le(V("l"), V("N"));
  Formula g2 = Le(C(1), V("k")) && Le(V("k"), V("m")) && Lt(V("m"), V("N"));
  EXPECT_FALSE(is_satisfiable(g1 && g2));
}

TEST(IsSatisfiable, PivotMayEqualRow) {
  Formula binding =
      Le(V("l"), P("l")) && Le(P("l"), V("N")) && Le(C(1), V("l")) && Le(V("l"), V("N"));
  EXPECT_TRUE(is_satisfiable(Eq(V("k"), V("l")) && Eq(V("k"), P("l")), binding));
  EXPECT_TRUE(is_satisfiable(Formula::truth()));
  EXPECT_FALSE(is_satisfiable(Lt(P("l"), V("l")), binding));
}

TEST(IsSatisfiable, DistinctOpaqueTermsAreUnrelated) {
  EXPECT_TRUE(is_satisfiable(Lt(P("l"), P("m"))));
  EXPECT_FALSE(is_satisfiable(Lt(P("l"), P("l"))));
}

TEST(IsSatisfiable, DarkShadowNeedsSplinters) {
  // 27 <= 11x + 13y <= 45, -10 <= 7x - 9y <= 4 has no integer point
  // although its real relaxation is non-empty.
  AffineExpr a = V("x") * 11 + V("y") * 13;
  AffineExpr b = V("x") * 7 - V("y") * 9;
  Formula f = Le(C(27), a) && Le(a, C(45)) && Le(C(-10), b) && Le(b, C(4));
  EXPECT_FALSE(is_satisfiable(f));
}

TEST(Implies, Basics) {
  EXPECT_TRUE(implies(Eq(V("k"), V("l")), Le(V("k"), V("l"))));
  Formula range = Le(C(1), V("k")) && Le(V("k"), V("N")) && Le(C(2), V("N"));
  EXPECT_FALSE(implies(range, Eq(V("k"), C(1))));
}

TEST(Implies, SwapGuardsCoverIndexSpace) {
  Formula bind = Le(C(1), V("m")) && Lt(V("m"), V("l")) && Le(V("l"), P("l")) && Le(P("l"), V("N"));
  Formula dom = Le(C(1), V("k")) && Le(V("k"), V("N"));
  Formula cover = Formula::disj({
      Le(C(1), V("k")) && Le(V("k"), V("m")),
      Lt(V("m"), V("k")) && Eq(V("k"), V("l")),
      Lt(V("m"), V("k")) && Eq(V("k"), P("l")) && Formula::cmp(V("k"), Rel::kNe, V("l")),
      Lt(V("m"), V("k")) && Formula::cmp(V("k"), Rel::kNe, V("l")) &&
          Formula::cmp(V("k"), Rel::kNe, P("l")),
  });
  EXPECT_TRUE(implies(bind && dom, cover));
  // Dropping a region breaks coverage.
  Formula partial = Formula::disj({cover.children()[0], cover.children()[1]});
  EXPECT_FALSE(implies(bind && dom, partial));
}

TEST(Budget, AbortDirection) {
  SolverOptions tiny;
  tiny.budget = 0;
  AffineExpr a = V("x") * 11 + V("y") * 13;
  Formula f = Le(C(27), a) && Le(a, C(45)) && Le(C(-10), V("x") * 7 - V("y") * 9) &&
              Le(V("x") * 7 - V("y") * 9, C(4));
  EXPECT_TRUE(is_satisfiable(f, Formula::truth(), tiny));
  EXPECT_FALSE(implies(f, Formula::falsity(), tiny));
}

TEST(SolverOracle, RandomFormulasAgreeWithEnumeration) {
  const std::vector<std::string> vars = {"a", "b", "c"};
  FormulaGen gen(7);
  for (int trial = 0; trial < 150; ++trial) {
    Formula f = gen.formula(vars, 3);
    Formula boxed = f;
    for (const auto& v : vars) boxed = boxed && FormulaGen::box(v);
    bool expected = any_assignment(vars, [&](auto& env) { return brute_eval(f, env); });
    EXPECT_EQ(is_satisfiable(boxed), expected) << f.str();
    Formula q = eliminate_exists(f);
    EXPECT_FALSE(q.has_quantifier());
    bool same =
        !any_assignment(vars, [&](auto& env) { return brute_eval(f, env) != brute_eval(q, env); });
    EXPECT_TRUE(same) << f.str() << "  vs  " << q.str();
  }
}

TEST(SolverOracle, ImpliesIsTransitive) {
  const std::vector<std::string> vars = {"a", "b"};
  FormulaGen gen(11);
  int chains = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Formula f = gen.formula(vars, 1), g = gen.formula(vars, 1), h = gen.formula(vars, 1);
    if (implies(f, g) && implies(g, h)) {
      ++chains;
      EXPECT_TRUE(implies(f, h)) << f.str() << " | " << g.str() << " | " << h.str();
    }
  }
  EXPECT_GT(chains, 0);
}

}  // namespace
}  // namespace fsa
