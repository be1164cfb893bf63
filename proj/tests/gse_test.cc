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

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "fsa/access.hpp"
#include "test_util.hpp"

namespace fsa {
namespace {

using testing::load;

Formula context_for(const Program& p, const CETree& t, const std::vector<std::string>& vars,
                    const Bindings& b) {
  SkolemTable tab;
  std::vector<Atom> apps;
  t.collect_apps(apps);
  for (const auto& a : apps) tab.add(a);
  tab.add_all(b.ground);
  return analysis_context(b, tab) && domain_formula(*p.find_decl("A"), vars);
}

Gse gse_of(const Program& p, const Stmt& s, const std::vector<std::string>& vars) {
  CETree t = build_expr_tree(privatize(s, p, {"A", "p"}), "A", vars);
  Formula ctx = context_for(p, t, vars, p.bindings());
  Gse g = normalize_gse(t, ctx, "A", vars);
  EXPECT_TRUE(gse_is_partition(g, ctx));
  return g;
}

TEST(Gse, SwapHasThreeCases) {
  Program p = load("swap.fsa");
  Gse g = gse_of(p, p.body, {"k"});
  ASSERT_EQ(g.cases.size(), 3u);
  EXPECT_EQ(g.str(),
            "p(l) = k  ==>  A_in(l)\n"
            "p(l) != k and l = k  ==>  A_in(p(l))\n"
            "p(l) != k and l != k  ==>  A_in(k)\n");
}

TEST(Gse, SwapThenUpdateHasFourCases) {
  Program p = load("swap_then_update.fsa");
  Gse g = gse_of(p, p.body, {"k"});
  ASSERT_EQ(g.cases.size(), 4u);
  EXPECT_EQ(g.cases[0].value.str(), "A_in(l) / A_in(m)");
  EXPECT_EQ(g.cases[3].value.str(), "A_in(k)");
}

TEST(Gse, UnconstrainedPivotNeedsMoreCases) {
  // Without p(l) >= l the swap can touch A(m) before the update reads it.
  Program p = load("swap_then_update.fsa");
  Bindings b = p.bindings();
  b.facts.clear();
  CETree t = build_expr_tree(p.body, "A", {"k"});
  Formula ctx = context_for(p, t, {"k"}, b);
  EXPECT_GT(normalize_gse(t, ctx).cases.size(), 4u);
}

TEST(Compare, ReorderedSwapAndUpdateAgree) {
  Program p = load("swap_then_update.fsa");
  Stmt s1 = *find_label(p.body, "S1"), s2 = *find_label(p.body, "S2");
  CompareReport r =
      compare_programs(Stmt::seq({s1, s2}), Stmt::seq({s2, s1}), p, p.bindings(), {"A", "p"});
  EXPECT_TRUE(r.equal) << r.reason;
  ASSERT_EQ(r.arrays.size(), 1u);
  EXPECT_EQ(r.arrays[0].result.tested, 16);
  EXPECT_EQ(r.arrays[0].result.non_empty, 4);
  EXPECT_EQ(r.arrays[0].result.matched, 4);
}

TEST(Compare, ReorderFailsWhenPivotMayPrecedeRow) {
  Program p = load("swap_then_update.fsa");
  Bindings b = p.bindings();
  b.facts = load("pivot_swap_unconstrained.fsa").facts;
  Stmt s1 = *find_label(p.body, "S1"), s2 = *find_label(p.body, "S2");
  CompareReport r = compare_programs(Stmt::seq({s1, s2}), Stmt::seq({s2, s1}), p, b, {"A", "p"});
  EXPECT_FALSE(r.equal);
  ASSERT_TRUE(r.witness.has_value());
}

TEST(Compare, BlockedLuSwapAgainstUpdate) {
  Program p = load("lu_blocked.fsa");
  Stmt c = instantiate(*find_label(p.body, "B1.c"), {{"j", AffineExpr::var("l")}});
  Stmt u = instantiate(*find_label(p.body, "B2"), {{"j", AffineExpr::var("m")}});
  Bindings b = p.bindings().with(
      parse_formula("1 <= jB <= N and jB <= m and m < l and l <= jB + B - 1 and l <= N", p));
  CompareReport r = compare_programs(Stmt::seq({c, u}), Stmt::seq({u, c}), p, b, {"A", "p"});
  EXPECT_TRUE(r.equal) << r.reason;
  ASSERT_EQ(r.arrays.size(), 1u);
  const auto& a = r.arrays[0];
  EXPECT_EQ(a.left.cases.size(), 6u);
  EXPECT_EQ(a.right.cases.size(), 6u);
  EXPECT_EQ(a.result.tested, 36);
  EXPECT_EQ(a.result.non_empty, 6);
  EXPECT_EQ(a.result.matched, 6);
}

TEST(Compare, UpdateBodyAgainstSwapDiffers) {
  Program p = load("pivot_swap.fsa");
  Stmt s1 = instantiate(*find_label(p.body, "S1"), {{"j", AffineExpr::var("l")}});
  Stmt body = instantiate(find_label(p.body, "S2")->body(),
                          {{"j", AffineExpr::var("m")}, {"i", AffineExpr::var("i")}});
  Bindings b = p.bindings().with(parse_formula("1 <= m < l <= N and m + 1 <= i <= N", p));
  CompareReport r =
      compare_programs(Stmt::seq({body, s1}), Stmt::seq({s1, body}), p, b, {"A", "p"});
  EXPECT_FALSE(r.equal);
  ASSERT_TRUE(r.witness.has_value());
  // At k = l with i = p(l) the update reaches the pivot row before the swap
  // in one order only.
  bool found = false;
  Formula at_l = parse_formula("k = l and i = p(l) and p(l) != l", p);
  for (const auto& w : r.arrays[0].result.mismatches) {
    if (!is_satisfiable(w.guard && at_l, Formula::truth())) continue;
    Substitution i_is_pl = {{"i", AffineExpr::of(Atom::app("p", {AffineExpr::var("l")}))}};
    found = w.left.substitute(i_is_pl).str() == "A_in(p(l)) / A_in(m)" &&
            w.right.substitute(i_is_pl).str() == "A_in(p(l))";
  }
  EXPECT_TRUE(found);
}

TEST(Compare, SymmetricCounts) {
  Program p = load("swap_then_update.fsa");
  Stmt s1 = *find_label(p.body, "S1"), s2 = *find_label(p.body, "S2");
  CompareReport ab =
      compare_programs(Stmt::seq({s1, s2}), Stmt::seq({s2, s1}), p, p.bindings(), {"A", "p"});
  CompareReport ba =
      compare_programs(Stmt::seq({s2, s1}), Stmt::seq({s1, s2}), p, p.bindings(), {"A", "p"});
  ASSERT_EQ(ab.arrays.size(), ba.arrays.size());
  EXPECT_EQ(ab.equal, ba.equal);
  EXPECT_EQ(ab.arrays[0].result.non_empty, ba.arrays[0].result.non_empty);
  EXPECT_EQ(ab.arrays[0].result.matched, ba.arrays[0].result.matched);
}

TEST(Simple, Reasons) {
  Program lu = load("lu.fsa");
  SimpleResult pick = is_simple(*find_label(lu.body, "B1.b"));
  EXPECT_FALSE(pick.simple);
  EXPECT_NE(pick.reason.find("non-affine"), std::string::npos);

  SimpleResult swap = is_simple(*find_label(lu.body, "B1.c"));
  EXPECT_FALSE(swap.simple) << "tmp is shared between iterations";
  EXPECT_TRUE(is_simple(privatize(*find_label(lu.body, "B1.c"), lu, {"A", "p"})).simple);

  Program r = parse_program(
      "program t(N) { array A[1..N]; array C[1..N]; for i = 2 to N { A(i) = A(i-1); } "
      "for i = 1 to N { C(1) = A(i); } for i = 1 to N { A(2*i) = 0; }"
      " for i = 1 to N step B { A(i) = 0; } }");
  const auto& parts = r.body.parts();
  EXPECT_NE(is_simple(parts[0]).reason.find("loop-carried"), std::string::npos);
  EXPECT_NE(is_simple(parts[1]).reason.find("loop-carried"), std::string::npos);
  EXPECT_TRUE(is_simple(parts[2]).simple);
  EXPECT_NE(is_simple(parts[3]).reason.find("symbolic step"), std::string::npos);

  // i = k/2 is not an integer map, and the value depends on i.
  Program h = parse_program("program t(N) { array A[1..N]; for i = 1 to N { A(2*i) = i; } }");
  EXPECT_NE(is_simple(h.body).reason.find("cannot be inverted"), std::string::npos);

  Program q = parse_program(
      "program t(N) { array A[1..N]; array C[1..N]; for i = 1 to N { C(i) = A(i) + A(1); } }");
  EXPECT_TRUE(is_simple(q.body).simple);
}

TEST(Simple, ModifiedIndexArray) {
  Program p = load("lu.fsa");
  Stmt both = Stmt::seq({*find_label(p.body, "B1.a"), *find_label(p.body, "B1.c")});
  SimpleResult r = is_simple(privatize(both, p, {"A", "p"}));
  EXPECT_FALSE(r.simple);
  EXPECT_NE(r.reason.find("'p'"), std::string::npos);
}

TEST(Tree, StridedWriteKeepsDivisibility) {
  Program p = parse_program("program t(N) { array A[1..N]; for i = 1 to N step 2 { A(i) = i; } }");
  Gse g = normalize_gse(build_expr_tree(p.body, "A", {"k"}), parse_formula("1 <= k <= N", p), "A",
                        {"k"});
  ASSERT_EQ(g.cases.size(), 2u);
  EXPECT_NE(g.cases[0].guard.str().find("mod 2"), std::string::npos);
  EXPECT_EQ(g.cases[0].value.str(), "k");
}

// --- property tests on random trees --------------------------------------

class TreeGen {
 public:
  explicit TreeGen(uint64_t seed) : rng_(seed) {}
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  AffineExpr lin() {
    AffineExpr e = AffineExpr::constant(pick(-3, 3));
    if (pick(0, 1)) e = e + AffineExpr::var("k") * Int(pick(-1, 2));
    if (pick(0, 1)) e = e + AffineExpr::var("l") * Int(pick(-1, 1));
    return e;
  }

  CETree tree(int depth) {
    if (depth == 0 || pick(0, 3) == 0) {
      if (pick(0, 2) == 0) return CETree::leaf(SymExpr::constant(pick(1, 4)));
      return CETree::leaf(SymExpr::input("A", {lin()}));
    }
    switch (pick(0, 3)) {
      case 0:
        return CETree::op('+', {tree(depth - 1), tree(depth - 1)});
      case 1:
        return CETree::op('*', {tree(depth - 1), tree(depth - 1)});
      default: {
        static const Rel kRels[] = {Rel::kEq, Rel::kLe, Rel::kNe, Rel::kGt};
        Formula g = Formula::cmp(lin(), kRels[pick(0, 3)], lin());
        if (pick(0, 2) == 0) g = g && Formula::cmp(lin(), Rel::kLe, lin());
        return CETree::cond(g, tree(depth - 1), tree(depth - 1));
      }
    }
  }

 private:
  std::mt19937_64 rng_;
};

Valuation point(int k, int l) {
  Valuation v;
  v.symbol = [k, l](const std::string& s) { return Int(s == "k" ? k : l); };
  return v;
}

SymValuation sym_point(int k, int l) {
  SymValuation v;
  v.index = point(k, l);
  v.input = [](const std::string&, const std::vector<Int>& idx) {
    return Rational(static_cast<int>(idx[0] % 7) + 11, 3);
  };
  return v;
}

Rational eval_tree(const CETree& t, int k, int l) {
  switch (t.kind()) {
    case CETree::Kind::kLeaf:
      return evaluate(t.leaf_expr(), sym_point(k, l));
    case CETree::Kind::kCond:
      return eval_tree(evaluate(t.guard(), point(k, l)) ? t.kids()[0] : t.kids()[1], k, l);
    default: {
      Rational a = eval_tree(t.kids()[0], k, l), b = eval_tree(t.kids()[1], k, l);
      return t.op() == '+' ? Rational(a + b) : Rational(a * b);
    }
  }
}

TEST(TreeProperty, FactorPreservesValueAndHoistsConditions) {
  TreeGen g(21);
  for (int n = 0; n < 200; ++n) {
    CETree t = g.tree(4);
    CETree f = factor(t);
    std::function<bool(const CETree&)> ok = [&](const CETree& x) {
      if (x.kind() == CETree::Kind::kCond) return ok(x.kids()[0]) && ok(x.kids()[1]);
      return !x.has_cond();
    };
    EXPECT_TRUE(ok(f)) << t.str();
    for (int k = -3; k <= 3; ++k) {
      for (int l = -3; l <= 3; ++l) {
        ASSERT_EQ(eval_tree(t, k, l), eval_tree(f, k, l)) << t.str();
      }
    }
  }
}

// Every point of the context falls in exactly one case, and that case's
// value is the tree's value there.
TEST(TreeProperty, NormalizedGsePartitionsContext) {
  TreeGen g(22);
  Formula ctx =
      Formula::conj({Formula::cmp(AffineExpr::constant(-2), Rel::kLe, AffineExpr::var("k")),
                     Formula::cmp(AffineExpr::var("k"), Rel::kLe, AffineExpr::constant(2)),
                     Formula::cmp(AffineExpr::constant(-2), Rel::kLe, AffineExpr::var("l")),
                     Formula::cmp(AffineExpr::var("l"), Rel::kLe, AffineExpr::constant(2))});
  for (int n = 0; n < 80; ++n) {
    CETree t = g.tree(3);
    Gse gse = normalize_gse(t, ctx);
    EXPECT_TRUE(gse_is_partition(gse, ctx)) << gse.str();
    for (int k = -2; k <= 2; ++k) {
      for (int l = -2; l <= 2; ++l) {
        int hits = 0;
        for (const auto& c : gse.cases) {
          if (!evaluate(c.guard, point(k, l))) continue;
          ++hits;
          EXPECT_EQ(evaluate(c.value, sym_point(k, l)), eval_tree(t, k, l));
        }
        EXPECT_EQ(hits, 1) << gse.str() << " at k=" << k << " l=" << l;
      }
    }
  }
}

TEST(TreeProperty, CompareIsSymmetricAndReflexive) {
  TreeGen g(23);
  Formula ctx =
      Formula::conj({Formula::cmp(AffineExpr::constant(0), Rel::kLe, AffineExpr::var("k")),
                     Formula::cmp(AffineExpr::var("k"), Rel::kLe, AffineExpr::constant(4))});
  for (int n = 0; n < 40; ++n) {
    Gse a = normalize_gse(g.tree(3), ctx, "A", {"k"});
    Gse b = normalize_gse(g.tree(3), ctx, "A", {"k"});
    GseComparison ab = compare_gses(a, b, ctx), ba = compare_gses(b, a, ctx);
    EXPECT_EQ(ab.equal, ba.equal);
    EXPECT_EQ(ab.tested, ba.tested);
    EXPECT_EQ(ab.non_empty, ba.non_empty);
    EXPECT_EQ(ab.matched, ba.matched);
    EXPECT_TRUE(compare_gses(a, a, ctx).equal);
  }
}

}  // namespace
}  // namespace fsa
