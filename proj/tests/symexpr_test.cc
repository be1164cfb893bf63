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

#include "fsa/symexpr.hpp"

#include <gtest/gtest.h>

#include <map>
#include <optional>
#include <random>

namespace fsa {
namespace {

SymExpr in(const std::string& a, std::vector<AffineExpr> idx) {
  return SymExpr::input(a, std::move(idx));
}
SymExpr c(int v) { return SymExpr::constant(v); }
SymExpr bin(char op, SymExpr a, SymExpr b) { return SymExpr::op(op, {a, b}); }

AffineExpr var(const char* v) { return AffineExpr::var(v); }

class ExprGen {
 public:
  explicit ExprGen(uint64_t seed) : rng_(seed) {}

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  SymExpr leaf() {
    switch (pick(0, 3)) {
      case 0:
        return c(pick(-3, 3));
      case 1:
        return SymExpr::index(var("l") + Int(pick(-1, 1)));
      default:
        return in(pick(0, 1) ? "A" : "B", {var("l") + Int(pick(0, 1))});
    }
  }

  SymExpr expr(int depth) {
    if (depth == 0 || pick(0, 4) == 0) return leaf();
    switch (pick(0, 6)) {
      case 0:
        return bin('+', expr(depth - 1), expr(depth - 1));
      case 1:
        return bin('-', expr(depth - 1), expr(depth - 1));
      case 2:
        return bin('*', expr(depth - 1), expr(depth - 1));
      case 3:
        return bin('/', expr(depth - 1), c(pick(1, 3)));
      case 4:
        return bin('/', expr(depth - 1), expr(depth - 1));
      case 5:
        return SymExpr::op('n', {expr(depth - 1)});
      default:
        return SymExpr::apply("abs", {expr(depth - 1)});
    }
  }

  // A random valuation of l and of the input cells.
  SymValuation valuation() {
    auto cells = std::make_shared<std::map<std::pair<std::string, Int>, Rational>>();
    auto gen = std::make_shared<std::mt19937_64>(rng_());
    int l = pick(-4, 4);
    SymValuation v;
    v.index.symbol = [l](const std::string&) { return Int(l); };
    v.input = [cells, gen](const std::string& a, const std::vector<Int>& idx) {
      auto key = std::make_pair(a, idx.empty() ? Int(0) : idx[0]);
      auto it = cells->find(key);
      if (it != cells->end()) return it->second;
      int num = std::uniform_int_distribution<int>(-9, 9)(*gen);
      int den = std::uniform_int_distribution<int>(1, 4)(*gen);
      Rational r(num, den);
      cells->emplace(key, r);
      return r;
    };
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

std::optional<Rational> try_eval(const SymExpr& e, const SymValuation& v) {
  try {
    return evaluate(e, v);
  } catch (const Error&) {
    return std::nullopt;
  }
}

TEST(Canon, RingIdentities) {
  SymExpr a = in("A", {var("k")});
  SymExpr b = in("A", {var("m")});
  EXPECT_TRUE(
      equal(bin('*', bin('+', a, b), bin('-', a, b)), bin('-', bin('*', a, a), bin('*', b, b))));
  EXPECT_TRUE(equal(bin('/', a, c(2)), bin('*', SymExpr::constant(Rational(1, 2)), a)));
  EXPECT_TRUE(equal(bin('+', a, b), bin('+', b, a)));
  EXPECT_FALSE(equal(bin('-', a, b), bin('-', b, a)));
  EXPECT_TRUE(equal(bin('-', a, a), c(0)));
}

TEST(Canon, IndexExpressionsAreNormalized) {
  SymExpr x = in("A", {var("l") + Int(1)});
  SymExpr y = in("A", {AffineExpr::constant(1) + var("l")});
  EXPECT_TRUE(equal(x, y));
  EXPECT_FALSE(equal(x, in("A", {var("l")})));
  AffineExpr pl = AffineExpr::of(Atom::app("p", {var("l")}));
  EXPECT_TRUE(equal(in("A", {pl, var("k")}), in("A", {pl + Int(0), var("k")})));
}

TEST(Canon, QuotientIsOpaqueButNormalizedInside) {
  SymExpr a = in("A", {var("i")});
  SymExpr m = in("A", {var("m")});
  SymExpr q1 = bin('/', bin('+', a, c(0)), m);
  SymExpr q2 = bin('/', a, bin('*', c(1), m));
  EXPECT_TRUE(equal(q1, q2));
  // (a*m)/m is not simplified: division is uninterpreted.
  EXPECT_FALSE(equal(bin('/', bin('*', a, m), m), a));
  EXPECT_TRUE(equal(bin('+', q1, q1), bin('*', c(2), q2)));
}

TEST(Canon, PrintsSubscriptedInputs) {
  AffineExpr pl = AffineExpr::of(Atom::app("p", {var("l")}));
  EXPECT_EQ(bin('/', in("A", {pl}), in("A", {var("m")})).str(), "A_in(p(l)) / A_in(m)");
  EXPECT_EQ(bin('*', bin('+', c(1), c(2)), c(3)).str(), "(1 + 2) * 3");
  EXPECT_EQ(bin('-', c(1), bin('-', c(2), c(3))).str(), "1 - (2 - 3)");
}

TEST(CanonProperty, Idempotent) {
  ExprGen g(11);
  for (int t = 0; t < 300; ++t) {
    SymExpr e = g.expr(4);
    CanonExpr once = canon(e);
    CanonExpr twice = canon(once.to_symexpr());
    EXPECT_EQ(once, twice) << e.str() << " -> " << once.str() << " -> " << twice.str();
    EXPECT_EQ(once.str(), twice.str());
  }
}

// Canonicalization must not change the value wherever the original is
// defined.
TEST(CanonProperty, PreservesValue) {
  ExprGen g(12);
  int checked = 0;
  while (checked < 200) {
    SymExpr e = g.expr(4);
    SymValuation v = g.valuation();
    auto x = try_eval(e, v);
    if (!x) continue;
    auto y = try_eval(canon(e).to_symexpr(), v);
    ASSERT_TRUE(y.has_value()) << e.str();
    EXPECT_EQ(*x, *y) << e.str();
    ++checked;
  }
}

// equal() is sound: equal expressions agree on every valuation tried.
TEST(CanonProperty, EqualImpliesSameValue) {
  ExprGen g(13);
  int found = 0;
  for (int t = 0; t < 20000 && found < 200; ++t) {
    SymExpr a = g.expr(2);
    SymExpr b = g.expr(2);
    if (!equal(a, b)) continue;
    ++found;
    for (int k = 0; k < 5; ++k) {
      SymValuation v = g.valuation();
      auto x = try_eval(a, v);
      auto y = try_eval(b, v);
      if (x && y) EXPECT_EQ(*x, *y) << a.str() << " vs " << b.str();
    }
  }
  EXPECT_GT(found, 20);
}

TEST(CanonProperty, RewritesAreRecognized) {
  ExprGen g(14);
  for (int t = 0; t < 200; ++t) {
    SymExpr a = g.expr(3), b = g.expr(3), d = g.expr(2);
    EXPECT_TRUE(equal(bin('*', bin('+', a, b), d), bin('+', bin('*', d, a), bin('*', b, d))));
    EXPECT_TRUE(equal(bin('-', a, b), bin('+', SymExpr::op('n', {b}), a)));
  }
}

TEST(CanonProperty, EquivalenceRelation) {
  ExprGen g(15);
  std::vector<SymExpr> pool;
  for (int t = 0; t < 40; ++t) {
    SymExpr e = g.expr(2);
    pool.push_back(e);
    pool.push_back(canon(e).to_symexpr());
    pool.push_back(bin('+', e, c(0)));
  }
  for (const auto& a : pool) {
    EXPECT_TRUE(equal(a, a));
    for (const auto& b : pool) {
      bool ab = equal(a, b);
      EXPECT_EQ(ab, equal(b, a));
      if (!ab) continue;
      for (const auto& d : pool) {
        if (equal(b, d)) EXPECT_TRUE(equal(a, d));
      }
    }
  }
}

}  // namespace
}  // namespace fsa
