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

#include "fsa/lang.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace fsa {
namespace {

using testing::corpus_files;
using testing::load;

bool has_diag(const std::vector<Diagnostic>& ds, const std::string& needle) {
  for (const auto& d : ds) {
    if (d.message.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST(Parse, EmptyProgram) {
  Program p = parse_program("program t(N){outputs{}}");
  EXPECT_EQ(p.name, "t");
  ASSERT_EQ(p.params.size(), 1u);
  EXPECT_EQ(p.body.kind(), Stmt::Kind::kSeq);
  EXPECT_TRUE(p.body.parts().empty());
  EXPECT_TRUE(check_well_formed(p).empty());
}

TEST(Parse, PivotSwapHasTwoLabeledParts) {
  Program p = load("pivot_swap.fsa");
  auto loop = find_loop(p.body, "j");
  ASSERT_TRUE(loop.has_value());
  ASSERT_EQ(loop->body().parts().size(), 2u);
  EXPECT_EQ(loop->body().parts()[0].label(), "S1");
  EXPECT_EQ(loop->body().parts()[1].label(), "S2");
  ASSERT_EQ(p.facts.size(), 1u);
  EXPECT_EQ(p.facts[0].str(), "forall j in [1, N]: j <= p(j) and p(j) <= N");
}

TEST(Parse, LuHasFourPhases) {
  Program p = load("lu.fsa");
  for (const char* l : {"B1.a", "B1.b", "B1.c", "B1.d", "U"}) {
    EXPECT_TRUE(find_label(p.body, l).has_value()) << l;
  }
  Stmt pick = *find_label(p.body, "B1.b");
  const Stmt& cond = pick.body().parts()[0];
  ASSERT_EQ(cond.kind(), Stmt::Kind::kIf);
  EXPECT_EQ(cond.cond().kind(), Pred::Kind::kValue);
  EXPECT_EQ(cond.cond().str(), "abs(A(i,j)) > abs(A(p(j),j))");
}

TEST(Parse, SyntaxErrorHasPosition) {
  try {
    parse_program("program t(N) {\n  array A[1..N];\n  A(1) = ;\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.pos().line, 3);
    EXPECT_EQ(e.pos().column, 10);
  }
}

TEST(Parse, DuplicateDeclarationRejected) {
  EXPECT_THROW(parse_program("program t(N) { array A[1..N]; scalar A; }"), ParseError);
}

TEST(Parse, ArityMismatchRejected) {
  EXPECT_THROW(parse_program("program t(N) { array A[1..N]; A(1,2) = 0; }"), ParseError);
}

TEST(Parse, NegativeStepReadsUpperFirst) {
  Program p = parse_program("program t(N) { array A[1..N]; for i = N to 1 step -1 { A(i) = i; } }");
  const Stmt& loop = p.body.parts()[0];
  EXPECT_EQ(loop.lower()[0].str(), "1");
  EXPECT_EQ(loop.upper()[0].str(), "N");
  EXPECT_EQ(loop.step().literal, -1);
}

TEST(Parse, ChainedAndModuloConditions) {
  Program p = parse_program(
      "program t(N) { array A[1..N];"
      " for i = 1 to N { if (1 <= i <= N - 1 and i mod 2 = 0) { A(i) = 0; } else { A(i) = 1; } } "
      "}");
  const Stmt& s = p.body.parts()[0].body().parts()[0];
  ASSERT_EQ(s.kind(), Stmt::Kind::kIf);
  EXPECT_TRUE(s.cond().is_affine());
  EXPECT_EQ(s.cond().str(), "1 <= i and i <= N - 1 and i mod 2 = 0");
  EXPECT_TRUE(s.has_else());
}

TEST(RoundTrip, Corpus) {
  for (const auto& f : corpus_files()) {
    Program p = load(f);
    std::string text = print_program(p);
    Program q = parse_program(text);
    EXPECT_EQ(p.body, q.body) << f;
    EXPECT_EQ(text, print_program(q)) << f;
    EXPECT_EQ(p.outputs, q.outputs) << f;
    EXPECT_EQ(p.params, q.params) << f;
  }
}

TEST(RoundTrip, IfElseAndValues) {
  const char* src =
      "program t(N) {\n"
      "  array A[1..N]: real inout;\n"
      "  scalar s;\n"
      "  outputs {A, s};\n"
      "  for i = 1 to N {\n"
      "    if (A(i) > 0 or i = 1) {\n"
      "      s = -A(i) * (3/4) + 2.5;\n"
      "    } else {\n"
      "      A(i) = (A(i) - s) / (A(i) + i + 1);\n"
      "    }\n"
      "  }\n"
      "}\n";
  Program p = parse_program(src);
  std::string text = print_program(p);
  EXPECT_NE(text.find("} else {"), std::string::npos);
  Program q = parse_program(text);
  EXPECT_EQ(p.body, q.body);
  EXPECT_EQ(text, print_program(q));
}

TEST(WellFormed, CorpusIsClean) {
  for (const auto& f : corpus_files()) {
    auto ds = check_well_formed(load(f));
    EXPECT_TRUE(ds.empty()) << f << ": " << (ds.empty() ? "" : ds[0].str());
  }
}

TEST(WellFormed, LoopVariableAssigned) {
  Program p = parse_program("program t(N) { array A[1..N]; for i = 1 to N { i = 2; } }");
  EXPECT_TRUE(has_diag(check_well_formed(p), "loop variable assigned"));
}

TEST(WellFormed, NonAffineIndex) {
  Program p = parse_program("program t(N) { array A[1..N]; for i = 1 to N { A(i*i) = 0; } }");
  auto ds = check_well_formed(p);
  EXPECT_TRUE(has_diag(ds, "non-affine index"));
  EXPECT_TRUE(has_diag(ds, "i*i"));
}

TEST(WellFormed, UndeclaredAndBadOutput) {
  Program p = parse_program("program t(N) { outputs {Z}; x = 1; }");
  auto ds = check_well_formed(p);
  EXPECT_TRUE(has_diag(ds, "output 'Z'"));
  EXPECT_TRUE(has_diag(ds, "undeclared array 'x'"));
}

TEST(Queries, AlteredVars) {
  Program p = load("swap_then_update.fsa");
  EXPECT_EQ(altered_vars(p.body), (std::set<std::string>{"A", "tmp"}));
  Program q = load("pivot_swap.fsa");
  EXPECT_EQ(altered_vars(*find_label(q.body, "S2")), std::set<std::string>{"A"});
  EXPECT_TRUE(altered_vars(Stmt::seq({})).empty());
}

TEST(Queries, AlteredVarsOfSeqIsUnion) {
  Program p = load("lu.fsa");
  auto labels_of = [&](const char* l) { return altered_vars(*find_label(p.body, l)); };
  auto a = labels_of("B1.a");
  auto c = labels_of("B1.c");
  Stmt both = Stmt::seq({*find_label(p.body, "B1.a"), *find_label(p.body, "B1.c")});
  std::set<std::string> u = a;
  u.insert(c.begin(), c.end());
  EXPECT_EQ(altered_vars(both), u);
}

TEST(Queries, ReadVarsIncludeOpaqueIndexArrays) {
  Program p = load("swap.fsa");
  EXPECT_EQ(read_vars(p.body), (std::set<std::string>{"A", "p", "tmp"}));
}

TEST(Queries, ExposureAndPrivatization) {
  Program p = load("lu.fsa");
  Stmt swap = *find_label(p.body, "B1.c");
  EXPECT_FALSE(exposed_read(swap, "tmp"));
  std::set<std::string> expanded;
  Stmt priv = privatize(swap, p, {"A", "p"}, &expanded);
  EXPECT_EQ(expanded, std::set<std::string>{"tmp"});
  EXPECT_NE(print_stmt(priv).find("tmp(k) = A(j,k);"), std::string::npos);
  // A live scalar is left alone.
  EXPECT_EQ(privatize(swap, p, {"A", "p", "tmp"}), swap);

  Program r = parse_program(
      "program t(N) { scalar s; array A[1..N]; for i = 1 to N { A(i) = s; s = i; } }");
  EXPECT_TRUE(exposed_read(r.body, "s"));
  EXPECT_EQ(privatize(r.body, r, {"A"}), r.body);
}

TEST(Queries, SubstituteRespectsBinders) {
  Program p = load("pivot_swap.fsa");
  Stmt s2 = *find_label(p.body, "S2");
  Stmt inst = s2.substitute({{"j", AffineExpr::var("m")}, {"i", AffineExpr::var("zz")}});
  EXPECT_EQ(print_stmt(inst), "S2: for i = m + 1 to N {\n  A(i) = A(i) / A(m);\n}\n");
}

TEST(Formula, ParseInProgramContext) {
  Program p = load("pivot_swap.fsa");
  Formula f = parse_formula("exists x: 2*x = k and 1 <= p(k)", p);
  EXPECT_TRUE(f.has_quantifier());
  EXPECT_THROW(parse_formula("A(1) > 0", p), ParseError);
  std::vector<Formula> g;
  std::vector<UniversalFact> facts;
  parse_assumption("forall j in [1, N]: forall q in [1, j]: p(j) >= q", p, g, facts);
  ASSERT_EQ(facts.size(), 1u);
  EXPECT_EQ(facts[0].ranges.size(), 2u);
}

}  // namespace
}  // namespace fsa
