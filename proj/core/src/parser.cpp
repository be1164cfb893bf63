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

#include <cctype>
#include <map>
#include <memory>
#include <set>

#include "fsa/lang.hpp"

namespace fsa {

ParseError::ParseError(const std::string& msg, Position pos)
    : Error(pos.line > 0 ? pos.str() + ": " + msg : msg), pos_(pos) {}

namespace {

enum class Tok { kIdent, kNumber, kPunct, kEnd };

struct Token {
  Tok kind;
  std::string text;
  Position pos;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Position pos{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size()) {
        char d = src[j];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_') {
          ++j;
        } else if (d == '.' && j + 1 < src.size() &&
                   std::isalnum(static_cast<unsigned char>(src[j + 1]))) {
          ++j;
        } else {
          break;
        }
      }
      out.push_back({Tok::kIdent, src.substr(i, j - i), pos});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' &&
          std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      out.push_back({Tok::kNumber, src.substr(i, j - i), pos});
      advance(j - i);
      continue;
    }
    static const char* kTwo[] = {"<=", ">=", "!=", "==", ".."};
    std::string two = src.substr(i, 2);
    bool matched = false;
    for (const char* t : kTwo) {
      if (two == t) {
        out.push_back({Tok::kPunct, two, pos});
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string("(){}[],;:=<>+-*/|").find(c) == std::string::npos) {
      throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }
    out.push_back({Tok::kPunct, std::string(1, c), pos});
    advance(1);
  }
  out.push_back({Tok::kEnd, "", {line, col}});
  return out;
}

// Untyped expression tree, classified into affine or value form afterwards.
struct PExpr {
  enum Kind { kNum, kName, kCall, kBin, kNeg } kind;
  Rational num;
  std::string name;
  char op = 0;
  std::vector<std::shared_ptr<PExpr>> kids;
  Position pos;
};
using PE = std::shared_ptr<PExpr>;

struct DeclInfo {
  bool is_int = false;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  // Declarations visible to expression classification.
  std::map<std::string, DeclInfo> decls;

  AffineExpr affine_expr() { return affine(arith()); }

  void prescan() {
    for (size_t i = 0; i + 1 < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind != Tok::kIdent || (t.text != "array" && t.text != "scalar")) continue;
      if (toks_[i + 1].kind != Tok::kIdent) continue;
      DeclInfo info;
      for (size_t j = i + 2; j < toks_.size() && toks_[j].text != ";"; ++j) {
        if (toks_[j].kind == Tok::kIdent && toks_[j].text == "int") info.is_int = true;
      }
      decls.emplace(toks_[i + 1].text, info);
    }
  }

  Program program() {
    Program p;
    expect_ident("program");
    p.name = ident();
    expect("(");
    if (!accept(")")) {
      do {
        p.params.push_back(ident());
      } while (accept(","));
      expect(")");
    }
    program_ = &p;
    expect("{");
    std::vector<Stmt> body;
    while (!accept("}")) {
      if (peek_ident("assume")) {
        next();
        assumption(p.assumes, p.facts);
        expect(";");
      } else if (peek_ident("array") || peek_ident("scalar")) {
        p.decls.push_back(declaration());
      } else if (peek_ident("outputs")) {
        next();
        expect("{");
        if (!accept("}")) {
          do {
            p.outputs.push_back(ident());
          } while (accept(","));
          expect("}");
        }
        accept(";");
      } else {
        body.push_back(statement());
      }
    }
    if (cur().kind != Tok::kEnd) fail("trailing input after program");
    p.body = Stmt::seq(std::move(body));
    return p;
  }

  void assumption(std::vector<Formula>& ground, std::vector<UniversalFact>& facts) {
    if (peek_ident("forall")) {
      UniversalFact fact;
      while (peek_ident("forall")) {
        next();
        UniversalFact::Range r;
        r.var = ident();
        expect_ident("in");
        expect("[");
        r.lo = affine(arith());
        expect(",");
        r.hi = affine(arith());
        expect("]");
        expect(":");
        fact.ranges.push_back(std::move(r));
      }
      fact.conclusion = formula();
      facts.push_back(std::move(fact));
    } else {
      ground.push_back(formula());
    }
  }

  Formula formula() {
    Position at = cur().pos;
    Pred p = pred_or();
    if (!p.is_affine()) throw ParseError("value comparison not allowed here: " + p.str(), at);
    return p.to_formula();
  }

  bool at_end() const { return cur().kind == Tok::kEnd; }
  const Token& cur() const { return toks_[pos_]; }

 private:
  // -- token helpers --------------------------------------------------------

  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  const Token& peek(size_t k = 1) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool is(const std::string& p) const { return cur().kind == Tok::kPunct && cur().text == p; }
  bool accept(const std::string& p) {
    if (!is(p)) return false;
    next();
    return true;
  }
  bool peek_ident(const std::string& w) const {
    return cur().kind == Tok::kIdent && cur().text == w;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur().pos); }
  void expect(const std::string& p) {
    if (!accept(p)) {
      fail("expected '" + p + "', found '" + (at_end() ? "end of input" : cur().text) + "'");
    }
  }
  void expect_ident(const std::string& w) {
    if (!peek_ident(w)) fail("expected '" + w + "'");
    next();
  }
  std::string ident() {
    if (cur().kind != Tok::kIdent) fail("expected identifier");
    return next().text;
  }
  Int integer() {
    bool neg = accept("-");
    if (cur().kind != Tok::kNumber) fail("expected integer");
    Rational r = parse_rational(cur().text);
    if (boost::multiprecision::denominator(r) != 1) fail("expected integer");
    next();
    Int v = boost::multiprecision::numerator(r);
    return neg ? Int(-v) : v;
  }

  // -- declarations ---------------------------------------------------------

  ArrayDecl declaration() {
    ArrayDecl d;
    d.is_scalar = next().text == "scalar";
    d.name = ident();
    while (!d.is_scalar && accept("[")) {
      ArrayDecl::Dim dim;
      dim.lo = affine(arith());
      expect("..");
      dim.hi = affine(arith());
      expect("]");
      d.dims.push_back(std::move(dim));
    }
    if (accept(":")) {
      std::string e = ident();
      if (e == "int") {
        d.elem = ElemKind::kInt;
      } else if (e != "real") {
        fail("unknown element kind '" + e + "'");
      }
      if (cur().kind == Tok::kIdent) {
        std::string io = ident();
        if (io == "in") {
          d.io = IoRole::kIn;
        } else if (io == "out") {
          d.io = IoRole::kOut;
        } else if (io != "inout") {
          fail("unknown io role '" + io + "'");
        }
      }
    }
    expect(";");
    return d;
  }

  // -- statements -----------------------------------------------------------

  Stmt statement() {
    Position at = cur().pos;
    std::string label;
    if (cur().kind == Tok::kIdent && peek().kind == Tok::kPunct && peek().text == ":") {
      label = ident();
      next();
    }
    Stmt s = unlabeled();
    if (!label.empty()) s = s.with_label(label);
    return s.with_pos(at);
  }

  Stmt block() {
    expect("{");
    std::vector<Stmt> parts;
    while (!accept("}")) {
      if (at_end()) fail("unterminated block");
      parts.push_back(statement());
    }
    return Stmt::seq(std::move(parts));
  }

  std::pair<std::string, std::vector<AffineExpr>> bound_list() {
    if ((peek_ident("max") || peek_ident("min")) && peek().kind == Tok::kPunct &&
        peek().text == "(") {
      std::string fn = next().text;
      next();
      std::vector<AffineExpr> out;
      do {
        out.push_back(affine(arith()));
      } while (accept(","));
      expect(")");
      return {fn, out};
    }
    return {"", {affine(arith())}};
  }

  Stmt unlabeled() {
    if (is("{")) return block();
    if (peek_ident("for")) {
      next();
      std::string var = ident();
      expect("=");
      auto [first_fn, first] = bound_list();
      expect_ident("to");
      auto [second_fn, second] = bound_list();
      Step step;
      if (peek_ident("step")) {
        next();
        if (cur().kind == Tok::kIdent) {
          step.symbol = ident();
        } else {
          step.literal = integer();
          if (step.literal == 0) fail("zero loop step");
        }
      }
      bool down = !step.is_symbolic() && step.literal < 0;
      // Counting down, the first bound is the upper one.
      if ((!first_fn.empty() && first_fn != (down ? "min" : "max")) ||
          (!second_fn.empty() && second_fn != (down ? "max" : "min"))) {
        fail("loop bound list uses the wrong min/max for the step direction");
      }
      Stmt body = block();
      if (down) return Stmt::loop(var, std::move(second), std::move(first), step, body);
      return Stmt::loop(var, std::move(first), std::move(second), step, body);
    }
    if (peek_ident("if")) {
      next();
      expect("(");
      Pred c = pred_or();
      expect(")");
      Stmt then_branch = block();
      std::optional<Stmt> else_branch;
      if (peek_ident("else")) {
        next();
        if (peek_ident("if")) {
          Position at = cur().pos;
          else_branch = unlabeled().with_pos(at);
        } else {
          else_branch = block();
        }
      }
      return Stmt::branch(c, then_branch, else_branch);
    }
    Ref lhs = reference();
    expect("=");
    ValExpr rhs = value(arith());
    expect(";");
    return Stmt::assign(std::move(lhs), std::move(rhs));
  }

  Ref reference() {
    Ref r;
    r.name = ident();
    if (accept("(")) {
      do {
        r.indices.push_back(affine(arith()));
      } while (accept(","));
      expect(")");
    }
    return r;
  }

  // -- arithmetic -----------------------------------------------------------

  PE arith() {
    PE l = term();
    while (is("+") || is("-")) {
      auto n = std::make_shared<PExpr>();
      n->kind = PExpr::kBin;
      n->pos = cur().pos;
      n->op = next().text[0];
      n->kids = {l, term()};
      l = n;
    }
    return l;
  }

  PE term() {
    PE l = unary();
    while (is("*") || is("/")) {
      auto n = std::make_shared<PExpr>();
      n->kind = PExpr::kBin;
      n->pos = cur().pos;
      n->op = next().text[0];
      n->kids = {l, unary()};
      l = n;
    }
    return l;
  }

  PE unary() {
    if (is("-")) {
      auto n = std::make_shared<PExpr>();
      n->kind = PExpr::kNeg;
      n->pos = next().pos;
      n->kids = {unary()};
      return n;
    }
    if (accept("+")) return unary();
    return primary();
  }

  PE primary() {
    auto n = std::make_shared<PExpr>();
    n->pos = cur().pos;
    if (cur().kind == Tok::kNumber) {
      n->kind = PExpr::kNum;
      n->num = parse_rational(next().text);
      return n;
    }
    if (accept("(")) {
      PE inner = arith();
      expect(")");
      return inner;
    }
    if (cur().kind != Tok::kIdent) fail("expected expression");
    n->name = next().text;
    if (accept("(")) {
      n->kind = PExpr::kCall;
      if (!accept(")")) {
        do {
          n->kids.push_back(arith());
        } while (accept(","));
        expect(")");
      }
    } else {
      n->kind = PExpr::kName;
    }
    return n;
  }

  // -- classification -------------------------------------------------------

  bool is_value_name(const std::string& n) const {
    auto it = decls.find(n);
    return it != decls.end();
  }

  // True if e reads non-integer data or applies a builtin.
  bool has_value_reads(const PE& e) const {
    switch (e->kind) {
      case PExpr::kName:
        return is_value_name(e->name);
      case PExpr::kCall: {
        auto it = decls.find(e->name);
        if (it == decls.end() || !it->second.is_int) return true;
        break;
      }
      default:
        break;
    }
    for (const auto& k : e->kids) {
      if (has_value_reads(k)) return true;
    }
    return false;
  }

  bool has_calls_or_decls(const PE& e) const {
    if (e->kind == PExpr::kCall) return true;
    if (e->kind == PExpr::kName && is_value_name(e->name)) return true;
    for (const auto& k : e->kids) {
      if (has_calls_or_decls(k)) return true;
    }
    return false;
  }

  bool has_names(const PE& e) const {
    if (e->kind == PExpr::kName || e->kind == PExpr::kCall) return true;
    for (const auto& k : e->kids) {
      if (has_names(k)) return true;
    }
    return false;
  }

  std::optional<AffineExpr> try_affine(const PE& e, bool allow_products) const {
    switch (e->kind) {
      case PExpr::kNum:
        if (boost::multiprecision::denominator(e->num) != 1) return std::nullopt;
        return AffineExpr::constant(boost::multiprecision::numerator(e->num));
      case PExpr::kName:
        return AffineExpr::var(e->name);
      case PExpr::kCall: {
        std::vector<AffineExpr> args;
        for (const auto& k : e->kids) {
          auto a = try_affine(k, allow_products);
          if (!a) return std::nullopt;
          args.push_back(*a);
        }
        return AffineExpr::of(Atom::app(e->name, std::move(args)));
      }
      case PExpr::kNeg: {
        auto a = try_affine(e->kids[0], allow_products);
        if (!a) return std::nullopt;
        return -*a;
      }
      case PExpr::kBin: {
        auto l = try_affine(e->kids[0], allow_products);
        auto r = try_affine(e->kids[1], allow_products);
        if (!l || !r) return std::nullopt;
        switch (e->op) {
          case '+':
            return *l + *r;
          case '-':
            return *l - *r;
          case '*':
            if (l->is_constant()) return *r * l->constant_term();
            if (r->is_constant()) return *l * r->constant_term();
            if (!allow_products) return std::nullopt;
            return AffineExpr::of(Atom::app("*", {*l, *r}));
          case '/':
            if (l->is_constant() && r->is_constant() && r->constant_term() != 0 &&
                l->constant_term() % r->constant_term() == 0) {
              return AffineExpr::constant(l->constant_term() / r->constant_term());
            }
            return std::nullopt;
        }
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  AffineExpr affine(const PE& e) const {
    auto a = try_affine(e, true);
    if (!a) throw ParseError("expected an affine integer expression", e->pos);
    return *a;
  }

  Rational fold(const PE& e) const {
    switch (e->kind) {
      case PExpr::kNum:
        return e->num;
      case PExpr::kNeg:
        return -fold(e->kids[0]);
      case PExpr::kBin: {
        Rational l = fold(e->kids[0]), r = fold(e->kids[1]);
        switch (e->op) {
          case '+':
            return l + r;
          case '-':
            return l - r;
          case '*':
            return l * r;
          default:
            if (r == 0) throw ParseError("division by zero", e->pos);
            return l / r;
        }
      }
      default:
        throw ParseError("not a constant", e->pos);
    }
  }

  ValExpr value(const PE& e) const {
    if (!has_names(e)) return ValExpr::constant(fold(e));
    if (!has_calls_or_decls(e)) {
      auto a = try_affine(e, false);
      if (a) return ValExpr::index(*a);
    }
    switch (e->kind) {
      case PExpr::kNum:
        return ValExpr::constant(e->num);
      case PExpr::kName:
        if (is_value_name(e->name)) return ValExpr::read(Ref{e->name, {}});
        return ValExpr::index(AffineExpr::var(e->name));
      case PExpr::kCall: {
        if (decls.count(e->name)) {
          Ref r{e->name, {}};
          for (const auto& k : e->kids) r.indices.push_back(affine(k));
          return ValExpr::read(std::move(r));
        }
        std::vector<ValExpr> args;
        for (const auto& k : e->kids) args.push_back(value(k));
        return ValExpr::apply(e->name, std::move(args));
      }
      case PExpr::kNeg:
        return ValExpr::op('n', {value(e->kids[0])});
      case PExpr::kBin:
        return ValExpr::op(e->op, {value(e->kids[0]), value(e->kids[1])});
    }
    return ValExpr::constant(0);
  }

  // -- predicates -----------------------------------------------------------

  static Pred junction(bool conj, std::vector<Pred> parts) {
    if (parts.size() == 1) return parts[0];
    bool affine = true;
    for (const auto& p : parts) affine = affine && p.kind() == Pred::Kind::kAffine;
    if (affine) {
      std::vector<Formula> fs;
      for (const auto& p : parts) fs.push_back(p.formula());
      return Pred::affine(conj ? Formula::conj(std::move(fs)) : Formula::disj(std::move(fs)));
    }
    return conj ? Pred::conj(std::move(parts)) : Pred::disj(std::move(parts));
  }

  Pred pred_or() {
    std::vector<Pred> parts = {pred_and()};
    while (peek_ident("or")) {
      next();
      parts.push_back(pred_and());
    }
    return junction(false, std::move(parts));
  }

  Pred pred_and() {
    std::vector<Pred> parts = {pred_unary()};
    while (peek_ident("and")) {
      next();
      parts.push_back(pred_unary());
    }
    return junction(true, std::move(parts));
  }

  Pred pred_unary() {
    if (peek_ident("not")) {
      next();
      return Pred::negation(pred_unary());
    }
    if (peek_ident("true")) {
      next();
      return Pred::affine(Formula::truth());
    }
    if (peek_ident("false")) {
      next();
      return Pred::affine(Formula::falsity());
    }
    if (peek_ident("exists")) {
      Position at = next().pos;
      std::vector<std::string> vars;
      do {
        vars.push_back(ident());
      } while (accept(","));
      expect(":");
      Pred body = pred_or();
      if (!body.is_affine()) throw ParseError("value comparison under exists", at);
      return Pred::affine(Formula::exists(vars, body.to_formula()));
    }
    if (is("(")) {
      size_t mark = pos_;
      try {
        next();
        Pred inner = pred_or();
        expect(")");
        static const std::set<std::string> kCont = {
            "<", "<=", ">", ">=", "=", "==", "!=", "+", "-", "*", "/"};
        bool continues =
            (cur().kind == Tok::kPunct && kCont.count(cur().text)) || peek_ident("mod");
        if (!continues) return inner;
      } catch (const ParseError&) {
      }
      pos_ = mark;
    }
    return comparison();
  }

  static std::optional<Rel> relation(const Token& t) {
    if (t.kind != Tok::kPunct) return std::nullopt;
    if (t.text == "<") return Rel::kLt;
    if (t.text == "<=") return Rel::kLe;
    if (t.text == ">") return Rel::kGt;
    if (t.text == ">=") return Rel::kGe;
    if (t.text == "=" || t.text == "==") return Rel::kEq;
    if (t.text == "!=") return Rel::kNe;
    return std::nullopt;
  }

  Pred comparison() {
    Position at = cur().pos;
    PE first = arith();
    if (peek_ident("mod")) {
      next();
      Int m = integer();
      expect("=");
      Int r = integer();
      if (m <= 0) throw ParseError("modulus must be positive", at);
      return Pred::affine(Formula::divides(m, affine(first), r));
    }
    std::vector<Pred> parts;
    PE l = first;
    while (auto rel = relation(cur())) {
      next();
      PE r = arith();
      if (!has_value_reads(l) && !has_value_reads(r)) {
        parts.push_back(Pred::affine(Formula::cmp(affine(l), *rel, affine(r))));
      } else {
        parts.push_back(Pred::value(value(l), *rel, value(r)));
      }
      l = r;
    }
    if (parts.empty()) throw ParseError("expected comparison", cur().pos);
    return junction(true, std::move(parts));
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  Program* program_ = nullptr;
};

}  // namespace

Program parse_program(const std::string& text) {
  Parser parser(text);
  parser.prescan();
  Program p = parser.program();
  for (const auto& d : check_well_formed(p)) {
    if (d.message.rfind("duplicate", 0) == 0 || d.message.rfind("arity mismatch", 0) == 0) {
      throw ParseError(d.message, d.pos);
    }
  }
  return p;
}

namespace {

Parser context_parser(const std::string& text, const Program& p) {
  Parser parser(text);
  for (const auto& d : p.decls) parser.decls[d.name] = {d.elem == ElemKind::kInt};
  return parser;
}

}  // namespace

Formula parse_formula(const std::string& text, const Program& p) {
  Parser parser = context_parser(text, p);
  Formula f = parser.formula();
  if (!parser.at_end()) throw ParseError("trailing input in formula", parser.cur().pos);
  return f;
}

AffineExpr parse_affine(const std::string& text, const Program& p) {
  Parser parser = context_parser(text, p);
  AffineExpr e = parser.affine_expr();
  if (!parser.at_end()) throw ParseError("trailing input in expression", parser.cur().pos);
  return e;
}

void parse_assumption(const std::string& text, const Program& p, std::vector<Formula>& ground,
                      std::vector<UniversalFact>& facts) {
  Parser parser = context_parser(text, p);
  parser.assumption(ground, facts);
  if (!parser.at_end()) throw ParseError("trailing input in assumption", parser.cur().pos);
}

}  // namespace fsa
