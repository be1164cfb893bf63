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

#include <sstream>

#include "fsa/lang.hpp"

namespace fsa {

namespace {

std::string bound(const std::vector<AffineExpr>& es, const char* fn) {
  if (es.size() == 1) return es[0].str();
  std::string s = std::string(fn) + "(";
  for (size_t i = 0; i < es.size(); ++i) {
    if (i) s += ", ";
    s += es[i].str();
  }
  return s + ")";
}

void emit(std::ostringstream& out, const Stmt& s, int indent);

void emit_parts(std::ostringstream& out, const Stmt& seq, int indent) {
  for (const auto& p : seq.parts()) emit(out, p, indent);
}

void emit(std::ostringstream& out, const Stmt& s, int indent) {
  std::string pad(indent, ' ');
  out << pad;
  if (!s.label().empty()) out << s.label() << ": ";
  switch (s.kind()) {
    case Stmt::Kind::kSeq:
      out << "{\n";
      emit_parts(out, s, indent + 2);
      out << pad << "}\n";
      break;
    case Stmt::Kind::kFor: {
      bool down = !s.step().is_symbolic() && s.step().literal < 0;
      out << "for " << s.var() << " = ";
      if (down) {
        out << bound(s.upper(), "min") << " to " << bound(s.lower(), "max");
      } else {
        out << bound(s.lower(), "max") << " to " << bound(s.upper(), "min");
      }
      if (s.step().is_symbolic() || s.step().literal != 1) out << " step " << s.step().str();
      out << " {\n";
      emit_parts(out, s.body(), indent + 2);
      out << pad << "}\n";
      break;
    }
    case Stmt::Kind::kIf:
      out << "if (" << s.cond().str() << ") {\n";
      emit_parts(out, s.then_branch(), indent + 2);
      out << pad << "}";
      if (s.has_else()) {
        out << " else {\n";
        emit_parts(out, s.else_branch(), indent + 2);
        out << pad << "}";
      }
      out << "\n";
      break;
    case Stmt::Kind::kAssign:
      out << s.lhs().str() << " = " << s.rhs().str() << ";\n";
      break;
  }
}

const char* io_name(IoRole io) {
  switch (io) {
    case IoRole::kIn:
      return "in";
    case IoRole::kOut:
      return "out";
    case IoRole::kInOut:
      return "inout";
  }
  return "inout";
}

}  // namespace

std::string print_stmt(const Stmt& s, int indent) {
  std::ostringstream out;
  emit(out, s, indent);
  return out.str();
}

std::string print_program(const Program& p) {
  std::ostringstream out;
  out << "program " << p.name << "(";
  for (size_t i = 0; i < p.params.size(); ++i) out << (i ? ", " : "") << p.params[i];
  out << ") {\n";
  for (const auto& a : p.assumes) out << "  assume " << a.str() << ";\n";
  for (const auto& f : p.facts) out << "  assume " << f.str() << ";\n";
  for (const auto& d : p.decls) {
    out << "  " << (d.is_scalar ? "scalar " : "array ") << d.name;
    for (const auto& dim : d.dims) out << "[" << dim.lo.str() << ".." << dim.hi.str() << "]";
    const char* elem = d.elem == ElemKind::kInt ? "int" : "real";
    if (!d.is_scalar || d.elem != ElemKind::kReal || d.io != IoRole::kInOut) {
      out << ": " << elem << " " << io_name(d.io);
    }
    out << ";\n";
  }
  out << "  outputs {";
  for (size_t i = 0; i < p.outputs.size(); ++i) out << (i ? ", " : "") << p.outputs[i];
  out << "};\n";
  if (p.body.kind() == Stmt::Kind::kSeq && p.body.label().empty()) {
    emit_parts(out, p.body, 2);
  } else {
    emit(out, p.body, 2);
  }
  out << "}\n";
  return out.str();
}

}  // namespace fsa
