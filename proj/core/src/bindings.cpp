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

#include "fsa/bindings.hpp"

#include <algorithm>

namespace fsa {

Formula UniversalFact::range_formula() const {
  std::vector<Formula> parts;
  for (const auto& r : ranges) {
    parts.push_back(Formula::cmp(r.lo, Rel::kLe, AffineExpr::var(r.var)));
    parts.push_back(Formula::cmp(AffineExpr::var(r.var), Rel::kLe, r.hi));
  }
  return Formula::conj(std::move(parts));
}

std::string UniversalFact::str() const {
  std::string s;
  for (const auto& r : ranges) {
    s += "forall " + r.var + " in [" + r.lo.str() + ", " + r.hi.str() + "]: ";
  }
  return s + conclusion.str();
}

Bindings Bindings::with(const Formula& extra) const {
  Bindings b = *this;
  b.ground = ground && extra;
  return b;
}

void SkolemTable::add(const Atom& term) {
  if (term.is_symbol() || contains(term)) return;
  for (const auto& a : term.args()) add_all(a);
  terms_.push_back(term);
}

void SkolemTable::add_all(const AffineExpr& e) {
  std::vector<Atom> apps;
  e.collect_apps(apps);
  for (const auto& a : apps) add(a);
}

void SkolemTable::add_all(const Formula& f) {
  std::vector<Atom> apps;
  f.collect_apps(apps);
  for (const auto& a : apps) add(a);
}

bool SkolemTable::contains(const Atom& term) const {
  return std::any_of(terms_.begin(), terms_.end(), [&](const Atom& t) { return t == term; });
}

AffineExpr skolemize(const AffineExpr& ix, SkolemTable& table) {
  table.add_all(ix);
  return ix;
}

namespace {

// Opaque terms of the conclusion whose arguments are exactly bound variables.
std::vector<Atom> fact_patterns(const UniversalFact& fact) {
  std::vector<Atom> apps, out;
  fact.conclusion.collect_apps(apps);
  for (const auto& a : apps) {
    bool pattern = !a.args().empty();
    for (const auto& arg : a.args()) {
      bool bound = arg.is_symbol() &&
                   std::any_of(fact.ranges.begin(), fact.ranges.end(),
                               [&](const auto& r) { return r.var == arg.terms()[0].first.name(); });
      pattern = pattern && bound;
    }
    if (pattern) out.push_back(a);
  }
  return out;
}

}  // namespace

Formula instantiate_bindings(const Bindings& b, const SkolemTable& table) {
  std::vector<Formula> parts = {b.ground};
  for (const auto& fact : b.facts) {
    for (const auto& pat : fact_patterns(fact)) {
      for (const auto& term : table.terms()) {
        if (term.name() != pat.name() || term.args().size() != pat.args().size()) {
          continue;
        }
        Substitution sub;
        bool consistent = true;
        for (size_t i = 0; i < pat.args().size(); ++i) {
          const std::string& v = pat.args()[i].terms()[0].first.name();
          auto [it, fresh] = sub.emplace(v, term.args()[i]);
          if (!fresh && it->second != term.args()[i]) consistent = false;
        }
        if (!consistent || sub.size() != fact.ranges.size()) continue;
        parts.push_back(Formula::implication(fact.range_formula().substitute(sub),
                                             fact.conclusion.substitute(sub)));
      }
    }
  }
  return Formula::conj(std::move(parts));
}

}  // namespace fsa
