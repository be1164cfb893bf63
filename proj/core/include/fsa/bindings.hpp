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

#pragma once

#include <string>
#include <vector>

#include "fsa/affine.hpp"

namespace fsa {

// forall v1 in [lo1, hi1], ...: conclusion
struct UniversalFact {
  struct Range {
    std::string var;
    AffineExpr lo, hi;
  };
  std::vector<Range> ranges;
  Formula conclusion;

  Formula range_formula() const;
  std::string str() const;
};

// Constraints on the free symbols of an analysis.
struct Bindings {
  Formula ground;
  std::vector<UniversalFact> facts;

  Bindings with(const Formula& extra) const;
};

// Registry of opaque index terms met during one analysis. Terms are keyed by
// their canonical text, so p(l) seen twice is one entry.
class SkolemTable {
 public:
  void add(const Atom& term);
  void add_all(const AffineExpr& e);
  void add_all(const Formula& f);
  bool contains(const Atom& term) const;
  const std::vector<Atom>& terms() const { return terms_; }

 private:
  std::vector<Atom> terms_;
};

// Records the opaque subterms of `ix` and returns it. Opaque terms already
// behave as integer unknowns in the solver, so no renaming is needed.
AffineExpr skolemize(const AffineExpr& ix, SkolemTable& table);

// b.ground and every fact instantiated at each matching table entry.
Formula instantiate_bindings(const Bindings& b, const SkolemTable& table);

}  // namespace fsa
