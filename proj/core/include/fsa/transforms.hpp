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

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fsa/lang.hpp"
#include "fsa/obligation.hpp"

namespace fsa {

struct TransformSpec {
  enum class Kind {
    kReorder,
    kDistribute,
    kFuse,
    kReverse,
    kInterchange,
    kLinear,
    kStripmine,
    kSplit,
    kPeel,
    kTile,
  };

  Kind kind = Kind::kReorder;
  // Loops are named by label or by a unique loop variable.
  std::vector<std::string> loops;
  // kReorder: the two labels. kDistribute: labels of the first group.
  std::vector<std::string> labels;
  std::vector<std::string> second_group;  // kDistribute
  // kStripmine, kTile: block sizes, each a symbol or an integer literal.
  std::vector<std::string> blocks;
  std::string split_point;  // kSplit, affine text
  bool peel_first = true;
  std::vector<std::vector<Int>> matrix;  // kLinear, row major

  // Surface syntax, e.g. "distribute(j;S1|S2)".
  static TransformSpec parse(const std::string& text);
  std::string str() const;
};

// Statements in the transformed program executed in the opposite order
// relative to the original. Obligations are generated from the per-transformation
// legality table; rows whose condition is "true" produce none.
std::vector<Obligation> obligations_for(const Program& p, const TransformSpec& t);

Program apply(const Program& p, const TransformSpec& t);

// Inversions of `perm`, where perm[i-1] is the new position of statement i.
std::set<std::pair<int, int>> reordered_pairs(int n, const std::vector<int>& perm);

struct Dependence {
  std::string source, sink;
  std::string kind;  // flow, anti, output
  std::string array;
  std::string str() const;
};

struct DependenceReport {
  std::vector<Dependence> dependences;  // only those reordered by the transformation
  bool legal = true;
};

// Memory-based dependence test between the instance pairs that the
// transformation reorders. Opaque index terms are unconstrained.
DependenceReport dependence_legality(const Program& p, const TransformSpec& t);

}  // namespace fsa
