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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsa/lang.hpp"
#include "fsa/numeric.hpp"

namespace fsa {

struct Store {
  std::map<std::string, Int> params;
  // Scalars use the empty index.
  std::map<std::string, std::map<std::vector<Int>, Rational>> cells;

  const Rational& get(const std::string& name, const std::vector<Int>& index) const;
  void set(const std::string& name, const std::vector<Int>& index, Rational v);
  bool operator==(const Store& o) const { return params == o.params && cells == o.cells; }
};

class EvalError : public Error {
 public:
  EvalError(const std::string& msg, std::string label)
      : Error(label.empty() ? msg : msg + " in " + label), label_(std::move(label)) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

// Concrete extents of `decl` under the parameter values of `s`.
std::vector<std::pair<Int, Int>> extents(const ArrayDecl& decl, const Store& s);

Store evaluate(const Program& p, const Store& in);

// Assumptions and facts of `p` (plus `extra`) hold in `s`.
bool satisfies(const Program& p, const Store& s, const Bindings& extra = {});

struct InstanceSpec {
  // Fixed parameter values; others are drawn from `ranges` or [1, max_param].
  std::map<std::string, Int> params;
  std::map<std::string, std::pair<Int, Int>> ranges;
  Int max_param = 8;
  Bindings extra;
  int attempts = 1000;
};

// Deterministic per seed. Throws Error when no valid instance is found.
Store gen_instance(const Program& p, const InstanceSpec& spec, uint64_t seed);

struct FuzzResult {
  bool equivalent = true;
  int trials = 0;
  int resampled = 0;
  std::optional<Store> counterexample;  // input store
  std::string diagnosis;
};

// Compares the declared outputs of p1 and p2 on random instances. Instances
// on which p1 itself fails are resampled.
FuzzResult equiv_fuzz(const Program& p1, const Program& p2, const InstanceSpec& spec, int trials,
                      uint64_t seed = 1);

// `name(i,j)=rational` lines; parameters and scalars as `name=value`.
std::string dump_store(const Store& s);
Store load_store(const std::string& text, const Program& p);

}  // namespace fsa
