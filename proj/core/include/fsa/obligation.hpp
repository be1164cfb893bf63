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

#include "fsa/bindings.hpp"
#include "fsa/lang.hpp"

namespace fsa {

// commute(left, right) must hold for every valuation of the instance
// symbols allowed by `bindings`.
struct Obligation {
  Stmt left = Stmt::seq({});
  Stmt right = Stmt::seq({});
  std::string left_name;   // e.g. "S1(l)"
  std::string right_name;  // e.g. "S2(m)"
  Bindings bindings;
  std::set<std::string> live;
  std::string provenance;  // transformation and instance pair
  // The original program runs the right instance before the left one.
  bool right_first = false;

  std::string str() const;
};

}  // namespace fsa
