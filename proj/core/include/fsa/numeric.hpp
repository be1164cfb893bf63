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

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fsa {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Int abs(const Int& v);
Int gcd(const Int& a, const Int& b);
Int lcm(const Int& a, const Int& b);
// Division rounding toward negative / positive infinity. `b` must be nonzero.
Int floor_div(const Int& a, const Int& b);
Int ceil_div(const Int& a, const Int& b);
// Euclidean remainder in [0, |m|).
Int mod(const Int& a, const Int& m);

int64_t to_int64(const Int& v);

std::string to_string(const Int& v);
std::string to_string(const Rational& v);

// Accepts "3", "-3", "3/4", "2.5".
Rational parse_rational(std::string_view text);

}  // namespace fsa
