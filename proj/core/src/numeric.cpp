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

#include "fsa/numeric.hpp"

#include <limits>

namespace fsa {

Int abs(const Int& v) { return v < 0 ? Int(-v) : v; }

Int gcd(const Int& a, const Int& b) {
  Int x = abs(a), y = abs(b);
  while (y != 0) {
    Int r = x % y;
    x = std::move(y);
    y = std::move(r);
  }
  return x;
}

Int lcm(const Int& a, const Int& b) {
  if (a == 0 || b == 0) return 0;
  return abs(a / gcd(a, b) * b);
}

Int floor_div(const Int& a, const Int& b) {
  Int q = a / b;  // truncates toward zero
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Int ceil_div(const Int& a, const Int& b) {
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

Int mod(const Int& a, const Int& m) {
  Int am = abs(m);
  Int r = a % am;
  if (r < 0) r += am;
  return r;
}

int64_t to_int64(const Int& v) {
  if (v > std::numeric_limits<int64_t>::max() || v < std::numeric_limits<int64_t>::min()) {
    throw Error("integer out of 64-bit range: " + v.str());
  }
  return v.convert_to<int64_t>();
}

std::string to_string(const Int& v) { return v.str(); }

std::string to_string(const Rational& v) {
  const Int num = boost::multiprecision::numerator(v);
  const Int den = boost::multiprecision::denominator(v);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw Error("empty rational literal");
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      Int num(s.substr(0, slash));
      Int den(s.substr(slash + 1));
      if (den == 0) throw Error("zero denominator in '" + s + "'");
      return Rational(num, den);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
      std::string whole = s.substr(0, dot);
      std::string frac = s.substr(dot + 1);
      bool neg = !whole.empty() && whole[0] == '-';
      if (neg) whole.erase(0, 1);
      if (whole.empty()) whole = "0";
      Int scale = 1;
      for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
      Int digits(whole + (frac.empty() ? "" : frac));
      Rational r(digits, scale);
      return neg ? Rational(-r) : r;
    }
    return Rational(Int(s));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error("malformed rational literal '" + s + "'");
  }
}

}  // namespace fsa
