#pragma once

// Independent reference implementations used only by the tests. None of
// them share code with the library: big integers are decimal strings with
// schoolbook arithmetic, and decimal conversion goes through strtod.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Non-negative decimal strings without leading zeros ("0" for zero).

inline std::string strip(std::string s) {
  const auto nz = s.find_first_not_of('0');
  return nz == std::string::npos ? "0" : s.substr(nz);
}

inline int cmp(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return a < b ? -1 : (a > b ? 1 : 0);
}

inline std::string add(const std::string& a, const std::string& b) {
  std::string r;
  int carry = 0;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()) || carry; ++i) {
    int s = carry;
    if (i < a.size()) s += a[a.size() - 1 - i] - '0';
    if (i < b.size()) s += b[b.size() - 1 - i] - '0';
    r += static_cast<char>('0' + s % 10);
    carry = s / 10;
  }
  std::reverse(r.begin(), r.end());
  return strip(r);
}

/// a - b for a >= b.
inline std::string sub(const std::string& a, const std::string& b) {
  std::string r;
  int borrow = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    int d = a[a.size() - 1 - i] - '0' - borrow;
    if (i < b.size()) d -= b[b.size() - 1 - i] - '0';
    borrow = d < 0;
    if (d < 0) d += 10;
    r += static_cast<char>('0' + d);
  }
  std::reverse(r.begin(), r.end());
  return strip(r);
}

inline std::string mul(const std::string& a, const std::string& b) {
  std::string r(a.size() + b.size(), 0);
  std::vector<int> acc(a.size() + b.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      acc[i + j + 1] += (a[i] - '0') * (b[j] - '0');
    }
  }
  for (std::size_t k = acc.size() - 1; k > 0; --k) {
    acc[k - 1] += acc[k] / 10;
    acc[k] %= 10;
  }
  for (std::size_t k = 0; k < acc.size(); ++k) r[k] = static_cast<char>('0' + acc[k]);
  return strip(r);
}

inline std::string pow(const std::string& base, unsigned exponent) {
  std::string r = "1";
  for (unsigned i = 0; i < exponent; ++i) r = mul(r, base);
  return r;
}

/// Signed values as (negative, magnitude).
struct Signed {
  bool negative = false;
  std::string mag = "0";
};

inline Signed parse_signed(const std::string& s) {
  if (!s.empty() && s[0] == '-') return {true, strip(s.substr(1))};
  return {false, strip(s)};
}

inline std::string to_string(const Signed& v) {
  return (v.negative && v.mag != "0" ? "-" : "") + v.mag;
}

inline Signed signed_add(const Signed& a, const Signed& b) {
  if (a.negative == b.negative) return {a.negative, add(a.mag, b.mag)};
  if (cmp(a.mag, b.mag) >= 0) return {a.negative, sub(a.mag, b.mag)};
  return {b.negative, sub(b.mag, a.mag)};
}

inline Signed signed_sub(const Signed& a, Signed b) {
  b.negative = !b.negative;
  return signed_add(a, b);
}

inline Signed signed_mul(const Signed& a, const Signed& b) { return {a.negative != b.negative, mul(a.mag, b.mag)}; }

/// Long division of magnitudes: quotient digits plus `frac_digits` more.
inline std::string long_divide(const std::string& num, const std::string& den, int frac_digits) {
  std::string q, rem = "0";
  auto step = [&](char digit) {
    rem = strip(rem + digit);
    int d = 0;
    while (cmp(rem, den) >= 0) {
      rem = sub(rem, den);
      ++d;
    }
    q += static_cast<char>('0' + d);
  };
  for (char c : num) step(c);
  std::string out = strip(q);
  if (frac_digits > 0) {
    q.clear();
    for (int i = 0; i < frac_digits; ++i) step('0');
    out += "." + q;
    if (rem != "0") out += "1";  // sticky digit so strtod never sees an exact tie that isn't one
  }
  return out;
}

/// Correctly rounded num/den in binary64 via a 60-significant-digit
/// decimal expansion and strtod.
inline double divide(const Signed& num, const Signed& den) {
  const std::string text = long_divide(num.mag, den.mag, 60 + static_cast<int>(den.mag.size()));
  const double v = std::strtod(text.c_str(), nullptr);
  return (num.negative != den.negative) ? -v : v;
}

/// Round a plain decimal string half away from zero to two places and
/// return the result scaled by 100 as a signed integer string.
inline std::string round_cents(const std::string& decimal) {
  Signed v = parse_signed(decimal);
  std::string s = v.mag;
  std::string int_part = s, frac;
  if (auto dot = decimal.find('.'); dot != std::string::npos) {
    std::string body = v.negative ? decimal.substr(1) : decimal;
    dot = body.find('.');
    int_part = body.substr(0, dot);
    frac = body.substr(dot + 1);
  }
  while (frac.size() < 3) frac += '0';
  std::string cents = strip(int_part + frac.substr(0, 2));
  if (frac[2] >= '5') cents = add(cents, "1");
  return to_string({v.negative, cents});
}

}  // namespace oracle
