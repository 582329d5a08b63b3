#pragma once

// Exact and binary64 arithmetic over the value domain shared by the parser,
// the step engine and the scorer.
//
// Three representations exist:
//   WideInt  - arbitrary precision integer
//   Fraction - numerator/denominator pair, denominator > 0, not implicitly reduced
//   Dec64    - an IEEE-754 double, always finite
//
// Mixing an exact value with a Dec64 converts the exact value to the nearest
// double (round-half-even on the exact rational) and continues in binary64.

#include <bit>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>

#include <boost/multiprecision/cpp_int.hpp>

#include "stepwise/error.hpp"

namespace stepwise {

namespace mp = boost::multiprecision;

/// Correctly rounded (nearest, ties to even) conversion of num/den to binary64.
/// den must be positive. Results outside the double range come back infinite.
inline double rational_to_double(const mp::cpp_int& num, const mp::cpp_int& den) {
  if (num.is_zero()) return 0.0;
  const bool negative = num.sign() < 0;
  mp::cpp_int n = mp::abs(num);
  mp::cpp_int d = den;
  // Scale so the integer quotient carries 55 or 56 significant bits.
  const long shift = 55 - (static_cast<long>(mp::msb(n)) - static_cast<long>(mp::msb(d)));
  if (shift >= 0) {
    n <<= static_cast<unsigned>(shift);
  } else {
    d <<= static_cast<unsigned>(-shift);
  }
  mp::cpp_int q, r;
  mp::divide_qr(n, d, q, r);
  const auto quotient = q.convert_to<std::uint64_t>();
  const bool sticky = !r.is_zero();
  const int bits = 64 - std::countl_zero(quotient);
  const int extra = bits - 53;
  std::uint64_t mantissa = quotient >> extra;
  const std::uint64_t rest = quotient & ((std::uint64_t{1} << extra) - 1);
  const std::uint64_t half = std::uint64_t{1} << (extra - 1);
  if (rest > half || (rest == half && (sticky || (mantissa & 1U)))) ++mantissa;
  const double magnitude =
      std::ldexp(static_cast<double>(mantissa), static_cast<int>(extra - shift));
  return negative ? -magnitude : magnitude;
}

class WideInt {
 public:
  WideInt() = default;
  WideInt(long long v) : v_(v) {}  // NOLINT(google-explicit-constructor)
  explicit WideInt(mp::cpp_int v) : v_(std::move(v)) {}

  /// Parses `[-]digits`. Leading zeros are accepted.
  static WideInt parse(std::string_view text) {
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
      negative = text.front() == '-';
      text.remove_prefix(1);
    }
    if (text.empty()) throw Error(ErrorCode::Format, "empty integer");
    mp::cpp_int v;
    for (char c : text) {
      if (c < '0' || c > '9') throw Error(ErrorCode::Format, "bad integer digit");
      v *= 10;
      v += c - '0';
    }
    return WideInt(negative ? mp::cpp_int(-v) : v);
  }

  int sign() const { return v_.sign(); }
  bool is_zero() const { return v_.is_zero(); }
  const mp::cpp_int& raw() const { return v_; }

  std::string to_string() const { return v_.str(); }
  double to_double() const { return rational_to_double(v_, 1); }

  /// Number of decimal digits in the magnitude (0 has one digit).
  std::size_t digit_count() const {
    std::string s = mp::cpp_int(mp::abs(v_)).str();
    return s.size();
  }

  WideInt abs() const { return WideInt(mp::abs(v_)); }
  WideInt operator-() const { return WideInt(mp::cpp_int(-v_)); }

  friend WideInt operator+(const WideInt& a, const WideInt& b) { return WideInt(mp::cpp_int(a.v_ + b.v_)); }
  friend WideInt operator-(const WideInt& a, const WideInt& b) { return WideInt(mp::cpp_int(a.v_ - b.v_)); }
  friend WideInt operator*(const WideInt& a, const WideInt& b) { return WideInt(mp::cpp_int(a.v_ * b.v_)); }
  /// Truncating division; callers check for zero.
  friend WideInt operator/(const WideInt& a, const WideInt& b) { return WideInt(mp::cpp_int(a.v_ / b.v_)); }
  friend WideInt operator%(const WideInt& a, const WideInt& b) { return WideInt(mp::cpp_int(a.v_ % b.v_)); }
  friend bool operator==(const WideInt& a, const WideInt& b) { return a.v_ == b.v_; }
  friend std::strong_ordering operator<=>(const WideInt& a, const WideInt& b) {
    if (a.v_ < b.v_) return std::strong_ordering::less;
    if (a.v_ > b.v_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  mp::cpp_int v_;
};

inline WideInt gcd(const WideInt& a, const WideInt& b) {
  return WideInt(mp::gcd(mp::abs(a.raw()), mp::abs(b.raw())));
}

class Fraction {
 public:
  Fraction() : num_(0), den_(1) {}
  /// Normalizes the sign onto the numerator. A zero denominator is a DivByZero.
  Fraction(WideInt num, WideInt den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) {
      throw Error(ErrorCode::DivByZero, num_.to_string() + "/0");
    }
    if (den_.sign() < 0) {
      num_ = -num_;
      den_ = -den_;
    }
  }

  const WideInt& num() const { return num_; }
  const WideInt& den() const { return den_; }

  bool is_canonical() const { return gcd(num_, den_) == WideInt(1); }

  Fraction reduced() const {
    WideInt g = gcd(num_, den_);
    if (g.is_zero() || g == WideInt(1)) return *this;
    return Fraction(num_ / g, den_ / g);
  }

  double to_double() const { return rational_to_double(num_.raw(), den_.raw()); }
  std::string to_string() const { return num_.to_string() + "/" + den_.to_string(); }

  /// Value equality (cross multiplication), not representation equality.
  friend bool operator==(const Fraction& a, const Fraction& b) {
    return a.num_ * b.den_ == b.num_ * a.den_;
  }

 private:
  WideInt num_;
  WideInt den_;
};

/// A finite binary64 value.
class Dec64 {
 public:
  explicit Dec64(double v) : v_(v == 0.0 ? 0.0 : v) {  // no negative zero
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "result is not a finite binary64 value");
  }
  double value() const { return v_; }

  /// Parses a plain decimal such as `-12.5`; exponent notation is rejected.
  static Dec64 parse(std::string_view text) {
    for (char c : text) {
      if (c == 'e' || c == 'E' || c == 'n' || c == 'N' || c == 'i' || c == 'I') {
        throw Error(ErrorCode::Format, "unsupported decimal literal '" + std::string(text) + "'");
      }
    }
    std::string_view body = text;
    if (!body.empty() && body.front() == '+') body.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
    if (ec != std::errc() || ptr != body.data() + body.size()) {
      throw Error(ErrorCode::Format, "bad decimal literal '" + std::string(text) + "'");
    }
    return Dec64(v);
  }

  /// Bit-for-bit comparison.
  friend bool operator==(const Dec64& a, const Dec64& b) {
    return std::bit_cast<std::uint64_t>(a.v_) == std::bit_cast<std::uint64_t>(b.v_);
  }

 private:
  double v_;
};

/// Shortest decimal that round-trips to `v`, always in positional notation.
/// Integral values keep a trailing `.0` so they stay distinguishable from
/// exact integers.
inline std::string render_dec64(double v) {
  if (std::fabs(v) >= 1e21) {
    throw Error(ErrorCode::RenderOverflow, "magnitude too large to render without exponent");
  }
  char buf[512];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc()) throw Error(ErrorCode::RenderOverflow, "decimal rendering failed");
  std::string out(buf, ptr);
  if (out.find('.') == std::string::npos) out += ".0";
  return out;
}

/// Surface format a literal came from. Metadata only; arithmetic never reads it.
enum class Origin { Integer, Decimal, Fraction, Percent, Negative };

/// How integer division behaves when the quotient is not integral.
enum class DivisionPolicy {
  DecimalFallback,  ///< exact when divisible, otherwise Dec64
  Exact,            ///< exact when divisible, otherwise Fraction
};

class NumberValue {
 public:
  using Storage = std::variant<WideInt, Fraction, Dec64>;

  NumberValue() : v_(WideInt(0)), origin_(Origin::Integer) {}
  NumberValue(WideInt v, Origin o = Origin::Integer) : v_(std::move(v)), origin_(o) {}  // NOLINT
  NumberValue(Fraction v, Origin o = Origin::Fraction) : v_(std::move(v)), origin_(o) {}  // NOLINT
  NumberValue(Dec64 v, Origin o = Origin::Decimal) : v_(v), origin_(o) {}  // NOLINT

  const Storage& storage() const { return v_; }
  Origin origin() const { return origin_; }
  NumberValue with_origin(Origin o) const {
    NumberValue copy = *this;
    copy.origin_ = o;
    return copy;
  }

  bool is_int() const { return std::holds_alternative<WideInt>(v_); }
  bool is_fraction() const { return std::holds_alternative<Fraction>(v_); }
  bool is_dec() const { return std::holds_alternative<Dec64>(v_); }
  bool is_exact() const { return !is_dec(); }

  const WideInt& as_int() const { return std::get<WideInt>(v_); }
  const Fraction& as_fraction() const { return std::get<Fraction>(v_); }
  const Dec64& as_dec() const { return std::get<Dec64>(v_); }

  bool is_zero() const {
    return std::visit(
        [](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, WideInt>) return x.is_zero();
          else if constexpr (std::is_same_v<T, Fraction>) return x.num().is_zero();
          else return x.value() == 0.0;
        },
        v_);
  }

  /// True for values below zero, and for the binary64 negative zero.
  bool is_negative() const {
    return std::visit(
        [](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, WideInt>) return x.sign() < 0;
          else if constexpr (std::is_same_v<T, Fraction>) return x.num().sign() < 0;
          else return std::signbit(x.value());
        },
        v_);
  }

  double to_double() const {
    return std::visit(
        [](const auto& x) -> double {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Dec64>) return x.value();
          else return x.to_double();
        },
        v_);
  }

  /// Exact value as a fraction; only valid when is_exact().
  Fraction to_fraction() const {
    if (is_int()) return Fraction(as_int(), WideInt(1));
    return as_fraction();
  }

 private:
  Storage v_;
  Origin origin_;
};

namespace detail {

inline Fraction frac_add(const Fraction& a, const Fraction& b, bool subtract) {
  if (a.den() == b.den()) {
    return Fraction(subtract ? a.num() - b.num() : a.num() + b.num(), a.den());
  }
  WideInt lhs = a.num() * b.den();
  WideInt rhs = b.num() * a.den();
  return Fraction(subtract ? lhs - rhs : lhs + rhs, a.den() * b.den());
}

inline Dec64 to_dec(const NumberValue& v) { return Dec64(v.to_double()); }

}  // namespace detail

inline std::string render(const NumberValue& v);

inline NumberValue negate(const NumberValue& v) {
  return std::visit(
      [&](const auto& x) -> NumberValue {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, WideInt>) return NumberValue(-x, v.origin());
        else if constexpr (std::is_same_v<T, Fraction>) return NumberValue(Fraction(-x.num(), x.den()), v.origin());
        else return NumberValue(Dec64(-x.value()), v.origin());
      },
      v.storage());
}

inline NumberValue add(const NumberValue& a, const NumberValue& b) {
  if (a.is_dec() || b.is_dec()) return Dec64(detail::to_dec(a).value() + detail::to_dec(b).value());
  if (a.is_int() && b.is_int()) return a.as_int() + b.as_int();
  return detail::frac_add(a.to_fraction(), b.to_fraction(), false);
}

inline NumberValue sub(const NumberValue& a, const NumberValue& b) {
  if (a.is_dec() || b.is_dec()) return Dec64(detail::to_dec(a).value() - detail::to_dec(b).value());
  if (a.is_int() && b.is_int()) return a.as_int() - b.as_int();
  return detail::frac_add(a.to_fraction(), b.to_fraction(), true);
}

inline NumberValue mul(const NumberValue& a, const NumberValue& b) {
  if (a.is_dec() || b.is_dec()) return Dec64(detail::to_dec(a).value() * detail::to_dec(b).value());
  if (a.is_int() && b.is_int()) return a.as_int() * b.as_int();
  Fraction x = a.to_fraction();
  Fraction y = b.to_fraction();
  return Fraction(x.num() * y.num(), x.den() * y.den());
}

inline NumberValue div(const NumberValue& a, const NumberValue& b,
                       DivisionPolicy policy = DivisionPolicy::DecimalFallback) {
  if (b.is_zero()) {
    throw Error(ErrorCode::DivByZero, "division of " + render(a) + " by zero");
  }
  if (a.is_dec() || b.is_dec()) return Dec64(detail::to_dec(a).value() / detail::to_dec(b).value());
  if (a.is_int() && b.is_int()) {
    const WideInt& x = a.as_int();
    const WideInt& y = b.as_int();
    if ((x % y).is_zero()) return x / y;
    if (policy == DivisionPolicy::Exact) return Fraction(x, y);
    if (y.sign() < 0) return Dec64(rational_to_double((-x).raw(), (-y).raw()));
    return Dec64(rational_to_double(x.raw(), y.raw()));
  }
  Fraction x = a.to_fraction();
  Fraction y = b.to_fraction();
  return Fraction(x.num() * y.den(), x.den() * y.num());
}

/// Largest result size pow() will materialize, in bits.
inline constexpr std::size_t kMaxPowBits = std::size_t{1} << 20;

inline NumberValue pow(const NumberValue& base, const NumberValue& exponent) {
  if (!exponent.is_int()) {
    throw Error(ErrorCode::UnsupportedExponent, "exponent " + render(exponent) + " is not an integer");
  }
  const WideInt& e = exponent.as_int();
  if (e.sign() < 0) {
    throw Error(ErrorCode::UnsupportedExponent, "negative exponent " + e.to_string());
  }
  if (e.is_zero()) return WideInt(1);
  if (base.is_dec()) {
    double r = std::pow(base.as_dec().value(), e.to_double());
    return Dec64(r);
  }
  auto checked_pow = [&](const WideInt& b) -> WideInt {
    const mp::cpp_int& raw = b.raw();
    if (raw.is_zero() || mp::abs(raw) == 1) {
      if (raw.is_zero()) return WideInt(0);
      bool odd = (e.raw() & 1) != 0;
      return WideInt(raw.sign() < 0 && odd ? -1 : 1);
    }
    const std::size_t bits = mp::msb(mp::cpp_int(mp::abs(raw))) + 1;
    if (e > WideInt(static_cast<long long>(kMaxPowBits)) ||
        bits * e.raw().convert_to<std::size_t>() > kMaxPowBits) {
      throw Error(ErrorCode::UnsupportedExponent, "power result too large");
    }
    return WideInt(mp::cpp_int(mp::pow(raw, e.raw().convert_to<unsigned>())));
  };
  if (base.is_int()) return checked_pow(base.as_int());
  const Fraction& f = base.as_fraction();
  return Fraction(checked_pow(f.num()), checked_pow(f.den()));
}

inline Fraction reduce(const Fraction& f) { return f.reduced(); }

/// Value of a percent literal: the number divided by 100, exact when divisible.
inline NumberValue percent_to_decimal(const NumberValue& p) {
  if (p.is_int()) {
    const WideInt& n = p.as_int();
    if ((n % WideInt(100)).is_zero()) return NumberValue(n / WideInt(100), Origin::Integer);
    return NumberValue(Dec64(rational_to_double(n.raw(), 100)), Origin::Decimal);
  }
  if (p.is_fraction()) {
    const Fraction& f = p.as_fraction();
    return NumberValue(Fraction(f.num(), f.den() * WideInt(100)), Origin::Fraction);
  }
  return NumberValue(Dec64(p.as_dec().value() / 100.0), Origin::Decimal);
}

inline std::string render(const NumberValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Dec64>) return render_dec64(x.value());
        else return x.to_string();
      },
      v.storage());
}

/// Exact values compare by value across WideInt/Fraction; Dec64 compares
/// bit-for-bit and never equals an exact value.
inline bool same_value(const NumberValue& a, const NumberValue& b) {
  if (a.is_dec() != b.is_dec()) return false;
  if (a.is_dec()) return a.as_dec() == b.as_dec();
  if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
  return a.to_fraction() == b.to_fraction();
}

}  // namespace stepwise
