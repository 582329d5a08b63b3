#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "oracles.hpp"
#include "stepwise/numeric.hpp"

using namespace stepwise;

namespace {

std::string random_digits(std::mt19937_64& rng, int max_len) {
  std::uniform_int_distribution<int> len(1, max_len), digit(0, 9);
  std::string s(static_cast<std::size_t>(len(rng)), '0');
  for (char& c : s) c = static_cast<char>('0' + digit(rng));
  return oracle::strip(s);
}

NumberValue int_of(const std::string& s) { return WideInt::parse(s); }

}  // namespace

TEST(WideInt, ArithmeticMatchesSchoolbook) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const std::string a = (rng() & 1 ? "-" : "") + random_digits(rng, 40);
    const std::string b = (rng() & 1 ? "-" : "") + random_digits(rng, 40);
    const auto oa = oracle::parse_signed(a), ob = oracle::parse_signed(b);
    EXPECT_EQ(render(add(int_of(a), int_of(b))), oracle::to_string(oracle::signed_add(oa, ob)));
    EXPECT_EQ(render(sub(int_of(a), int_of(b))), oracle::to_string(oracle::signed_sub(oa, ob)));
    EXPECT_EQ(render(mul(int_of(a), int_of(b))), oracle::to_string(oracle::signed_mul(oa, ob)));
  }
}

TEST(WideInt, DigitCount) {
  EXPECT_EQ(WideInt(0).digit_count(), 1U);
  EXPECT_EQ(WideInt(-12345).digit_count(), 5U);
  EXPECT_EQ(WideInt::parse("000123").to_string(), "123");
}

TEST(RationalToDouble, MatchesDecimalExpansionOracle) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5000; ++i) {
    const std::string n = random_digits(rng, 14);
    std::string d = random_digits(rng, 8);
    if (d == "0") d = "7";
    const double got = rational_to_double(WideInt::parse(n).raw(), WideInt::parse(d).raw());
    const double want = oracle::divide({false, n}, {false, d});
    ASSERT_EQ(got, want) << n << "/" << d;
  }
}

TEST(RationalToDouble, TiesGoToEven) {
  // 2^53 + 1 sits exactly halfway between two doubles.
  mp::cpp_int n = (mp::cpp_int(1) << 53) + 1;
  EXPECT_EQ(rational_to_double(n, 1), 9007199254740992.0);
  mp::cpp_int m = (mp::cpp_int(1) << 53) + 3;
  EXPECT_EQ(rational_to_double(m, 1), 9007199254740996.0);
}

TEST(Division, PolicyAndPaperValue) {
  EXPECT_EQ(render(div(int_of("14031528"), int_of("7424"))), "1890.0226293103449");
  EXPECT_EQ(render(div(int_of("8"), int_of("1"))), "8");
  EXPECT_EQ(render(div(int_of("7"), int_of("-2"))), "-3.5");
  EXPECT_EQ(render(div(int_of("7"), int_of("2"), DivisionPolicy::Exact)), "7/2");
  EXPECT_EQ(render(div(int_of("4383"), int_of("7377"))), "0.5941439609597398");
}

TEST(Division, ByZeroIsAnError) {
  try {
    div(int_of("1"), int_of("0"));
    FAIL() << "expected DivByZero";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivByZero);
    EXPECT_TRUE(e.is_math_error());
  }
  EXPECT_THROW(div(NumberValue(Dec64(1.5)), NumberValue(Dec64(0.0))), Error);
  EXPECT_THROW(Fraction(WideInt(1), WideInt(0)), Error);
}

TEST(Pow, PaperValues) {
  EXPECT_EQ(render(pow(int_of("3"), int_of("9"))), "19683");
  EXPECT_EQ(render(pow(int_of("5170"), int_of("0"))), "1");
  EXPECT_EQ(render(pow(int_of("0"), int_of("0"))), "1");
  EXPECT_EQ(render(pow(int_of("1"), int_of("8756"))), "1");
  EXPECT_EQ(render(pow(int_of("93"), int_of("18"))), "270827695297250208363869180422467849");
  EXPECT_EQ(render(pow(int_of("100"), int_of("13"))), "100000000000000000000000000");
}

TEST(Pow, MatchesRepeatedMultiplication) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const std::string base = std::to_string(rng() % 10001);
    const unsigned e = static_cast<unsigned>(rng() % 101);
    EXPECT_EQ(render(pow(int_of(base), int_of(std::to_string(e)))), oracle::pow(base, e)) << base << "^" << e;
  }
}

TEST(Pow, UnsupportedExponents) {
  EXPECT_THROW(pow(int_of("2"), int_of("-1")), Error);
  EXPECT_THROW(pow(int_of("2"), NumberValue(Dec64(0.5))), Error);
  EXPECT_THROW(pow(int_of("2"), int_of("99999999")), Error);
}

TEST(Fraction, ReduceExamples) {
  EXPECT_EQ(reduce(Fraction(560, 1020)).to_string(), "28/51");
  EXPECT_EQ(reduce(Fraction(7, 30)).to_string(), "7/30");
  EXPECT_EQ(reduce(Fraction(392, 1680)).to_string(), "7/30");
  EXPECT_EQ(reduce(Fraction(14358, 9276)).to_string(), "2393/1546");
  EXPECT_EQ(reduce(Fraction(-4, 6)).to_string(), "-2/3");
  EXPECT_EQ(Fraction(3, -4).to_string(), "-3/4");
}

TEST(Fraction, ArithmeticIsUnreduced) {
  const NumberValue a = Fraction(9947, 9276), b = Fraction(4411, 9276);
  EXPECT_EQ(render(add(a, b)), "14358/9276");
  EXPECT_EQ(render(mul(NumberValue(Fraction(49, 24)), NumberValue(Fraction(8, 70)))), "392/1680");
  EXPECT_EQ(render(sub(NumberValue(Fraction(1, 2)), NumberValue(Fraction(1, 3)))), "1/6");
}

TEST(Percent, Examples) {
  EXPECT_EQ(render(percent_to_decimal(int_of("5483"))), "54.83");
  EXPECT_EQ(render(percent_to_decimal(int_of("100"))), "1");
  EXPECT_EQ(percent_to_decimal(int_of("3")).as_dec().value(), std::strtod("0.03", nullptr));
  EXPECT_EQ(render(percent_to_decimal(NumberValue(Dec64(7.5)))), "0.075");
}

TEST(Render, Dec64) {
  EXPECT_EQ(render_dec64(0.5), "0.5");
  EXPECT_EQ(render_dec64(73.0), "73.0");
  EXPECT_EQ(render_dec64(-550957.05881), "-550957.05881");
  EXPECT_EQ(render_dec64(1e20), "100000000000000000000.0");
  EXPECT_THROW(render_dec64(1e21), Error);
  EXPECT_EQ(render(int_of("-58276183466")), "-58276183466");
}

TEST(Render, RoundTripsThroughParse) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> dist(-1e9, 1e9);
  for (int i = 0; i < 5000; ++i) {
    const double v = dist(rng);
    EXPECT_EQ(Dec64::parse(render_dec64(v)).value(), v);
  }
}

TEST(Dec64, RejectsNonFiniteAndExponents) {
  EXPECT_THROW(Dec64(std::numeric_limits<double>::infinity()), Error);
  EXPECT_THROW(Dec64::parse("1e5"), Error);
  EXPECT_THROW(mul(NumberValue(Dec64(1e300)), NumberValue(Dec64(1e300))), Error);
}

TEST(SameValue, Semantics) {
  EXPECT_TRUE(same_value(int_of("2"), NumberValue(Fraction(4, 2))));
  EXPECT_TRUE(same_value(NumberValue(Fraction(1, 2)), NumberValue(Fraction(2, 4))));
  EXPECT_FALSE(same_value(int_of("2"), NumberValue(Dec64(2.0))));
  EXPECT_TRUE(same_value(NumberValue(Dec64(0.1)), NumberValue(Dec64(0.1))));
  // negative zero is folded at construction so traces never print "-0.0"
  EXPECT_TRUE(same_value(NumberValue(Dec64(0.0)), NumberValue(Dec64(-0.0))));
  EXPECT_EQ(render(NumberValue(Dec64(-0.0))), "0.0");
  EXPECT_FALSE(same_value(NumberValue(Dec64(0.5)), NumberValue(Dec64(-0.5))));
}

TEST(Promotion, ExactMeetsDecimal) {
  const NumberValue r = add(int_of("1"), NumberValue(Dec64(0.5)));
  ASSERT_TRUE(r.is_dec());
  EXPECT_EQ(render(r), "1.5");
  EXPECT_TRUE(add(int_of("1"), int_of("0")).is_int());
}
