#include <gtest/gtest.h>

#include "stepwise/datagen.hpp"
#include "stepwise/steps.hpp"

using namespace stepwise;

namespace {

struct Golden {
  const char* input;
  Mode mode;
  const char* trace;
};

// Dataset example rows; the bracket and lengthy rows are compared in their
// de-duplicated form (no identical adjacent snapshots).
const Golden kGolden[] = {
    {"1+8/1*10+2", Mode::Standard, "1+8/1*10+2=1+8*10+2=1+80+2=81+2=83"},
    {"53-2+23+51*56", Mode::Standard, "53-2+23+51*56=53-2+23+2856=51+23+2856=74+2856=2930"},
    {"214-792*509*260*556", Mode::Standard,
     "214-792*509*260*556=214-403128*260*556=214-104813280*556=214-58276183680=-58276183466"},
    {"1912*6800*6022-7250-1624", Mode::Standard,
     "1912*6800*6022-7250-1624=13001600*6022-7250-1624=78295635200-7250-1624=78295627950-1624=78295626326"},
    {"5170^0", Mode::Standard, "5170^0=1"},
    {"1^8756", Mode::Standard, "1^8756=1"},
    {"3^9", Mode::Standard, "3^9=19683"},
    {"93^18", Mode::Standard, "93^18=270827695297250208363869180422467849"},
    {"100^13", Mode::Standard, "100^13=100000000000000000000000000"},
    {"((49/24)*-(8/70))/-(34/80)", Mode::Fraction,
     "((49/24)*-(8/70))/-(34/80)=(+(49/24)*(8/70))/(34/80)=(392/1680)/(34/80)=(7/30)/(34/80)=(7/30)*(80/34)=(560/1020)="
     "28/51"},
    {"(9947/9276)+(4411/9276)", Mode::Fraction, "(9947/9276)+(4411/9276)=14358/9276=2393/1546"},
    {"-7805+(4383/7377)", Mode::Standard, "-7805+(4383/7377)=-7805+0.5941439609597398=-7804.40585603904"},
    {"8371*(-1945+8878)", Mode::Standard, "8371*(-1945+8878)=8371*6933=58036143"},
    {"(-2090-5457.35697)*73.0", Mode::Standard, "(-2090-5457.35697)*73.0=-7547.35697*73.0=-550957.05881"},
    {"-4457+(-7823/5483%)*-3338", Mode::Standard,
     "-4457+(-7823/5483%)*-3338=-4457+(-7823/54.83)*-3338=-4457+(-142.6773664052526)*-3338=-4457+-142."
     "6773664052526*-3338=-4457+142.6773664052526*3338=-4457+476257.0490607332=471800.0490607332"},
};

}  // namespace

class GoldenTrace : public ::testing::TestWithParam<Golden> {};

TEST_P(GoldenTrace, ReproducesByteExactly) {
  const Golden& g = GetParam();
  EXPECT_EQ(trace_text(g.input, g.mode), g.trace);
}

INSTANTIATE_TEST_SUITE_P(DatasetRows, GoldenTrace, ::testing::ValuesIn(kGolden));

TEST(Steps, TerminalLiteral) {
  EXPECT_FALSE(next_step(parse("7"), Mode::Standard).has_value());
  EXPECT_EQ(trace_text("5"), "5");
  EXPECT_EQ(trace_text("0+0"), "0+0=0");
}

TEST(Steps, RuleSequenceOfFractionRow) {
  StepTrace t = trace(parse("((49/24)*-(8/70))/-(34/80)", Mode::Fraction), Mode::Fraction);
  const std::vector<RuleId> want = {RuleId::SignNormalize, RuleId::ReduceBinop,       RuleId::FractionReduce,
                                    RuleId::FractionDivToMul, RuleId::ReduceBinop, RuleId::FractionReduce};
  EXPECT_EQ(t.rules, want);
  EXPECT_EQ(render(t.final), "28/51");
}

TEST(Steps, SingleStepRules) {
  auto step = [](const char* src, Mode mode = Mode::Standard) {
    auto s = next_step(parse(src, mode), mode);
    EXPECT_TRUE(s.has_value());
    return std::make_pair(print(s->expr), s->rule);
  };
  EXPECT_EQ(step("53-2+23+51*56"), std::make_pair(std::string("53-2+23+2856"), RuleId::ReduceBinop));
  EXPECT_EQ(step("(7/30)/(34/80)", Mode::Fraction),
            std::make_pair(std::string("(7/30)*(80/34)"), RuleId::FractionDivToMul));
  EXPECT_EQ(step("-7823/5483%").second, RuleId::PercentToDecimal);
  EXPECT_EQ(step("((5))").second, RuleId::DropGroup);
}

TEST(Steps, DirectEvalExamples) {
  EXPECT_EQ(render(direct_eval(parse("1912*6800*6022-7250-1624"), Mode::Standard)), "78295626326");
  EXPECT_EQ(render(direct_eval(parse("0+0"), Mode::Standard)), "0");
  EXPECT_EQ(render(direct_eval(parse("-4457+(-7823/5483%)*-3338"), Mode::Standard)), "471800.0490607332");
}

TEST(Steps, MathErrorsCarryStepIndex) {
  try {
    trace(parse("2+3*(4-4)/0"), Mode::Standard);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivByZero);
    ASSERT_TRUE(e.position().has_value());
  }
  try {
    trace(parse("1/0"), Mode::Standard);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivByZero);
    EXPECT_EQ(e.position(), std::optional<std::size_t>(0));
  }
}

TEST(Steps, InvariantsOnGeneratedExpressions) {
  for (Category c : kAllCategories) {
    GenSpec spec;
    spec.category = c;
    spec.digits_hi = 8;
    spec.seed = 2024;
    const Mode mode = mode_for(c);
    for (std::uint64_t i = 0; i < 400; ++i) {
      ExprPtr e = sample_expression(spec, i);
      StepTrace t = trace(e, mode);
      ASSERT_EQ(t.snapshots.size(), t.rules.size() + 1);
      EXPECT_LE(t.snapshots.size(), trace_bound(*e));
      EXPECT_TRUE(same_value(t.final, direct_eval(e, mode))) << print(e);
      ExprPtr prev = t.original;
      for (std::size_t k = 0; k < t.rules.size(); ++k) {
        const ExprPtr& cur = t.snapshots[k + 1];
        EXPECT_NE(print(prev), print(cur)) << "repeated snapshot in " << print(e);
        const int before = count_atomic_ops(*prev), after = count_atomic_ops(*cur);
        EXPECT_LE(after, before);
        if (t.rules[k] == RuleId::ReduceBinop) EXPECT_LT(after, before);
        prev = cur;
      }
      ASSERT_TRUE(prev->is<NumberLit>() || prev->is<FractionLit>()) << print(prev);
      EXPECT_EQ(print(prev), render(t.final));
      if (t.final.is_fraction()) EXPECT_TRUE(t.final.as_fraction().is_canonical());
    }
  }
}

TEST(Steps, Deterministic) {
  GenSpec spec;
  spec.category = Category::LengthyMixed;
  spec.seed = 5;
  for (std::uint64_t i = 0; i < 50; ++i) {
    EXPECT_EQ(sample_record(spec, i).trace_line, sample_record(spec, i).trace_line);
  }
}
