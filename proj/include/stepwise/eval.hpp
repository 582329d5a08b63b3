#pragma once

// Scoring of model outputs: answer extraction, two-decimal accuracy,
// relative error, grouped grids and fixed-digit benchmark suites.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stepwise/datagen.hpp"
#include "stepwise/error.hpp"
#include "stepwise/expr.hpp"
#include "stepwise/numeric.hpp"
#include "stepwise/steps.hpp"

namespace stepwise {

enum class ExtractionRule {
  LastEquals,   // text after the final '=' (whole string when there is none)
  WholeString,  // the entire prediction must be a number
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

/// Parses a single answer value: `-?int`, `-?int.frac` or `-?int/int`,
/// optionally wrapped in one pair of parentheses.
inline std::optional<NumberValue> parse_number(std::string_view text) {
  std::string_view s = detail::trim(text);
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
    s = s.substr(1, s.size() - 2);
    if (!s.empty() && s.front() == '-') {
      if (negative) return std::nullopt;
      negative = true;
      s.remove_prefix(1);
    }
  }
  try {
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
      std::string_view num = s.substr(0, slash);
      std::string_view den = s.substr(slash + 1);
      if (!detail::all_digits(num) || !detail::all_digits(den)) return std::nullopt;
      WideInt n = WideInt::parse(num);
      return NumberValue(Fraction(negative ? -n : n, WideInt::parse(den)));
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
      if (!detail::all_digits(s.substr(0, dot)) || !detail::all_digits(s.substr(dot + 1))) return std::nullopt;
      const double v = Dec64::parse(s).value();
      return NumberValue(Dec64(negative ? -v : v));
    }
    if (!detail::all_digits(s)) return std::nullopt;
    WideInt n = WideInt::parse(s);
    return NumberValue(negative ? -n : n);
  } catch (const Error&) {
    return std::nullopt;  // zero denominator and the like
  }
}

inline std::optional<NumberValue> extract_answer(std::string_view prediction,
                                                 ExtractionRule rule = ExtractionRule::LastEquals) {
  if (rule == ExtractionRule::LastEquals) {
    if (auto eq = prediction.rfind('='); eq != std::string_view::npos) prediction = prediction.substr(eq + 1);
  }
  return parse_number(prediction);
}

namespace detail {

struct ExactRational {
  mp::cpp_int num;
  mp::cpp_int den;  // positive
};

/// The value a reader sees: Dec64 goes through its shortest decimal rendering.
inline ExactRational decimal_view(const NumberValue& v) {
  if (v.is_int()) return {v.as_int().raw(), 1};
  if (v.is_fraction()) return {v.as_fraction().num().raw(), v.as_fraction().den().raw()};
  const double d = v.as_dec().value();
  if (std::fabs(d) < 1e21) {
    const std::string text = render_dec64(d);
    const auto dot = text.find('.');
    const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    mp::cpp_int den = 1;
    for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
    return {WideInt::parse(digits).raw(), den};
  }
  // Beyond the rendering range every double is an integer.
  int exp = 0;
  const double mant = std::frexp(d, &exp);
  mp::cpp_int n = static_cast<long long>(std::ldexp(mant, 53));
  n <<= (exp - 53);
  return {n, 1};
}

/// round(q * 100) with ties away from zero.
inline mp::cpp_int round_cents(const ExactRational& q) {
  mp::cpp_int n = q.num * 100;
  const bool negative = n < 0;
  if (negative) n = -n;
  mp::cpp_int r = (2 * n + q.den) / (2 * q.den);
  return negative ? mp::cpp_int(-r) : r;
}

}  // namespace detail

/// Two-decimal agreement; two fractions compare as exact rationals instead.
inline bool is_correct(const NumberValue& predicted, const NumberValue& truth) {
  if (predicted.is_fraction() && truth.is_fraction()) {
    return predicted.as_fraction() == truth.as_fraction();
  }
  return detail::round_cents(detail::decimal_view(predicted)) == detail::round_cents(detail::decimal_view(truth));
}

/// |ŷ - y| / |y| in binary64. Undefined for y = 0 unless ŷ = 0 as well.
inline std::optional<double> relative_error(const NumberValue& predicted, const NumberValue& truth) {
  if (truth.is_zero()) {
    if (predicted.is_zero()) return 0.0;
    return std::nullopt;
  }
  const double y = truth.to_double();
  return std::fabs((predicted.to_double() - y) / y);
}

// ---------------------------------------------------------------------------
// Grouping

enum class OpGroup { Add, Sub, Mul, Div, Pow, Mix };
enum class FormatGroup { Int, Dec, Frac, Perc, Neg };

inline constexpr std::array<OpGroup, 6> kAllOpGroups = {OpGroup::Add, OpGroup::Sub, OpGroup::Mul,
                                                        OpGroup::Div, OpGroup::Pow, OpGroup::Mix};
inline constexpr std::array<FormatGroup, 5> kAllFormatGroups = {FormatGroup::Int, FormatGroup::Dec, FormatGroup::Frac,
                                                                FormatGroup::Perc, FormatGroup::Neg};

inline const char* op_group_name(OpGroup g) {
  static constexpr std::array<const char*, 6> names = {"ADD", "SUB", "MUL", "DIV", "POW", "MIX"};
  return names[static_cast<std::size_t>(g)];
}
inline const char* format_group_name(FormatGroup g) {
  static constexpr std::array<const char*, 5> names = {"Int", "Dec", "Frac", "Perc", "Neg"};
  return names[static_cast<std::size_t>(g)];
}

template <class E, std::size_t N>
std::optional<E> group_from_name(std::string_view name, const std::array<E, N>& all, const char* (*name_of)(E)) {
  for (E e : all) {
    if (name == name_of(e)) return e;
  }
  return std::nullopt;
}

struct ProblemClass {
  OpGroup op = OpGroup::Mix;
  FormatGroup format = FormatGroup::Int;
};

namespace detail {

struct ClassScan {
  std::set<BinOp> ops;
  bool fraction = false, percent = false, negative = false, decimal = false;

  void visit(const Expr& e) {
    std::visit(
        [this](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, NumberLit>) {
            if (n.percent) percent = true;
            if (n.text.find('.') != std::string::npos) decimal = true;
            if (!n.text.empty() && n.text.front() == '-') negative = true;
          } else if constexpr (std::is_same_v<T, FractionLit>) {
            fraction = true;
            if (n.num.sign() < 0) negative = true;
          } else if constexpr (std::is_same_v<T, Unary>) {
            if (n.sign == '-') negative = true;
            visit(*n.operand);
          } else if constexpr (std::is_same_v<T, Binary>) {
            ops.insert(n.op);
            visit(*n.lhs);
            visit(*n.rhs);
          } else {
            visit(*n.inner);
          }
        },
        e.node);
  }
};

}  // namespace detail

/// Operation is the single binary operator kind used, else MIX. Format
/// precedence when several appear: Frac, Perc, Neg, Dec, Int.
inline ProblemClass classify_problem(const Expr& e) {
  detail::ClassScan scan;
  scan.visit(e);
  ProblemClass c;
  if (scan.ops.size() == 1) {
    switch (*scan.ops.begin()) {
      case BinOp::Add: c.op = OpGroup::Add; break;
      case BinOp::Sub: c.op = OpGroup::Sub; break;
      case BinOp::Mul: c.op = OpGroup::Mul; break;
      case BinOp::Div: c.op = OpGroup::Div; break;
      case BinOp::Pow: c.op = OpGroup::Pow; break;
    }
  }
  if (scan.fraction) c.format = FormatGroup::Frac;
  else if (scan.percent) c.format = FormatGroup::Perc;
  else if (scan.negative) c.format = FormatGroup::Neg;
  else if (scan.decimal) c.format = FormatGroup::Dec;
  return c;
}

// ---------------------------------------------------------------------------
// Records and reports

struct PredictionRecord {
  std::string id;
  std::string problem;
  std::string ground_truth;  // as written in the gold data
  std::string prediction;
  std::optional<std::string> op;      // explicit grid keys override classification
  std::optional<std::string> format;
  std::optional<Mode> mode;
};

enum class VerdictStatus { Ok, ExtractionFailure, RecordError };

struct Verdict {
  std::string id;
  VerdictStatus status = VerdictStatus::Ok;
  bool correct = false;
  bool re_correct = false;
  std::optional<double> relative_error;
  std::optional<std::size_t> first_divergent_step;
  std::string op;
  std::string format;
  std::string message;
};

struct GridCell {
  std::uint64_t n = 0;
  std::uint64_t correct = 0;
  std::uint64_t re_correct = 0;
};

struct EvalReport {
  double threshold = 0.01;
  std::uint64_t count = 0;
  std::uint64_t correct = 0;
  std::uint64_t re_correct = 0;
  std::uint64_t re_defined = 0;  // records with a defined RE denominator
  std::uint64_t extraction_failures = 0;
  std::uint64_t record_errors = 0;
  std::map<std::string, std::map<std::string, GridCell>> grid;
  std::vector<Verdict> verdicts;

  double accuracy() const { return count == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(count); }
  double re_accuracy() const {
    return re_defined == 0 ? 0.0 : static_cast<double>(re_correct) / static_cast<double>(re_defined);
  }
  /// The expected 0 <= ACC <= RE <= 1 ordering, checked on this dataset.
  bool ordering_holds() const {
    const double a = accuracy(), r = re_accuracy();
    return 0.0 <= a && a <= r && r <= 1.0;
  }

  nlohmann::json summary_json() const {
    nlohmann::json j;
    j["count"] = count;
    j["ACC"] = accuracy();
    j["RE"] = re_accuracy();
    j["threshold"] = threshold;
    j["correct"] = correct;
    j["re_correct"] = re_correct;
    j["re_defined"] = re_defined;
    j["extraction_failures"] = extraction_failures;
    j["record_errors"] = record_errors;
    j["ordering_holds"] = ordering_holds();
    j["rounding"] = "two decimals, half away from zero; fractions compared exactly";
    j["zero_truth_policy"] = "RE undefined when y=0 and prediction!=0 (excluded from RE denominator); 0 when both are 0";
    nlohmann::json grid_j = nlohmann::json::object();
    for (const auto& [op, row] : grid) {
      for (const auto& [fmt, cell] : row) {
        grid_j[op][fmt] = {{"n", cell.n},
                           {"ACC", cell.n ? static_cast<double>(cell.correct) / static_cast<double>(cell.n) : 0.0},
                           {"correct", cell.correct}};
      }
    }
    j["grouped"] = grid_j;
    return j;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = summary_json();
    nlohmann::json vs = nlohmann::json::array();
    for (const Verdict& v : verdicts) {
      nlohmann::json x;
      x["id"] = v.id;
      x["status"] = v.status == VerdictStatus::Ok                  ? "ok"
                    : v.status == VerdictStatus::ExtractionFailure ? "extraction_failure"
                                                                   : "record_error";
      x["correct"] = v.correct;
      x["re_correct"] = v.re_correct;
      x["relative_error"] = v.relative_error ? nlohmann::json(*v.relative_error) : nlohmann::json(nullptr);
      x["first_divergent_step"] =
          v.first_divergent_step ? nlohmann::json(*v.first_divergent_step) : nlohmann::json(nullptr);
      x["op"] = v.op;
      x["format"] = v.format;
      if (!v.message.empty()) x["message"] = v.message;
      vs.push_back(std::move(x));
    }
    j["verdicts"] = std::move(vs);
    return j;
  }

  /// Accuracy grid, one row per operation and one column per format.
  std::string grid_csv() const {
    std::string out = "op";
    for (FormatGroup f : kAllFormatGroups) out += std::string(",") + format_group_name(f);
    out += '\n';
    for (OpGroup o : kAllOpGroups) {
      out += op_group_name(o);
      for (FormatGroup f : kAllFormatGroups) {
        out += ',';
        auto row = grid.find(op_group_name(o));
        if (row == grid.end()) continue;
        auto cell = row->second.find(format_group_name(f));
        if (cell == row->second.end() || cell->second.n == 0) continue;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f",
                      static_cast<double>(cell->second.correct) / static_cast<double>(cell->second.n));
        out += buf;
      }
      out += '\n';
    }
    return out;
  }
};

/// Index of the first '='-separated snapshot where the prediction departs
/// from the engine's trace; nullopt when every predicted snapshot matches.
inline std::optional<std::size_t> first_divergent_step(std::string_view prediction, std::string_view gold_trace) {
  auto split = [](std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
      auto eq = s.find('=', start);
      parts.push_back(detail::trim(s.substr(start, eq == std::string_view::npos ? eq : eq - start)));
      if (eq == std::string_view::npos) break;
      start = eq + 1;
    }
    return parts;
  };
  const auto p = split(prediction);
  const auto g = split(gold_trace);
  for (std::size_t i = 0; i < std::max(p.size(), g.size()); ++i) {
    if (i >= p.size() || i >= g.size() || p[i] != g[i]) return i;
  }
  return std::nullopt;
}

inline Verdict score_record(const PredictionRecord& r, double threshold,
                            ExtractionRule rule = ExtractionRule::LastEquals) {
  Verdict v;
  v.id = r.id;
  std::optional<NumberValue> truth = parse_number(r.ground_truth);
  if (!truth) {
    v.status = VerdictStatus::RecordError;
    v.message = "ground truth is not a number";
    return v;
  }
  ProblemClass cls;
  const Mode mode = r.mode.value_or(truth->is_fraction() ? Mode::Fraction : Mode::Standard);
  try {
    ExprPtr e = parse(r.problem, mode);
    cls = classify_problem(*e);
    try {
      v.first_divergent_step = first_divergent_step(r.prediction, render_trace(trace(e, mode)));
    } catch (const Error&) {
      // problem cannot be traced; divergence stays unknown
    }
  } catch (const Error&) {
    // unparseable problem text still scores by answer
  }
  v.op = r.op.value_or(op_group_name(cls.op));
  v.format = r.format.value_or(format_group_name(cls.format));

  std::optional<NumberValue> predicted = extract_answer(r.prediction, rule);
  if (!predicted) {
    v.status = VerdictStatus::ExtractionFailure;
    return v;
  }
  v.correct = is_correct(*predicted, *truth);
  v.relative_error = relative_error(*predicted, *truth);
  v.re_correct = v.relative_error && *v.relative_error <= threshold;
  return v;
}

inline void accumulate(EvalReport& report, const Verdict& v) {
  ++report.count;
  if (v.status == VerdictStatus::RecordError) {
    ++report.record_errors;
    report.verdicts.push_back(v);
    return;
  }
  if (v.status == VerdictStatus::ExtractionFailure) ++report.extraction_failures;
  // Extraction failures stay in the RE denominator: they count as wrong.
  if (v.relative_error || v.status == VerdictStatus::ExtractionFailure) ++report.re_defined;
  if (v.correct) ++report.correct;
  if (v.re_correct) ++report.re_correct;
  GridCell& cell = report.grid[v.op][v.format];
  ++cell.n;
  if (v.correct) ++cell.correct;
  if (v.re_correct) ++cell.re_correct;
  report.verdicts.push_back(v);
}

inline EvalReport evaluate(const std::vector<PredictionRecord>& records, double threshold = 0.01,
                           ExtractionRule rule = ExtractionRule::LastEquals) {
  EvalReport report;
  report.threshold = threshold;
  for (const PredictionRecord& r : records) accumulate(report, score_record(r, threshold, rule));
  return report;
}

inline std::optional<std::string> json_text_field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

/// Reads one JSONL record; missing fields become empty strings so the
/// record is scored (and reported) rather than aborting the run.
inline PredictionRecord record_from_json(const nlohmann::json& j) {
  PredictionRecord r;
  r.id = json_text_field(j, "id").value_or("");
  r.problem = json_text_field(j, "problem").value_or("");
  r.ground_truth = json_text_field(j, "ground_truth").value_or("");
  r.prediction = json_text_field(j, "prediction").value_or("");
  r.op = json_text_field(j, "op");
  r.format = json_text_field(j, "format");
  if (auto m = json_text_field(j, "mode")) r.mode = *m == "fraction" ? Mode::Fraction : Mode::Standard;
  return r;
}

// ---------------------------------------------------------------------------
// Fixed-digit suites

struct SuiteProblem {
  std::string problem;
  NumberValue ground_truth;
  OpGroup op = OpGroup::Add;
  int digits = 1;
};

/// n two-operand problems whose operands both have exactly `digits` digits.
inline std::vector<SuiteProblem> bigbench_suite(OpGroup op, int digits, std::uint64_t n, std::uint64_t seed) {
  if (digits < 1 || digits > 5) throw Error(ErrorCode::Format, "digits must be in 1..5");
  BinOp bin;
  switch (op) {
    case OpGroup::Add: bin = BinOp::Add; break;
    case OpGroup::Sub: bin = BinOp::Sub; break;
    case OpGroup::Mul: bin = BinOp::Mul; break;
    case OpGroup::Div: bin = BinOp::Div; break;
    default: throw Error(ErrorCode::Format, "suite operation must be ADD, SUB, MUL or DIV");
  }
  std::vector<SuiteProblem> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    SplitMix64 rng(mix_seed(seed, i));
    const std::uint64_t a = detail::sample_magnitude(rng, digits);
    std::uint64_t b;
    do {
      b = detail::sample_magnitude(rng, digits);
    } while (bin == BinOp::Div && b == 0);
    std::string text = std::to_string(a) + op_char(bin) + std::to_string(b);
    out.push_back({text, direct_eval(parse(text), Mode::Standard), op, digits});
  }
  return out;
}

}  // namespace stepwise
