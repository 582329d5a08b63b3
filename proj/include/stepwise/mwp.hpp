#pragma once

// Math word problem records: rewrite each record's equation as a
// step-by-step solution and score predictions against the result.

#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stepwise/error.hpp"
#include "stepwise/eval.hpp"
#include "stepwise/expr.hpp"
#include "stepwise/steps.hpp"

namespace stepwise {

/// JSON keys for the record fields; defaults follow the public Ape210K names.
struct FieldMapping {
  std::string id = "id";
  std::string question = "original_text";
  std::string equation = "equation";
  std::string answer = "ans";
  std::string solution = "solution";

  static FieldMapping from_json(const nlohmann::json& j) {
    FieldMapping m;
    m.id = j.value("id", m.id);
    m.question = j.value("question", m.question);
    m.equation = j.value("equation", m.equation);
    m.answer = j.value("answer", m.answer);
    m.solution = j.value("solution", m.solution);
    return m;
  }
};

struct NormalizedEquation {
  std::string text;
  std::vector<std::string> applied;  // names of the rewrites that fired
};

namespace detail {

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace detail

/// Brings an equation into the expression alphabet: drops whitespace and an
/// `x=` prefix, maps `**` and full-width symbols, strips trailing units.
inline NormalizedEquation normalize_equation(std::string_view raw) {
  NormalizedEquation out;
  std::string s;
  for (char c : raw) {
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') s += c;
  }
  if (s.size() != raw.size()) out.applied.emplace_back("strip-whitespace");
  if (s.size() >= 2 && (s[0] == 'x' || s[0] == 'X') && s[1] == '=') {
    s.erase(0, 2);
    out.applied.emplace_back("strip-x-prefix");
  }
  const std::string before = s;
  detail::replace_all(s, "**", "^");
  detail::replace_all(s, "\xC3\x97", "*");      // ×
  detail::replace_all(s, "\xC3\xB7", "/");      // ÷
  detail::replace_all(s, "\xEF\xBC\x88", "(");  // full-width (
  detail::replace_all(s, "\xEF\xBC\x89", ")");  // full-width )
  if (s != before) out.applied.emplace_back("map-operators");
  std::size_t end = s.size();
  // units are letters or non-ASCII text; operators are never stripped
  while (end > 0 && (std::isalpha(static_cast<unsigned char>(s[end - 1])) ||
                     static_cast<unsigned char>(s[end - 1]) >= 0x80)) {
    --end;
  }
  if (end != s.size()) {
    s.erase(end);
    out.applied.emplace_back("strip-unit-suffix");
  }
  out.text = std::move(s);
  return out;
}

enum class RejectReason { EquationParseError, AnswerMismatch, EvaluationError, MissingField };

inline const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::EquationParseError: return "EquationParseError";
    case RejectReason::AnswerMismatch: return "AnswerMismatch";
    case RejectReason::EvaluationError: return "EvaluationError";
    case RejectReason::MissingField: return "MissingField";
  }
  return "?";
}

struct Reject {
  std::string id;
  RejectReason reason;
  std::string detail;

  nlohmann::ordered_json to_json() const {
    return {{"id", id}, {"reason", reject_reason_name(reason)}, {"detail", detail}};
  }
};

struct ReconstructOutcome {
  std::optional<nlohmann::ordered_json> record;  // input plus solution field
  std::optional<Reject> reject;
  std::vector<std::string> normalizations;
};

namespace detail {

inline std::string field_text(const nlohmann::ordered_json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  return it->is_string() ? it->get<std::string>() : it->dump();
}

}  // namespace detail

/// Adds the step-by-step solution; every other field is passed through
/// untouched. Running it on its own output rewrites the same solution.
inline ReconstructOutcome reconstruct(const nlohmann::ordered_json& record, const FieldMapping& fields = {}) {
  ReconstructOutcome out;
  const std::string id = detail::field_text(record, fields.id);
  const std::string equation = detail::field_text(record, fields.equation);
  const std::string answer_text = detail::field_text(record, fields.answer);
  if (equation.empty() || answer_text.empty()) {
    out.reject = Reject{id, RejectReason::MissingField, "equation and answer are required"};
    return out;
  }
  NormalizedEquation norm = normalize_equation(equation);
  out.normalizations = norm.applied;
  ExprPtr e;
  try {
    e = parse(norm.text, Mode::Standard);
  } catch (const Error& err) {
    out.reject = Reject{id, RejectReason::EquationParseError, err.what()};
    return out;
  }
  std::optional<NumberValue> answer = parse_number(answer_text);
  if (!answer) {
    out.reject = Reject{id, RejectReason::AnswerMismatch, "stored answer is not a number: " + answer_text};
    return out;
  }
  try {
    StepTrace t = trace(e, Mode::Standard);
    if (!is_correct(t.final, *answer)) {
      out.reject = Reject{id, RejectReason::AnswerMismatch,
                          "equation evaluates to " + render(t.final) + ", stored answer is " + answer_text};
      return out;
    }
    nlohmann::ordered_json r = record;
    r[fields.solution] = render_trace(t);
    out.record = std::move(r);
  } catch (const Error& err) {
    out.reject = Reject{id, RejectReason::EvaluationError, err.what()};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring

struct MwpVerdict {
  std::string id;
  bool missing = false;
  bool arithmetic_correct = false;
  bool answer_correct = false;
};

struct MwpReport {
  std::uint64_t count = 0;
  std::uint64_t arithmetic_correct = 0;
  std::uint64_t answer_correct = 0;
  std::uint64_t missing = 0;
  std::vector<MwpVerdict> verdicts;

  double arithmetic_accuracy() const {
    return count == 0 ? 0.0 : static_cast<double>(arithmetic_correct) / static_cast<double>(count);
  }
  double answer_accuracy() const {
    return count == 0 ? 0.0 : static_cast<double>(answer_correct) / static_cast<double>(count);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["count"] = count;
    j["arithmetic_accuracy"] = arithmetic_accuracy();
    j["answer_accuracy"] = answer_accuracy();
    j["missing"] = missing;
    j["arithmetic_rule"] = "value equivalence of the text before the first '=' with the gold equation";
    nlohmann::ordered_json vs = nlohmann::ordered_json::array();
    for (const MwpVerdict& v : verdicts) {
      vs.push_back({{"id", v.id},
                    {"missing", v.missing},
                    {"arithmetic_correct", v.arithmetic_correct},
                    {"answer_correct", v.answer_correct}});
    }
    j["verdicts"] = std::move(vs);
    return j;
  }
};

/// Exact values must be equal; binary64 values may differ in the last few
/// bits, since reordering decimal arithmetic changes rounding.
inline bool value_equivalent(const NumberValue& a, const NumberValue& b) {
  if (a.is_exact() && b.is_exact()) return same_value(a, b);
  const double x = a.to_double(), y = b.to_double();
  const double scale = std::max(std::fabs(x), std::fabs(y));
  return std::fabs(x - y) <= 1e-9 * std::max(scale, 1.0);
}

inline MwpVerdict score_mwp_record(const nlohmann::ordered_json& gold, const std::optional<std::string>& prediction,
                                   const FieldMapping& fields = {}) {
  MwpVerdict v;
  v.id = detail::field_text(gold, fields.id);
  if (!prediction) {
    v.missing = true;
    return v;
  }
  std::optional<NumberValue> gold_value;
  try {
    gold_value = direct_eval(parse(normalize_equation(detail::field_text(gold, fields.equation)).text), Mode::Standard);
  } catch (const Error&) {
  }
  const std::string_view pred = *prediction;
  if (gold_value) {
    try {
      std::string_view first = pred.substr(0, pred.find('='));
      v.arithmetic_correct = value_equivalent(direct_eval(parse(detail::trim(first)), Mode::Standard), *gold_value);
    } catch (const Error&) {
    }
  }
  std::optional<NumberValue> truth = parse_number(detail::field_text(gold, fields.answer));
  if (!truth) truth = gold_value;
  if (truth) {
    if (std::optional<NumberValue> got = extract_answer(pred)) v.answer_correct = is_correct(*got, *truth);
  }
  return v;
}

/// Predictions are keyed by record id; gold records without one are missing.
inline MwpReport score_mwp(const std::vector<nlohmann::ordered_json>& gold,
                           const std::map<std::string, std::string>& predictions, const FieldMapping& fields = {}) {
  MwpReport report;
  for (const auto& g : gold) {
    auto it = predictions.find(detail::field_text(g, fields.id));
    MwpVerdict v = score_mwp_record(
        g, it == predictions.end() ? std::nullopt : std::optional<std::string>(it->second), fields);
    ++report.count;
    if (v.missing) ++report.missing;
    if (v.arithmetic_correct) ++report.arithmetic_correct;
    if (v.answer_correct) ++report.answer_correct;
    report.verdicts.push_back(std::move(v));
  }
  return report;
}

}  // namespace stepwise
