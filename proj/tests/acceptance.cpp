// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stepwise/stepwise.hpp"

using namespace stepwise;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string run_cli(const std::string& args, int* code) {
  const std::string cmd = std::string(STEPWISE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) {
    *code = -1;
    return {};
  }
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = pclose(p);
  *code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

// 1. Dataset example rows through the command-line binary.
Outcome golden_traces() {
  struct Row {
    const char* flags;
    const char* input;
    const char* trace;
  };
  const Row rows[] = {
      {"", "1+8/1*10+2", "1+8/1*10+2=1+8*10+2=1+80+2=81+2=83"},
      {"", "53-2+23+51*56", "53-2+23+51*56=53-2+23+2856=51+23+2856=74+2856=2930"},
      {"", "214-792*509*260*556",
       "214-792*509*260*556=214-403128*260*556=214-104813280*556=214-58276183680=-58276183466"},
      {"", "1912*6800*6022-7250-1624",
       "1912*6800*6022-7250-1624=13001600*6022-7250-1624=78295635200-7250-1624=78295627950-1624=78295626326"},
      {"", "5170^0", "5170^0=1"},
      {"", "1^8756", "1^8756=1"},
      {"", "3^9", "3^9=19683"},
      {"", "93^18", "93^18=270827695297250208363869180422467849"},
      {"", "100^13", "100^13=100000000000000000000000000"},
      {"--fraction", "((49/24)*-(8/70))/-(34/80)",
       "((49/24)*-(8/70))/-(34/80)=(+(49/24)*(8/70))/(34/80)=(392/1680)/(34/80)=(7/30)/(34/80)=(7/30)*(80/34)=(560/"
       "1020)=28/51"},
      {"--fraction", "(9947/9276)+(4411/9276)", "(9947/9276)+(4411/9276)=14358/9276=2393/1546"},
      {"", "-7805+(4383/7377)", "-7805+(4383/7377)=-7805+0.5941439609597398=-7804.40585603904"},
      // de-duplicated form: the printed row repeats its first snapshot
      {"", "8371*(-1945+8878)", "8371*(-1945+8878)=8371*6933=58036143"},
      {"", "(-2090-5457.35697)*73.0", "(-2090-5457.35697)*73.0=-7547.35697*73.0=-550957.05881"},
      // de-duplicated form: the printed row repeats a restyled snapshot
      {"", "-4457+(-7823/5483%)*-3338",
       "-4457+(-7823/5483%)*-3338=-4457+(-7823/54.83)*-3338=-4457+(-142.6773664052526)*-3338=-4457+-142."
       "6773664052526*-3338=-4457+142.6773664052526*3338=-4457+476257.0490607332=471800.0490607332"},
  };
  int ok = 0;
  std::string first_bad;
  for (const Row& r : rows) {
    int code = 0;
    const std::string out = run_cli(std::string("trace ") + r.flags + " -- '" + r.input + "'", &code);
    if (code == 0 && out == std::string(r.trace) + "\n") {
      ++ok;
    } else if (first_bad.empty()) {
      first_bad = std::string(r.input) + " -> " + out;
    }
  }
  const int total = static_cast<int>(std::size(rows));
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " rows byte-exact" +
                           (first_bad.empty() ? "" : "; first mismatch " + first_bad)};
}

// 2. Published tokenization rows.
Outcome golden_tokenization() {
  const std::vector<std::pair<std::string, std::vector<TokenId>>> rows = {
      {"12345+345=", {20005, 20009, 20010, 20013, 20016, 20015, 20065, 20013, 20016, 20015, 20054}},
      {"1234-45678=", {20005, 20009, 20010, 20013, 20016, 20011, 20016, 20015, 20021, 20025, 20023, 20054}},
      {"34*678=", {20005, 20013, 20016, 20032, 20021, 20025, 20023, 20054}},
      {"1.2/2=", {20005, 20009, 20007, 20010, 20026, 20010, 20054}},
      {"(1.2*3%)/2+[(12+3)*5]=",
       {20005, 20020, 20009, 20007, 20010, 20032, 20013, 20040, 20014, 20026, 20010, 20065,
        20052, 20020, 20009, 20010, 20065, 20013, 20014, 20032, 20015, 20042, 20054}},
  };
  int ok = 0;
  for (const auto& [text, ids] : rows) ok += encode(text) == ids && decode(ids) == text;
  return {ok == 5, std::to_string(ok) + "/5 rows encode to the published ids"};
}

// 3. Trace final value against direct evaluation.
Outcome soundness() {
  std::uint64_t checked = 0, mismatched = 0;
  std::string example;
  for (Category c : kAllCategories) {
    for (auto [lo, hi] : {std::pair{1, 5}, std::pair{5, 12}}) {
      GenSpec spec;
      spec.category = c;
      spec.digits_lo = lo;
      spec.digits_hi = hi;
      spec.seed = mix_seed(2023, static_cast<std::uint64_t>(c) * 16 + static_cast<std::uint64_t>(lo));
      const Mode mode = mode_for(c);
      for (std::uint64_t i = 0; i < 10000; ++i) {
        ExprPtr e = sample_expression(spec, i);
        const StepTrace t = trace(e, mode);
        ++checked;
        if (!same_value(t.final, direct_eval(e, mode))) {
          ++mismatched;
          if (example.empty()) example = print(e);
        }
      }
    }
  }
  return {checked == 100000 && mismatched == 0,
          std::to_string(checked) + " expressions, " + std::to_string(mismatched) + " mismatches" +
              (example.empty() ? "" : " (e.g. " + example + ")")};
}

// 4. Same schedule, 1 and 8 workers.
Outcome determinism() {
  const CurriculumSchedule s = default_curriculum(100000, 4242);
  std::ostringstream a, b;
  const DatasetManifest m1 = generate_dataset(s, a, 1);
  const DatasetManifest m8 = generate_dataset(s, b, 8);
  const bool same = m1.digest == m8.digest && a.str() == b.str() && m1.record_count == 100000;
  return {same, "sha256 " + m1.digest.substr(0, 16) + "... (1 worker) vs " + m8.digest.substr(0, 16) + "... (8 workers)"};
}

// 5. Relative error and accuracy on the failure row.
Outcome metrics() {
  const NumberValue predicted = *parse_number("1889.901400862069");
  const NumberValue truth = *parse_number("1890.0226293103449");
  const double re = *relative_error(predicted, truth);
  // Exact decimal oracle: both values scaled by 10^13 are integers.
  const double want = oracle::divide({false, oracle::sub("18900226293103449", "18899014008620690")},
                                     {false, "18900226293103449"});
  char buf[160];
  std::snprintf(buf, sizeof buf, "RE=%.6e (oracle %.6e, |diff|=%.1e), two-decimal verdict %s", re, want,
                std::fabs(re - want), is_correct(predicted, truth) ? "correct" : "incorrect");
  const bool rounds_to_paper = std::fabs(re - 6.41e-5) < 0.005e-5;
  return {std::fabs(re - want) <= 1e-9 && rounds_to_paper && !is_correct(predicted, truth), buf};
}

// 6. Exact powers.
Outcome exponentiation() {
  const std::string a = render(direct_eval(parse("93^18"), Mode::Standard));
  const std::string b = render(direct_eval(parse("100^13"), Mode::Standard));
  const bool ok = a == "270827695297250208363869180422467849" && b == "100000000000000000000000000" &&
                  a == oracle::pow("93", 18) && b == oracle::pow("100", 13);
  return {ok, "93^18=" + a + " (" + std::to_string(a.size()) + " digits), 100^13 has " + std::to_string(b.size()) +
                  " digits"};
}

// 7. Pack and unpack at three block lengths.
Outcome packing() {
  std::string text;
  std::size_t records = 0, skipped = 0;
  for (Category c : {Category::IntMixed, Category::BracketedInt, Category::LengthyMixed, Category::Fraction}) {
    GenSpec spec;
    spec.category = c;
    spec.digits_lo = 1;
    spec.digits_hi = 2;
    spec.steps_lo = spec.steps_hi = 2;
    spec.seed = 64 + static_cast<std::uint64_t>(c);
    std::size_t taken = 0;
    for (std::uint64_t i = 0; taken < 2500; ++i) {
      const std::string line = sample_record(spec, i).trace_line;
      if (line.size() + 1 > 64) {
        ++skipped;
        continue;
      }
      text += line + "\n";
      ++records;
      ++taken;
    }
  }
  bool ok = records == 10000;
  for (std::uint32_t block : {64U, 256U, 1024U}) {
    std::istringstream in(text);
    const PackedBlocks packed = pack_sequences(in, block);
    std::stringstream bin;
    write_packed(bin, packed);
    std::string back;
    for (const std::string& r : unpack_sequences(read_packed(bin))) back += r + "\n";
    ok = ok && back == text;
  }
  return {ok, std::to_string(records) + " records round-trip at 64/256/1024 (" + std::to_string(skipped) +
                  " longer than 64 tokens not drawn)"};
}

// 8. Word-problem reconstruction and self-scoring.
Outcome mwp() {
  std::vector<ordered_json> input;
  std::size_t expected_ok = 0;
  const Category cats[] = {Category::IntMixed, Category::BracketedInt, Category::LengthyMixed};
  for (std::uint64_t i = 0; i < 1000; ++i) {
    GenSpec spec;
    spec.category = cats[i % 3];
    spec.digits_hi = 4;
    spec.steps_hi = 4;
    spec.seed = 210000;
    ExprPtr e = sample_expression(spec, i);
    ordered_json r;
    r["id"] = std::to_string(i);
    r["original_text"] = "synthetic question " + std::to_string(i);
    r["equation"] = print(e);
    NumberValue ans = direct_eval(e, Mode::Standard);
    // every 20th record carries a deliberately wrong stored answer
    if (i % 20 == 19) ans = add(ans, NumberValue(WideInt(1)));
    else ++expected_ok;
    r["ans"] = render(ans);
    input.push_back(std::move(r));
  }
  std::vector<ordered_json> gold;
  std::size_t mismatches = 0;
  for (const ordered_json& r : input) {
    ReconstructOutcome out = reconstruct(r);
    if (out.record) gold.push_back(*out.record);
    else if (out.reject->reason == RejectReason::AnswerMismatch) ++mismatches;
  }
  std::map<std::string, std::string> preds;
  for (const ordered_json& g : gold) preds[g["id"].get<std::string>()] = g["solution"].get<std::string>();
  const MwpReport report = score_mwp(gold, preds);
  const bool ok = gold.size() == expected_ok && mismatches == 1000 - expected_ok &&
                  report.arithmetic_accuracy() == 1.0 && report.answer_accuracy() == 1.0;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%zu/%zu matching records reconstructed, %zu mismatches rejected, arithmetic_accuracy=%.3f "
                "answer_accuracy=%.3f",
                gold.size(), expected_ok, mismatches, report.arithmetic_accuracy(), report.answer_accuracy());
  return {ok, buf};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "golden traces", golden_traces},   {2, "golden tokenization", golden_tokenization},
      {3, "oracle soundness", soundness},    {4, "determinism", determinism},
      {5, "metrics fidelity", metrics},      {6, "exponentiation exactness", exponentiation},
      {7, "packing round-trip", packing},    {8, "word-problem reconstruction", mwp},
  };
  bool all = true;
  bool substitute_ok = true;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
    if (c.id == 3 || c.id == 5) substitute_ok = substitute_ok && o.pass;
  }
  // Trained-model accuracies need multi-hundred-million-parameter training
  // runs; what is checked here is that the scoring substitute holds.
  std::printf("%s 9 desk-scale scope: model accuracies are not reproduced (requires training); "
              "substitute property suite and metric fidelity %s\n",
              substitute_ok ? "PASS" : "FAIL", substitute_ok ? "hold" : "do not hold");
  all = all && substitute_ok;
  return all ? 0 : 1;
}
