// Command-line front end for the stepwise library.
//
// Exit codes: 0 ok, 2 parse/format error, 3 math error, 4 I/O error,
// 64 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stepwise/stepwise.hpp"

namespace sw = stepwise;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitMath = 3;
constexpr int kExitIo = 4;
constexpr int kExitUsage = 64;

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw sw::Error(sw::ErrorCode::Io, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw sw::Error(sw::ErrorCode::Io, "cannot open '" + path + "' for writing");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out = open_out(path, std::ios::binary);
  out << text;
  if (!out.flush()) throw sw::Error(sw::ErrorCode::Io, "write to '" + path + "' failed");
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void print_config(const std::string& cmd, const std::vector<std::pair<std::string, std::string>>& fields) {
  std::cerr << "config: " << cmd;
  for (const auto& [k, v] : fields) std::cerr << ' ' << k << '=' << v;
  std::cerr << '\n';
}

sw::Mode mode_from(bool fraction) { return fraction ? sw::Mode::Fraction : sw::Mode::Standard; }

// --- trace ------------------------------------------------------------------

struct TraceArgs {
  std::string expr;
  bool fraction = false;
  bool json = false;
};

int cmd_trace(const TraceArgs& a) {
  print_config("trace", {{"mode", a.fraction ? "fraction" : "standard"}});
  const sw::Mode mode = mode_from(a.fraction);
  sw::StepTrace t = sw::trace(sw::parse(a.expr, mode), mode);
  if (!a.json) {
    std::cout << sw::render_trace(t) << '\n';
    return kExitOk;
  }
  json j;
  j["input"] = a.expr;
  j["trace"] = sw::render_trace(t);
  j["snapshots"] = json::array();
  for (const auto& s : t.snapshots) j["snapshots"].push_back(sw::print(s));
  j["rules"] = json::array();
  for (sw::RuleId r : t.rules) j["rules"].push_back(sw::rule_name(r));
  j["final"] = sw::render(t.final);
  std::cout << j.dump() << '\n';
  return kExitOk;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::uint64_t seed = 0;
  std::string schedule;
  std::uint64_t records = 1000000;
  std::uint64_t phase2 = sw::kCurriculumPhase2Records;
  std::string out;
  std::string manifest;
  std::string test_out;
  std::uint64_t test_records = sw::kDefaultTestRecords;
  unsigned workers = 1;
  bool progress = false;
  bool json = false;
};

int cmd_generate(const GenerateArgs& a) {
  sw::CurriculumSchedule schedule;
  if (!a.schedule.empty()) {
    std::ifstream in = open_in(a.schedule);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw sw::Error(sw::ErrorCode::Format, std::string("schedule is not JSON: ") + e.what());
    }
    if (!j.contains("seed")) j["seed"] = a.seed;
    schedule = sw::schedule_from_json(j);
  } else {
    schedule = sw::default_curriculum(a.records, a.seed, a.phase2);
  }
  const std::string manifest_path = a.manifest.empty() ? a.out + ".manifest.json" : a.manifest;
  print_config("generate", {{"seed", std::to_string(a.seed)},
                            {"schedule", a.schedule.empty() ? "default" : a.schedule},
                            {"records", std::to_string(schedule.records())},
                            {"phase2", std::to_string(a.phase2)},
                            {"out", a.out},
                            {"manifest", manifest_path},
                            {"test_out", a.test_out.empty() ? "none" : a.test_out},
                            {"test_records", std::to_string(a.test_records)},
                            {"workers", std::to_string(a.workers)}});

  auto run = [&](const sw::CurriculumSchedule& s, const std::string& path) {
    std::ofstream out = open_out(path, std::ios::binary);
    sw::DatasetManifest m;
    if (a.progress) {
      m = sw::generate_dataset(s, out, a.workers,
                               [](std::uint64_t n) { std::cerr << "\rrecords: " << n << std::flush; });
      std::cerr << '\n';
    } else {
      m = sw::generate_dataset(s, out, a.workers);
    }
    m.path = path;
    return m;
  };

  sw::DatasetManifest m = run(schedule, a.out);
  json mj = m.to_json();
  mj["schedule"] = sw::schedule_to_json(schedule);
  if (!a.test_out.empty()) {
    sw::CurriculumSchedule test = sw::test_split(schedule, a.test_records);
    sw::DatasetManifest tm = run(test, a.test_out);
    mj["test_split"] = tm.to_json();
    mj["test_split"]["schedule"] = sw::schedule_to_json(test);
  }
  write_text(manifest_path, mj.dump(2) + "\n");
  if (a.json) {
    std::cout << mj.dump() << '\n';
  } else {
    std::cout << m.record_count << " records written to " << a.out << " (sha256:" << m.digest << ")\n";
  }
  return kExitOk;
}

// --- tokenize / detokenize / vocab ------------------------------------------

struct TokenArgs {
  std::string text;
  std::string in;
  std::string vocab;
  bool json = false;
};

sw::Vocab load_vocab(const std::string& path) {
  if (path.empty()) return sw::Vocab::standard();
  std::ifstream in = open_in(path);
  try {
    return sw::Vocab::from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw sw::Error(sw::ErrorCode::Format, std::string("bad vocabulary file: ") + e.what());
  }
}

std::vector<std::string> input_lines(const std::string& text, const std::string& path, const char* what) {
  if (!text.empty()) return {text};
  if (!path.empty()) return read_lines(path);
  throw CLI::ValidationError(std::string("one of --") + what + " or --in is required");
}

int cmd_tokenize(const TokenArgs& a) {
  print_config("tokenize", {{"vocab", a.vocab.empty() ? "standard" : a.vocab}});
  const sw::Vocab vocab = load_vocab(a.vocab);
  for (const std::string& line : input_lines(a.text, a.in, "text")) {
    const std::vector<sw::TokenId> ids = sw::encode(line, vocab);
    if (a.json) {
      std::cout << json{{"text", line}, {"ids", ids}}.dump() << '\n';
    } else {
      for (std::size_t i = 0; i < ids.size(); ++i) std::cout << (i ? " " : "") << ids[i];
      std::cout << '\n';
    }
  }
  return kExitOk;
}

std::vector<sw::TokenId> parse_ids(const std::string& line) {
  std::vector<sw::TokenId> ids;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || v > 0xffffffffUL) throw sw::Error(sw::ErrorCode::Format, "bad token id '" + tok + "'");
    ids.push_back(static_cast<sw::TokenId>(v));
  }
  return ids;
}

int cmd_detokenize(const TokenArgs& a) {
  print_config("detokenize", {{"vocab", a.vocab.empty() ? "standard" : a.vocab}});
  const sw::Vocab vocab = load_vocab(a.vocab);
  for (const std::string& line : input_lines(a.text, a.in, "ids")) {
    const std::string text = sw::decode(parse_ids(line), vocab);
    if (a.json) std::cout << json{{"text", text}}.dump() << '\n';
    else std::cout << text << '\n';
  }
  return kExitOk;
}

int cmd_vocab(const std::string& out) {
  print_config("vocab", {{"out", out.empty() ? "stdout" : out}});
  const std::string text = sw::Vocab::standard().to_json().dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else write_text(out, text);
  return kExitOk;
}

// --- pack / unpack ----------------------------------------------------------

struct PackArgs {
  std::string in;
  std::string out;
  std::uint32_t block_length = 1024;
  std::string vocab;
  bool json = false;
};

int cmd_pack(const PackArgs& a) {
  print_config("pack", {{"in", a.in}, {"out", a.out}, {"block_length", std::to_string(a.block_length)}});
  const sw::Vocab vocab = load_vocab(a.vocab);
  std::ifstream in = open_in(a.in, std::ios::binary);
  sw::PackedBlocks blocks = sw::pack_sequences(in, a.block_length, vocab);
  std::ofstream out = open_out(a.out, std::ios::binary);
  sw::write_packed(out, blocks);
  if (a.json) {
    std::cout << json{{"blocks", blocks.block_count()}, {"block_length", blocks.block_length}}.dump() << '\n';
  } else {
    std::cout << blocks.block_count() << " blocks of " << blocks.block_length << " tokens\n";
  }
  return kExitOk;
}

int cmd_unpack(const PackArgs& a) {
  print_config("unpack", {{"in", a.in}, {"out", a.out.empty() ? "stdout" : a.out}});
  const sw::Vocab vocab = load_vocab(a.vocab);
  std::ifstream in = open_in(a.in, std::ios::binary);
  std::string text;
  for (const std::string& r : sw::unpack_sequences(sw::read_packed(in), vocab)) text += r + "\n";
  if (a.out.empty()) std::cout << text;
  else write_text(a.out, text);
  return kExitOk;
}

// --- eval / bigbench --------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string gold;
  double threshold = 0.01;
  bool whole_string = false;
  std::string csv;
  bool json = false;
};

/// Either one file carrying every field, or gold + predictions aligned by
/// id (when every prediction has one) or by line.
std::vector<sw::PredictionRecord> load_records(const EvalArgs& a) {
  auto parse_line = [](const std::string& line) -> std::optional<json> {
    try {
      return json::parse(line);
    } catch (const json::exception&) {
      return std::nullopt;
    }
  };
  std::vector<sw::PredictionRecord> out;
  const std::vector<std::string> pred_lines = read_lines(a.pred);
  if (a.gold.empty()) {
    for (const std::string& line : pred_lines) {
      auto j = parse_line(line);
      out.push_back(j && j->is_object() ? sw::record_from_json(*j) : sw::PredictionRecord{});
    }
    return out;
  }
  std::vector<json> preds;
  bool all_ids = true;
  for (const std::string& line : pred_lines) {
    auto j = parse_line(line);
    preds.push_back(j && j->is_object() ? *j : json::object());
    all_ids = all_ids && preds.back().contains("id");
  }
  std::map<std::string, std::string> by_id;
  if (all_ids) {
    for (const json& p : preds) by_id[sw::json_text_field(p, "id").value_or("")] = sw::json_text_field(p, "prediction").value_or("");
  }
  std::size_t i = 0;
  for (const std::string& line : read_lines(a.gold)) {
    auto j = parse_line(line);
    sw::PredictionRecord r = j && j->is_object() ? sw::record_from_json(*j) : sw::PredictionRecord{};
    if (all_ids) {
      auto it = by_id.find(r.id);
      r.prediction = it == by_id.end() ? "" : it->second;
    } else {
      r.prediction = i < preds.size() ? sw::json_text_field(preds[i], "prediction").value_or("") : "";
    }
    ++i;
    out.push_back(std::move(r));
  }
  return out;
}

int cmd_eval(const EvalArgs& a) {
  print_config("eval", {{"pred", a.pred},
                        {"gold", a.gold.empty() ? "none" : a.gold},
                        {"threshold", std::to_string(a.threshold)},
                        {"extraction", a.whole_string ? "whole-string" : "last-equals"}});
  sw::EvalReport report = sw::evaluate(load_records(a), a.threshold,
                                       a.whole_string ? sw::ExtractionRule::WholeString : sw::ExtractionRule::LastEquals);
  if (!a.csv.empty()) write_text(a.csv, report.grid_csv());
  if (a.json) {
    std::cout << report.to_json().dump() << '\n';
    return kExitOk;
  }
  std::printf("%-8s %-8s %-8s\n", "N", "ACC", "RE");
  std::printf("%-8llu %-8.4f %-8.4f\n", static_cast<unsigned long long>(report.count), report.accuracy(),
              report.re_accuracy());
  std::printf("extraction failures: %llu, record errors: %llu, ACC<=RE: %s\n",
              static_cast<unsigned long long>(report.extraction_failures),
              static_cast<unsigned long long>(report.record_errors), report.ordering_holds() ? "yes" : "no");
  std::cout << report.grid_csv();
  return kExitOk;
}

struct BenchArgs {
  std::string op;
  int digits = 1;
  std::uint64_t n = 100;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_bigbench(const BenchArgs& a) {
  print_config("bigbench", {{"op", a.op},
                            {"digits", std::to_string(a.digits)},
                            {"n", std::to_string(a.n)},
                            {"seed", std::to_string(a.seed)},
                            {"out", a.out.empty() ? "stdout" : a.out}});
  auto op = sw::group_from_name(a.op, sw::kAllOpGroups, sw::op_group_name);
  if (!op) throw CLI::ValidationError("--op must be ADD, SUB, MUL or DIV");
  std::string text;
  for (const sw::SuiteProblem& p : sw::bigbench_suite(*op, a.digits, a.n, a.seed)) {
    ordered_json j;
    j["problem"] = p.problem;
    j["ground_truth"] = sw::render(p.ground_truth);
    j["op"] = sw::op_group_name(p.op);
    j["format"] = "Int";
    j["digits"] = p.digits;
    text += j.dump() + "\n";
  }
  if (a.out.empty()) std::cout << text;
  else write_text(a.out, text);
  return kExitOk;
}

// --- reconstruct / score-mwp ------------------------------------------------

struct MwpArgs {
  std::string in;
  std::string out;
  std::string rejects;
  std::string pred;
  std::string fields;
  bool json = false;
};

sw::FieldMapping load_fields(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in = open_in(path);
  try {
    return sw::FieldMapping::from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw sw::Error(sw::ErrorCode::Format, std::string("bad field mapping: ") + e.what());
  }
}

int cmd_reconstruct(const MwpArgs& a) {
  const std::string rejects_path = a.rejects.empty() ? a.out + ".rejects.jsonl" : a.rejects;
  print_config("reconstruct", {{"in", a.in}, {"out", a.out}, {"rejects", rejects_path},
                               {"fields", a.fields.empty() ? "default" : a.fields}});
  const sw::FieldMapping fields = load_fields(a.fields);
  const std::vector<std::string> lines = read_lines(a.in);
  std::ofstream out = open_out(a.out, std::ios::binary);
  std::ofstream rejects = open_out(rejects_path, std::ios::binary);
  std::uint64_t ok = 0, rejected = 0, normalized = 0;
  std::size_t line_no = 0;
  for (const std::string& line : lines) {
    ++line_no;
    ordered_json record;
    try {
      record = ordered_json::parse(line);
    } catch (const json::exception& e) {
      rejects << ordered_json{{"id", ""}, {"reason", "RecordParseError"},
                              {"detail", "line " + std::to_string(line_no) + ": " + e.what()}}.dump()
              << '\n';
      ++rejected;
      continue;
    }
    sw::ReconstructOutcome r = sw::reconstruct(record, fields);
    if (!r.normalizations.empty()) {
      ++normalized;
      std::cerr << "normalized line " << line_no << ":";
      for (const auto& n : r.normalizations) std::cerr << ' ' << n;
      std::cerr << '\n';
    }
    if (r.record) {
      out << r.record->dump() << '\n';
      ++ok;
    } else {
      rejects << r.reject->to_json().dump() << '\n';
      ++rejected;
    }
  }
  out.flush();
  rejects.flush();
  if (!out || !rejects) throw sw::Error(sw::ErrorCode::Io, "write failed");
  if (a.json) {
    std::cout << json{{"reconstructed", ok}, {"rejected", rejected}, {"normalized", normalized}}.dump() << '\n';
  } else {
    std::cout << ok << " reconstructed, " << rejected << " rejected, " << normalized << " normalized\n";
  }
  return kExitOk;
}

int cmd_score_mwp(const MwpArgs& a) {
  print_config("score-mwp", {{"gold", a.in}, {"pred", a.pred}, {"fields", a.fields.empty() ? "default" : a.fields}});
  const sw::FieldMapping fields = load_fields(a.fields);
  std::vector<ordered_json> gold;
  for (const std::string& line : read_lines(a.in)) {
    try {
      gold.push_back(ordered_json::parse(line));
    } catch (const json::exception& e) {
      throw sw::Error(sw::ErrorCode::Format, std::string("bad gold record: ") + e.what());
    }
  }
  std::map<std::string, std::string> preds;
  for (const std::string& line : read_lines(a.pred)) {
    try {
      json j = json::parse(line);
      preds[sw::json_text_field(j, "id").value_or("")] = sw::json_text_field(j, "prediction").value_or("");
    } catch (const json::exception&) {
      // unreadable prediction lines leave their gold record missing
    }
  }
  sw::MwpReport report = sw::score_mwp(gold, preds, fields);
  if (a.json) {
    std::cout << report.to_json().dump() << '\n';
  } else {
    std::printf("N=%llu arithmetic_accuracy=%.4f answer_accuracy=%.4f missing=%llu\n",
                static_cast<unsigned long long>(report.count), report.arithmetic_accuracy(), report.answer_accuracy(),
                static_cast<unsigned long long>(report.missing));
  }
  return kExitOk;
}

int exit_code_for(const sw::Error& e) {
  if (e.code() == sw::ErrorCode::Io) return kExitIo;
  if (e.is_math_error()) return kExitMath;
  return kExitParse;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Step-by-step arithmetic traces, datasets and scoring"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  TraceArgs trace_args;
  auto* trace = app.add_subcommand("trace", "Print the step-by-step trace of an expression");
  trace->add_option("expr", trace_args.expr, "Expression, e.g. 1+8/1*10+2")->required();
  trace->add_flag("--fraction", trace_args.fraction, "Parse (a/b) as fraction literals; exact division");
  trace->add_flag("--json", trace_args.json, "Emit JSON");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a trace dataset and its manifest");
  generate->add_option("--seed", gen.seed, "Master seed")->required();
  generate->add_option("--out", gen.out, "Dataset path (one trace per line)")->required();
  generate->add_option("--schedule", gen.schedule, "Schedule JSON; default is the two-phase curriculum");
  generate->add_option("--records", gen.records, "Total records of the default curriculum")->capture_default_str();
  generate->add_option("--phase2", gen.phase2, "Records in the 5-12 digit phase")->capture_default_str();
  generate->add_option("--manifest", gen.manifest, "Manifest path (default <out>.manifest.json)");
  generate->add_option("--test-out", gen.test_out, "Also write a held-out split here");
  generate->add_option("--test-records", gen.test_records, "Held-out split size")->capture_default_str();
  generate->add_option("--workers", gen.workers, "Worker threads; output bytes do not depend on it")
      ->capture_default_str()
      ->check(CLI::Range(1U, 1024U));
  generate->add_flag("--progress", gen.progress, "Record counter on stderr");
  generate->add_flag("--json", gen.json, "Print the manifest as JSON");

  TokenArgs tok;
  auto* tokenize = app.add_subcommand("tokenize", "Map text to token ids");
  tokenize->add_option("--text", tok.text, "Single record");
  tokenize->add_option("--in", tok.in, "File with one record per line");
  tokenize->add_option("--vocab", tok.vocab, "Vocabulary JSON (default: built-in)");
  tokenize->add_flag("--json", tok.json, "Emit JSON");

  TokenArgs detok;
  auto* detokenize = app.add_subcommand("detokenize", "Map token ids back to text");
  detokenize->add_option("--ids", detok.text, "Space-separated ids");
  detokenize->add_option("--in", detok.in, "File with one id sequence per line");
  detokenize->add_option("--vocab", detok.vocab, "Vocabulary JSON (default: built-in)");
  detokenize->add_flag("--json", detok.json, "Emit JSON");

  std::string vocab_out;
  auto* vocab = app.add_subcommand("vocab", "Write the built-in vocabulary as JSON");
  vocab->add_option("--out", vocab_out, "Output path (default stdout)");

  PackArgs pk;
  auto* pack = app.add_subcommand("pack", "Pack tokenized records into fixed-length blocks");
  pack->add_option("--in", pk.in, "Dataset with one record per line")->required();
  pack->add_option("--out", pk.out, "Binary block file")->required();
  pack->add_option("--block-length", pk.block_length, "Tokens per block")->capture_default_str()->check(CLI::PositiveNumber);
  pack->add_option("--vocab", pk.vocab, "Vocabulary JSON (default: built-in)");
  pack->add_flag("--json", pk.json, "Emit JSON");

  PackArgs upk;
  auto* unpack = app.add_subcommand("unpack", "Recover records from a block file");
  unpack->add_option("--in", upk.in, "Binary block file")->required();
  unpack->add_option("--out", upk.out, "Output path (default stdout)");
  unpack->add_option("--vocab", upk.vocab, "Vocabulary JSON (default: built-in)");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score predictions: ACC (two decimals) and RE");
  eval->add_option("--pred", ev.pred, "JSONL with prediction (and problem/ground_truth without --gold)")->required();
  eval->add_option("--gold", ev.gold, "JSONL with problem and ground_truth");
  eval->add_option("--threshold", ev.threshold, "Relative error threshold")->capture_default_str();
  eval->add_flag("--whole-string", ev.whole_string, "Whole prediction is the answer (no last-= extraction)");
  eval->add_option("--csv", ev.csv, "Write the operation x format grid as CSV");
  eval->add_flag("--json", ev.json, "Emit the full report as JSON");

  BenchArgs bb;
  auto* bigbench = app.add_subcommand("bigbench", "Fixed-digit two-operand problem suite (JSONL)");
  bigbench->add_option("--op", bb.op, "ADD, SUB, MUL or DIV")
      ->required()
      ->check(CLI::IsMember({"ADD", "SUB", "MUL", "DIV"}));
  bigbench->add_option("--digits", bb.digits, "Operand digit count")->required()->check(CLI::Range(1, 5));
  bigbench->add_option("--n", bb.n, "Number of problems")->capture_default_str();
  bigbench->add_option("--seed", bb.seed, "Seed")->required();
  bigbench->add_option("--out", bb.out, "Output path (default stdout)");

  MwpArgs rc;
  auto* reconstruct = app.add_subcommand("reconstruct", "Add step-by-step solutions to word-problem records");
  reconstruct->add_option("--in", rc.in, "Input JSONL")->required();
  reconstruct->add_option("--out", rc.out, "Output JSONL")->required();
  reconstruct->add_option("--rejects", rc.rejects, "Rejects JSONL (default <out>.rejects.jsonl)");
  reconstruct->add_option("--fields", rc.fields, "Field-mapping JSON");
  reconstruct->add_flag("--json", rc.json, "Emit counts as JSON");

  MwpArgs sm;
  auto* score = app.add_subcommand("score-mwp", "Arithmetic and answer accuracy on word problems");
  score->add_option("--gold", sm.in, "Reconstructed gold JSONL")->required();
  score->add_option("--pred", sm.pred, "JSONL with id and prediction")->required();
  score->add_option("--fields", sm.fields, "Field-mapping JSON");
  score->add_flag("--json", sm.json, "Emit the full report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*trace) return cmd_trace(trace_args);
    if (*generate) return cmd_generate(gen);
    if (*tokenize) return cmd_tokenize(tok);
    if (*detokenize) return cmd_detokenize(detok);
    if (*vocab) return cmd_vocab(vocab_out);
    if (*pack) return cmd_pack(pk);
    if (*unpack) return cmd_unpack(upk);
    if (*eval) return cmd_eval(ev);
    if (*bigbench) return cmd_bigbench(bb);
    if (*reconstruct) return cmd_reconstruct(rc);
    if (*score) return cmd_score_mwp(sm);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const sw::Error& e) {
    std::cerr << "error: " << e.what();
    if (e.position()) {
      std::cerr << (e.is_math_error() ? " (step " : e.code() == sw::ErrorCode::RecordTooLong ? " (line " : " (offset ")
                << *e.position() << ')';
    }
    std::cerr << '\n';
    return exit_code_for(e);
  }
  return kExitUsage;
}
