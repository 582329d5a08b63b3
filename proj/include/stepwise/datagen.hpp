#pragma once

// Seeded dataset synthesis. Every record is a pure function of
// (spec seed, record index), so output bytes do not depend on how many
// worker threads produce them.

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "stepwise/error.hpp"
#include "stepwise/expr.hpp"
#include "stepwise/steps.hpp"
#include "stepwise/tokenizer.hpp"

namespace stepwise {

enum class Category { IntMixed, Exponentiation, BracketedInt, LengthyMixed, Fraction };

inline constexpr std::array<Category, 5> kAllCategories = {
    Category::IntMixed, Category::Exponentiation, Category::BracketedInt, Category::LengthyMixed,
    Category::Fraction};

inline const char* category_name(Category c) {
  switch (c) {
    case Category::IntMixed: return "int-mixed";
    case Category::Exponentiation: return "exponentiation";
    case Category::BracketedInt: return "bracketed-int";
    case Category::LengthyMixed: return "lengthy-mixed";
    case Category::Fraction: return "fraction";
  }
  return "?";
}

inline Category parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (name == category_name(c)) return c;
  }
  throw Error(ErrorCode::Format, "unknown category '" + std::string(name) + "'");
}

inline Mode mode_for(Category c) { return c == Category::Fraction ? Mode::Fraction : Mode::Standard; }

inline constexpr int kMinSteps = 2;
inline constexpr int kMaxSteps = 10;
inline constexpr int kMaxDigits = 12;
inline constexpr int kMaxExponent = 100;
inline constexpr std::uint64_t kMaxBase = 10000;
inline constexpr std::uint64_t kCurriculumPhase2Records = 50000;
inline constexpr std::uint64_t kDefaultTestRecords = 9592;

struct GenSpec {
  Category category = Category::IntMixed;
  int digits_lo = 1;
  int digits_hi = 5;
  int steps_lo = kMinSteps;
  int steps_hi = kMaxSteps;
  std::uint64_t records = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (digits_lo < 1 || digits_hi > kMaxDigits || digits_lo > digits_hi) {
      throw Error(ErrorCode::Format, "digit range must satisfy 1 <= lo <= hi <= 12");
    }
    if (category != Category::Exponentiation &&
        (steps_lo < kMinSteps || steps_hi > kMaxSteps || steps_lo > steps_hi)) {
      throw Error(ErrorCode::Format, "step range must satisfy 2 <= lo <= hi <= 10");
    }
  }
};

struct CurriculumPhase {
  std::vector<GenSpec> specs;

  std::uint64_t records() const {
    std::uint64_t n = 0;
    for (const GenSpec& s : specs) n += s.records;
    return n;
  }
};

struct CurriculumSchedule {
  std::uint64_t seed = 0;
  std::vector<CurriculumPhase> phases;

  std::uint64_t records() const {
    std::uint64_t n = 0;
    for (const CurriculumPhase& p : phases) n += p.records();
    return n;
  }
};

// ---------------------------------------------------------------------------
// Randomness

/// splitmix64; fully specified, so streams are identical on
/// every platform.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [lo, hi] by rejection.
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo;
    if (span == max()) return (*this)();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = max() - max() % range;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return lo + x % range;
  }
  int uniform_int(int lo, int hi) {
    return static_cast<int>(uniform(0, static_cast<std::uint64_t>(hi - lo))) + lo;
  }
  bool chance(double p) { return static_cast<double>((*this)() >> 11) * 0x1.0p-53 < p; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (b * 0xd6e8feb86659fd93ULL + 0x2545f4914f6cdd1dULL));
  g();
  return g();
}

// ---------------------------------------------------------------------------
// Expression sampling

namespace detail {

inline std::uint64_t pow10u(int d) {
  std::uint64_t p = 1;
  while (d-- > 0) p *= 10;
  return p;
}

inline std::uint64_t sample_magnitude(SplitMix64& rng, int digits) {
  if (digits <= 1) return rng.uniform(0, 9);
  return rng.uniform(pow10u(digits - 1), pow10u(digits) - 1);
}

class ExprSampler {
 public:
  ExprSampler(const GenSpec& spec, SplitMix64& rng) : spec_(spec), rng_(rng) {}

  std::string sample(int ops) {
    switch (spec_.category) {
      case Category::IntMixed: return flat_int(ops);
      case Category::Exponentiation: return power();
      case Category::BracketedInt:
      case Category::LengthyMixed:
      case Category::Fraction: {
        Node root = tree(ops);
        if (spec_.category == Category::BracketedInt && !has_group_) force_group(root);
        std::string out;
        emit(root, out, -1, false);
        return out;
      }
    }
    return {};
  }

  /// A sum of fresh operands; used when rejection sampling gives up.
  std::string fallback(int ops) {
    std::string out = leaf_text(false);
    for (int i = 0; i < ops; ++i) {
      out += '+';
      out += leaf_text(false);
    }
    return out;
  }

  int ops_for_spec() {
    if (spec_.category == Category::Exponentiation) return 1;
    return rng_.uniform_int(spec_.steps_lo, spec_.steps_hi);
  }

 private:
  struct Node {
    BinOp op = BinOp::Add;
    std::vector<Node> kids;  // empty for leaves
    bool negate_leaf = false;
    bool group = false;
    bool square = false;
  };

  int digits() { return rng_.uniform_int(spec_.digits_lo, spec_.digits_hi); }

  std::string int_text(bool nonzero) {
    std::uint64_t v;
    do {
      v = sample_magnitude(rng_, digits());
    } while (nonzero && v == 0);
    return std::to_string(v);
  }

  BinOp arith_op() {
    static constexpr std::array<BinOp, 4> ops = {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div};
    return ops[rng_.uniform(0, 3)];
  }

  std::string flat_int(int ops) {
    std::string out = int_text(false);
    for (int i = 0; i < ops; ++i) {
      BinOp op = arith_op();
      out += op_char(op);
      out += int_text(op == BinOp::Div);
    }
    return out;
  }

  std::string power() {
    // The base cap wins over the digit range: 5-digit requests widen to
    // [10^(lo-1), 10000] instead of collapsing onto 10000 alone.
    std::uint64_t base;
    if (spec_.digits_hi >= 5) {
      const int lo = std::min(spec_.digits_lo, 4);
      base = rng_.uniform(lo <= 1 ? 0 : pow10u(lo - 1), kMaxBase);
    } else {
      base = sample_magnitude(rng_, digits());
    }
    const std::uint64_t exponent = rng_.uniform(0, kMaxExponent);
    return std::to_string(base) + "^" + std::to_string(exponent);
  }

  Node tree(int ops) {
    if (ops == 0) {
      Node leaf;
      leaf.negate_leaf = rng_.chance(negative_rate());
      return leaf;
    }
    const int left = rng_.uniform_int(0, ops - 1);
    Node n;
    n.op = arith_op();
    n.kids.push_back(tree(left));
    n.kids.push_back(tree(ops - 1 - left));
    if (rng_.chance(0.3)) {
      n.group = true;
      has_group_ = true;
    }
    return n;
  }

  void force_group(Node& root) {
    Node* target = &root;
    while (!target->kids.empty() && rng_.chance(0.5)) {
      Node& next = target->kids[rng_.uniform(0, 1)];
      if (next.kids.empty()) break;
      target = &next;
    }
    target->group = true;
    has_group_ = true;
  }

  double negative_rate() const {
    switch (spec_.category) {
      case Category::BracketedInt: return 0.15;
      case Category::LengthyMixed: return 0.25;
      case Category::Fraction: return 0.25;
      default: return 0.0;
    }
  }

  std::string decimal_text() {
    std::string out = int_text(false);
    out += '.';
    const int frac = rng_.uniform_int(1, 5);
    for (int i = 0; i < frac; ++i) out += static_cast<char>('0' + rng_.uniform(0, 9));
    return out;
  }

  std::string leaf_text(bool negative) {
    switch (spec_.category) {
      case Category::Fraction: {
        std::string body = "(" + int_text(true) + "/" + int_text(true) + ")";
        return negative ? "-" + body : body;
      }
      case Category::LengthyMixed: {
        const std::uint64_t kind = rng_.uniform(0, 9);
        std::string body;
        if (kind < 4) body = int_text(false);
        else if (kind < 7) body = decimal_text();
        else body = int_text(false) + "%";
        return negative ? "-" + body : body;
      }
      default:
        return negative ? "-" + int_text(false) : int_text(false);
    }
  }

  static bool contains_group(const Node& n) {
    if (n.group) return true;
    for (const Node& k : n.kids) {
      if (contains_group(k)) return true;
    }
    return false;
  }

  // parent_prec < 0 means no parent operator.
  void emit(const Node& n, std::string& out, int parent_prec, bool right_child) {
    if (n.kids.empty()) {
      out += leaf_text(n.negate_leaf);
      return;
    }
    const int prec = precedence(n.op);
    const bool needed = parent_prec > prec || (right_child && parent_prec == prec);
    const bool grouped = needed || n.group;
    bool square = false;
    if (grouped && spec_.category == Category::LengthyMixed) {
      square = contains_group(n.kids[0]) || contains_group(n.kids[1]) ? rng_.chance(0.5) : false;
    }
    if (grouped) out += square ? '[' : '(';
    emit(n.kids[0], out, grouped ? -1 : prec, false);
    out += op_char(n.op);
    emit(n.kids[1], out, grouped ? -1 : prec, true);
    if (grouped) out += square ? ']' : ')';
  }

  const GenSpec& spec_;
  SplitMix64& rng_;
  bool has_group_ = false;
};

/// Largest digit count over the integer parts and fraction terms.
inline int max_operand_digits(const Expr& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          std::string_view t = n.text;
          if (!t.empty() && t.front() == '-') t.remove_prefix(1);
          std::size_t len = 0;
          while (len < t.size() && t[len] >= '0' && t[len] <= '9') ++len;
          return static_cast<int>(len);
        } else if constexpr (std::is_same_v<T, FractionLit>) {
          return static_cast<int>(std::max(n.num.digit_count(), n.den.digit_count()));
        } else if constexpr (std::is_same_v<T, Unary>) {
          return max_operand_digits(*n.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return std::max(max_operand_digits(*n.lhs), max_operand_digits(*n.rhs));
        } else {
          return max_operand_digits(*n.inner);
        }
      },
      e.node);
}

}  // namespace detail

inline constexpr int kMaxSampleAttempts = 64;

struct SampledRecord {
  ExprPtr expr;
  std::string trace_line;
  int ops = 0;
  int digits = 0;
};

/// Samples one record and checks its trace. Rejected candidates (division by
/// zero, unrenderable magnitudes) are resampled from the same stream.
inline SampledRecord sample_record(const GenSpec& spec, std::uint64_t index) {
  SplitMix64 rng(mix_seed(spec.seed, index));
  detail::ExprSampler sampler(spec, rng);
  const Mode mode = mode_for(spec.category);
  const int ops = sampler.ops_for_spec();
  for (int attempt = 0; attempt <= kMaxSampleAttempts; ++attempt) {
    const std::string src = attempt < kMaxSampleAttempts ? sampler.sample(ops) : sampler.fallback(ops);
    ExprPtr e = parse(src, mode);
    StepTrace t;
    try {
      t = trace(e, mode);
    } catch (const Error& err) {
      if (err.is_math_error() && attempt < kMaxSampleAttempts) continue;
      throw;
    }
    if (!same_value(t.final, direct_eval(e, mode))) {
      throw Error(ErrorCode::NonTerminating, "trace disagrees with direct evaluation for " + src);
    }
    return {e, render_trace(t), count_atomic_ops(*e), detail::max_operand_digits(*e)};
  }
  throw Error(ErrorCode::NonTerminating, "sampling failed");
}

inline ExprPtr sample_expression(const GenSpec& spec, std::uint64_t index) {
  return sample_record(spec, index).expr;
}

// ---------------------------------------------------------------------------
// Schedules

/// Default curriculum: uniform category mix with operands up to 5 digits,
/// then a block of records with 5 to 12 digit operands.
inline CurriculumSchedule default_curriculum(std::uint64_t total, std::uint64_t seed,
                                             std::uint64_t phase2 = kCurriculumPhase2Records) {
  phase2 = std::min(phase2, total);
  CurriculumSchedule s;
  s.seed = seed;
  auto make_phase = [&](std::uint64_t n, int lo, int hi, std::uint64_t phase_no) {
    CurriculumPhase p;
    const std::uint64_t k = kAllCategories.size();
    for (std::uint64_t i = 0; i < k; ++i) {
      GenSpec g;
      g.category = kAllCategories[i];
      g.digits_lo = lo;
      g.digits_hi = hi;
      g.records = n / k + (i < n % k ? 1 : 0);
      g.seed = mix_seed(seed, phase_no * 16 + i);
      p.specs.push_back(g);
    }
    return p;
  };
  s.phases.push_back(make_phase(total - phase2, 1, 5, 1));
  s.phases.push_back(make_phase(phase2, 5, kMaxDigits, 2));
  return s;
}

/// Held-out split: same specs, disjoint seeds.
inline CurriculumSchedule test_split(const CurriculumSchedule& train,
                                     std::uint64_t records = kDefaultTestRecords) {
  CurriculumSchedule s;
  s.seed = mix_seed(train.seed, 0x7e57);
  CurriculumPhase phase;
  std::vector<const GenSpec*> all;
  for (const auto& p : train.phases) {
    for (const auto& g : p.specs) all.push_back(&g);
  }
  const std::uint64_t total = train.records();
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    GenSpec g = *all[i];
    std::uint64_t n = total == 0 ? 0 : records * g.records / total;
    if (i + 1 == all.size()) n = records - assigned;
    assigned += n;
    g.records = n;
    g.seed = mix_seed(g.seed, 0x7e57);
    phase.specs.push_back(g);
  }
  s.phases.push_back(std::move(phase));
  return s;
}

inline nlohmann::json schedule_to_json(const CurriculumSchedule& s) {
  nlohmann::json j;
  j["seed"] = s.seed;
  j["phases"] = nlohmann::json::array();
  for (const auto& p : s.phases) {
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& g : p.specs) {
      specs.push_back({{"category", category_name(g.category)},
                       {"digits", {g.digits_lo, g.digits_hi}},
                       {"steps", {g.steps_lo, g.steps_hi}},
                       {"records", g.records},
                       {"seed", g.seed}});
    }
    j["phases"].push_back({{"specs", specs}});
  }
  return j;
}

inline CurriculumSchedule schedule_from_json(const nlohmann::json& j) {
  CurriculumSchedule s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    std::uint64_t position = 0;
    for (const auto& pj : j.at("phases")) {
      CurriculumPhase p;
      for (const auto& gj : pj.at("specs")) {
        GenSpec g;
        g.category = parse_category(gj.at("category").get<std::string>());
        if (gj.contains("digits")) {
          g.digits_lo = gj["digits"].at(0).get<int>();
          g.digits_hi = gj["digits"].at(1).get<int>();
        }
        if (gj.contains("steps")) {
          g.steps_lo = gj["steps"].at(0).get<int>();
          g.steps_hi = gj["steps"].at(1).get<int>();
        }
        g.records = gj.at("records").get<std::uint64_t>();
        g.seed = gj.contains("seed") ? gj["seed"].get<std::uint64_t>() : mix_seed(s.seed, position);
        g.validate();
        p.specs.push_back(g);
        ++position;
      }
      s.phases.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad schedule: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Generation

inline constexpr int kDatasetFormatVersion = 1;

struct DatasetManifest {
  std::string path;
  std::map<std::string, std::uint64_t> category_histogram;
  std::map<int, std::uint64_t> step_histogram;
  std::map<int, std::uint64_t> digit_histogram;
  std::uint64_t seed = 0;
  int format_version = kDatasetFormatVersion;
  std::uint64_t record_count = 0;
  std::string digest;  // sha256 of every emitted byte, hex

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["path"] = path;
    j["format_version"] = format_version;
    j["seed"] = seed;
    j["record_count"] = record_count;
    j["digest"] = "sha256:" + digest;
    j["category_histogram"] = category_histogram;
    nlohmann::json steps = nlohmann::json::object();
    for (auto [k, v] : step_histogram) steps[std::to_string(k)] = v;
    j["step_histogram"] = steps;
    nlohmann::json digits = nlohmann::json::object();
    for (auto [k, v] : digit_histogram) digits[std::to_string(k)] = v;
    j["digit_histogram"] = digits;
    return j;
  }
};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorCode::Io, "sha256 init failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes) { EVP_DigestUpdate(ctx_, bytes.data(), bytes.size()); }

  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

namespace detail {

struct WorkItem {
  const GenSpec* spec;
  std::uint64_t first;
  std::uint64_t count;
};

struct ChunkResult {
  std::string text;
  std::map<int, std::uint64_t> steps;
  std::map<int, std::uint64_t> digits;
};

inline ChunkResult run_chunk(const WorkItem& w) {
  ChunkResult r;
  r.text.reserve(w.count * 64);
  for (std::uint64_t i = 0; i < w.count; ++i) {
    SampledRecord rec = sample_record(*w.spec, w.first + i);
    r.text += rec.trace_line;
    r.text += '\n';
    ++r.steps[rec.ops];
    ++r.digits[rec.digits];
  }
  return r;
}

}  // namespace detail

inline constexpr std::uint64_t kChunkRecords = 2048;

/// Writes one trace per line in schedule order. `workers` changes speed only.
/// `progress`, if set, is called with the running record count.
template <class Progress = std::nullptr_t>
DatasetManifest generate_dataset(const CurriculumSchedule& schedule, std::ostream& out,
                                 unsigned workers = 1, Progress progress = nullptr) {
  workers = std::max(1U, workers);
  std::vector<detail::WorkItem> items;
  for (const auto& phase : schedule.phases) {
    for (const auto& spec : phase.specs) {
      spec.validate();
      for (std::uint64_t first = 0; first < spec.records; first += kChunkRecords) {
        items.push_back({&spec, first, std::min(kChunkRecords, spec.records - first)});
      }
    }
  }

  DatasetManifest m;
  m.seed = schedule.seed;
  for (Category c : kAllCategories) m.category_histogram[category_name(c)] = 0;
  Sha256 sha;

  for (std::size_t batch = 0; batch < items.size(); batch += workers) {
    const std::size_t n = std::min<std::size_t>(workers, items.size() - batch);
    std::vector<detail::ChunkResult> results(n);
    std::vector<std::exception_ptr> errors(n);
    {
      std::vector<std::jthread> threads;
      for (std::size_t k = 1; k < n; ++k) {
        threads.emplace_back([&, k] {
          try {
            results[k] = detail::run_chunk(items[batch + k]);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        });
      }
      try {
        results[0] = detail::run_chunk(items[batch]);
      } catch (...) {
        errors[0] = std::current_exception();
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (errors[k]) std::rethrow_exception(errors[k]);
      const detail::WorkItem& w = items[batch + k];
      out.write(results[k].text.data(), static_cast<std::streamsize>(results[k].text.size()));
      if (!out) throw Error(ErrorCode::Io, "write to dataset sink failed");
      sha.update(results[k].text);
      m.category_histogram[category_name(w.spec->category)] += w.count;
      for (auto [s, c] : results[k].steps) m.step_histogram[s] += c;
      for (auto [d, c] : results[k].digits) m.digit_histogram[d] += c;
      m.record_count += w.count;
    }
    if constexpr (!std::is_same_v<Progress, std::nullptr_t>) progress(m.record_count);
  }
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "flush of dataset sink failed");
  m.digest = sha.hex();
  return m;
}

/// Recomputes the manifest from an emitted file. Categories come from the
/// schedule's record layout; steps and digits from re-parsing each line.
inline DatasetManifest audit_dataset(std::istream& in, const CurriculumSchedule& schedule) {
  DatasetManifest m;
  m.seed = schedule.seed;
  for (Category c : kAllCategories) m.category_histogram[category_name(c)] = 0;
  Sha256 sha;
  std::vector<const GenSpec*> layout;
  for (const auto& p : schedule.phases) {
    for (const auto& g : p.specs) layout.push_back(&g);
  }
  std::size_t spec_idx = 0;
  std::uint64_t within = 0;
  std::string line;
  while (std::getline(in, line)) {
    while (spec_idx < layout.size() && within >= layout[spec_idx]->records) {
      ++spec_idx;
      within = 0;
    }
    if (spec_idx >= layout.size()) throw Error(ErrorCode::Format, "dataset has more lines than the schedule");
    const GenSpec& g = *layout[spec_idx];
    sha.update(line);
    sha.update("\n");
    std::string_view first = std::string_view(line).substr(0, line.find('='));
    ExprPtr e = parse(first, mode_for(g.category));
    ++m.category_histogram[category_name(g.category)];
    ++m.step_histogram[count_atomic_ops(*e)];
    ++m.digit_histogram[detail::max_operand_digits(*e)];
    ++m.record_count;
    ++within;
  }
  m.digest = sha.hex();
  return m;
}

// ---------------------------------------------------------------------------
// Sequence packing

struct PackedBlocks {
  std::uint32_t block_length = 0;
  std::vector<TokenId> ids;  // block_count * block_length

  std::size_t block_count() const { return block_length == 0 ? 0 : ids.size() / block_length; }
};

/// Greedy packing of whole tokenized records into fixed-length blocks; the
/// tail of each block is padding.
inline PackedBlocks pack_sequences(std::istream& lines, std::uint32_t block_length,
                                   const Vocab& vocab = Vocab::standard()) {
  if (block_length == 0) throw Error(ErrorCode::Format, "block length must be positive");
  PackedBlocks out;
  out.block_length = block_length;
  std::vector<TokenId> block;
  block.reserve(block_length);
  auto flush = [&] {
    if (block.empty()) return;
    block.resize(block_length, vocab.pad_id());
    out.ids.insert(out.ids.end(), block.begin(), block.end());
    block.clear();
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    std::vector<TokenId> rec = encode(line, vocab);
    if (rec.size() > block_length) {
      throw Error(ErrorCode::RecordTooLong,
                  "line " + std::to_string(line_no) + " needs " + std::to_string(rec.size()) +
                      " tokens, block length is " + std::to_string(block_length),
                  line_no);
    }
    if (block.size() + rec.size() > block_length) flush();
    block.insert(block.end(), rec.begin(), rec.end());
  }
  flush();
  return out;
}

/// Splits blocks back into records at marker ids, dropping padding.
inline std::vector<std::string> unpack_sequences(const PackedBlocks& blocks,
                                                 const Vocab& vocab = Vocab::standard()) {
  std::vector<std::string> records;
  for (std::size_t b = 0; b < blocks.block_count(); ++b) {
    std::span<const TokenId> block(blocks.ids.data() + b * blocks.block_length, blocks.block_length);
    std::size_t i = 0;
    while (i < block.size() && block[i] != vocab.pad_id()) {
      if (block[i] != vocab.marker_id()) throw Error(ErrorCode::Format, "block record does not start with marker");
      std::size_t j = i + 1;
      while (j < block.size() && block[j] != vocab.marker_id() && block[j] != vocab.pad_id()) ++j;
      records.push_back(decode(block.subspan(i, j - i), vocab));
      i = j;
    }
  }
  return records;
}

inline constexpr std::array<char, 4> kPackMagic = {'S', 'W', 'P', 'K'};
inline constexpr std::uint32_t kPackVersion = 1;

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::Format, "truncated packed file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace detail

/// 16-byte header (magic, version, block length, block count), then
/// little-endian 32-bit ids.
inline void write_packed(std::ostream& out, const PackedBlocks& blocks) {
  out.write(kPackMagic.data(), kPackMagic.size());
  detail::put_u32(out, kPackVersion);
  detail::put_u32(out, blocks.block_length);
  detail::put_u32(out, static_cast<std::uint32_t>(blocks.block_count()));
  for (TokenId id : blocks.ids) detail::put_u32(out, id);
  if (!out) throw Error(ErrorCode::Io, "write of packed blocks failed");
}

inline PackedBlocks read_packed(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kPackMagic) {
    throw Error(ErrorCode::Format, "not a packed block file");
  }
  if (detail::get_u32(in) != kPackVersion) throw Error(ErrorCode::Format, "unsupported packed version");
  PackedBlocks blocks;
  blocks.block_length = detail::get_u32(in);
  const std::uint32_t count = detail::get_u32(in);
  blocks.ids.resize(static_cast<std::size_t>(count) * blocks.block_length);
  for (TokenId& id : blocks.ids) id = detail::get_u32(in);
  return blocks;
}

}  // namespace stepwise
