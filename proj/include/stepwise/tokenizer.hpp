#pragma once

// Digit-level tokenizer with a fixed arithmetic vocabulary. Every record
// starts with the leading marker `_`; every other character maps to exactly
// one id.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "stepwise/error.hpp"

namespace stepwise {

using TokenId = std::uint32_t;

enum class Provenance {
  Published,   // id read from the published tokenization examples
  Unverified,  // id assigned here; not confirmed by a published example
  Artifact,    // library-only token (padding)
};

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Published: return "published";
    case Provenance::Unverified: return "unverified";
    case Provenance::Artifact: return "artifact";
  }
  return "?";
}

struct VocabEntry {
  std::string symbol;  // single character, or "<pad>"
  TokenId id;
  Provenance provenance;
};

inline constexpr int kVocabFormatVersion = 1;
inline constexpr char kMarker = '_';
inline constexpr std::string_view kPadSymbol = "<pad>";

class Vocab {
 public:
  /// The built-in arithmetic vocabulary.
  static const Vocab& standard() {
    static const Vocab v = [] {
      std::vector<VocabEntry> entries = {
          {"_", 20005, Provenance::Published}, {".", 20007, Provenance::Published},
          {"1", 20009, Provenance::Published}, {"2", 20010, Provenance::Published},
          {"-", 20011, Provenance::Published}, {"3", 20013, Provenance::Published},
          {")", 20014, Provenance::Published}, {"5", 20015, Provenance::Published},
          {"4", 20016, Provenance::Published}, {"(", 20020, Provenance::Published},
          {"6", 20021, Provenance::Published}, {"8", 20023, Provenance::Published},
          {"7", 20025, Provenance::Published}, {"/", 20026, Provenance::Published},
          {"*", 20032, Provenance::Published}, {"%", 20040, Provenance::Published},
          {"]", 20042, Provenance::Published}, {"[", 20052, Provenance::Published},
          {"=", 20054, Provenance::Published}, {"+", 20065, Provenance::Published},
          {"0", 20012, Provenance::Unverified}, {"9", 20017, Provenance::Unverified},
          {"^", 20018, Provenance::Unverified}, {std::string(kPadSymbol), 20000, Provenance::Artifact},
      };
      return Vocab(std::move(entries));
    }();
    return v;
  }

  /// Builds a vocabulary; it must be a bijection, contain the marker and a pad.
  explicit Vocab(std::vector<VocabEntry> entries) : entries_(std::move(entries)) {
    by_char_.fill(std::nullopt);
    bool have_pad = false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const VocabEntry& e = entries_[i];
      if (!by_id_.emplace(e.id, i).second) {
        throw Error(ErrorCode::Format, "duplicate token id " + std::to_string(e.id));
      }
      if (e.symbol == kPadSymbol) {
        pad_ = e.id;
        have_pad = true;
        continue;
      }
      if (e.symbol.size() != 1) throw Error(ErrorCode::Format, "symbol must be one character: " + e.symbol);
      auto c = static_cast<unsigned char>(e.symbol[0]);
      if (by_char_[c]) throw Error(ErrorCode::Format, "duplicate symbol " + e.symbol);
      by_char_[c] = e.id;
    }
    if (!have_pad) throw Error(ErrorCode::Format, "vocabulary has no pad token");
    if (!by_char_[static_cast<unsigned char>(kMarker)]) {
      throw Error(ErrorCode::Format, "vocabulary has no leading marker");
    }
    marker_ = *by_char_[static_cast<unsigned char>(kMarker)];
  }

  TokenId marker_id() const { return marker_; }
  TokenId pad_id() const { return pad_; }
  const std::vector<VocabEntry>& entries() const { return entries_; }

  std::optional<TokenId> id_of(char c) const { return by_char_[static_cast<unsigned char>(c)]; }
  const VocabEntry* entry_of(TokenId id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &entries_[it->second];
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format_version"] = kVocabFormatVersion;
    j["marker"] = std::string(1, kMarker);
    j["pad_id"] = pad_;
    nlohmann::json arr = nlohmann::json::array();
    for (const VocabEntry& e : entries_) {
      arr.push_back({{"symbol", e.symbol}, {"id", e.id}, {"provenance", provenance_name(e.provenance)}});
    }
    j["entries"] = std::move(arr);
    return j;
  }

  static Vocab from_json(const nlohmann::json& j) {
    if (j.value("format_version", 0) != kVocabFormatVersion) {
      throw Error(ErrorCode::Format, "unsupported vocabulary format version");
    }
    std::vector<VocabEntry> entries;
    for (const auto& item : j.at("entries")) {
      const std::string prov = item.value("provenance", "unverified");
      Provenance p = prov == "published" ? Provenance::Published
                     : prov == "artifact" ? Provenance::Artifact
                                          : Provenance::Unverified;
      entries.push_back({item.at("symbol").get<std::string>(), item.at("id").get<TokenId>(), p});
    }
    return Vocab(std::move(entries));
  }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<TokenId, std::size_t> by_id_;
  std::array<std::optional<TokenId>, 256> by_char_{};
  TokenId marker_ = 0;
  TokenId pad_ = 0;
};

/// Marker id followed by one id per character. `_` itself is reserved for
/// the marker and rejected inside text.
inline std::vector<TokenId> encode(std::string_view text, const Vocab& vocab = Vocab::standard()) {
  std::vector<TokenId> ids;
  ids.reserve(text.size() + 1);
  ids.push_back(vocab.marker_id());
  for (std::size_t i = 0; i < text.size(); ++i) {
    std::optional<TokenId> id;
    if (text[i] != kMarker) id = vocab.id_of(text[i]);
    if (!id) {
      throw Error(ErrorCode::UnknownSymbol, "symbol not in vocabulary at offset " + std::to_string(i), i);
    }
    ids.push_back(*id);
  }
  return ids;
}

/// Inverse of encode: markers and pads produce no text.
inline std::string decode(std::span<const TokenId> ids, const Vocab& vocab = Vocab::standard()) {
  std::string out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const TokenId id = ids[i];
    if (id == vocab.marker_id() || id == vocab.pad_id()) continue;
    const VocabEntry* e = vocab.entry_of(id);
    if (e == nullptr) {
      throw Error(ErrorCode::UnknownId, "unknown token id " + std::to_string(id), i);
    }
    out += e->symbol;
  }
  return out;
}

}  // namespace stepwise
