#pragma once

// Review ingestion, text normalization and vocabulary construction.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "fiducia/error.hpp"
#include "fiducia/text_io.hpp"

namespace fiducia {

using json = nlohmann::json;
using TokenList = std::vector<std::string>;

inline constexpr std::string_view kPosEmo = "POS_EMO";
inline constexpr std::string_view kNegEmo = "NEG_EMO";
/// Sentence punctuation (. ! ?) collapses to this single token.
inline constexpr std::string_view kSentenceMarker = ".";

inline bool is_sentinel(std::string_view token) { return token == kPosEmo || token == kNegEmo; }

/// Coordinating tokens that split a sentence into clauses.
inline bool is_coordinator(std::string_view token) {
  return token == "but" || token == "however" || token == "while" || token == "whereas" ||
         token == "and-then";
}

inline bool is_clause_marker(std::string_view token) {
  return token == kSentenceMarker || is_coordinator(token);
}

enum class Label { negative, positive, unlabeled };

inline std::string_view label_name(Label label) {
  switch (label) {
    case Label::negative: return "negative";
    case Label::positive: return "positive";
    case Label::unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

inline std::optional<Label> parse_label(std::string_view name) {
  if (name == "positive") return Label::positive;
  if (name == "negative") return Label::negative;
  if (name == "unlabeled") return Label::unlabeled;
  return std::nullopt;
}

struct ReviewRecord {
  std::string review_id;
  std::string restaurant_id;
  std::string user_id;
  double stars = 0.0;
  std::string text;
  std::optional<Label> annotated_label;

  bool operator==(const ReviewRecord&) const = default;
};

struct RestaurantProfile {
  std::string restaurant_id;
  std::string name;
  std::vector<std::string> cuisines;
  double zomato_rating = 0.0;

  bool operator==(const RestaurantProfile&) const = default;
};

/// Half-star scale from 1.0 to 5.0.
inline bool valid_stars(double stars) {
  if (!std::isfinite(stars) || stars < 1.0 || stars > 5.0) return false;
  const double doubled = stars * 2.0;
  return doubled == std::floor(doubled);
}

namespace detail {

inline const json& require_field(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw MalformedRecord(line, std::string("missing field '") + key + "'");
  return *it;
}

inline std::string require_string(const json& obj, const char* key, std::size_t line) {
  const auto& v = require_field(obj, key, line);
  if (!v.is_string()) throw MalformedRecord(line, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline double require_number(const json& obj, const char* key, std::size_t line) {
  const auto& v = require_field(obj, key, line);
  if (!v.is_number()) throw MalformedRecord(line, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

inline json parse_line(std::string_view raw, std::size_t line) {
  json obj;
  try {
    obj = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw MalformedRecord(line, std::string("not a JSON object: ") + e.what());
  }
  if (!obj.is_object()) throw MalformedRecord(line, "not a JSON object");
  return obj;
}

}  // namespace detail

inline ReviewRecord parse_review(std::string_view raw, std::size_t line) {
  const json obj = detail::parse_line(raw, line);
  ReviewRecord r;
  r.review_id = detail::require_string(obj, "review_id", line);
  r.restaurant_id = detail::require_string(obj, "restaurant_id", line);
  r.user_id = detail::require_string(obj, "user_id", line);
  r.stars = detail::require_number(obj, "stars", line);
  r.text = detail::require_string(obj, "text", line);
  if (r.review_id.empty()) throw MalformedRecord(line, "empty review_id");
  if (!valid_stars(r.stars))
    throw MalformedRecord(line, "stars " + text::format_double(r.stars) +
                                    " outside {1.0, 1.5, ..., 5.0}");
  if (text::trim(r.text).empty()) throw MalformedRecord(line, "empty text");
  if (const auto it = obj.find("annotated_label"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw MalformedRecord(line, "annotated_label must be a string");
    const auto label = parse_label(it->get<std::string>());
    if (!label) throw MalformedRecord(line, "unknown annotated_label '" + it->get<std::string>() + "'");
    r.annotated_label = *label;
  }
  return r;
}

inline json review_to_json(const ReviewRecord& r) {
  json obj = {{"review_id", r.review_id},
              {"restaurant_id", r.restaurant_id},
              {"user_id", r.user_id},
              {"stars", r.stars},
              {"text", r.text}};
  if (r.annotated_label) obj["annotated_label"] = label_name(*r.annotated_label);
  return obj;
}

/// One JSON object per line; blank lines are skipped.
inline std::vector<ReviewRecord> read_reviews(std::istream& in) {
  std::vector<ReviewRecord> out;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (text::trim(raw).empty()) continue;
    auto record = parse_review(raw, line);
    if (!seen.insert(record.review_id).second)
      throw Error(Errc::duplicate_id,
                  "line " + std::to_string(line) + ": review_id '" + record.review_id + "' repeated");
    out.push_back(std::move(record));
  }
  return out;
}

inline std::vector<ReviewRecord> load_reviews(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return read_reviews(in);
}

inline std::string serialize_reviews(const std::vector<ReviewRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += review_to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline RestaurantProfile parse_restaurant(std::string_view raw, std::size_t line) {
  const json obj = detail::parse_line(raw, line);
  RestaurantProfile p;
  p.restaurant_id = detail::require_string(obj, "restaurant_id", line);
  p.name = detail::require_string(obj, "name", line);
  p.zomato_rating = detail::require_number(obj, "zomato_rating", line);
  if (p.restaurant_id.empty()) throw MalformedRecord(line, "empty restaurant_id");
  if (!(p.zomato_rating >= 1.0 && p.zomato_rating <= 5.0))
    throw MalformedRecord(line, "zomato_rating outside [1, 5]");
  if (const auto it = obj.find("cuisines"); it != obj.end()) {
    if (!it->is_array()) throw MalformedRecord(line, "cuisines must be a list");
    for (const auto& c : *it) {
      if (!c.is_string()) throw MalformedRecord(line, "cuisines must hold strings");
      p.cuisines.push_back(c.get<std::string>());
    }
  }
  return p;
}

inline json restaurant_to_json(const RestaurantProfile& p) {
  return {{"restaurant_id", p.restaurant_id},
          {"name", p.name},
          {"cuisines", p.cuisines},
          {"zomato_rating", p.zomato_rating}};
}

inline std::vector<RestaurantProfile> read_restaurants(std::istream& in) {
  std::vector<RestaurantProfile> out;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (text::trim(raw).empty()) continue;
    auto profile = parse_restaurant(raw, line);
    if (!seen.insert(profile.restaurant_id).second)
      throw Error(Errc::duplicate_id, "line " + std::to_string(line) + ": restaurant_id '" +
                                          profile.restaurant_id + "' repeated");
    out.push_back(std::move(profile));
  }
  return out;
}

inline std::vector<RestaurantProfile> load_restaurants(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return read_restaurants(in);
}

// ---------------------------------------------------------------------------
// Lexicons

class LexiconSet {
 public:
  LexiconSet() = default;

  LexiconSet(std::set<std::string> stopwords, std::map<std::string, std::string> emoticons,
             std::map<std::string, TokenList> slang)
      : stopwords_(std::move(stopwords)), emoticons_(std::move(emoticons)), slang_(std::move(slang)) {
    for (const auto& [emo, sentinel] : emoticons_) {
      if (emo.empty()) throw Error(Errc::malformed_lexicon, "empty emoticon");
      if (!is_sentinel(sentinel))
        throw Error(Errc::malformed_lexicon, "emoticon '" + emo + "' maps to '" + sentinel +
                                                 "', expected POS_EMO or NEG_EMO");
    }
    for (const auto& [key, expansion] : slang_) {
      if (std::find(expansion.begin(), expansion.end(), key) != expansion.end())
        throw Error(Errc::malformed_lexicon, "slang '" + key + "' expands to itself");
    }
    emoticons_by_length_.reserve(emoticons_.size());
    for (const auto& [emo, sentinel] : emoticons_) emoticons_by_length_.emplace_back(emo, sentinel);
    std::stable_sort(emoticons_by_length_.begin(), emoticons_by_length_.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  }

  const std::set<std::string>& stopwords() const { return stopwords_; }
  const std::map<std::string, std::string>& emoticons() const { return emoticons_; }
  const std::map<std::string, TokenList>& slang() const { return slang_; }

  /// Emoticons ordered longest first, for greedy matching.
  const std::vector<std::pair<std::string, std::string>>& emoticons_by_length() const {
    return emoticons_by_length_;
  }

  bool is_stopword(std::string_view token) const {
    return stopwords_.find(std::string(token)) != stopwords_.end();
  }

 private:
  std::set<std::string> stopwords_;
  std::map<std::string, std::string> emoticons_;
  std::map<std::string, TokenList> slang_;
  std::vector<std::pair<std::string, std::string>> emoticons_by_length_;
};

inline std::set<std::string> parse_stopwords(std::istream& in) {
  std::set<std::string> out;
  for (const auto& entry : text::read_tsv(in)) {
    out.insert(text::to_lower_ascii(text::trim(entry.fields.front())));
  }
  return out;
}

inline std::map<std::string, std::string> parse_emoticons(std::istream& in) {
  std::map<std::string, std::string> out;
  for (const auto& entry : text::read_tsv(in)) {
    if (entry.fields.size() != 2)
      throw Error(Errc::malformed_lexicon,
                  "emoticon line " + std::to_string(entry.line) + ": expected 2 fields");
    out[entry.fields[0]] = std::string(text::trim(entry.fields[1]));
  }
  return out;
}

inline std::map<std::string, TokenList> parse_slang(std::istream& in) {
  std::map<std::string, TokenList> out;
  for (const auto& entry : text::read_tsv(in)) {
    if (entry.fields.size() != 2)
      throw Error(Errc::malformed_lexicon,
                  "slang line " + std::to_string(entry.line) + ": expected 2 fields");
    auto replacement = text::split_whitespace(text::to_lower_ascii(entry.fields[1]));
    if (replacement.empty())
      throw Error(Errc::malformed_lexicon,
                  "slang line " + std::to_string(entry.line) + ": empty replacement");
    out[text::to_lower_ascii(text::trim(entry.fields[0]))] = std::move(replacement);
  }
  return out;
}

/// Reads stopwords.txt, emoticons.tsv and slang.tsv from `dir`. A missing
/// file means an empty table.
inline LexiconSet load_lexicons(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(Errc::io_error, "lexicon directory " + dir.string() + " not found");
  auto open = [&](const char* name) -> std::optional<std::ifstream> {
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) return std::nullopt;
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    return in;
  };
  std::set<std::string> stopwords;
  std::map<std::string, std::string> emoticons;
  std::map<std::string, TokenList> slang;
  if (auto in = open("stopwords.txt")) stopwords = parse_stopwords(*in);
  if (auto in = open("emoticons.tsv")) emoticons = parse_emoticons(*in);
  if (auto in = open("slang.tsv")) slang = parse_slang(*in);
  return LexiconSet(std::move(stopwords), std::move(emoticons), std::move(slang));
}

// ---------------------------------------------------------------------------
// Normalization

namespace detail {

inline bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         u >= 0x80;
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Splits one lowercased whitespace-free word into word tokens and sentence
// markers. Apostrophes are dropped inside words, hyphens survive between word
// characters, and a period survives between digits.
inline void split_punctuation(std::string_view word, TokenList& out) {
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  auto push_marker = [&] {
    flush();
    if (out.empty() || out.back() != kSentenceMarker) out.emplace_back(kSentenceMarker);
  };
  for (std::size_t i = 0; i < word.size(); ++i) {
    const char c = word[i];
    const bool next_word = i + 1 < word.size() && is_word_byte(word[i + 1]);
    if (is_word_byte(c)) {
      current += c;
    } else if (c == '\'') {
      continue;
    } else if (c == '-' && !current.empty() && next_word) {
      current += c;
    } else if (c == '.' && !current.empty() && is_digit(current.back()) && i + 1 < word.size() &&
               is_digit(word[i + 1])) {
      current += c;
    } else if (c == '.' || c == '!' || c == '?') {
      push_marker();
    } else {
      flush();
    }
  }
  flush();
}

}  // namespace detail

/// Fixed pipeline: (1) emoticons on the raw string, longest match first;
/// (2) lowercasing; (3) punctuation to sentence markers and whitespace
/// splitting, with "and then" fused to the coordinator "and-then";
/// (4) one left-to-right pass of slang expansion; (5) stopword removal.
/// Sentinels and clause markers are never removed.
inline TokenList normalize(std::string_view raw, const LexiconSet& lex) {
  // (1) Split the raw text into plain-text runs and emoticon sentinels.
  struct Piece {
    std::string text;
    bool sentinel;
  };
  std::vector<Piece> pieces;
  std::string run;
  for (std::size_t i = 0; i < raw.size();) {
    bool matched = false;
    for (const auto& [emo, sentinel] : lex.emoticons_by_length()) {
      if (raw.substr(i, emo.size()) == emo) {
        if (!run.empty()) pieces.push_back({std::move(run), false});
        run.clear();
        pieces.push_back({sentinel, true});
        i += emo.size();
        matched = true;
        break;
      }
    }
    if (!matched) run += raw[i++];
  }
  if (!run.empty()) pieces.push_back({std::move(run), false});

  // (2) + (3)
  TokenList tokens;
  for (const auto& piece : pieces) {
    if (piece.sentinel) {
      tokens.push_back(piece.text);
      continue;
    }
    for (const auto& word : text::split_whitespace(piece.text)) {
      if (is_sentinel(word)) {
        tokens.push_back(word);
        continue;
      }
      detail::split_punctuation(text::to_lower_ascii(word), tokens);
    }
  }
  TokenList fused;
  fused.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "and" && i + 1 < tokens.size() && tokens[i + 1] == "then") {
      fused.emplace_back("and-then");
      ++i;
    } else if (tokens[i] == kSentenceMarker && !fused.empty() && fused.back() == kSentenceMarker) {
      continue;
    } else {
      fused.push_back(std::move(tokens[i]));
    }
  }

  // (4) + (5)
  TokenList out;
  out.reserve(fused.size());
  auto keep = [&](std::string token) {
    if (is_sentinel(token) || is_clause_marker(token) || !lex.is_stopword(token))
      out.push_back(std::move(token));
  };
  for (auto& token : fused) {
    if (!is_sentinel(token) && !is_clause_marker(token)) {
      if (const auto it = lex.slang().find(token); it != lex.slang().end()) {
        for (const auto& replacement : it->second) keep(replacement);
        continue;
      }
    }
    keep(std::move(token));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Tokens in index order. Throws on duplicates.
  explicit Vocabulary(std::vector<std::string> tokens, std::size_t min_count = 1)
      : tokens_(std::move(tokens)), min_count_(min_count) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], i).second)
        throw Error(Errc::malformed_model, "duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::size_t min_count() const { return min_count_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }

  std::optional<std::size_t> index_of(std::string_view token) const {
    const auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// FNV-1a over the tokens in index order; identifies the feature space a
  /// serialized model was trained against.
  std::string hash() const {
    std::uint64_t h = text::fnv1a("");
    for (const auto& t : tokens_) {
      h = text::fnv1a(t, h);
      h = text::fnv1a(std::string_view("\0", 1), h);
    }
    return text::hex64(h);
  }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::size_t min_count_ = 1;
};

/// Tokens with frequency >= min_count, indexed by descending frequency with
/// lexicographic tie-break.
inline Vocabulary build_vocabulary(const std::vector<TokenList>& corpus, std::size_t min_count) {
  if (min_count < 1) throw Error(Errc::invalid_config, "min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus)
    for (const auto& token : doc) ++counts[token];
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [token, count] : counts)
    if (count >= min_count) kept.emplace_back(token, count);
  if (kept.empty())
    throw Error(Errc::empty_vocabulary,
                "no token occurs at least " + std::to_string(min_count) + " times");
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [token, count] : kept) tokens.push_back(std::move(token));
  return Vocabulary(std::move(tokens), min_count);
}

}  // namespace fiducia
