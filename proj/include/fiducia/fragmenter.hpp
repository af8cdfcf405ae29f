#pragma once

// Food-item mention detection and opinion scoping.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fiducia/corpus.hpp"
#include "fiducia/error.hpp"
#include "fiducia/text_io.hpp"

namespace fiducia {

using ItemId = int;

struct ItemEntry {
  ItemId item_id = 0;
  std::string canonical_name;
  std::vector<TokenList> aliases;
};

class ItemLexicon {
 public:
  ItemLexicon() = default;

  explicit ItemLexicon(std::vector<ItemEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const auto& a, const auto& b) { return a.item_id < b.item_id; });
    std::map<TokenList, ItemId> owner;
    for (std::size_t e = 0; e < entries_.size(); ++e) {
      const auto& entry = entries_[e];
      if (e > 0 && entries_[e - 1].item_id == entry.item_id)
        throw Error(Errc::malformed_lexicon, "item_id " + std::to_string(entry.item_id) + " repeated");
      by_id_[entry.item_id] = e;
      for (const auto& alias : entry.aliases) {
        if (alias.empty())
          throw Error(Errc::malformed_lexicon,
                      "empty alias for item " + std::to_string(entry.item_id));
        const auto [it, inserted] = owner.emplace(alias, entry.item_id);
        if (!inserted && it->second != entry.item_id)
          throw Error(Errc::malformed_lexicon, "alias '" + text::join(alias, " ") +
                                                   "' shared by items " + std::to_string(it->second) +
                                                   " and " + std::to_string(entry.item_id));
        if (inserted) by_first_token_[alias.front()].push_back({alias, entry.item_id});
      }
    }
    for (auto& [first, candidates] : by_first_token_) {
      std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return a.tokens.size() > b.tokens.size();
      });
    }
  }

  struct Alias {
    TokenList tokens;
    ItemId item_id;
  };

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<ItemEntry>& entries() const { return entries_; }

  bool contains(ItemId id) const { return by_id_.count(id) != 0; }

  const ItemEntry& at(ItemId id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) throw Error(Errc::unknown_item, "item " + std::to_string(id));
    return entries_[it->second];
  }

  /// Resolves an item by numeric id or canonical name.
  /// By id, canonical name or alias; names compare case-insensitively.
  std::optional<ItemId> resolve(std::string_view key) const {
    const auto lowered = text::join(text::split_whitespace(text::to_lower_ascii(key)), " ");
    for (const auto& e : entries_) {
      if (std::to_string(e.item_id) == key || text::to_lower_ascii(e.canonical_name) == lowered) return e.item_id;
      for (const auto& alias : e.aliases)
        if (text::join(alias, " ") == lowered) return e.item_id;
    }
    return std::nullopt;
  }

  /// Single-token spelling of an item, used for topic-model documents.
  std::string item_token(ItemId id) const {
    auto token = text::to_lower_ascii(at(id).canonical_name);
    std::replace(token.begin(), token.end(), ' ', '_');
    return token;
  }

  std::optional<ItemId> item_from_token(std::string_view token) const {
    for (const auto& e : entries_)
      if (item_token(e.item_id) == token) return e.item_id;
    return std::nullopt;
  }

  /// Aliases whose first token is `token`, longest first.
  const std::vector<Alias>* candidates(const std::string& token) const {
    const auto it = by_first_token_.find(token);
    return it == by_first_token_.end() ? nullptr : &it->second;
  }

 private:
  std::vector<ItemEntry> entries_;
  std::map<ItemId, std::size_t> by_id_;
  std::map<std::string, std::vector<Alias>> by_first_token_;
};

/// `item_id<TAB>canonical_name<TAB>alias1|alias2|...`; aliases are lowercased
/// and split on whitespace.
inline ItemLexicon parse_item_lexicon(std::istream& in) {
  std::vector<ItemEntry> entries;
  for (const auto& entry : text::read_tsv(in)) {
    const auto where = "item lexicon line " + std::to_string(entry.line);
    if (entry.fields.size() != 3) throw Error(Errc::malformed_lexicon, where + ": expected 3 fields");
    ItemEntry item;
    try {
      std::size_t used = 0;
      item.item_id = std::stoi(entry.fields[0], &used);
      if (used != entry.fields[0].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(Errc::malformed_lexicon, where + ": bad item_id '" + entry.fields[0] + "'");
    }
    item.canonical_name = std::string(text::trim(entry.fields[1]));
    for (const auto& alias : text::split(entry.fields[2], '|')) {
      auto tokens = text::split_whitespace(text::to_lower_ascii(alias));
      if (tokens.empty()) throw Error(Errc::malformed_lexicon, where + ": empty alias");
      item.aliases.push_back(std::move(tokens));
    }
    entries.push_back(std::move(item));
  }
  return ItemLexicon(std::move(entries));
}

inline ItemLexicon load_item_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return parse_item_lexicon(in);
}

inline std::string serialize_item_lexicon(const ItemLexicon& lexicon) {
  std::string out;
  for (const auto& e : lexicon.entries()) {
    std::vector<std::string> aliases;
    for (const auto& a : e.aliases) aliases.push_back(text::join(a, " "));
    out += std::to_string(e.item_id) + "\t" + e.canonical_name + "\t" + text::join(aliases, "|") + "\n";
  }
  return out;
}

struct Mention {
  ItemId item_id;
  std::size_t start;  // [start, end) into the token list
  std::size_t end;

  bool operator==(const Mention&) const = default;
};

struct ItemFragment {
  std::string review_id;
  ItemId item_id = 0;
  TokenList tokens;
  std::vector<std::size_t> positions;  // source index of each token
  std::size_t clause_index = 0;

  bool operator==(const ItemFragment&) const = default;
};

/// Greedy left-to-right scan taking the longest alias at each position.
inline std::vector<Mention> find_mentions(const TokenList& tokens, const ItemLexicon& lexicon) {
  std::vector<Mention> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const auto* candidates = lexicon.candidates(tokens[i]);
    bool matched = false;
    if (candidates) {
      for (const auto& alias : *candidates) {
        const auto len = alias.tokens.size();
        if (i + len > tokens.size()) continue;
        if (std::equal(alias.tokens.begin(), alias.tokens.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
          out.push_back({alias.item_id, i, i + len});
          i += len;
          matched = true;
          break;
        }
      }
    }
    if (!matched) ++i;
  }
  return out;
}

namespace detail {

struct Clause {
  std::size_t sentence;
  std::vector<std::size_t> indices;
  std::vector<std::size_t> mentions;  // indices into the mention list
};

inline std::vector<Clause> split_clauses(const TokenList& tokens) {
  std::vector<Clause> clauses;
  Clause current{0, {}, {}};
  std::size_t sentence = 0;
  auto close = [&] {
    if (!current.indices.empty()) clauses.push_back(std::move(current));
    current = Clause{sentence, {}, {}};
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == kSentenceMarker) {
      ++sentence;
      close();
    } else if (is_coordinator(tokens[i])) {
      close();
    } else {
      current.indices.push_back(i);
    }
  }
  close();
  return clauses;
}

// Collects per-item token lists in first-contribution order.
class FragmentSink {
 public:
  void add(ItemId item, const TokenList& tokens, std::size_t index, std::size_t clause) {
    auto it = slot_.find(item);
    if (it == slot_.end()) {
      it = slot_.emplace(item, fragments_.size()).first;
      ItemFragment f;
      f.item_id = item;
      f.clause_index = clause;
      fragments_.push_back(std::move(f));
    }
    auto& f = fragments_[it->second];
    f.tokens.push_back(tokens[index]);
    f.positions.push_back(index);
  }

  std::vector<ItemFragment> take(const std::string& review_id) {
    for (auto& f : fragments_) f.review_id = review_id;
    return std::move(fragments_);
  }

 private:
  std::map<ItemId, std::size_t> slot_;
  std::vector<ItemFragment> fragments_;
};

}  // namespace detail

/// Clause scoping. Clauses end at sentence markers and coordinators. A
/// clause's mention tokens go to their own item and its other tokens go to
/// every item mentioned in the clause. A clause without mentions joins the
/// nearest preceding mention of its sentence, else the nearest following one,
/// else it is dropped.
inline std::vector<ItemFragment> scope_fragments(const TokenList& tokens,
                                                 const std::vector<Mention>& mentions,
                                                 const std::string& review_id = {}) {
  if (mentions.empty()) return {};
  auto clauses = detail::split_clauses(tokens);
  std::vector<std::size_t> owner(tokens.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t m = 0; m < mentions.size(); ++m)
    for (std::size_t t = mentions[m].start; t < mentions[m].end && t < tokens.size(); ++t) owner[t] = m;
  for (auto& clause : clauses) {
    for (auto idx : clause.indices) {
      const auto m = owner[idx];
      if (m != std::numeric_limits<std::size_t>::max() &&
          (clause.mentions.empty() || clause.mentions.back() != m))
        clause.mentions.push_back(m);
    }
  }

  detail::FragmentSink sink;
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    const auto& clause = clauses[c];
    if (!clause.mentions.empty()) {
      std::vector<ItemId> items;
      for (auto m : clause.mentions)
        if (std::find(items.begin(), items.end(), mentions[m].item_id) == items.end())
          items.push_back(mentions[m].item_id);
      for (auto idx : clause.indices) {
        if (owner[idx] != std::numeric_limits<std::size_t>::max()) {
          sink.add(mentions[owner[idx]].item_id, tokens, idx, c);
        } else {
          for (auto item : items) sink.add(item, tokens, idx, c);
        }
      }
      continue;
    }
    std::optional<ItemId> target;
    for (std::size_t p = c; p-- > 0 && clauses[p].sentence == clause.sentence;) {
      if (!clauses[p].mentions.empty()) {
        target = mentions[clauses[p].mentions.back()].item_id;
        break;
      }
    }
    if (!target) {
      for (std::size_t n = c + 1; n < clauses.size() && clauses[n].sentence == clause.sentence; ++n) {
        if (!clauses[n].mentions.empty()) {
          target = mentions[clauses[n].mentions.front()].item_id;
          break;
        }
      }
    }
    if (!target) continue;
    for (auto idx : clause.indices) sink.add(*target, tokens, idx, c);
  }
  return sink.take(review_id);
}

struct Arc {
  std::size_t head;
  std::size_t dependent;
  std::string relation;
};

/// Assigns every non-mention token to the mention whose head token is
/// nearest along undirected arc paths (earlier mention on ties). Tokens in
/// components without a mention are dropped, as are sentence markers.
inline std::vector<ItemFragment> scope_fragments_with_arcs(const TokenList& tokens,
                                                           const std::vector<Mention>& mentions,
                                                           const std::vector<Arc>& arcs,
                                                           const std::string& review_id = {}) {
  const std::size_t n = tokens.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<std::optional<std::size_t>> head_of(n);
  for (const auto& arc : arcs) {
    if (arc.head >= n || arc.dependent >= n)
      throw Error(Errc::malformed_arcs, "arc (" + std::to_string(arc.head) + ", " +
                                            std::to_string(arc.dependent) + ") outside " +
                                            std::to_string(n) + " tokens");
    const auto a = find(arc.head), b = find(arc.dependent);
    if (a == b) throw Error(Errc::malformed_arcs, "arcs contain a cycle");
    if (head_of[arc.dependent])
      throw Error(Errc::malformed_arcs, "token " + std::to_string(arc.dependent) + " has two heads");
    head_of[arc.dependent] = arc.head;
    parent[a] = b;
    adj[arc.head].push_back(arc.dependent);
    adj[arc.dependent].push_back(arc.head);
  }
  if (mentions.empty()) return {};

  constexpr auto none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> owner(n, none);
  for (std::size_t m = 0; m < mentions.size(); ++m)
    for (std::size_t t = mentions[m].start; t < mentions[m].end && t < n; ++t) owner[t] = m;

  // Breadth-first search from each mention head; keep the strictly closer
  // mention, so earlier mentions win ties.
  std::vector<std::size_t> best(n, none), best_dist(n, none);
  for (std::size_t m = 0; m < mentions.size(); ++m) {
    std::size_t head = mentions[m].start;
    for (std::size_t t = mentions[m].start; t < mentions[m].end; ++t) {
      if (!head_of[t] || *head_of[t] < mentions[m].start || *head_of[t] >= mentions[m].end) {
        head = t;
        break;
      }
    }
    std::vector<std::size_t> dist(n, none);
    std::deque<std::size_t> queue{head};
    dist[head] = 0;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      if (dist[u] < best_dist[u]) {
        best_dist[u] = dist[u];
        best[u] = m;
      }
      for (auto v : adj[u]) {
        if (dist[v] == none) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
  }

  detail::FragmentSink sink;
  for (std::size_t t = 0; t < n; ++t) {
    if (tokens[t] == kSentenceMarker) continue;
    const auto m = owner[t] != none ? owner[t] : best[t];
    if (m == none) continue;
    sink.add(mentions[m].item_id, tokens, t, 0);
  }
  return sink.take(review_id);
}

/// One JSON object per line: {"review_id": ..., "arcs": [[head, dep, "rel"], ...]}.
inline std::map<std::string, std::vector<Arc>> load_arcs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::map<std::string, std::vector<Arc>> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (text::trim(raw).empty()) continue;
    const auto obj = detail::parse_line(raw, line);
    const auto id = detail::require_string(obj, "review_id", line);
    const auto& list = detail::require_field(obj, "arcs", line);
    if (!list.is_array()) throw MalformedRecord(line, "arcs must be a list");
    std::vector<Arc> arcs;
    for (const auto& a : list) {
      if (!a.is_array() || a.size() != 3 || !a[0].is_number_unsigned() || !a[1].is_number_unsigned() ||
          !a[2].is_string())
        throw MalformedRecord(line, "arc must be [head, dependent, relation]");
      arcs.push_back({a[0].get<std::size_t>(), a[1].get<std::size_t>(), a[2].get<std::string>()});
    }
    out[id] = std::move(arcs);
  }
  return out;
}

}  // namespace fiducia
