#pragma once

// Side-dish mining: item co-mention graph, Louvain communities, and an LDA
// topic model trained by collapsed Gibbs sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fiducia/error.hpp"
#include "fiducia/fragmenter.hpp"
#include "fiducia/rng.hpp"
#include "fiducia/text_io.hpp"

namespace fiducia {

// ---------------------------------------------------------------------------
// Graph

class WeightedGraph {
 public:
  void add_node(ItemId v) { nodes_.insert(v); }

  /// Adds `w` to the undirected edge (a, b). Self-loops are ignored.
  void add_edge(ItemId a, ItemId b, double w = 1.0) {
    nodes_.insert(a);
    nodes_.insert(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    edges_[{a, b}] += w;
  }

  double weight(ItemId a, ItemId b) const {
    if (a > b) std::swap(a, b);
    const auto it = edges_.find({a, b});
    return it == edges_.end() ? 0.0 : it->second;
  }

  const std::set<ItemId>& nodes() const { return nodes_; }
  const std::map<std::pair<ItemId, ItemId>, double>& edges() const { return edges_; }

  double total_weight() const {
    double m = 0;
    for (const auto& [e, w] : edges_) m += w;
    return m;
  }

 private:
  std::set<ItemId> nodes_;
  std::map<std::pair<ItemId, ItemId>, double> edges_;
};

/// One item set per review; every unordered pair in a set adds 1. Items of
/// single-item reviews still become nodes.
inline WeightedGraph build_comention_graph(const std::vector<std::set<ItemId>>& reviews) {
  WeightedGraph g;
  for (const auto& items : reviews) {
    for (auto a : items) g.add_node(a);
    for (auto a = items.begin(); a != items.end(); ++a)
      for (auto b = std::next(a); b != items.end(); ++b) g.add_edge(*a, *b);
  }
  return g;
}

inline WeightedGraph build_comention_graph(const std::vector<ItemFragment>& fragments) {
  std::map<std::string, std::set<ItemId>> by_review;
  for (const auto& f : fragments) by_review[f.review_id].insert(f.item_id);
  std::vector<std::set<ItemId>> sets;
  for (auto& [id, items] : by_review) sets.push_back(std::move(items));
  return build_comention_graph(sets);
}

using Partition = std::map<ItemId, int>;

/// Newman weighted modularity; 0 for a graph without edges.
inline double modularity(const WeightedGraph& g, const Partition& p) {
  const double m = g.total_weight();
  if (m == 0.0) return 0.0;
  auto community = [&](ItemId v) {
    const auto it = p.find(v);
    if (it == p.end()) throw Error(Errc::invalid_config, "node " + std::to_string(v) + " not in partition");
    return it->second;
  };
  std::map<int, double> in, tot;
  for (auto v : g.nodes()) tot[community(v)] += 0.0;
  for (const auto& [e, w] : g.edges()) {
    const int ca = community(e.first), cb = community(e.second);
    tot[ca] += w;
    tot[cb] += w;
    if (ca == cb) in[ca] += w;
  }
  double q = 0;
  for (const auto& [c, t] : tot) {
    const double frac = t / (2 * m);
    q += in[c] / m - frac * frac;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Louvain

struct LouvainResult {
  Partition partition;
  double modularity = 0.0;
  std::vector<double> phase_modularity;  // Q after each phase, node level
};

namespace detail {

struct LouvainLevel {
  std::vector<std::map<std::size_t, double>> adj;  // off-diagonal weights
  std::vector<double> self;                        // internal weight per node
};

// Local moving phase; returns the community of every node and whether
// anything moved.
inline std::pair<std::vector<std::size_t>, bool> louvain_local_moves(const LouvainLevel& g, double m) {
  const std::size_t n = g.adj.size();
  std::vector<std::size_t> comm(n);
  std::vector<double> k(n, 0.0), tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    comm[i] = i;
    k[i] = 2 * g.self[i];
    for (const auto& [j, w] : g.adj[i]) k[i] += w;
    tot[i] = k[i];
  }
  if (m == 0.0) return {comm, false};
  bool moved_any = false;
  for (;;) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t own = comm[i];
      std::map<std::size_t, double> links;  // community -> k_i,in
      for (const auto& [j, w] : g.adj[i]) links[comm[j]] += w;
      tot[own] -= k[i];
      auto gain = [&](std::size_t c) {
        const auto it = links.find(c);
        const double kin = it == links.end() ? 0.0 : it->second;
        return kin - tot[c] * k[i] / (2 * m);
      };
      const double stay = gain(own);
      std::size_t best = own;
      double best_delta = 0.0;
      for (const auto& [c, kin] : links) {
        if (c == own) continue;
        const double delta = (gain(c) - stay) / m;
        if (delta > 1e-12 && (best == own || delta > best_delta)) {
          best = c;
          best_delta = delta;
        }
      }
      tot[best] += k[i];
      if (best != own) {
        comm[i] = best;
        moved = true;
        moved_any = true;
      }
    }
    if (!moved) break;
  }
  return {comm, moved_any};
}

}  // namespace detail

/// Deterministic Louvain: ascending scan order, moves only on a gain above
/// 1e-12, ties to the lowest community id. Community ids in the result are
/// numbered by their smallest item.
inline LouvainResult louvain(const WeightedGraph& g) {
  if (g.nodes().empty()) throw Error(Errc::empty_graph, "graph has no nodes");
  const std::vector<ItemId> items(g.nodes().begin(), g.nodes().end());
  std::map<ItemId, std::size_t> index;
  for (std::size_t i = 0; i < items.size(); ++i) index[items[i]] = i;

  detail::LouvainLevel level;
  level.adj.resize(items.size());
  level.self.assign(items.size(), 0.0);
  for (const auto& [e, w] : g.edges()) {
    const auto a = index[e.first], b = index[e.second];
    level.adj[a][b] += w;
    level.adj[b][a] += w;
  }
  const double m = g.total_weight();

  // node -> current super-node
  std::vector<std::size_t> membership(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) membership[i] = i;

  auto flatten = [&] {
    std::map<std::size_t, int> relabel;
    Partition p;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto [it, fresh] = relabel.emplace(membership[i], static_cast<int>(relabel.size()));
      p[items[i]] = it->second;
    }
    return p;
  };

  LouvainResult result;
  result.partition = flatten();
  result.modularity = modularity(g, result.partition);
  for (;;) {
    const auto [comm, moved] = detail::louvain_local_moves(level, m);
    if (!moved) break;
    // compact community ids in order of first appearance
    std::map<std::size_t, std::size_t> compact;
    for (auto c : comm) compact.emplace(c, compact.size());
    detail::LouvainLevel next;
    next.adj.resize(compact.size());
    next.self.assign(compact.size(), 0.0);
    for (std::size_t i = 0; i < comm.size(); ++i) {
      const auto ci = compact[comm[i]];
      next.self[ci] += level.self[i];
      for (const auto& [j, w] : level.adj[i]) {
        const auto cj = compact[comm[j]];
        if (ci == cj) {
          if (i < j) next.self[ci] += w;
        } else {
          next.adj[ci][cj] += w;
        }
      }
    }
    for (auto& s : membership) s = compact[comm[s]];
    level = std::move(next);

    const auto p = flatten();
    const double q = modularity(g, p);
    if (q < result.modularity - 1e-12) throw std::logic_error("louvain: modularity decreased across phases");
    result.phase_modularity.push_back(q);
    const bool gained = q > result.modularity + 1e-12;
    result.partition = p;
    result.modularity = q;
    if (!gained) break;
  }
  return result;
}

/// Every other member of `item`'s community.
inline std::vector<ItemId> co_members(const Partition& p, ItemId item) {
  std::vector<ItemId> out;
  const auto it = p.find(item);
  if (it == p.end()) return out;
  for (const auto& [v, c] : p)
    if (c == it->second && v != item) out.push_back(v);
  return out;
}

inline std::string export_partition(const Partition& p) {
  std::string out;
  for (const auto& [item, c] : p) out += std::to_string(item) + "\t" + std::to_string(c) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// LDA

struct LDAConfig {
  std::size_t topics = 10;
  std::optional<double> alpha;  // defaults to 50 / topics
  double beta = 0.01;
  std::size_t sweeps = 500;
  std::uint64_t seed = 42;
};

struct TopicModel {
  std::size_t K = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::string> vocab;               // sorted
  std::vector<std::vector<std::size_t>> docs;   // word ids
  std::vector<std::vector<std::size_t>> z;      // topic per token
  std::vector<std::vector<std::size_t>> n_dk;   // D x K
  std::vector<std::vector<std::size_t>> n_kw;   // K x V
  std::vector<std::size_t> n_k;

  std::size_t vocab_size() const { return vocab.size(); }

  double word_probability(std::size_t k, std::size_t w) const {
    return (static_cast<double>(n_kw[k][w]) + beta) /
           (static_cast<double>(n_k[k]) + beta * static_cast<double>(vocab.size()));
  }
};

/// Recounts everything from the assignments and compares with the stored
/// counts.
inline bool lda_counts_consistent(const TopicModel& m) {
  std::vector<std::vector<std::size_t>> dk(m.docs.size(), std::vector<std::size_t>(m.K, 0));
  std::vector<std::vector<std::size_t>> kw(m.K, std::vector<std::size_t>(m.vocab.size(), 0));
  std::vector<std::size_t> k(m.K, 0);
  for (std::size_t d = 0; d < m.docs.size(); ++d) {
    if (m.z[d].size() != m.docs[d].size()) return false;
    for (std::size_t i = 0; i < m.docs[d].size(); ++i) {
      const auto t = m.z[d][i];
      if (t >= m.K) return false;
      ++dk[d][t];
      ++kw[t][m.docs[d][i]];
      ++k[t];
    }
  }
  return dk == m.n_dk && kw == m.n_kw && k == m.n_k;
}

using LDAObserver = std::function<void(const TopicModel&, std::size_t sweep)>;

inline TopicModel lda_train(const std::vector<std::vector<std::string>>& documents, const LDAConfig& config = {},
                            const LDAObserver& observer = {}) {
  if (config.topics < 1) throw Error(Errc::invalid_config, "topics must be >= 1");
  std::set<std::string> words;
  for (const auto& d : documents) words.insert(d.begin(), d.end());
  if (words.empty()) throw Error(Errc::empty_corpus, "no tokens to model");

  TopicModel m;
  m.K = config.topics;
  m.alpha = config.alpha.value_or(50.0 / static_cast<double>(config.topics));
  m.beta = config.beta;
  m.vocab.assign(words.begin(), words.end());
  std::map<std::string, std::size_t> id;
  for (std::size_t i = 0; i < m.vocab.size(); ++i) id[m.vocab[i]] = i;
  const std::size_t V = m.vocab.size();

  Rng rng(config.seed);
  m.n_dk.assign(documents.size(), std::vector<std::size_t>(m.K, 0));
  m.n_kw.assign(m.K, std::vector<std::size_t>(V, 0));
  m.n_k.assign(m.K, 0);
  for (const auto& d : documents) {
    std::vector<std::size_t> ids, zs;
    for (const auto& w : d) {
      ids.push_back(id[w]);
      zs.push_back(static_cast<std::size_t>(rng.below(m.K)));
    }
    m.docs.push_back(std::move(ids));
    m.z.push_back(std::move(zs));
  }
  for (std::size_t d = 0; d < m.docs.size(); ++d)
    for (std::size_t i = 0; i < m.docs[d].size(); ++i) {
      ++m.n_dk[d][m.z[d][i]];
      ++m.n_kw[m.z[d][i]][m.docs[d][i]];
      ++m.n_k[m.z[d][i]];
    }

  const double vbeta = m.beta * static_cast<double>(V);
  std::vector<double> p(m.K);
  for (std::size_t sweep = 0; sweep < config.sweeps; ++sweep) {
    for (std::size_t d = 0; d < m.docs.size(); ++d) {
      for (std::size_t i = 0; i < m.docs[d].size(); ++i) {
        const auto w = m.docs[d][i];
        const auto old = m.z[d][i];
        --m.n_dk[d][old];
        --m.n_kw[old][w];
        --m.n_k[old];
        double total = 0;
        for (std::size_t k = 0; k < m.K; ++k) {
          total += (static_cast<double>(m.n_dk[d][k]) + m.alpha) * (static_cast<double>(m.n_kw[k][w]) + m.beta) /
                   (static_cast<double>(m.n_k[k]) + vbeta);
          p[k] = total;
        }
        const double u = rng.uniform() * total;
        std::size_t t = 0;
        while (t + 1 < m.K && p[t] <= u) ++t;
        m.z[d][i] = t;
        ++m.n_dk[d][t];
        ++m.n_kw[t][w];
        ++m.n_k[t];
      }
    }
    if (observer) observer(m, sweep);
  }
  return m;
}

struct WordProbability {
  std::string token;
  double probability;
};

/// The n most probable tokens of topic k; ties lexicographic.
inline std::vector<WordProbability> top_words(const TopicModel& m, std::size_t k, std::size_t n = 10) {
  if (k >= m.K) throw Error(Errc::invalid_config, "topic " + std::to_string(k) + " out of range");
  std::vector<WordProbability> all;
  for (std::size_t w = 0; w < m.vocab.size(); ++w) all.push_back({m.vocab[w], m.word_probability(k, w)});
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& a, const auto& b) { return a.probability > b.probability; });
  if (all.size() > n) all.resize(n);
  return all;
}

inline std::string export_topics(const TopicModel& m, std::size_t n = 10) {
  std::string out;
  for (std::size_t k = 0; k < m.K; ++k)
    for (const auto& wp : top_words(m, k, n))
      out += std::to_string(k) + "\t" + wp.token + "\t" + text::format_double(wp.probability) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Co-preferred pairs

using ItemPair = std::pair<ItemId, ItemId>;

/// All unordered pairs inside each community, (smaller, larger), sorted.
inline std::vector<ItemPair> side_pairs(const Partition& p) {
  std::map<int, std::vector<ItemId>> members;
  for (const auto& [item, c] : p) members[c].push_back(item);
  std::set<ItemPair> pairs;
  for (const auto& [c, items] : members)
    for (std::size_t i = 0; i < items.size(); ++i)
      for (std::size_t j = i + 1; j < items.size(); ++j)
        pairs.insert({std::min(items[i], items[j]), std::max(items[i], items[j])});
  return {pairs.begin(), pairs.end()};
}

/// Pairs of lexicon items that share any topic's top-n list.
inline std::vector<ItemPair> side_pairs(const TopicModel& m, const ItemLexicon& lexicon, std::size_t n = 10) {
  std::set<ItemPair> pairs;
  for (std::size_t k = 0; k < m.K; ++k) {
    std::vector<ItemId> items;
    for (const auto& wp : top_words(m, k, n))
      if (const auto id = lexicon.item_from_token(wp.token)) items.push_back(*id);
    for (std::size_t i = 0; i < items.size(); ++i)
      for (std::size_t j = i + 1; j < items.size(); ++j)
        if (items[i] != items[j]) pairs.insert({std::min(items[i], items[j]), std::max(items[i], items[j])});
  }
  return {pairs.begin(), pairs.end()};
}

}  // namespace fiducia
