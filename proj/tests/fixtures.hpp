#pragma once

// Data sets shared by the unit tests and the acceptance binary.

#include <string>
#include <vector>

#include "fiducia/fm.hpp"
#include "fiducia/lstm.hpp"
#include "fiducia/rng.hpp"
#include "fiducia/sides.hpp"

namespace fixtures {

using namespace fiducia;

// Token ids: 0 = GOOD, 1 = BAD, 2.. = filler. Positive sequences carry GOOD
// somewhere, negative ones BAD.
inline std::vector<LabeledSequence> separable_sequences(std::size_t n, std::uint64_t seed,
                                                        std::size_t filler = 20) {
  Rng rng(seed);
  std::vector<LabeledSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = rng.bernoulli(0.5);
    const auto len = 1 + rng.below(10);
    std::vector<std::size_t> seq;
    for (std::size_t t = 0; t < len; ++t) seq.push_back(2 + rng.below(filler));
    seq[rng.below(len)] = positive ? 0 : 1;
    out.push_back({seq, positive ? 1.0 : -1.0});
  }
  return out;
}

struct PlantedFM {
  std::size_t n = 30;
  std::size_t kdim = 2;
  FMModel truth;
  std::vector<FMInstance> train;
  std::vector<FMInstance> test;
};

// Random sparse binary instances (`active` distinct features out of 30)
// scored by a random planted FM plus N(0, sigma) noise; a fifth is held out.
inline PlantedFM planted_fm(std::uint64_t seed, double sigma = 0.1, std::size_t instances = 1000,
                            std::size_t active = 4) {
  PlantedFM p;
  Rng rng(seed);
  p.truth = FMModel(p.n, p.kdim);
  p.truth.w0 = 3.0;
  for (auto& w : p.truth.w) w = rng.normal(0.0, 0.5);
  for (auto& v : p.truth.V) v = rng.normal(0.0, 0.5);
  for (std::size_t i = 0; i < instances; ++i) {
    const auto order = rng.permutation(p.n);
    FeatureVector x;
    for (std::size_t a = 0; a < active; ++a) x.push_back({order[a], 1.0});
    const double y = fm_predict(x, p.truth) + rng.normal(0.0, sigma);
    (i % 5 == 4 ? p.test : p.train).push_back({x, y});
  }
  return p;
}

inline double fm_rmse(const std::vector<FMInstance>& data, const FMModel& m) { return std::sqrt(fm_mse(data, m)); }

// Two planted vocabularies a0..a9 and b0..b9, `per_side` documents each.
inline std::vector<std::vector<std::string>> planted_topics(std::size_t per_side, std::size_t length,
                                                            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<std::string>> docs;
  for (std::size_t d = 0; d < 2 * per_side; ++d) {
    const char side = d < per_side ? 'a' : 'b';
    std::vector<std::string> doc;
    for (std::size_t t = 0; t < length; ++t) doc.push_back(std::string(1, side) + std::to_string(rng.below(10)));
    docs.push_back(doc);
  }
  return docs;
}

// Items 0-3 and 4-7 form two K4s, joined by the unit edge 3-4.
inline WeightedGraph bridged_k4s() {
  WeightedGraph g;
  for (ItemId base : {0, 4})
    for (ItemId i = 0; i < 4; ++i)
      for (ItemId j = i + 1; j < 4; ++j) g.add_edge(base + i, base + j);
  g.add_edge(3, 4);
  return g;
}

inline WeightedGraph k3(ItemId base = 0) {
  WeightedGraph g;
  g.add_edge(base, base + 1);
  g.add_edge(base + 1, base + 2);
  g.add_edge(base, base + 2);
  return g;
}

inline WeightedGraph two_k3s() {
  auto g = k3(0);
  g.add_edge(3, 4);
  g.add_edge(4, 5);
  g.add_edge(3, 5);
  return g;
}

// Dense symmetric adjacency over the graph's nodes in ascending order.
inline std::vector<std::vector<double>> dense_adjacency(const fiducia::WeightedGraph& g) {
  std::vector<fiducia::ItemId> nodes(g.nodes().begin(), g.nodes().end());
  std::vector<std::vector<double>> A(nodes.size(), std::vector<double>(nodes.size(), 0.0));
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = 0; j < nodes.size(); ++j)
      if (i != j) A[i][j] = g.weight(nodes[i], nodes[j]);
  return A;
}

inline std::vector<int> as_vector(const fiducia::WeightedGraph& g, const fiducia::Partition& p) {
  std::vector<int> out;
  for (auto v : g.nodes()) out.push_back(p.at(v));
  return out;
}

}  // namespace fixtures
