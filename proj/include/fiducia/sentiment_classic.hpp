#pragma once

// Bag-of-words sentiment classifiers: multinomial Naive Bayes, logistic
// regression and a Gini decision tree. All report on a common [-1, 1] scale.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fiducia/corpus.hpp"
#include "fiducia/error.hpp"
#include "fiducia/math.hpp"
#include "fiducia/model_io.hpp"

namespace fiducia {

enum class Polarity : std::uint8_t { negative = 0, positive = 1 };

using BowVector = std::vector<std::uint8_t>;

inline BowVector bow_vectorize(const TokenList& tokens, const Vocabulary& vocab) {
  BowVector x(vocab.size(), 0);
  for (const auto& t : tokens)
    if (const auto idx = vocab.index_of(t)) x[*idx] = 1;
  return x;
}

namespace detail {

inline void require_both_classes(const std::vector<Polarity>& labels) {
  const auto pos = std::count(labels.begin(), labels.end(), Polarity::positive);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size()))
    throw Error(Errc::single_class_corpus, "training labels contain a single class");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Naive Bayes

struct NBModel {
  Vocabulary vocab;
  double alpha = 1.0;
  std::array<double, 2> log_prior{};                     // indexed by Polarity
  std::array<std::vector<double>, 2> log_likelihood{};  // [class][token]
};

struct Posterior {
  double p_pos;
  double p_neg;
};

/// Multinomial event model with Laplace smoothing:
/// P(token | class) = (count + alpha) / (class total + alpha |V|).
inline NBModel nb_train(const std::vector<TokenList>& fragments, const std::vector<Polarity>& labels,
                        const Vocabulary& vocab, double alpha = 1.0) {
  if (fragments.size() != labels.size())
    throw Error(Errc::invalid_config, "fragment and label counts differ");
  if (!(alpha > 0)) throw Error(Errc::invalid_config, "alpha must be > 0");
  detail::require_both_classes(labels);
  NBModel model;
  model.vocab = vocab;
  model.alpha = alpha;
  std::array<std::vector<double>, 2> counts{std::vector<double>(vocab.size(), 0.0),
                                            std::vector<double>(vocab.size(), 0.0)};
  std::array<double, 2> totals{0.0, 0.0};
  std::array<double, 2> docs{0.0, 0.0};
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    docs[c] += 1;
    for (const auto& t : fragments[i]) {
      if (const auto idx = vocab.index_of(t)) {
        counts[c][*idx] += 1;
        totals[c] += 1;
      }
    }
  }
  const double n = static_cast<double>(fragments.size());
  const double v = static_cast<double>(vocab.size());
  for (std::size_t c = 0; c < 2; ++c) {
    model.log_prior[c] = std::log(docs[c] / n);
    model.log_likelihood[c].resize(vocab.size());
    for (std::size_t w = 0; w < vocab.size(); ++w)
      model.log_likelihood[c][w] = std::log((counts[c][w] + alpha) / (totals[c] + alpha * v));
  }
  return model;
}

inline NBModel nb_train(const std::vector<TokenList>& fragments, const std::vector<Polarity>& labels,
                        double alpha = 1.0) {
  return nb_train(fragments, labels, build_vocabulary(fragments, 1), alpha);
}

/// Posteriors normalized in log space; OOV tokens contribute nothing.
inline Posterior nb_predict(const TokenList& tokens, const NBModel& model) {
  double lpos = model.log_prior[1];
  double lneg = model.log_prior[0];
  for (const auto& t : tokens) {
    if (const auto idx = model.vocab.index_of(t)) {
      lpos += model.log_likelihood[1][*idx];
      lneg += model.log_likelihood[0][*idx];
    }
  }
  const double p_pos = detail::sigmoid(lpos - lneg);
  return {p_pos, 1.0 - p_pos};
}

// ---------------------------------------------------------------------------
// Logistic regression

struct LRConfig {
  double l2 = 1e-3;
  double learning_rate = 0.1;
  std::size_t epochs = 500;
};

struct LRModel {
  Vocabulary vocab;
  std::vector<double> weights;
  double bias = 0.0;
  double l2 = 0.0;
};

inline double lr_margin(const BowVector& x, const LRModel& model) {
  double z = model.bias;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) z += model.weights[i];
  return z;
}

inline double lr_predict(const BowVector& x, const LRModel& model) {
  return detail::sigmoid(lr_margin(x, model));
}

/// Mean log loss plus (l2 / 2) ||w||^2; the bias is not penalized.
inline double lr_loss(const LRModel& model, const std::vector<BowVector>& X,
                      const std::vector<Polarity>& y) {
  double loss = 0;
  for (std::size_t n = 0; n < X.size(); ++n) {
    const double z = lr_margin(X[n], model);
    loss += detail::softplus(z) - (y[n] == Polarity::positive ? z : 0.0);
  }
  loss /= static_cast<double>(X.size());
  double sq = 0;
  for (double w : model.weights) sq += w * w;
  return loss + 0.5 * model.l2 * sq;
}

struct LRGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

inline LRGradient lr_gradient(const LRModel& model, const std::vector<BowVector>& X,
                              const std::vector<Polarity>& y) {
  LRGradient g{std::vector<double>(model.weights.size(), 0.0), 0.0};
  const double inv_n = 1.0 / static_cast<double>(X.size());
  for (std::size_t n = 0; n < X.size(); ++n) {
    const double r = (lr_predict(X[n], model) - (y[n] == Polarity::positive ? 1.0 : 0.0)) * inv_n;
    g.bias += r;
    for (std::size_t i = 0; i < X[n].size(); ++i)
      if (X[n][i]) g.weights[i] += r;
  }
  for (std::size_t i = 0; i < g.weights.size(); ++i) g.weights[i] += model.l2 * model.weights[i];
  return g;
}

/// Full-batch gradient descent from zero. When `losses` is given it receives
/// the training loss before the first step and after every epoch.
inline LRModel lr_train(const std::vector<BowVector>& X, const std::vector<Polarity>& y,
                        const Vocabulary& vocab, const LRConfig& config = {},
                        std::vector<double>* losses = nullptr) {
  if (X.size() != y.size()) throw Error(Errc::invalid_config, "sample and label counts differ");
  if (config.l2 < 0) throw Error(Errc::invalid_config, "l2 must be >= 0");
  detail::require_both_classes(y);
  for (const auto& x : X)
    if (x.size() != vocab.size()) throw Error(Errc::invalid_config, "BoW dimension mismatch");
  LRModel model{vocab, std::vector<double>(vocab.size(), 0.0), 0.0, config.l2};
  if (losses) losses->assign(1, lr_loss(model, X, y));
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto g = lr_gradient(model, X, y);
    model.bias -= config.learning_rate * g.bias;
    for (std::size_t i = 0; i < model.weights.size(); ++i)
      model.weights[i] -= config.learning_rate * g.weights[i];
    if (!std::isfinite(model.bias)) throw Error(Errc::divergence_detected, "logistic regression diverged");
    if (losses) losses->push_back(lr_loss(model, X, y));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Decision tree

struct DTConfig {
  std::size_t max_depth = 10;
  std::size_t min_samples_leaf = 2;
  /// Only accept splits that strictly lower weighted Gini impurity. Turning
  /// this off admits zero-gain splits (needed for XOR-like data).
  bool require_strict_gain = true;
};

struct DTNode {
  int feature = -1;              // -1 marks a leaf
  std::array<std::size_t, 2> child{0, 0};  // child[v] follows x[feature] == v
  std::size_t pos = 0;
  std::size_t neg = 0;
  std::size_t depth = 0;

  bool is_leaf() const { return feature < 0; }
};

struct DTModel {
  Vocabulary vocab;
  DTConfig config;
  std::vector<DTNode> nodes;  // nodes[0] is the root
};

inline double gini(std::size_t pos, std::size_t neg) {
  const double n = static_cast<double>(pos + neg);
  if (n == 0) return 0.0;
  const double p = static_cast<double>(pos) / n;
  const double q = static_cast<double>(neg) / n;
  return 1.0 - p * p - q * q;
}

namespace detail {

inline std::size_t dt_grow(DTModel& model, const std::vector<BowVector>& X, const std::vector<Polarity>& y,
                           const std::vector<std::size_t>& rows, std::size_t depth) {
  DTNode node;
  node.depth = depth;
  for (auto r : rows) (y[r] == Polarity::positive ? node.pos : node.neg)++;
  const auto id = model.nodes.size();
  model.nodes.push_back(node);

  const auto& cfg = model.config;
  const double parent = gini(node.pos, node.neg);
  if (parent == 0.0 || depth >= cfg.max_depth || rows.size() < 2 * cfg.min_samples_leaf) return id;

  const std::size_t dims = X.empty() ? 0 : X.front().size();
  int best_feature = -1;
  double best_impurity = 0;
  for (std::size_t f = 0; f < dims; ++f) {
    std::array<std::size_t, 2> pos{0, 0}, neg{0, 0};
    for (auto r : rows) (y[r] == Polarity::positive ? pos : neg)[X[r][f]]++;
    const std::size_t n0 = pos[0] + neg[0], n1 = pos[1] + neg[1];
    if (n0 < cfg.min_samples_leaf || n1 < cfg.min_samples_leaf || n0 == 0 || n1 == 0) continue;
    const double weighted =
        (static_cast<double>(n0) * gini(pos[0], neg[0]) + static_cast<double>(n1) * gini(pos[1], neg[1])) /
        static_cast<double>(rows.size());
    if (best_feature < 0 || weighted < best_impurity) {
      best_feature = static_cast<int>(f);
      best_impurity = weighted;
    }
  }
  if (best_feature < 0) return id;
  if (cfg.require_strict_gain ? !(best_impurity < parent - 1e-12) : best_impurity > parent + 1e-12)
    return id;

  std::array<std::vector<std::size_t>, 2> split;
  for (auto r : rows) split[X[r][static_cast<std::size_t>(best_feature)]].push_back(r);
  const auto left = dt_grow(model, X, y, split[0], depth + 1);
  const auto right = dt_grow(model, X, y, split[1], depth + 1);
  model.nodes[id].feature = best_feature;
  model.nodes[id].child = {left, right};
  return id;
}

}  // namespace detail

/// Greedy recursive splitting on weighted Gini impurity; ties go to the lowest
/// feature index.
inline DTModel dt_train(const std::vector<BowVector>& X, const std::vector<Polarity>& y,
                        const Vocabulary& vocab, const DTConfig& config = {}) {
  if (X.size() != y.size()) throw Error(Errc::invalid_config, "sample and label counts differ");
  if (config.min_samples_leaf < 1) throw Error(Errc::invalid_config, "min_samples_leaf must be >= 1");
  for (const auto& x : X)
    if (x.size() != vocab.size()) throw Error(Errc::invalid_config, "BoW dimension mismatch");
  DTModel model{vocab, config, {}};
  std::vector<std::size_t> rows(X.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  detail::dt_grow(model, X, y, rows, 0);
  return model;
}

inline const DTNode& dt_leaf(const BowVector& x, const DTModel& model) {
  const DTNode* node = &model.nodes.front();
  while (!node->is_leaf()) node = &model.nodes[node->child[x.at(static_cast<std::size_t>(node->feature))]];
  return *node;
}

/// Majority class of the reached leaf; ties go to positive.
inline Polarity dt_predict(const BowVector& x, const DTModel& model) {
  const auto& leaf = dt_leaf(x, model);
  return leaf.pos >= leaf.neg ? Polarity::positive : Polarity::negative;
}

inline std::size_t dt_depth(const DTModel& model) {
  std::size_t depth = 0;
  for (const auto& n : model.nodes) depth = std::max(depth, n.depth);
  return depth;
}

// ---------------------------------------------------------------------------
// Unified scoring

using ClassicModel = std::variant<NBModel, LRModel, DTModel>;

/// Sentiment in [-1, 1]: 2 p_pos - 1 for NB and LR, 2 pos/total - 1 at the
/// reached leaf for the tree.
inline double classify_fragment(const TokenList& tokens, const ClassicModel& model) {
  const double s = std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, NBModel>) {
          return 2.0 * nb_predict(tokens, m).p_pos - 1.0;
        } else if constexpr (std::is_same_v<M, LRModel>) {
          return 2.0 * lr_predict(bow_vectorize(tokens, m.vocab), m) - 1.0;
        } else {
          const auto& leaf = dt_leaf(bow_vectorize(tokens, m.vocab), m);
          const auto total = leaf.pos + leaf.neg;
          if (total == 0) return 0.0;
          return 2.0 * static_cast<double>(leaf.pos) / static_cast<double>(total) - 1.0;
        }
      },
      model);
  return std::clamp(s, -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Serialization

inline json to_document(const NBModel& m) {
  return model_document("nb", {{"alpha", m.alpha}}, &m.vocab,
                        {{"log_prior", m.log_prior},
                         {"log_likelihood_negative", m.log_likelihood[0]},
                         {"log_likelihood_positive", m.log_likelihood[1]}});
}

inline json to_document(const LRModel& m) {
  return model_document("bow-lr", {{"l2", m.l2}}, &m.vocab, {{"weights", m.weights}, {"bias", m.bias}});
}

inline json to_document(const DTModel& m) {
  json nodes = json::array();
  for (const auto& n : m.nodes)
    nodes.push_back({n.feature, n.child[0], n.child[1], n.pos, n.neg, n.depth});
  return model_document("bow-dt",
                        {{"max_depth", m.config.max_depth},
                         {"min_samples_leaf", m.config.min_samples_leaf},
                         {"require_strict_gain", m.config.require_strict_gain}},
                        &m.vocab, {{"nodes", nodes}});
}

inline json to_document(const ClassicModel& m) {
  return std::visit([](const auto& model) { return to_document(model); }, m);
}

inline ClassicModel classic_from_document(const json& doc) {
  const auto kind = check_model_document(doc);
  try {
    auto vocab = vocabulary_from_document(doc);
    const auto& hp = doc.at("hyperparameters");
    const auto& p = doc.at("parameters");
    if (kind == "nb") {
      NBModel m;
      m.vocab = std::move(vocab);
      m.alpha = hp.at("alpha").get<double>();
      m.log_prior = p.at("log_prior").get<std::array<double, 2>>();
      m.log_likelihood[0] = p.at("log_likelihood_negative").get<std::vector<double>>();
      m.log_likelihood[1] = p.at("log_likelihood_positive").get<std::vector<double>>();
      if (m.log_likelihood[0].size() != m.vocab.size() || m.log_likelihood[1].size() != m.vocab.size())
        throw Error(Errc::malformed_model, "likelihood table size mismatch");
      return m;
    }
    if (kind == "bow-lr") {
      LRModel m{std::move(vocab), p.at("weights").get<std::vector<double>>(), p.at("bias").get<double>(),
                hp.at("l2").get<double>()};
      if (m.weights.size() != m.vocab.size()) throw Error(Errc::malformed_model, "weight size mismatch");
      return m;
    }
    if (kind == "bow-dt") {
      DTModel m;
      m.vocab = std::move(vocab);
      m.config.max_depth = hp.at("max_depth").get<std::size_t>();
      m.config.min_samples_leaf = hp.at("min_samples_leaf").get<std::size_t>();
      m.config.require_strict_gain = hp.at("require_strict_gain").get<bool>();
      for (const auto& n : p.at("nodes")) {
        DTNode node;
        node.feature = n.at(0).get<int>();
        node.child = {n.at(1).get<std::size_t>(), n.at(2).get<std::size_t>()};
        node.pos = n.at(3).get<std::size_t>();
        node.neg = n.at(4).get<std::size_t>();
        node.depth = n.at(5).get<std::size_t>();
        if (node.feature >= static_cast<int>(m.vocab.size()))
          throw Error(Errc::malformed_model, "split feature out of range");
        m.nodes.push_back(node);
      }
      for (const auto& n : m.nodes)
        if (!n.is_leaf() && (n.child[0] >= m.nodes.size() || n.child[1] >= m.nodes.size()))
          throw Error(Errc::malformed_model, "tree child out of range");
      if (m.nodes.empty()) throw Error(Errc::malformed_model, "empty tree");
      return m;
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_model, e.what());
  }
  throw Error(Errc::malformed_model, "unknown classic model kind '" + kind + "'");
}

}  // namespace fiducia
