#pragma once

// Single-layer LSTM sentiment regressor trained by backpropagation through
// time. Sequences are processed one at a time at their natural length.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fiducia/corpus.hpp"
#include "fiducia/error.hpp"
#include "fiducia/math.hpp"
#include "fiducia/model_io.hpp"
#include "fiducia/rng.hpp"

namespace fiducia {

/// Gate slots in W, U and b.
enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCandidate = 3 };

struct LSTMParams {
  Eigen::MatrixXd embedding;             // |V| x d_e
  std::array<Eigen::MatrixXd, 4> W;      // d_h x d_e
  std::array<Eigen::MatrixXd, 4> U;      // d_h x d_h
  std::array<Eigen::VectorXd, 4> b;      // d_h
  Eigen::VectorXd w_out;                 // d_h
  double b_out = 0.0;

  LSTMParams() = default;

  LSTMParams(std::size_t vocab, std::size_t embed_dim, std::size_t hidden_dim) {
    const auto v = static_cast<Eigen::Index>(vocab);
    const auto de = static_cast<Eigen::Index>(embed_dim);
    const auto dh = static_cast<Eigen::Index>(hidden_dim);
    embedding = Eigen::MatrixXd::Zero(v, de);
    for (std::size_t g = 0; g < 4; ++g) {
      W[g] = Eigen::MatrixXd::Zero(dh, de);
      U[g] = Eigen::MatrixXd::Zero(dh, dh);
      b[g] = Eigen::VectorXd::Zero(dh);
    }
    w_out = Eigen::VectorXd::Zero(dh);
  }

  std::size_t vocab_size() const { return static_cast<std::size_t>(embedding.rows()); }
  std::size_t embed_dim() const { return static_cast<std::size_t>(embedding.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(w_out.size()); }
};

/// Calls f(name, data, size) for every parameter tensor, in a fixed order.
template <class Params, class F>
void visit_tensors(Params& p, F&& f) {
  static constexpr const char* gates[4] = {"i", "f", "o", "c"};
  f(std::string("E"), p.embedding.data(), static_cast<std::size_t>(p.embedding.size()));
  for (std::size_t g = 0; g < 4; ++g)
    f(std::string("W_") + gates[g], p.W[g].data(), static_cast<std::size_t>(p.W[g].size()));
  for (std::size_t g = 0; g < 4; ++g)
    f(std::string("U_") + gates[g], p.U[g].data(), static_cast<std::size_t>(p.U[g].size()));
  for (std::size_t g = 0; g < 4; ++g)
    f(std::string("b_") + gates[g], p.b[g].data(), static_cast<std::size_t>(p.b[g].size()));
  f(std::string("w_out"), p.w_out.data(), static_cast<std::size_t>(p.w_out.size()));
  f(std::string("b_out"), &p.b_out, std::size_t{1});
}

/// Uniform(-0.1, 0.1) entries, forget-gate bias 1.0.
inline LSTMParams lstm_init(std::size_t vocab, std::size_t embed_dim, std::size_t hidden_dim,
                            std::uint64_t seed, double scale = 0.1) {
  LSTMParams p(vocab, embed_dim, hidden_dim);
  Rng rng(seed);
  visit_tensors(p, [&](const std::string&, double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) data[i] = rng.uniform(-scale, scale);
  });
  p.b[kForgetGate].setConstant(1.0);
  return p;
}

struct LSTMCache {
  std::vector<std::size_t> sequence;
  std::vector<Eigen::VectorXd> x;                  // per step, t = 0..T-1
  std::vector<std::array<Eigen::VectorXd, 4>> gate;  // activated gates
  std::vector<Eigen::VectorXd> c;                  // c[0] = 0, c[t+1] after step t
  std::vector<Eigen::VectorXd> h;                  // h[0] = 0
  double score = 0.0;
};

struct LSTMForward {
  double score;
  LSTMCache cache;
};

namespace detail {
inline Eigen::VectorXd logistic(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}
}  // namespace detail

inline LSTMForward lstm_forward(const std::vector<std::size_t>& sequence, const LSTMParams& p) {
  if (sequence.empty()) throw Error(Errc::invalid_config, "empty sequence");
  LSTMCache cache;
  cache.sequence = sequence;
  const auto dh = static_cast<Eigen::Index>(p.hidden_dim());
  cache.c.push_back(Eigen::VectorXd::Zero(dh));
  cache.h.push_back(Eigen::VectorXd::Zero(dh));
  for (const auto token : sequence) {
    if (token >= p.vocab_size())
      throw Error(Errc::index_out_of_vocabulary,
                  "token index " + std::to_string(token) + " >= " + std::to_string(p.vocab_size()));
    Eigen::VectorXd x = p.embedding.row(static_cast<Eigen::Index>(token)).transpose();
    const auto& h_prev = cache.h.back();
    std::array<Eigen::VectorXd, 4> a;
    for (std::size_t g = 0; g < 4; ++g) a[g] = p.W[g] * x + p.U[g] * h_prev + p.b[g];
    std::array<Eigen::VectorXd, 4> act{detail::logistic(a[kInputGate]), detail::logistic(a[kForgetGate]),
                                       detail::logistic(a[kOutputGate]), a[kCandidate].array().tanh().matrix()};
    Eigen::VectorXd c = act[kForgetGate].cwiseProduct(cache.c.back()) +
                        act[kInputGate].cwiseProduct(act[kCandidate]);
    Eigen::VectorXd h = act[kOutputGate].cwiseProduct(c.array().tanh().matrix());
    cache.x.push_back(std::move(x));
    cache.gate.push_back(std::move(act));
    cache.c.push_back(std::move(c));
    cache.h.push_back(std::move(h));
  }
  cache.score = std::tanh(p.w_out.dot(cache.h.back()) + p.b_out);
  const double score = cache.score;
  return {score, std::move(cache)};
}

/// Squared error against a label in {-1, +1}.
inline double lstm_loss(double score, double label) { return (score - label) * (score - label); }

/// Exact gradient of lstm_loss with respect to every tensor.
inline LSTMParams lstm_backward(const LSTMCache& cache, const LSTMParams& p, double label) {
  LSTMParams grad(p.vocab_size(), p.embed_dim(), p.hidden_dim());
  const double score = cache.score;
  const double dz = 2.0 * (score - label) * (1.0 - score * score);
  grad.b_out = dz;
  grad.w_out = dz * cache.h.back();
  Eigen::VectorXd dh = dz * p.w_out;
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(dh.size());
  for (std::size_t t = cache.sequence.size(); t-- > 0;) {
    const auto& act = cache.gate[t];
    const auto& c = cache.c[t + 1];
    const auto& c_prev = cache.c[t];
    const auto& h_prev = cache.h[t];
    const Eigen::ArrayXd tc = c.array().tanh();
    const Eigen::ArrayXd d_o = dh.array() * tc;
    const Eigen::ArrayXd dc = dc_next.array() + dh.array() * act[kOutputGate].array() * (1.0 - tc * tc);
    std::array<Eigen::VectorXd, 4> da;
    const auto& ig = act[kInputGate].array();
    const auto& fg = act[kForgetGate].array();
    const auto& og = act[kOutputGate].array();
    const auto& cg = act[kCandidate].array();
    da[kInputGate] = (dc * cg * ig * (1.0 - ig)).matrix();
    da[kForgetGate] = (dc * c_prev.array() * fg * (1.0 - fg)).matrix();
    da[kOutputGate] = (d_o * og * (1.0 - og)).matrix();
    da[kCandidate] = (dc * ig * (1.0 - cg * cg)).matrix();
    dc_next = (dc * fg).matrix();
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.embed_dim()));
    Eigen::VectorXd dh_prev = Eigen::VectorXd::Zero(dh.size());
    for (std::size_t g = 0; g < 4; ++g) {
      grad.W[g].noalias() += da[g] * cache.x[t].transpose();
      grad.U[g].noalias() += da[g] * h_prev.transpose();
      grad.b[g] += da[g];
      dx.noalias() += p.W[g].transpose() * da[g];
      dh_prev.noalias() += p.U[g].transpose() * da[g];
    }
    grad.embedding.row(static_cast<Eigen::Index>(cache.sequence[t])) += dx.transpose();
    dh = std::move(dh_prev);
  }
  return grad;
}

struct LSTMTrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 50;
  std::uint64_t seed = 42;
  /// Rescale the gradient when its infinity norm exceeds this value.
  std::optional<double> clip;
};

struct LabeledSequence {
  std::vector<std::size_t> tokens;
  double label;  // -1 or +1
};

/// Plain per-sample SGD; each epoch visits the corpus in a shuffle derived
/// from the seed. `epoch_losses` receives the mean loss of every epoch.
inline LSTMParams lstm_train(const std::vector<LabeledSequence>& corpus, LSTMParams params,
                             const LSTMTrainConfig& config, std::vector<double>* epoch_losses = nullptr) {
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  if (epoch_losses) epoch_losses->clear();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = rng.permutation(corpus.size());
    double total = 0;
    std::size_t seen = 0;
    for (auto idx : order) {
      const auto& sample = corpus[idx];
      if (sample.tokens.empty()) continue;
      auto fwd = lstm_forward(sample.tokens, params);
      const double loss = lstm_loss(fwd.score, sample.label);
      if (!std::isfinite(loss))
        throw Error(Errc::divergence_detected, "non-finite loss in epoch " + std::to_string(epoch));
      total += loss;
      ++seen;
      auto grad = lstm_backward(fwd.cache, params, sample.label);
      double scale = config.learning_rate;
      if (config.clip) {
        double norm = 0;
        visit_tensors(grad, [&](const std::string&, const double* d, std::size_t n) {
          for (std::size_t i = 0; i < n; ++i) norm = std::max(norm, std::abs(d[i]));
        });
        if (norm > *config.clip) scale *= *config.clip / norm;
      }
      std::vector<double*> targets;
      visit_tensors(params, [&](const std::string&, double* d, std::size_t) { targets.push_back(d); });
      std::size_t slot = 0;
      visit_tensors(grad, [&](const std::string&, const double* g, std::size_t n) {
        double* d = targets[slot++];
        for (std::size_t i = 0; i < n; ++i) d[i] -= scale * g[i];
      });
    }
    const double mean = seen ? total / static_cast<double>(seen) : 0.0;
    if (!std::isfinite(mean))
      throw Error(Errc::divergence_detected, "non-finite loss in epoch " + std::to_string(epoch));
    if (epoch_losses) epoch_losses->push_back(mean);
  }
  return params;
}

// ---------------------------------------------------------------------------
// Fragment-level wrapper

struct LSTMConfig {
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 16;
  LSTMTrainConfig train;
};

struct LSTMSentiment {
  Vocabulary vocab;
  LSTMParams params;
  LSTMConfig config;

  /// OOV tokens are skipped; a fragment with no known token scores 0.
  std::vector<std::size_t> encode(const TokenList& tokens) const {
    std::vector<std::size_t> seq;
    for (const auto& t : tokens)
      if (const auto idx = vocab.index_of(t)) seq.push_back(*idx);
    return seq;
  }

  double score(const TokenList& tokens) const {
    const auto seq = encode(tokens);
    if (seq.empty()) return 0.0;
    return lstm_forward(seq, params).score;
  }
};

inline LSTMSentiment lstm_sentiment_train(const std::vector<TokenList>& fragments, const std::vector<double>& labels,
                                          const Vocabulary& vocab, const LSTMConfig& config = {},
                                          std::vector<double>* epoch_losses = nullptr) {
  if (fragments.size() != labels.size()) throw Error(Errc::invalid_config, "fragment and label counts differ");
  LSTMSentiment model{vocab, lstm_init(vocab.size(), config.embed_dim, config.hidden_dim, config.train.seed),
                      config};
  std::vector<LabeledSequence> corpus;
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    auto seq = model.encode(fragments[i]);
    if (!seq.empty()) corpus.push_back({std::move(seq), labels[i]});
  }
  model.params = lstm_train(corpus, std::move(model.params), config.train, epoch_losses);
  return model;
}

inline json to_document(const LSTMSentiment& m) {
  json tensors = json::object();
  visit_tensors(m.params, [&](const std::string& name, const double* d, std::size_t n) {
    tensors[name] = std::vector<double>(d, d + n);
  });
  json hp = {{"embed_dim", m.config.embed_dim},
             {"hidden_dim", m.config.hidden_dim},
             {"learning_rate", m.config.train.learning_rate},
             {"epochs", m.config.train.epochs},
             {"seed", m.config.train.seed}};
  if (m.config.train.clip) hp["clip"] = *m.config.train.clip;
  return model_document("lstm", hp, &m.vocab, {{"tensors", tensors}});
}

inline LSTMSentiment lstm_from_document(const json& doc) {
  if (check_model_document(doc) != "lstm") throw Error(Errc::malformed_model, "not an lstm model");
  try {
    LSTMSentiment m;
    m.vocab = vocabulary_from_document(doc);
    const auto& hp = doc.at("hyperparameters");
    m.config.embed_dim = hp.at("embed_dim").get<std::size_t>();
    m.config.hidden_dim = hp.at("hidden_dim").get<std::size_t>();
    m.config.train.learning_rate = hp.at("learning_rate").get<double>();
    m.config.train.epochs = hp.at("epochs").get<std::size_t>();
    m.config.train.seed = hp.at("seed").get<std::uint64_t>();
    if (hp.contains("clip")) m.config.train.clip = hp["clip"].get<double>();
    m.params = LSTMParams(m.vocab.size(), m.config.embed_dim, m.config.hidden_dim);
    const auto& tensors = doc.at("parameters").at("tensors");
    visit_tensors(m.params, [&](const std::string& name, double* d, std::size_t n) {
      const auto values = tensors.at(name).get<std::vector<double>>();
      if (values.size() != n) throw Error(Errc::malformed_model, "tensor " + name + " has wrong size");
      std::copy(values.begin(), values.end(), d);
    });
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_model, e.what());
  }
}

}  // namespace fiducia
