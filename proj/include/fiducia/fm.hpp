#pragma once

// Second-order factorization machine trained by SGD with adaptive
// regularization:
//   y = w0 + sum_i w_i x_i + 1/2 sum_f [(sum_i v_if x_i)^2 - sum_i v_if^2 x_i^2]

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fiducia/cf.hpp"
#include "fiducia/error.hpp"
#include "fiducia/model_io.hpp"
#include "fiducia/rng.hpp"

namespace fiducia {

struct Feature {
  std::size_t index;
  double value;
};

using FeatureVector = std::vector<Feature>;

struct FMInstance {
  FeatureVector x;
  double y = 0.0;
};

struct FMModel {
  std::size_t n = 0;     // number of features
  std::size_t kdim = 1;  // latent dimension
  double w0 = 0.0;
  std::vector<double> w;
  std::vector<double> V;  // n x kdim, row-major
  double lambda_w = 0.01;
  double lambda_v = 0.01;

  FMModel() = default;
  FMModel(std::size_t features, std::size_t k) : n(features), kdim(k), w(features, 0.0), V(features * k, 0.0) {
    if (k < 1) throw Error(Errc::invalid_config, "kdim must be >= 1");
  }

  double& v(std::size_t i, std::size_t f) { return V[i * kdim + f]; }
  double v(std::size_t i, std::size_t f) const { return V[i * kdim + f]; }

  bool finite() const {
    if (!std::isfinite(w0)) return false;
    for (double x : w)
      if (!std::isfinite(x)) return false;
    for (double x : V)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

namespace detail {
inline void check_features(const FeatureVector& x, const FMModel& m) {
  for (const auto& f : x)
    if (f.index >= m.n)
      throw Error(Errc::feature_index_out_of_range,
                  "feature " + std::to_string(f.index) + " >= " + std::to_string(m.n));
}

// Per-factor sums s_f = sum_i v_if x_i.
inline std::vector<double> factor_sums(const FeatureVector& x, const FMModel& m) {
  std::vector<double> s(m.kdim, 0.0);
  for (const auto& f : x)
    for (std::size_t k = 0; k < m.kdim; ++k) s[k] += m.v(f.index, k) * f.value;
  return s;
}
}  // namespace detail

/// Linear-time form of the pairwise term. No clamping.
inline double fm_predict(const FeatureVector& x, const FMModel& m) {
  detail::check_features(x, m);
  double y = m.w0;
  for (const auto& f : x) y += m.w[f.index] * f.value;
  for (std::size_t k = 0; k < m.kdim; ++k) {
    double sum = 0, sq = 0;
    for (const auto& f : x) {
      const double t = m.v(f.index, k) * f.value;
      sum += t;
      sq += t * t;
    }
    y += 0.5 * (sum * sum - sq);
  }
  return y;
}

/// Partial derivatives of the prediction with respect to the parameters
/// touched by x (all others are zero).
struct FMGradient {
  double w0 = 1.0;
  std::vector<std::pair<std::size_t, double>> w;                 // (i, dy/dw_i)
  std::vector<std::pair<std::size_t, std::vector<double>>> V;    // (i, dy/dv_i.)
};

inline FMGradient fm_gradient(const FeatureVector& x, const FMModel& m) {
  detail::check_features(x, m);
  const auto s = detail::factor_sums(x, m);
  FMGradient g;
  for (const auto& f : x) {
    g.w.emplace_back(f.index, f.value);
    std::vector<double> dv(m.kdim);
    for (std::size_t k = 0; k < m.kdim; ++k) dv[k] = f.value * (s[k] - m.v(f.index, k) * f.value);
    g.V.emplace_back(f.index, std::move(dv));
  }
  return g;
}

/// One SGD step on 1/2 (y_hat - y)^2 with weight decay lambda_w on w and
/// lambda_v on V; w0 is not regularized.
inline void fm_sgd_step(const FMInstance& inst, FMModel& m, double lr) {
  detail::check_features(inst.x, m);
  const auto s = detail::factor_sums(inst.x, m);
  double y = m.w0;
  for (const auto& f : inst.x) y += m.w[f.index] * f.value;
  for (std::size_t k = 0; k < m.kdim; ++k) {
    double sq = 0;
    for (const auto& f : inst.x) {
      const double t = m.v(f.index, k) * f.value;
      sq += t * t;
    }
    y += 0.5 * (s[k] * s[k] - sq);
  }
  const double e = y - inst.y;
  m.w0 -= lr * e;
  for (const auto& f : inst.x) {
    auto& wi = m.w[f.index];
    wi -= lr * (e * f.value + m.lambda_w * wi);
    for (std::size_t k = 0; k < m.kdim; ++k) {
      auto& vik = m.v(f.index, k);
      const double grad = f.value * (s[k] - vik * f.value);
      vik -= lr * (e * grad + m.lambda_v * vik);
    }
    if (!std::isfinite(wi)) throw Error(Errc::divergence_detected, "factorization machine diverged");
  }
  if (!std::isfinite(m.w0)) throw Error(Errc::divergence_detected, "factorization machine diverged");
}

inline double fm_mse(const std::vector<FMInstance>& data, const FMModel& m) {
  if (data.empty()) return 0.0;
  double sum = 0;
  for (const auto& inst : data) {
    const double e = fm_predict(inst.x, m) - inst.y;
    sum += e * e;
  }
  return sum / static_cast<double>(data.size());
}

struct FMConfig {
  double learning_rate = 0.001;
  std::size_t epochs = 100;
  std::size_t kdim = 8;
  std::uint64_t seed = 42;
  double lambda_init = 0.01;
  double lambda_max = 10.0;
  /// Step size for the regularization update; defaults to learning_rate.
  std::optional<double> lambda_learning_rate;
  double init_stddev = 0.01;
  /// Count `epochs` as single-instance SGD steps instead of full passes.
  bool single_step_iterations = false;
};

struct FMTrace {
  std::vector<double> train_mse;       // after each iteration
  std::vector<double> validation_mse;  // after each iteration
  std::vector<std::pair<double, double>> lambdas;
};

namespace detail {

// Gradient step on the regularization values. The validation loss is taken
// at the parameters one full-batch update ahead, theta' = theta - lr (g +
// lambda theta), whose derivative in lambda is -lr theta.
inline void adapt_regularization(const std::vector<FMInstance>& train, const std::vector<FMInstance>& validation,
                                 FMModel& m, double lr, double lambda_lr, double lambda_max) {
  if (validation.empty() || lr == 0.0) return;
  std::vector<double> gw(m.n, 0.0), gV(m.n * m.kdim, 0.0);
  double gw0 = 0.0;
  const double inv_train = train.empty() ? 0.0 : 1.0 / static_cast<double>(train.size());
  for (const auto& inst : train) {
    const double e = (fm_predict(inst.x, m) - inst.y) * inv_train;
    const auto s = factor_sums(inst.x, m);
    gw0 += e;
    for (const auto& f : inst.x) {
      gw[f.index] += e * f.value;
      for (std::size_t k = 0; k < m.kdim; ++k)
        gV[f.index * m.kdim + k] += e * f.value * (s[k] - m.v(f.index, k) * f.value);
    }
  }
  FMModel ahead = m;
  ahead.w0 = m.w0 - lr * gw0;
  for (std::size_t i = 0; i < m.n; ++i) ahead.w[i] = m.w[i] - lr * (gw[i] + m.lambda_w * m.w[i]);
  for (std::size_t j = 0; j < m.V.size(); ++j) ahead.V[j] = m.V[j] - lr * (gV[j] + m.lambda_v * m.V[j]);

  double d_lambda_w = 0.0, d_lambda_v = 0.0;
  const double inv_val = 1.0 / static_cast<double>(validation.size());
  for (const auto& inst : validation) {
    const double e = (fm_predict(inst.x, ahead) - inst.y) * inv_val;
    const auto s = factor_sums(inst.x, ahead);
    for (const auto& f : inst.x) {
      d_lambda_w += e * f.value * (-lr * m.w[f.index]);
      for (std::size_t k = 0; k < m.kdim; ++k)
        d_lambda_v += e * f.value * (s[k] - ahead.v(f.index, k) * f.value) * (-lr * m.v(f.index, k));
    }
  }
  m.lambda_w = std::clamp(m.lambda_w - lambda_lr * d_lambda_w, 0.0, lambda_max);
  m.lambda_v = std::clamp(m.lambda_v - lambda_lr * d_lambda_v, 0.0, lambda_max);
}

}  // namespace detail

/// w0 = 0, w = 0, V ~ Normal(0, init_stddev). Each iteration is one seeded
/// shuffled SGD pass over `train` followed by one regularization update
/// against `validation`.
inline FMModel fm_train(const std::vector<FMInstance>& train, const std::vector<FMInstance>& validation,
                        std::size_t n_features, const FMConfig& config = {}, FMTrace* trace = nullptr) {
  if (validation.empty()) throw Error(Errc::invalid_config, "validation set is empty");
  if (config.lambda_max < 0 || config.lambda_init < 0 || config.lambda_init > config.lambda_max)
    throw Error(Errc::invalid_config, "regularization bounds");
  FMModel m(n_features, config.kdim);
  m.lambda_w = m.lambda_v = config.lambda_init;
  Rng rng(config.seed);
  for (auto& v : m.V) v = rng.normal(0.0, config.init_stddev);
  for (const auto& inst : train) detail::check_features(inst.x, m);
  for (const auto& inst : validation) detail::check_features(inst.x, m);

  const double lr = config.learning_rate;
  const double lambda_lr = config.lambda_learning_rate.value_or(lr);
  auto record = [&] {
    if (!m.finite()) throw Error(Errc::divergence_detected, "factorization machine diverged");
    if (!trace) return;
    trace->train_mse.push_back(fm_mse(train, m));
    trace->validation_mse.push_back(fm_mse(validation, m));
    trace->lambdas.emplace_back(m.lambda_w, m.lambda_v);
  };

  if (config.single_step_iterations) {
    std::vector<std::size_t> order;
    std::size_t cursor = 0;
    for (std::size_t step = 0; step < config.epochs && !train.empty(); ++step) {
      if (cursor == order.size()) {
        order = rng.permutation(train.size());
        cursor = 0;
      }
      fm_sgd_step(train[order[cursor++]], m, lr);
      detail::adapt_regularization(train, validation, m, lr, lambda_lr, config.lambda_max);
      record();
    }
    return m;
  }
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (auto idx : rng.permutation(train.size())) fm_sgd_step(train[idx], m, lr);
    detail::adapt_regularization(train, validation, m, lr, lambda_lr, config.lambda_max);
    record();
  }
  return m;
}

/// Splits off a seeded `fraction` of `data` as the validation set (at least
/// one instance when data has two or more).
inline std::pair<std::vector<FMInstance>, std::vector<FMInstance>> carve_validation(
    const std::vector<FMInstance>& data, double fraction, std::uint64_t seed) {
  Rng rng(seed);
  const auto order = rng.permutation(data.size());
  auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(data.size())));
  if (n_val == 0 && data.size() >= 2) n_val = 1;
  std::vector<FMInstance> train, val;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_val ? val : train).push_back(data[order[i]]);
  return {std::move(train), std::move(val)};
}

// ---------------------------------------------------------------------------
// One-hot feature space over (user, column[, community])

class FMFeatureSpace {
 public:
  FMFeatureSpace() = default;

  FMFeatureSpace(std::vector<std::string> users, std::vector<Column> columns, std::size_t communities = 0)
      : users_(std::move(users)), columns_(std::move(columns)), communities_(communities) {
    for (std::size_t i = 0; i < users_.size(); ++i) user_index_[users_[i]] = i;
    for (std::size_t i = 0; i < columns_.size(); ++i) column_index_[columns_[i]] = i;
  }

  static FMFeatureSpace from(const RatingMatrix& R, std::size_t communities = 0) {
    return FMFeatureSpace(R.users(), R.columns(), communities);
  }

  std::size_t size() const { return users_.size() + columns_.size() + communities_; }
  std::size_t num_communities() const { return communities_; }
  const std::vector<std::string>& users() const { return users_; }
  const std::vector<Column>& columns() const { return columns_; }

  /// Exactly one active user and one active column feature, plus the
  /// optional side-community indicator.
  FeatureVector encode(const std::string& user, const Column& column,
                       std::optional<std::size_t> community = std::nullopt) const {
    const auto u = user_index_.find(user);
    if (u == user_index_.end()) throw Error(Errc::unknown_user, "user '" + user + "'");
    const auto c = column_index_.find(column);
    if (c == column_index_.end()) throw Error(Errc::unknown_column, "column '" + column.key() + "'");
    FeatureVector x{{u->second, 1.0}, {users_.size() + c->second, 1.0}};
    if (community) {
      if (*community >= communities_)
        throw Error(Errc::feature_index_out_of_range, "community " + std::to_string(*community));
      x.push_back({users_.size() + columns_.size() + *community, 1.0});
    }
    return x;
  }

  bool knows(const std::string& user, const Column& column) const {
    return user_index_.count(user) && column_index_.count(column);
  }

 private:
  std::vector<std::string> users_;
  std::vector<Column> columns_;
  std::size_t communities_ = 0;
  std::map<std::string, std::size_t> user_index_;
  std::map<Column, std::size_t> column_index_;
};

struct FMRecommenderModel {
  FMFeatureSpace space;
  FMModel model;
  FMConfig config;

  /// Clamped to the rating scale.
  double rating(const std::string& user, const Column& column,
                std::optional<std::size_t> community = std::nullopt) const {
    return clamp_rating(fm_predict(space.encode(user, column, community), model));
  }
};

inline json to_document(const FMRecommenderModel& m) {
  json columns = json::array();
  for (const auto& c : m.space.columns()) columns.push_back({c.restaurant_id, c.item_id});
  json hp = {{"learning_rate", m.config.learning_rate},
             {"epochs", m.config.epochs},
             {"kdim", m.config.kdim},
             {"seed", m.config.seed},
             {"lambda_init", m.config.lambda_init},
             {"lambda_max", m.config.lambda_max},
             {"init_stddev", m.config.init_stddev},
             {"single_step_iterations", m.config.single_step_iterations}};
  if (m.config.lambda_learning_rate) hp["lambda_learning_rate"] = *m.config.lambda_learning_rate;
  return model_document("fm", hp, nullptr,
                        {{"users", m.space.users()},
                         {"columns", columns},
                         {"communities", m.space.num_communities()},
                         {"w0", m.model.w0},
                         {"w", m.model.w},
                         {"V", m.model.V},
                         {"lambda_w", m.model.lambda_w},
                         {"lambda_v", m.model.lambda_v}});
}

inline FMRecommenderModel fm_from_document(const json& doc) {
  if (check_model_document(doc) != "fm") throw Error(Errc::malformed_model, "not an fm model");
  try {
    const auto& hp = doc.at("hyperparameters");
    const auto& p = doc.at("parameters");
    FMRecommenderModel out;
    out.config.learning_rate = hp.at("learning_rate").get<double>();
    out.config.epochs = hp.at("epochs").get<std::size_t>();
    out.config.kdim = hp.at("kdim").get<std::size_t>();
    out.config.seed = hp.at("seed").get<std::uint64_t>();
    out.config.lambda_init = hp.at("lambda_init").get<double>();
    out.config.lambda_max = hp.at("lambda_max").get<double>();
    out.config.init_stddev = hp.at("init_stddev").get<double>();
    out.config.single_step_iterations = hp.at("single_step_iterations").get<bool>();
    if (hp.contains("lambda_learning_rate")) out.config.lambda_learning_rate = hp["lambda_learning_rate"].get<double>();
    std::vector<Column> columns;
    for (const auto& c : p.at("columns")) columns.push_back({c.at(0).get<std::string>(), c.at(1).get<ItemId>()});
    out.space = FMFeatureSpace(p.at("users").get<std::vector<std::string>>(), std::move(columns),
                               p.at("communities").get<std::size_t>());
    out.model = FMModel(out.space.size(), out.config.kdim);
    out.model.w0 = p.at("w0").get<double>();
    out.model.w = p.at("w").get<std::vector<double>>();
    out.model.V = p.at("V").get<std::vector<double>>();
    out.model.lambda_w = p.at("lambda_w").get<double>();
    out.model.lambda_v = p.at("lambda_v").get<double>();
    if (out.model.w.size() != out.model.n || out.model.V.size() != out.model.n * out.model.kdim)
      throw Error(Errc::malformed_model, "fm parameter sizes do not match the feature space");
    return out;
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_model, e.what());
  }
}

}  // namespace fiducia
