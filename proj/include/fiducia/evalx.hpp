#pragma once

// Metrics, seeded splits and ground-truth labels.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fiducia/cf.hpp"
#include "fiducia/corpus.hpp"
#include "fiducia/error.hpp"
#include "fiducia/rng.hpp"

namespace fiducia {

enum class SplitRounding { floor, round };

inline std::optional<SplitRounding> parse_split_rounding(std::string_view s) {
  if (s == "floor") return SplitRounding::floor;
  if (s == "round") return SplitRounding::round;
  return std::nullopt;
}

inline std::size_t train_size(std::size_t n, double train_fraction, SplitRounding rounding) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0))
    throw Error(Errc::invalid_config, "train fraction must be within [0, 1]");
  const double exact = train_fraction * static_cast<double>(n);
  // 0.8 * 3131 is 2504.8000000000002 in binary; nudge before flooring so
  // exact products such as 0.8 * 10 do not lose one.
  const double t = rounding == SplitRounding::floor ? std::floor(exact + 1e-9) : std::floor(exact + 0.5);
  return std::min(n, static_cast<std::size_t>(t));
}

/// Seeded uniform shuffle, then the first train_size items are the train set.
template <class T>
std::pair<std::vector<T>, std::vector<T>> train_test_split(const std::vector<T>& items, double train_fraction,
                                                           std::uint64_t seed,
                                                           SplitRounding rounding = SplitRounding::floor) {
  const auto n_train = train_size(items.size(), train_fraction, rounding);
  Rng rng(seed);
  const auto order = rng.permutation(items.size());
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.reserve(n_train);
  out.second.reserve(items.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_train ? out.first : out.second).push_back(items[order[i]]);
  return out;
}

// ---------------------------------------------------------------------------
// Labels

struct LabelSource {
  enum class Kind { manual, threshold } kind = Kind::manual;
  double threshold = 3.0;

  static LabelSource manual() { return {}; }
  static LabelSource at(double t) { return {Kind::threshold, t}; }

  std::string name() const {
    return kind == Kind::manual ? "manual" : "threshold:" + text::format_double(threshold);
  }
};

/// "manual" or "threshold:T"; T must be 2.0, 2.5 or 3.0.
inline std::optional<LabelSource> parse_label_source(std::string_view s) {
  if (s == "manual") return LabelSource::manual();
  constexpr std::string_view prefix = "threshold:";
  if (s.substr(0, prefix.size()) != prefix) return std::nullopt;
  const std::string rest(s.substr(prefix.size()));
  char* end = nullptr;
  const double t = std::strtod(rest.c_str(), &end);
  if (rest.empty() || end != rest.c_str() + rest.size()) return std::nullopt;
  if (t != 2.0 && t != 2.5 && t != 3.0) return std::nullopt;
  return LabelSource::at(t);
}

struct LabeledExample {
  std::string review_id;
  Label gold = Label::negative;
  LabelSource source;
};

/// positive iff stars >= t.
inline std::vector<LabeledExample> derive_threshold_labels(const std::vector<ReviewRecord>& reviews, double t) {
  std::vector<LabeledExample> out;
  out.reserve(reviews.size());
  for (const auto& r : reviews)
    out.push_back({r.review_id, r.stars >= t ? Label::positive : Label::negative, LabelSource::at(t)});
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

inline Confusion confusion(const std::vector<bool>& predicted_positive, const std::vector<bool>& gold_positive) {
  if (predicted_positive.size() != gold_positive.size())
    throw Error(Errc::invalid_config, "prediction and gold sizes differ");
  Confusion c;
  for (std::size_t i = 0; i < gold_positive.size(); ++i) {
    if (predicted_positive[i])
      ++(gold_positive[i] ? c.tp : c.fp);
    else
      ++(gold_positive[i] ? c.fn : c.tn);
  }
  return c;
}

/// F1 of the positive class; 0 when there is no positive anywhere.
inline double f_score(const Confusion& c) {
  const double den = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp + c.fn);
  return den == 0.0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / den;
}

inline double f_score(const std::vector<bool>& predicted_positive, const std::vector<bool>& gold_positive) {
  return f_score(confusion(predicted_positive, gold_positive));
}

namespace detail {
inline void check_pairs(const std::vector<double>& preds, const std::vector<double>& golds) {
  if (preds.size() != golds.size()) throw Error(Errc::invalid_config, "prediction and gold sizes differ");
  if (preds.empty()) throw Error(Errc::undefined_metric, "no predictions");
}
}  // namespace detail

inline double rmse(const std::vector<double>& preds, const std::vector<double>& golds) {
  detail::check_pairs(preds, golds);
  double s = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += (preds[i] - golds[i]) * (preds[i] - golds[i]);
  return std::sqrt(s / static_cast<double>(preds.size()));
}

inline double mae(const std::vector<double>& preds, const std::vector<double>& golds) {
  detail::check_pairs(preds, golds);
  double s = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - golds[i]);
  return s / static_cast<double>(preds.size());
}

/// One recommendation list and the querying user's held-out ratings.
struct PrecisionQuery {
  std::vector<Column> recommended;
  std::map<Column, double> held_out;
};

/// Mean over queries of relevant / judged recommendations, where judged means
/// the column has a held-out rating and relevant means that rating >= r.
/// Queries with nothing judged are left out.
inline double precision_at_k(const std::vector<PrecisionQuery>& queries, double r = 4.0) {
  double sum = 0;
  std::size_t counted = 0;
  for (const auto& q : queries) {
    std::size_t judged = 0, relevant = 0;
    for (const auto& c : q.recommended) {
      const auto it = q.held_out.find(c);
      if (it == q.held_out.end()) continue;
      ++judged;
      if (it->second >= r) ++relevant;
    }
    if (judged == 0) continue;
    sum += static_cast<double>(relevant) / static_cast<double>(judged);
    ++counted;
  }
  if (counted == 0) throw Error(Errc::undefined_metric, "no query overlaps the held-out ratings");
  return sum / static_cast<double>(counted);
}

/// Fleiss' kappa over positive/negative labels; every row is one item rated
/// by the same number (>= 2) of annotators. When chance agreement is already
/// perfect the annotators cannot disagree and 1 is returned.
inline double fleiss_kappa(const std::vector<std::vector<Label>>& ratings) {
  if (ratings.empty()) throw Error(Errc::undefined_metric, "no items");
  const std::size_t n = ratings.front().size();
  if (n < 2) throw Error(Errc::invalid_config, "need at least two annotators");
  double p_bar = 0, positives = 0;
  for (const auto& row : ratings) {
    if (row.size() != n) throw Error(Errc::invalid_config, "annotator count differs between items");
    double pos = 0, neg = 0;
    for (auto l : row) {
      if (l == Label::positive)
        pos += 1;
      else if (l == Label::negative)
        neg += 1;
      else
        throw Error(Errc::invalid_config, "unlabeled entry in agreement matrix");
    }
    const double nn = static_cast<double>(n);
    p_bar += (pos * (pos - 1) + neg * (neg - 1)) / (nn * (nn - 1));
    positives += pos;
  }
  const double items = static_cast<double>(ratings.size());
  p_bar /= items;
  const double p = positives / (items * static_cast<double>(n));
  const double p_e = p * p + (1 - p) * (1 - p);
  if (p_e == 1.0) return 1.0;
  return (p_bar - p_e) / (1 - p_e);
}

}  // namespace fiducia
