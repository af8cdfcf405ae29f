#pragma once

// End-to-end evaluation: split -> sentiment -> ratings -> recommenders ->
// metrics, one report per method.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fiducia/evalx.hpp"
#include "fiducia/pipeline.hpp"

namespace fiducia {

struct BenchmarkConfig {
  std::uint64_t seed = 42;
  std::vector<Method> methods = {Method::baseline, Method::user_item, Method::item_item, Method::fm};
  double train_fraction = 0.8;
  SplitRounding rounding = SplitRounding::floor;
  SentimentConfig sentiment;
  /// Defaults to manual labels when the corpus has any, else threshold 3.0.
  std::optional<LabelSource> labels;
  double blend = 0.5;
  RecommenderConfig recommender;
  double relevance = 4.0;
  std::size_t top_k = 3;
  double side_weight = 0.2;
};

struct EvalReport {
  Method method = Method::baseline;
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> precision;  // absent when undefined on this split
  double f_score = 0.0;
  Confusion confusion;
  std::uint64_t seed = 0;
  std::size_t n_test = 0;
};

namespace detail {
struct HeldOut {
  std::string user;
  Column column;
  double rating;
};

inline bool has_manual_labels(const IngestedCorpus& c) {
  if (!c.fragment_labels.empty()) return true;
  for (const auto& r : c.reviews)
    if (r.record.annotated_label && *r.record.annotated_label != Label::unlabeled) return true;
  return false;
}
}  // namespace detail

/// Held-out truth is the gold item rating of each test-review fragment when
/// the corpus has gold ratings, else the rating derived from the test review
/// itself. Repeated (user, column) pairs are averaged.
inline std::vector<EvalReport> run_benchmark(const IngestedCorpus& corpus,
                                             const std::vector<GoldItemRating>& gold,
                                             const BenchmarkConfig& config = {}) {
  if (corpus.reviews.empty()) throw Error(Errc::empty_corpus, "no reviews to evaluate");
  auto [train, test] = train_test_split(review_pointers(corpus.reviews), config.train_fraction, config.seed,
                                        config.rounding);
  if (train.empty() || test.empty()) throw Error(Errc::invalid_config, "split leaves an empty side");

  const auto source =
      config.labels.value_or(detail::has_manual_labels(corpus) ? LabelSource::manual() : LabelSource::at(3.0));
  const auto labeled = label_fragments(train, source, corpus.fragment_labels);
  std::vector<TokenList> texts;
  std::vector<Polarity> labels;
  for (const auto& l : labeled) {
    texts.push_back(l.fragment->tokens);
    labels.push_back(l.label);
  }
  const auto sentiment = train_sentiment(texts, labels, config.sentiment);

  const auto scored = score_fragments(train, sentiment);
  const auto triples = derive_ratings(scored, stars_by_review(train), config.blend);

  // held-out truth
  std::map<std::pair<std::string, Column>, std::pair<double, std::size_t>> sums;
  if (!gold.empty()) {
    std::set<std::string> test_ids;
    for (const auto* r : test) test_ids.insert(r->record.review_id);
    for (const auto& g : gold) {
      if (!test_ids.count(g.review_id)) continue;
      auto& s = sums[{g.user_id, {g.restaurant_id, g.item_id}}];
      s.first += g.rating;
      s.second += 1;
    }
  } else {
    const auto test_scored = score_fragments(test, sentiment);
    for (const auto& t : derive_ratings(test_scored, stars_by_review(test), config.blend)) {
      auto& s = sums[{t.user_id, t.column}];
      s.first += t.rating;
      s.second += 1;
    }
  }
  if (sums.empty()) throw Error(Errc::undefined_metric, "test split has no item ratings");
  std::vector<detail::HeldOut> truth;
  std::vector<std::string> users;
  std::vector<Column> columns;
  for (const auto& r : corpus.reviews) users.push_back(r.record.user_id);
  for (const auto& [key, s] : sums) {
    truth.push_back({key.first, key.second, s.first / static_cast<double>(s.second)});
    columns.push_back(key.second);
  }
  auto R = RatingMatrix::build(triples, users, columns);
  const auto partition = side_partition(train);

  // (user, item) -> that user's held-out columns for the item
  std::map<std::pair<std::string, ItemId>, std::map<Column, double>> by_query;
  for (const auto& h : truth) by_query[{h.user, h.column.item_id}][h.column] = h.rating;

  std::vector<EvalReport> reports;
  for (const auto method : config.methods) {
    auto rc = config.recommender;
    rc.method = method;
    const Recommender engine(R, scored, partition, rc);
    std::vector<double> preds, golds;
    std::vector<bool> pred_pos, gold_pos;
    for (const auto& h : truth) {
      const double p = engine.predict(h.user, h.column);
      preds.push_back(p);
      golds.push_back(h.rating);
      pred_pos.push_back(p >= config.relevance);
      gold_pos.push_back(h.rating >= config.relevance);
    }
    EvalReport rep;
    rep.method = method;
    rep.seed = config.seed;
    rep.n_test = truth.size();
    rep.rmse = rmse(preds, golds);
    rep.mae = mae(preds, golds);
    rep.confusion = confusion(pred_pos, gold_pos);
    rep.f_score = f_score(rep.confusion);

    std::vector<PrecisionQuery> queries;
    for (const auto& [key, held] : by_query) {
      double mean = 0;
      for (const auto& [c, r] : held) mean += r;
      mean /= static_cast<double>(held.size());
      if (mean < config.relevance) continue;
      PrecisionQuery q;
      for (const auto& rr : engine.recommend(key.first, key.second, config.top_k, config.side_weight))
        q.recommended.push_back({rr.restaurant_id, key.second});
      q.held_out = held;
      queries.push_back(std::move(q));
    }
    try {
      rep.precision = precision_at_k(queries, config.relevance);
    } catch (const Error& e) {
      if (e.code() != Errc::undefined_metric) throw;
    }
    reports.push_back(rep);
  }
  return reports;
}

inline json report_to_json(const EvalReport& r) {
  return {{"method", method_name(r.method)},
          {"rmse", r.rmse},
          {"mae", r.mae},
          {"precision", r.precision ? json(*r.precision) : json(nullptr)},
          {"f_score", r.f_score},
          {"tp", r.confusion.tp},
          {"fp", r.confusion.fp},
          {"fn", r.confusion.fn},
          {"tn", r.confusion.tn},
          {"n_test", r.n_test},
          {"seed", r.seed}};
}

inline json reports_to_json(const std::vector<EvalReport>& reports) {
  json out = json::array();
  for (const auto& r : reports) out.push_back(report_to_json(r));
  return out;
}

/// Aligned plain-text table, four decimals.
inline std::string reports_table(const std::vector<EvalReport>& reports) {
  auto cell = [](std::string s, std::size_t w) {
    while (s.size() < w) s.insert(s.begin(), ' ');
    return s;
  };
  std::string out = "method    " + cell("rmse", 8) + cell("mae", 8) + cell("prec", 8) + cell("f1", 8) +
                    cell("tp", 6) + cell("fp", 6) + cell("fn", 6) + cell("tn", 6) + cell("seed", 8) + "\n";
  for (const auto& r : reports) {
    std::string name(method_name(r.method));
    name.resize(10, ' ');
    out += name + cell(text::format_fixed(r.rmse, 4), 8) + cell(text::format_fixed(r.mae, 4), 8) +
           cell(r.precision ? text::format_fixed(*r.precision, 4) : "-", 8) +
           cell(text::format_fixed(r.f_score, 4), 8) + cell(std::to_string(r.confusion.tp), 6) +
           cell(std::to_string(r.confusion.fp), 6) + cell(std::to_string(r.confusion.fn), 6) +
           cell(std::to_string(r.confusion.tn), 6) + cell(std::to_string(r.seed), 8) + "\n";
  }
  return out;
}

}  // namespace fiducia
