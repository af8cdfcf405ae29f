#pragma once

// Glue between the modules: corpus inputs, ingestion, sentiment scoring,
// rating derivation and the recommender engine.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "fiducia/cf.hpp"
#include "fiducia/corpus.hpp"
#include "fiducia/error.hpp"
#include "fiducia/evalx.hpp"
#include "fiducia/fm.hpp"
#include "fiducia/fragmenter.hpp"
#include "fiducia/lstm.hpp"
#include "fiducia/sentiment_classic.hpp"
#include "fiducia/sides.hpp"
#include "fiducia/synth.hpp"

namespace fiducia {

using FragmentKey = std::pair<std::string, ItemId>;  // (review_id, item_id)
using FragmentLabels = std::map<FragmentKey, Label>;

struct CorpusInputs {
  std::vector<ReviewRecord> reviews;
  std::vector<RestaurantProfile> restaurants;
  LexiconSet lexicons;
  ItemLexicon items;
  std::map<std::string, std::vector<Arc>> arcs;  // by review_id, optional
  FragmentLabels fragment_labels;                // optional manual gold
  std::vector<GoldItemRating> gold_ratings;      // optional
};

inline FragmentLabels parse_fragment_labels(std::istream& in) {
  FragmentLabels out;
  for (const auto& e : text::read_tsv(in)) {
    if (e.fields.size() != 3) throw MalformedRecord(e.line, "expected review_id, item_id, label");
    const auto label = parse_label(text::trim(e.fields[2]));
    if (!label) throw MalformedRecord(e.line, "unknown label '" + e.fields[2] + "'");
    try {
      out[{e.fields[0], std::stoi(e.fields[1])}] = *label;
    } catch (const std::logic_error&) {
      throw MalformedRecord(e.line, "bad item_id '" + e.fields[1] + "'");
    }
  }
  return out;
}

inline std::vector<GoldItemRating> parse_gold_ratings(std::istream& in) {
  std::vector<GoldItemRating> out;
  for (const auto& e : text::read_tsv(in)) {
    if (e.fields.size() != 5) throw MalformedRecord(e.line, "expected 5 fields");
    try {
      out.push_back({e.fields[0], e.fields[1], e.fields[2], std::stoi(e.fields[3]), std::stod(e.fields[4])});
    } catch (const std::logic_error&) {
      throw MalformedRecord(e.line, "bad number");
    }
    if (!(out.back().rating >= kMinRating && out.back().rating <= kMaxRating))
      throw MalformedRecord(e.line, "rating outside [1, 5]");
  }
  return out;
}

namespace detail {
template <class F>
auto parse_file(const std::filesystem::path& path, F parse) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  try {
    return parse(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}
}  // namespace detail

/// Corpus directory layout: reviews.jsonl, lexicons/ (stopwords.txt,
/// emoticons.tsv, slang.tsv, items.tsv) and optionally restaurants.jsonl,
/// arcs.jsonl, fragment_labels.tsv and item_ratings.tsv.
inline CorpusInputs load_corpus_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(Errc::io_error, "corpus directory " + dir.string() + " not found");
  CorpusInputs c;
  c.reviews = load_reviews(dir / "reviews.jsonl");
  if (fs::exists(dir / "restaurants.jsonl")) c.restaurants = load_restaurants(dir / "restaurants.jsonl");
  c.lexicons = load_lexicons(dir / "lexicons");
  c.items = load_item_lexicon(dir / "lexicons" / "items.tsv");
  if (fs::exists(dir / "arcs.jsonl")) c.arcs = load_arcs(dir / "arcs.jsonl");
  if (fs::exists(dir / "fragment_labels.tsv"))
    c.fragment_labels = detail::parse_file(dir / "fragment_labels.tsv", [](std::istream& in) {
      return parse_fragment_labels(in);
    });
  if (fs::exists(dir / "item_ratings.tsv"))
    c.gold_ratings =
        detail::parse_file(dir / "item_ratings.tsv", [](std::istream& in) { return parse_gold_ratings(in); });
  return c;
}

inline CorpusInputs corpus_from_synth(const SynthCorpus& s) {
  CorpusInputs c;
  c.reviews = s.reviews;
  c.restaurants = s.restaurants;
  c.lexicons = s.lexicons();
  c.items = s.items();
  for (const auto& g : s.fragment_labels) c.fragment_labels[{g.review_id, g.item_id}] = g.label;
  c.gold_ratings = s.item_ratings;
  return c;
}

// ---------------------------------------------------------------------------
// Ingestion

struct IngestedReview {
  ReviewRecord record;
  TokenList tokens;
  std::vector<ItemFragment> fragments;
};

struct IngestedCorpus {
  std::vector<IngestedReview> reviews;
  std::vector<RestaurantProfile> restaurants;
  ItemLexicon items;
  FragmentLabels fragment_labels;
};

/// Normalizes each review and scopes it into item fragments, using
/// dependency arcs for the reviews that have them.
inline IngestedReview ingest_review(const ReviewRecord& r, const LexiconSet& lex, const ItemLexicon& items,
                                    const std::vector<Arc>* arcs = nullptr) {
  IngestedReview out{r, normalize(r.text, lex), {}};
  const auto mentions = find_mentions(out.tokens, items);
  out.fragments = arcs ? scope_fragments_with_arcs(out.tokens, mentions, *arcs, r.review_id)
                       : scope_fragments(out.tokens, mentions, r.review_id);
  return out;
}

inline IngestedCorpus ingest(const CorpusInputs& c) {
  IngestedCorpus out;
  out.restaurants = c.restaurants;
  out.items = c.items;
  out.fragment_labels = c.fragment_labels;
  out.reviews.reserve(c.reviews.size());
  for (const auto& r : c.reviews) {
    const auto a = c.arcs.find(r.review_id);
    out.reviews.push_back(ingest_review(r, c.lexicons, c.items, a == c.arcs.end() ? nullptr : &a->second));
  }
  return out;
}

inline constexpr std::string_view kCorpusFormat = "fiducia-corpus";

inline json corpus_to_json(const IngestedCorpus& c) {
  json items = json::array();
  for (const auto& e : c.items.entries()) {
    std::vector<std::string> aliases;
    for (const auto& a : e.aliases) aliases.push_back(text::join(a, " "));
    items.push_back({{"item_id", e.item_id}, {"canonical_name", e.canonical_name}, {"aliases", aliases}});
  }
  json restaurants = json::array();
  for (const auto& r : c.restaurants) restaurants.push_back(restaurant_to_json(r));
  json reviews = json::array();
  for (const auto& r : c.reviews) {
    json frags = json::array();
    for (const auto& f : r.fragments)
      frags.push_back({{"item_id", f.item_id},
                       {"tokens", f.tokens},
                       {"positions", f.positions},
                       {"clause_index", f.clause_index}});
    auto rec = review_to_json(r.record);
    rec["tokens"] = r.tokens;
    rec["fragments"] = std::move(frags);
    reviews.push_back(std::move(rec));
  }
  json labels = json::array();
  for (const auto& [key, label] : c.fragment_labels) labels.push_back({key.first, key.second, label_name(label)});
  return {{"format", kCorpusFormat},
          {"version", 1},
          {"items", items},
          {"restaurants", restaurants},
          {"reviews", reviews},
          {"fragment_labels", labels}};
}

inline IngestedCorpus corpus_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != kCorpusFormat || doc.value("version", 0) != 1)
    throw Error(Errc::malformed_record, "not a fiducia corpus artifact");
  try {
    IngestedCorpus c;
    std::vector<ItemEntry> entries;
    for (const auto& e : doc.at("items")) {
      ItemEntry item{e.at("item_id").get<ItemId>(), e.at("canonical_name").get<std::string>(), {}};
      for (const auto& a : e.at("aliases")) item.aliases.push_back(text::split_whitespace(a.get<std::string>()));
      entries.push_back(std::move(item));
    }
    c.items = ItemLexicon(std::move(entries));
    std::size_t line = 0;
    for (const auto& r : doc.at("restaurants")) c.restaurants.push_back(parse_restaurant(r.dump(), ++line));
    line = 0;
    for (const auto& r : doc.at("reviews")) {
      json rec = r;
      rec.erase("tokens");
      rec.erase("fragments");
      IngestedReview ir{parse_review(rec.dump(), ++line), r.at("tokens").get<TokenList>(), {}};
      for (const auto& f : r.at("fragments"))
        ir.fragments.push_back({ir.record.review_id, f.at("item_id").get<ItemId>(), f.at("tokens").get<TokenList>(),
                                f.at("positions").get<std::vector<std::size_t>>(),
                                f.at("clause_index").get<std::size_t>()});
      c.reviews.push_back(std::move(ir));
    }
    for (const auto& l : doc.at("fragment_labels")) {
      const auto label = parse_label(l.at(2).get<std::string>());
      if (!label) throw Error(Errc::malformed_record, "bad fragment label");
      c.fragment_labels[{l.at(0).get<std::string>(), l.at(1).get<ItemId>()}] = *label;
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_record, std::string("corpus artifact: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Sentiment

enum class SentimentKind { nb, bow_lr, bow_dt, lstm };

inline std::optional<SentimentKind> parse_sentiment_kind(std::string_view s) {
  if (s == "nb") return SentimentKind::nb;
  if (s == "bow-lr") return SentimentKind::bow_lr;
  if (s == "bow-dt") return SentimentKind::bow_dt;
  if (s == "lstm") return SentimentKind::lstm;
  return std::nullopt;
}

inline std::string_view sentiment_kind_name(SentimentKind k) {
  switch (k) {
    case SentimentKind::nb: return "nb";
    case SentimentKind::bow_lr: return "bow-lr";
    case SentimentKind::bow_dt: return "bow-dt";
    case SentimentKind::lstm: return "lstm";
  }
  return "?";
}

struct SentimentConfig {
  SentimentKind kind = SentimentKind::nb;
  std::size_t min_count = 1;
  double nb_alpha = 1.0;
  LRConfig lr;
  DTConfig dt;
  LSTMConfig lstm;
};

class SentimentModel {
 public:
  SentimentModel() = default;
  explicit SentimentModel(ClassicModel m) : model_(std::move(m)) {}
  explicit SentimentModel(LSTMSentiment m) : model_(std::move(m)) {}

  /// Score in [-1, 1]; positive means positive sentiment.
  double score(const TokenList& tokens) const {
    if (const auto* c = std::get_if<ClassicModel>(&model_)) return classify_fragment(tokens, *c);
    return std::get<LSTMSentiment>(model_).score(tokens);
  }

  json document() const {
    if (const auto* c = std::get_if<ClassicModel>(&model_)) return to_document(*c);
    return to_document(std::get<LSTMSentiment>(model_));
  }

  static SentimentModel from_document(const json& doc) {
    if (check_model_document(doc) == "lstm") return SentimentModel(lstm_from_document(doc));
    return SentimentModel(classic_from_document(doc));
  }

 private:
  std::variant<ClassicModel, LSTMSentiment> model_;
};

inline SentimentModel train_sentiment(const std::vector<TokenList>& fragments, const std::vector<Polarity>& labels,
                                      const SentimentConfig& config = {}) {
  if (fragments.size() != labels.size()) throw Error(Errc::invalid_config, "fragment and label counts differ");
  detail::require_both_classes(labels);
  const auto vocab = build_vocabulary(fragments, config.min_count);
  switch (config.kind) {
    case SentimentKind::nb: return SentimentModel(ClassicModel(nb_train(fragments, labels, vocab, config.nb_alpha)));
    case SentimentKind::bow_lr:
    case SentimentKind::bow_dt: {
      std::vector<BowVector> X;
      X.reserve(fragments.size());
      for (const auto& f : fragments) X.push_back(bow_vectorize(f, vocab));
      if (config.kind == SentimentKind::bow_lr) return SentimentModel(ClassicModel(lr_train(X, labels, vocab, config.lr)));
      return SentimentModel(ClassicModel(dt_train(X, labels, vocab, config.dt)));
    }
    case SentimentKind::lstm: {
      std::vector<double> y;
      y.reserve(labels.size());
      for (auto l : labels) y.push_back(l == Polarity::positive ? 1.0 : -1.0);
      return SentimentModel(lstm_sentiment_train(fragments, y, vocab, config.lstm));
    }
  }
  throw Error(Errc::invalid_config, "unknown sentiment model");
}

struct LabeledFragment {
  const IngestedReview* review;
  const ItemFragment* fragment;
  Polarity label;
};

/// Gold polarity for each fragment. Manual labels come from the fragment
/// label table, falling back to the review's annotated label; fragments with
/// neither are skipped. Threshold labels are stars >= t.
inline std::vector<LabeledFragment> label_fragments(const std::vector<const IngestedReview*>& reviews,
                                                    const LabelSource& source, const FragmentLabels& manual) {
  std::vector<LabeledFragment> out;
  for (const auto* r : reviews) {
    for (const auto& f : r->fragments) {
      std::optional<Label> gold;
      if (source.kind == LabelSource::Kind::threshold) {
        gold = r->record.stars >= source.threshold ? Label::positive : Label::negative;
      } else if (const auto it = manual.find({r->record.review_id, f.item_id}); it != manual.end()) {
        gold = it->second;
      } else {
        gold = r->record.annotated_label;
      }
      if (!gold || *gold == Label::unlabeled) continue;
      out.push_back({r, &f, *gold == Label::positive ? Polarity::positive : Polarity::negative});
    }
  }
  return out;
}

inline std::vector<const IngestedReview*> review_pointers(const std::vector<IngestedReview>& reviews) {
  std::vector<const IngestedReview*> out;
  for (const auto& r : reviews) out.push_back(&r);
  return out;
}

inline std::vector<ScoredFragment> score_fragments(const std::vector<const IngestedReview*>& reviews,
                                                   const SentimentModel& model) {
  std::vector<ScoredFragment> out;
  for (const auto* r : reviews)
    for (const auto& f : r->fragments)
      out.push_back({r->record.review_id, r->record.user_id, r->record.restaurant_id, f.item_id,
                     model.score(f.tokens)});
  return out;
}

/// One rating per scored fragment from its review's stars.
inline std::vector<RatingTriple> derive_ratings(const std::vector<ScoredFragment>& scored,
                                                const std::map<std::string, double>& stars_by_review,
                                                double blend = 0.5) {
  std::vector<RatingTriple> out;
  out.reserve(scored.size());
  for (const auto& s : scored)
    out.push_back({s.user_id, {s.restaurant_id, s.item_id},
                   derive_item_rating(stars_by_review.at(s.review_id), s.score, blend)});
  return out;
}

inline std::map<std::string, double> stars_by_review(const std::vector<const IngestedReview*>& reviews) {
  std::map<std::string, double> out;
  for (const auto* r : reviews) out[r->record.review_id] = r->record.stars;
  return out;
}

/// Louvain partition of the co-mention graph, or nothing when no item is
/// mentioned at all.
inline std::optional<Partition> side_partition(const std::vector<const IngestedReview*>& reviews) {
  std::vector<ItemFragment> all;
  for (const auto* r : reviews) all.insert(all.end(), r->fragments.begin(), r->fragments.end());
  const auto g = build_comention_graph(all);
  if (g.nodes().empty()) return std::nullopt;
  return louvain(g).partition;
}

/// Per-restaurant streams of item tokens, in review order.
inline std::vector<std::vector<std::string>> lda_documents(const std::vector<const IngestedReview*>& reviews,
                                                           const ItemLexicon& items) {
  std::map<std::string, std::vector<std::string>> by_restaurant;
  for (const auto* r : reviews) {
    auto& doc = by_restaurant[r->record.restaurant_id];
    for (const auto& f : r->fragments) doc.push_back(items.item_token(f.item_id));
  }
  std::vector<std::vector<std::string>> out;
  for (auto& [id, doc] : by_restaurant) out.push_back(std::move(doc));
  return out;
}

// ---------------------------------------------------------------------------
// Recommender engine

struct RecommenderConfig {
  Method method = Method::user_item;
  std::size_t neighborhood = 20;
  Centering center = Centering::user;
  FMConfig fm;
  double fm_validation_fraction = 0.1;
  bool fm_community_feature = false;
};

class Recommender {
 public:
  /// `scored` feeds the baseline and the side score; `partition` (may be
  /// empty) supplies side-dish communities.
  Recommender(RatingMatrix R, std::vector<ScoredFragment> scored, std::optional<Partition> partition,
              const RecommenderConfig& config)
      : R_(std::move(R)),
        scored_(std::move(scored)),
        partition_(std::move(partition)),
        config_(config),
        baseline_(scored_, R_.num_entries() ? R_.global_mean() : 3.0) {
    switch (config_.method) {
      case Method::user_item: S_ = user_similarity(R_); break;
      case Method::item_item: S_ = column_similarity(R_); break;
      case Method::fm: train_fm(); break;
      case Method::baseline: break;
    }
  }

  const RatingMatrix& matrix() const { return R_; }
  const RecommenderConfig& config() const { return config_; }
  const std::optional<FMRecommenderModel>& fm_model() const { return fm_; }

  /// Clamped rating prediction for (user index, column index).
  double predict(std::size_t u, std::size_t c) const {
    if (u >= R_.num_users()) throw Error(Errc::unknown_user, "user index " + std::to_string(u));
    if (c >= R_.num_columns()) throw Error(Errc::unknown_column, "column index " + std::to_string(c));
    switch (config_.method) {
      case Method::baseline: return baseline_.rating(R_.column(c));
      case Method::user_item: return predict_user_item(u, c, R_, *S_, config_.neighborhood, config_.center).rating;
      case Method::item_item: return predict_item_item(u, c, R_, *S_, config_.neighborhood).rating;
      case Method::fm: return fm_->rating(R_.user(u), R_.column(c), community_of(R_.column(c).item_id));
    }
    return 0.0;
  }

  double predict(const std::string& user, const Column& column) const {
    return predict(R_.require_user(user), R_.require_column(column));
  }

  double side(ItemId item, const std::string& restaurant) const {
    if (!partition_) return 0.0;
    return side_score(co_members(*partition_, item), restaurant, scored_);
  }

  std::vector<RankedRestaurant> recommend(const std::string& user, ItemId item, std::size_t k,
                                          double side_weight) const {
    const auto u = R_.require_user(user);
    return recommend_top_k(
        R_, item, [&](std::size_t c) { return predict(u, c); },
        [&](const std::string& restaurant) { return side(item, restaurant); }, side_weight, k);
  }

 private:
  std::optional<std::size_t> community_of(ItemId item) const {
    if (!config_.fm_community_feature || !partition_) return std::nullopt;
    const auto it = partition_->find(item);
    if (it == partition_->end()) return std::nullopt;
    return static_cast<std::size_t>(it->second);
  }

  void train_fm() {
    std::size_t communities = 0;
    if (config_.fm_community_feature && partition_)
      for (const auto& [item, c] : *partition_) communities = std::max(communities, static_cast<std::size_t>(c) + 1);
    FMRecommenderModel m{FMFeatureSpace::from(R_, communities), {}, config_.fm};
    std::vector<FMInstance> data;
    for (std::size_t u = 0; u < R_.num_users(); ++u)
      for (const auto& [c, r] : R_.row(u))
        data.push_back({m.space.encode(R_.user(u), R_.column(c), community_of(R_.column(c).item_id)), r});
    if (data.size() < 2) throw Error(Errc::invalid_config, "factorization machine needs at least two ratings");
    auto [train, validation] = carve_validation(data, config_.fm_validation_fraction, config_.fm.seed);
    m.model = fm_train(train, validation, m.space.size(), config_.fm);
    fm_ = std::move(m);
  }

  RatingMatrix R_;
  std::vector<ScoredFragment> scored_;
  std::optional<Partition> partition_;
  RecommenderConfig config_;
  BaselineRater baseline_;
  std::optional<SimilarityMatrix> S_;
  std::optional<FMRecommenderModel> fm_;
};

}  // namespace fiducia
