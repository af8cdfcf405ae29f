// fiducia command-line driver.
//
// Exit codes: 0 ok, 2 input error, 3 training error, 4 query error,
// 64 usage error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fiducia/fiducia.hpp"

namespace fs = std::filesystem;
using namespace fiducia;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitTraining = 3;
constexpr int kExitQuery = 4;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(Errc code) {
  switch (code) {
    case Errc::single_class_corpus:
    case Errc::divergence_detected:
    case Errc::empty_vocabulary:
      return kExitTraining;
    case Errc::unknown_user:
    case Errc::unknown_column:
    case Errc::unknown_item:
      return kExitQuery;
    case Errc::invalid_config:
      return kExitUsage;
    default:
      return kExitInput;
  }
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw Error(Errc::io_error, std::string(what) + " '" + path + "' not found");
}

void require_dir(const std::string& path, const char* what) {
  if (!fs::is_directory(path)) throw Error(Errc::io_error, std::string(what) + " '" + path + "' not found");
}

// Flat JSON config: {"option-name": value, ...}. Values fill options of the
// selected subcommand that were not given on the command line.
void apply_config(CLI::App* sub, const std::string& path) {
  json doc;
  try {
    doc = json::parse(text::read_file(path));
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path + ": " + e.what());
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!doc.is_object()) throw UsageError("config " + path + ": expected a flat object");
  for (const auto& [key, value] : doc.items()) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || key == "help") throw UsageError("config " + path + ": unknown key '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;  // flag wins
    std::string s;
    if (value.is_string())
      s = value.get<std::string>();
    else if (value.is_boolean())
      s = value.get<bool>() ? "true" : "false";
    else if (value.is_number())
      s = value.dump();
    else
      throw UsageError("config " + path + ": key '" + key + "' must be a scalar");
    try {
      opt->add_result(s);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config " + path + ": key '" + key + "': " + e.what());
    }
  }
}

std::vector<CLI::Option*> g_required;

// Required options are checked after the config overlay so a config file
// can supply them.
CLI::Option* need(CLI::Option* opt) {
  g_required.push_back(opt);
  return opt;
}

void check_required(CLI::App* sub) {
  for (auto* opt : g_required)
    if (sub->get_option_no_throw(opt->get_name()) == opt && opt->count() == 0) throw UsageError(opt->get_name() + " is required");
}

std::string seed_tag(std::uint64_t seed) { return "seed=" + std::to_string(seed); }

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string reviews, restaurants, lexicons, out, arcs, fragment_labels;
  std::uint64_t seed = 42;
};

int cmd_ingest(const IngestArgs& a) {
  require_file(a.reviews, "reviews file");
  require_file(a.restaurants, "restaurants file");
  require_dir(a.lexicons, "lexicon directory");
  require_file((fs::path(a.lexicons) / "items.tsv").string(), "item lexicon");
  if (!a.arcs.empty()) require_file(a.arcs, "arcs file");
  if (!a.fragment_labels.empty()) require_file(a.fragment_labels, "fragment labels file");

  CorpusInputs in;
  in.reviews = load_reviews(a.reviews);
  in.restaurants = load_restaurants(a.restaurants);
  in.lexicons = load_lexicons(a.lexicons);
  in.items = load_item_lexicon(fs::path(a.lexicons) / "items.tsv");
  if (!a.arcs.empty()) in.arcs = load_arcs(a.arcs);
  if (!a.fragment_labels.empty()) {
    std::ifstream f(a.fragment_labels);
    in.fragment_labels = parse_fragment_labels(f);
  }
  if (in.reviews.empty()) std::cerr << "warning: " << a.reviews << " contains no reviews\n";
  const auto corpus = ingest(in);
  auto doc = corpus_to_json(corpus);
  doc["seed"] = a.seed;
  text::write_file_atomic(a.out, doc.dump(1) + "\n");
  std::size_t fragments = 0;
  for (const auto& r : corpus.reviews) fragments += r.fragments.size();
  std::cout << "reviews=" << corpus.reviews.size() << " restaurants=" << corpus.restaurants.size()
            << " items=" << corpus.items.size() << " fragments=" << fragments << " " << seed_tag(a.seed) << "\n";
  return kExitOk;
}

IngestedCorpus load_artifact(const std::string& path) {
  require_file(path, "corpus artifact");
  try {
    return corpus_from_json(json::parse(text::read_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_record, path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

struct SentimentArgs {
  std::string model = "nb";
  std::string labels = "manual";
  std::size_t min_count = 1;
  double alpha = 1.0;
  double learning_rate = -1;  // -1: model default
  std::size_t epochs = 0;     // 0: model default
  double l2 = 1e-3;
  std::size_t max_depth = 10;
  std::size_t min_samples_leaf = 2;
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 16;
  double clip = 0;  // 0: off
};

void add_sentiment_options(CLI::App* sub, SentimentArgs& a) {
  sub->add_option("--min-count", a.min_count, "Vocabulary minimum count")->check(CLI::PositiveNumber);
  sub->add_option("--alpha", a.alpha, "Naive Bayes smoothing");
  sub->add_option("--learning-rate", a.learning_rate, "Learning rate for bow-lr and lstm");
  sub->add_option("--epochs", a.epochs, "Epochs for bow-lr and lstm");
  sub->add_option("--l2", a.l2, "L2 strength for bow-lr");
  sub->add_option("--max-depth", a.max_depth, "Tree depth for bow-dt");
  sub->add_option("--min-samples-leaf", a.min_samples_leaf, "Leaf size for bow-dt");
  sub->add_option("--embed-dim", a.embed_dim, "LSTM embedding size");
  sub->add_option("--hidden-dim", a.hidden_dim, "LSTM hidden size");
  sub->add_option("--clip", a.clip, "LSTM gradient clip (inf-norm), 0 = off");
}

SentimentConfig sentiment_config(const SentimentArgs& a, std::uint64_t seed) {
  SentimentConfig c;
  const auto kind = parse_sentiment_kind(a.model);
  if (!kind) throw UsageError("unknown model '" + a.model + "'");
  c.kind = *kind;
  c.min_count = a.min_count;
  c.nb_alpha = a.alpha;
  c.lr.l2 = a.l2;
  if (a.learning_rate >= 0) c.lr.learning_rate = c.lstm.train.learning_rate = a.learning_rate;
  if (a.epochs > 0) c.lr.epochs = c.lstm.train.epochs = a.epochs;
  c.dt.max_depth = a.max_depth;
  c.dt.min_samples_leaf = a.min_samples_leaf;
  c.lstm.embed_dim = a.embed_dim;
  c.lstm.hidden_dim = a.hidden_dim;
  c.lstm.train.seed = seed;
  if (a.clip > 0) c.lstm.train.clip = a.clip;
  return c;
}

LabelSource label_source(const std::string& s) {
  const auto src = parse_label_source(s);
  if (!src) throw UsageError("labels must be manual or threshold:T with T in {2.0, 2.5, 3.0}, got '" + s + "'");
  return *src;
}

struct TrainArgs {
  std::string corpus, out, fragment_labels;
  SentimentArgs sentiment;
  double train_fraction = 0.8;
  std::string split_round = "floor";
  std::uint64_t seed = 42;
};

int cmd_train_sentiment(const TrainArgs& a) {
  const auto cfg = sentiment_config(a.sentiment, a.seed);
  const auto source = label_source(a.sentiment.labels);
  const auto rounding = parse_split_rounding(a.split_round);
  if (!rounding) throw UsageError("split-round must be floor or round");
  auto corpus = load_artifact(a.corpus);
  if (!a.fragment_labels.empty()) {
    require_file(a.fragment_labels, "fragment labels file");
    std::ifstream f(a.fragment_labels);
    for (const auto& [k, v] : parse_fragment_labels(f)) corpus.fragment_labels[k] = v;
  }
  const auto [train, test] = train_test_split(review_pointers(corpus.reviews), a.train_fraction, a.seed, *rounding);
  const auto train_l = label_fragments(train, source, corpus.fragment_labels);
  const auto test_l = label_fragments(test, source, corpus.fragment_labels);
  std::vector<TokenList> texts;
  std::vector<Polarity> labels;
  for (const auto& l : train_l) {
    texts.push_back(l.fragment->tokens);
    labels.push_back(l.label);
  }
  const auto model = train_sentiment(texts, labels, cfg);
  std::vector<bool> pred, gold;
  for (const auto& l : test_l) {
    pred.push_back(model.score(l.fragment->tokens) > 0);
    gold.push_back(l.label == Polarity::positive);
  }
  const auto c = confusion(pred, gold);
  auto doc = model.document();
  doc["seed"] = a.seed;
  doc["labels"] = source.name();
  text::write_file_atomic(a.out, doc.dump(1) + "\n");
  std::cout << "model=" << a.sentiment.model << " labels=" << source.name() << " train=" << train_l.size()
            << " test=" << test_l.size() << " f_score=" << text::format_fixed(f_score(c), 4) << " tp=" << c.tp
            << " fp=" << c.fp << " fn=" << c.fn << " tn=" << c.tn << " " << seed_tag(a.seed) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EngineArgs {
  std::string corpus, sentiment_model;
  std::string labels = "auto";
  std::string model = "nb";
  std::string method = "user";
  std::size_t neighborhood = 20;
  std::string centering = "user";
  double blend = 0.5;
  double fm_learning_rate = 0.001;
  std::size_t fm_epochs = 100;
  std::size_t fm_kdim = 8;
  std::uint64_t seed = 42;
};

void add_engine_options(CLI::App* sub, EngineArgs& a) {
  need(sub->add_option("--corpus", a.corpus, "Corpus artifact from ingest"));
  sub->add_option("--sentiment-model", a.sentiment_model, "Trained sentiment model (default: train nb)");
  sub->add_option("--labels", a.labels, "Labels when training in place: auto|manual|threshold:T");
  sub->add_option("--neighborhood", a.neighborhood, "Neighbourhood size, 0 = all");
  sub->add_option("--centering", a.centering, "user|item centring for user-item CF");
  sub->add_option("--blend", a.blend, "Sentiment weight in derived ratings");
  sub->add_option("--fm-learning-rate", a.fm_learning_rate, "FM learning rate");
  sub->add_option("--fm-epochs", a.fm_epochs, "FM epochs");
  sub->add_option("--fm-kdim", a.fm_kdim, "FM latent dimension")->check(CLI::PositiveNumber);
  sub->add_option("--seed", a.seed, "Seed");
}

RecommenderConfig recommender_config(const EngineArgs& a) {
  RecommenderConfig rc;
  const auto m = parse_method(a.method);
  if (!m) throw UsageError("method must be baseline, user, item or fm");
  rc.method = *m;
  rc.neighborhood = a.neighborhood == 0 ? kFullNeighborhood : a.neighborhood;
  if (a.centering == "user")
    rc.center = Centering::user;
  else if (a.centering == "item")
    rc.center = Centering::item;
  else
    throw UsageError("centering must be user or item");
  rc.fm.learning_rate = a.fm_learning_rate;
  rc.fm.epochs = a.fm_epochs;
  rc.fm.kdim = a.fm_kdim;
  rc.fm.seed = a.seed;
  return rc;
}

struct Engine {
  IngestedCorpus corpus;
  std::vector<ScoredFragment> scored;
  RatingMatrix R;
  std::optional<Partition> partition;
};

Engine build_engine(const EngineArgs& a) {
  Engine e;
  if (!a.sentiment_model.empty()) require_file(a.sentiment_model, "sentiment model");
  e.corpus = load_artifact(a.corpus);
  const auto all = review_pointers(e.corpus.reviews);
  SentimentModel model;
  if (!a.sentiment_model.empty()) {
    model = SentimentModel::from_document(load_document(a.sentiment_model));
  } else {
    LabelSource src = a.labels == "auto" ? LabelSource::at(3.0) : label_source(a.labels);
    if (a.labels == "auto") {
      bool manual = !e.corpus.fragment_labels.empty();
      for (const auto& r : e.corpus.reviews) manual = manual || (r.record.annotated_label && *r.record.annotated_label != Label::unlabeled);
      if (manual) src = LabelSource::manual();
    }
    std::vector<TokenList> texts;
    std::vector<Polarity> labels;
    for (const auto& l : label_fragments(all, src, e.corpus.fragment_labels)) {
      texts.push_back(l.fragment->tokens);
      labels.push_back(l.label);
    }
    SentimentArgs sa;
    sa.model = a.model;
    model = train_sentiment(texts, labels, sentiment_config(sa, a.seed));
  }
  e.scored = score_fragments(all, model);
  e.R = RatingMatrix::build(derive_ratings(e.scored, stars_by_review(all), a.blend));
  e.partition = side_partition(all);
  return e;
}

struct RecommendArgs {
  EngineArgs engine;
  std::string user, item;
  std::size_t top_k = 5;
  double side_weight = 0.2;
};

int cmd_recommend(const RecommendArgs& a) {
  const auto rc = recommender_config(a.engine);
  auto e = build_engine(a.engine);
  const auto item = e.corpus.items.resolve(a.item);
  if (!item) throw Error(Errc::unknown_item, "item '" + a.item + "' is not in the lexicon");
  e.R.require_user(a.user);
  const Recommender rec(e.R, e.scored, e.partition, rc);
  const auto ranked = rec.recommend(a.user, *item, a.top_k, a.side_weight);
  std::cout << "# user=" << a.user << " item=" << e.corpus.items.at(*item).canonical_name
            << " method=" << method_name(rc.method) << " " << seed_tag(a.engine.seed) << "\n";
  for (std::size_t i = 0; i < ranked.size(); ++i)
    std::cout << i + 1 << "\t" << ranked[i].restaurant_id << "\t" << text::format_fixed(ranked[i].score, 4) << "\n";
  return kExitOk;
}

struct RatingsArgs {
  EngineArgs engine;
  std::string out;
};

int cmd_ratings(const RatingsArgs& a) {
  const auto e = build_engine(a.engine);
  text::write_file_atomic(a.out, "# " + seed_tag(a.engine.seed) + "\n" + e.R.export_tsv());
  std::cout << "users=" << e.R.num_users() << " columns=" << e.R.num_columns() << " entries=" << e.R.num_entries()
            << " " << seed_tag(a.engine.seed) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SidesArgs {
  std::string corpus, out;
  std::string method = "louvain";
  std::size_t topics = 10;
  std::size_t sweeps = 500;
  std::size_t top_n = 10;
  std::uint64_t seed = 42;
};

int cmd_sides(const SidesArgs& a) {
  if (a.method != "louvain" && a.method != "lda") throw UsageError("method must be louvain or lda");
  if (a.topics == 0) throw UsageError("topics must be >= 1");
  const auto corpus = load_artifact(a.corpus);
  const auto all = review_pointers(corpus.reviews);
  std::string body;
  if (a.method == "louvain") {
    std::vector<ItemFragment> frags;
    for (const auto* r : all) frags.insert(frags.end(), r->fragments.begin(), r->fragments.end());
    const auto g = build_comention_graph(frags);
    const auto res = louvain(g);
    int communities = 0;
    for (const auto& [item, c] : res.partition) communities = std::max(communities, c + 1);
    body = "# method=louvain modularity=" + text::format_double(res.modularity) + " " + seed_tag(a.seed) + "\n" +
           export_partition(res.partition);
    std::cout << "items=" << res.partition.size() << " communities=" << communities
              << " modularity=" << text::format_fixed(res.modularity, 4) << " " << seed_tag(a.seed) << "\n";
  } else {
    LDAConfig cfg;
    cfg.topics = a.topics;
    cfg.sweeps = a.sweeps;
    cfg.seed = a.seed;
    const auto model = lda_train(lda_documents(all, corpus.items), cfg);
    body = "# method=lda topics=" + std::to_string(a.topics) + " sweeps=" + std::to_string(a.sweeps) + " " +
           seed_tag(a.seed) + "\n" + export_topics(model, a.top_n);
    std::cout << "topics=" << model.K << " vocabulary=" << model.vocab_size()
              << " pairs=" << side_pairs(model, corpus.items, a.top_n).size() << " " << seed_tag(a.seed) << "\n";
  }
  text::write_file_atomic(a.out, body);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  SynthConfig config;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  const auto s = synth_corpus(a.config);
  write_synth_corpus(s, a.out);
  std::cout << "reviews=" << s.reviews.size() << " restaurants=" << s.restaurants.size()
            << " items=" << a.config.n_items << " users=" << a.config.n_users << " " << seed_tag(a.config.seed)
            << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string data, out;
  std::string methods = "baseline,user,item,fm";
  SynthConfig synth;
  EngineArgs engine;  // method/corpus unused
  std::string model = "nb";
  std::string labels = "auto";
  std::string split_round = "floor";
  double relevance = 4.0;
  std::size_t top_k = 3;
  double side_weight = 0.2;
};

int cmd_evaluate(EvaluateArgs a) {
  BenchmarkConfig cfg;
  a.engine.method = "user";
  a.engine.seed = a.synth.seed;
  cfg.seed = a.synth.seed;
  cfg.methods.clear();
  for (const auto& name : text::split(a.methods, ',')) {
    const auto m = parse_method(text::trim(name));
    if (!m) throw UsageError("unknown method '" + name + "'");
    cfg.methods.push_back(*m);
  }
  if (cfg.methods.empty()) throw UsageError("no methods given");
  SentimentArgs sa;
  sa.model = a.model;
  cfg.sentiment = sentiment_config(sa, cfg.seed);
  if (a.labels != "auto") cfg.labels = label_source(a.labels);
  const auto rounding = parse_split_rounding(a.split_round);
  if (!rounding) throw UsageError("split-round must be floor or round");
  cfg.rounding = *rounding;
  cfg.recommender = recommender_config(a.engine);
  cfg.blend = a.engine.blend;
  cfg.relevance = a.relevance;
  cfg.top_k = a.top_k;
  cfg.side_weight = a.side_weight;

  IngestedCorpus corpus;
  std::vector<GoldItemRating> gold;
  json source;
  if (!a.data.empty()) {
    require_dir(a.data, "data directory");
    const auto in = load_corpus_dir(a.data);
    corpus = ingest(in);
    gold = in.gold_ratings;
    source = {{"data", a.data}};
  } else {
    const auto s = synth_corpus(a.synth);
    corpus = ingest(corpus_from_synth(s));
    gold = s.item_ratings;
    source = {{"synthetic", s.planted()}};
    source["synthetic"].erase("user_cluster");
    source["synthetic"].erase("favorites");
    source["synthetic"].erase("quality");
    source["synthetic"].erase("menus");
  }
  const auto reports = run_benchmark(corpus, gold, cfg);
  json doc = {{"seed", cfg.seed}, {"source", source}, {"reports", reports_to_json(reports)}};
  if (!a.out.empty()) text::write_file_atomic(a.out, doc.dump(1) + "\n");
  std::cout << reports_table(reports);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fiducia: item-level restaurant recommendation from review text"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Flat JSON config file (also FIDUCIA_CONFIG)")->envname("FIDUCIA_CONFIG");

  IngestArgs ingest_a;
  auto* ingest_c = app.add_subcommand("ingest", "Load, normalize and fragment a review corpus");
  need(ingest_c->add_option("--reviews", ingest_a.reviews, "Reviews (JSON lines)"));
  need(ingest_c->add_option("--restaurants", ingest_a.restaurants, "Restaurants (JSON lines)"));
  need(ingest_c->add_option("--lexicons", ingest_a.lexicons, "Lexicon directory"));
  ingest_c->add_option("--arcs", ingest_a.arcs, "Dependency arcs (JSON lines)");
  ingest_c->add_option("--fragment-labels", ingest_a.fragment_labels, "Manual fragment labels (TSV)");
  need(ingest_c->add_option("--out", ingest_a.out, "Output artifact"));
  ingest_c->add_option("--seed", ingest_a.seed, "Seed recorded in the artifact");

  TrainArgs train_a;
  auto* train_c = app.add_subcommand("train-sentiment", "Train a fragment sentiment classifier");
  need(train_c->add_option("--corpus", train_a.corpus, "Corpus artifact from ingest"));
  train_c->add_option("--model", train_a.sentiment.model, "nb|bow-lr|bow-dt|lstm")
      ->check(CLI::IsMember({"nb", "bow-lr", "bow-dt", "lstm"}));
  train_c->add_option("--labels", train_a.sentiment.labels, "manual|threshold:T");
  train_c->add_option("--fragment-labels", train_a.fragment_labels, "Extra manual fragment labels (TSV)");
  train_c->add_option("--train-fraction", train_a.train_fraction, "Train share of reviews")->check(CLI::Range(0.0, 1.0));
  train_c->add_option("--split-round", train_a.split_round, "floor|round");
  need(train_c->add_option("--out", train_a.out, "Model output"));
  train_c->add_option("--seed", train_a.seed, "Seed");
  add_sentiment_options(train_c, train_a.sentiment);

  RecommendArgs rec_a;
  auto* rec_c = app.add_subcommand("recommend", "Rank restaurants for a food item");
  add_engine_options(rec_c, rec_a.engine);
  rec_c->add_option("--model", rec_a.engine.model, "Sentiment model kind when training in place")
      ->check(CLI::IsMember({"nb", "bow-lr", "bow-dt", "lstm"}));
  rec_c->add_option("--method", rec_a.engine.method, "baseline|user|item|fm")
      ->check(CLI::IsMember({"baseline", "user", "item", "fm"}));
  need(rec_c->add_option("--user", rec_a.user, "User id"));
  need(rec_c->add_option("--item", rec_a.item, "Item name or id"));
  rec_c->add_option("--top-k", rec_a.top_k, "Rows to print")->check(CLI::PositiveNumber);
  rec_c->add_option("--side-weight", rec_a.side_weight, "Weight of the side-dish score");

  RatingsArgs rat_a;
  auto* rat_c = app.add_subcommand("ratings", "Export the derived rating matrix");
  add_engine_options(rat_c, rat_a.engine);
  rat_c->add_option("--model", rat_a.engine.model, "Sentiment model kind when training in place")
      ->check(CLI::IsMember({"nb", "bow-lr", "bow-dt", "lstm"}));
  need(rat_c->add_option("--out", rat_a.out, "Output TSV"));

  SidesArgs sides_a;
  auto* sides_c = app.add_subcommand("sides", "Mine side-dish groups");
  need(sides_c->add_option("--corpus", sides_a.corpus, "Corpus artifact from ingest"));
  sides_c->add_option("--method", sides_a.method, "louvain|lda")->check(CLI::IsMember({"louvain", "lda"}));
  sides_c->add_option("--topics", sides_a.topics, "LDA topics");
  sides_c->add_option("--sweeps", sides_a.sweeps, "Gibbs sweeps");
  sides_c->add_option("--top-n", sides_a.top_n, "Words per topic in the export");
  need(sides_c->add_option("--out", sides_a.out, "Output TSV"));
  sides_c->add_option("--seed", sides_a.seed, "Seed");

  SynthArgs synth_a;
  auto* synth_c = app.add_subcommand("synth", "Generate a synthetic corpus with gold files");
  synth_c->add_option("--seed", synth_a.config.seed, "Seed");
  synth_c->add_option("--users", synth_a.config.n_users, "Users");
  synth_c->add_option("--restaurants", synth_a.config.n_restaurants, "Restaurants");
  synth_c->add_option("--items", synth_a.config.n_items, "Items");
  synth_c->add_option("--noise", synth_a.config.noise, "Rating noise and label flip rate");
  synth_c->add_option("--reviews-per-user", synth_a.config.reviews_per_user, "Reviews per user");
  need(synth_c->add_option("--out", synth_a.out, "Output directory"));

  EvaluateArgs eval_a;
  auto* eval_c = app.add_subcommand("evaluate", "Run the benchmark and report metrics");
  eval_c->add_option("--data", eval_a.data, "Corpus directory (default: synthetic corpus)");
  eval_c->add_option("--methods", eval_a.methods, "Comma-separated methods");
  eval_c->add_option("--seed", eval_a.synth.seed, "Seed for split, models and synthetic data");
  eval_c->add_option("--users", eval_a.synth.n_users, "Synthetic users");
  eval_c->add_option("--restaurants", eval_a.synth.n_restaurants, "Synthetic restaurants");
  eval_c->add_option("--items", eval_a.synth.n_items, "Synthetic items");
  eval_c->add_option("--noise", eval_a.synth.noise, "Synthetic noise");
  eval_c->add_option("--model", eval_a.model, "Sentiment model kind")
      ->check(CLI::IsMember({"nb", "bow-lr", "bow-dt", "lstm"}));
  eval_c->add_option("--labels", eval_a.labels, "auto|manual|threshold:T");
  eval_c->add_option("--split-round", eval_a.split_round, "floor|round");
  eval_c->add_option("--relevance", eval_a.relevance, "Relevance threshold");
  eval_c->add_option("--top-k", eval_a.top_k, "Recommendations per precision query")->check(CLI::PositiveNumber);
  eval_c->add_option("--side-weight", eval_a.side_weight, "Weight of the side-dish score");
  eval_c->add_option("--neighborhood", eval_a.engine.neighborhood, "Neighbourhood size, 0 = all");
  eval_c->add_option("--centering", eval_a.engine.centering, "user|item");
  eval_c->add_option("--blend", eval_a.engine.blend, "Sentiment weight in derived ratings");
  eval_c->add_option("--fm-learning-rate", eval_a.engine.fm_learning_rate, "FM learning rate");
  eval_c->add_option("--fm-epochs", eval_a.engine.fm_epochs, "FM epochs");
  eval_c->add_option("--fm-kdim", eval_a.engine.fm_kdim, "FM latent dimension")->check(CLI::PositiveNumber);
  eval_c->add_option("--out", eval_a.out, "Report output (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) apply_config(sub, config_path);
    check_required(sub);
    if (sub == ingest_c) return cmd_ingest(ingest_a);
    if (sub == train_c) return cmd_train_sentiment(train_a);
    if (sub == rec_c) return cmd_recommend(rec_a);
    if (sub == rat_c) return cmd_ratings(rat_a);
    if (sub == sides_c) return cmd_sides(sides_a);
    if (sub == synth_c) return cmd_synth(synth_a);
    if (sub == eval_c) return cmd_evaluate(eval_a);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}
