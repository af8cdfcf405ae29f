// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fiducia/fiducia.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace fiducia;
namespace fs = std::filesystem;

namespace {

// tolerances and budgets
constexpr double kFormulaTol = 1e-12;
constexpr double kFormulaBudget = 1.0;
constexpr double kFmNaiveTol = 1e-10;
constexpr double kFmRecoveryRmse = 0.2;
constexpr double kFmLateLossTol = 1e-3;
constexpr double kFmBudget = 10.0;
constexpr double kLstmGradTol = 1e-4;
constexpr double kLinearGradTol = 1e-6;
constexpr double kGradBudget = 30.0;
constexpr double kLstmF = 0.90;
constexpr double kLstmBudget = 60.0;
constexpr double kNbTol = 1e-12;
constexpr double kLouvainTol = 1e-9;
constexpr double kLouvainBudget = 5.0;
constexpr double kModularityTol = 1e-12;
constexpr double kLdaPurity = 0.9;
constexpr double kLdaBudget = 60.0;
constexpr double kPipelineBudget = 120.0;
constexpr double kMetricTol = 1e-12;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void budget(Outcome& o, std::chrono::steady_clock::time_point t0, double limit) {
  const double s = seconds_since(t0);
  o.require(s < limit, "runtime " + num(s) + " s over " + num(limit) + " s");
}

// ---------------------------------------------------------------------------

Outcome formula_oracles() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const oracle::Dense X = {{5, 3, 4, 4, 1, 2}, {3, 1, 2, 3, 3, 4}, {4, 3, 4, 3, 5, 1},
                           {3, 3, 1, 5, 4, 2}, {1, 5, 5, 2, 1, 3}};
  std::vector<RatingTriple> t;
  for (std::size_t u = 0; u < X.size(); ++u)
    for (std::size_t m = 0; m < X[u].size(); ++m)
      t.push_back({"u" + std::to_string(u), {"r" + std::to_string(m), 0}, X[u][m]});
  const auto R = RatingMatrix::build(t);
  const auto Su = user_similarity(R), Si = column_similarity(R);
  double worst = 0;
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t m = 0; m < 6; ++m) {
      worst = std::max(worst, std::abs(predict_user_item(k, m, R, Su, kFullNeighborhood).raw - oracle::user_item(X, k, m)));
      worst = std::max(worst, std::abs(predict_item_item(k, m, R, Si, kFullNeighborhood).raw - oracle::item_item(X, k, m)));
    }
  o.require(worst <= kFormulaTol, "max deviation " + num(worst));
  budget(o, t0, kFormulaBudget);
  if (o.pass) o.detail = "max deviation " + num(worst);
  return o;
}

Outcome cosine_cases() {
  Outcome o;
  const SparseVector a{{0, 1.0}, {1, 2.0}};
  o.require(cosine_sim(a, a) == 1.0, "identical != 1");
  o.require(cosine_sim({{0, 1.0}}, {{1, 2.0}, {2, 3.0}}) == 0.0, "disjoint != 0");
  const double c = cosine_sim(a, {{0, 2.0}, {1, 1.0}});
  o.require(c == 0.8, "(1,2,0).(2,1,0) = " + num(c));
  if (o.pass) o.detail = "1, 0 and 0.8 exactly";
  return o;
}

Outcome fm_linear_time() {
  Outcome o;
  Rng rng(99);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(6), k = 1 + rng.below(3);
    FMModel m(n, k);
    m.w0 = rng.uniform(-1, 1);
    for (auto& w : m.w) w = rng.uniform(-1, 1);
    for (auto& v : m.V) v = rng.uniform(-1, 1);
    FeatureVector x;
    std::vector<double> dense(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (rng.bernoulli(0.7)) {
        dense[i] = rng.uniform(-2, 2);
        x.push_back({i, dense[i]});
      }
    worst = std::max(worst, std::abs(fm_predict(x, m) - oracle::fm_naive(dense, m.w0, m.w, m.V, k)));
  }
  o.require(worst <= kFmNaiveTol, "max deviation " + num(worst));
  if (o.pass) o.detail = "max deviation " + num(worst);
  return o;
}

Outcome fm_recovery() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = fixtures::planted_fm(42);
  auto [tr, val] = carve_validation(p.train, 0.1, 42);
  FMConfig fast;
  fast.learning_rate = 0.05;  // desk-scale convergence
  fast.kdim = 2;
  const double rmse = fixtures::fm_rmse(p.test, fm_train(tr, val, p.n, fast));
  o.require(rmse <= kFmRecoveryRmse, "held-out rmse " + num(rmse));

  FMConfig slow;  // lr 0.001, 100 epochs
  slow.kdim = 2;
  FMTrace trace;
  fm_train(tr, val, p.n, slow, &trace);
  o.require(trace.train_mse.size() == 100, "default settings ran " + std::to_string(trace.train_mse.size()) + " epochs");
  for (std::size_t e = trace.train_mse.size() - 9; e < trace.train_mse.size(); ++e)
    o.require(trace.train_mse[e] <= trace.train_mse[e - 1] + kFmLateLossTol, "loss rose at epoch " + std::to_string(e));
  budget(o, t0, kFmBudget);
  if (o.pass) o.detail = "held-out rmse " + num(rmse) + ", default-settings final mse " + num(trace.train_mse.back());
  return o;
}

Outcome gradient_checks() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double lstm_worst = 0, lr_worst = 0, fm_worst = 0;

  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t vocab = 5, de = 1 + rng.below(4), dh = 1 + rng.below(4);
    auto p = lstm_init(vocab, de, dh, rng.next(), 0.5);
    std::vector<std::size_t> seq;
    for (std::size_t t = 0, len = 1 + rng.below(6); t < len; ++t) seq.push_back(rng.below(vocab));
    const double label = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const auto grad = lstm_backward(lstm_forward(seq, p).cache, p, label);
    std::vector<double*> params;
    visit_tensors(p, [&](const std::string&, double* d, std::size_t n) {
      for (std::size_t i = 0; i < n; ++i) params.push_back(d + i);
    });
    std::vector<double> analytic;
    visit_tensors(grad, [&](const std::string&, const double* d, std::size_t n) {
      analytic.insert(analytic.end(), d, d + n);
    });
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double keep = *params[i], h = 1e-5;
      *params[i] = keep + h;
      const double up = lstm_loss(lstm_forward(seq, p).score, label);
      *params[i] = keep - h;
      const double down = lstm_loss(lstm_forward(seq, p).score, label);
      *params[i] = keep;
      lstm_worst = std::max(lstm_worst, gradcheck::relative_error(analytic[i], (up - down) / (2 * h)));
    }
  }

  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + rng.below(5), n = 3 + rng.below(8);
    std::vector<std::string> toks;
    for (std::size_t i = 0; i < d; ++i) toks.push_back("t" + std::to_string(i));
    LRModel m{Vocabulary(toks), std::vector<double>(d), rng.uniform(-1, 1), rng.uniform(0, 0.5)};
    for (auto& w : m.weights) w = rng.uniform(-1, 1);
    std::vector<BowVector> X(n, BowVector(d));
    std::vector<Polarity> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& x : X[i]) x = static_cast<std::uint8_t>(rng.below(2));
      y[i] = rng.bernoulli(0.5) ? Polarity::positive : Polarity::negative;
    }
    const auto g = lr_gradient(m, X, y);
    for (std::size_t i = 0; i <= d; ++i) {
      double& param = i < d ? m.weights[i] : m.bias;
      const double keep = param, h = 1e-6;
      param = keep + h;
      const double up = lr_loss(m, X, y);
      param = keep - h;
      const double down = lr_loss(m, X, y);
      param = keep;
      lr_worst = std::max(lr_worst, gradcheck::relative_error(i < d ? g.weights[i] : g.bias, (up - down) / (2 * h)));
    }
  }

  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(6), k = 1 + rng.below(3);
    FMModel m(n, k);
    m.w0 = rng.uniform(-1, 1);
    for (auto& w : m.w) w = rng.uniform(-1, 1);
    for (auto& v : m.V) v = rng.uniform(-1, 1);
    FeatureVector x;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.bernoulli(0.7)) x.push_back({i, rng.uniform(-2, 2)});
    const auto g = fm_gradient(x, m);
    std::vector<double> dw(n, 0.0), dV(m.V.size(), 0.0);
    for (const auto& [i, d] : g.w) dw[i] = d;
    for (const auto& [i, d] : g.V)
      for (std::size_t f = 0; f < k; ++f) dV[i * k + f] = d[f];
    auto check = [&](double& param, double analytic) {
      const double keep = param, h = 1e-6;
      param = keep + h;
      const double up = fm_predict(x, m);
      param = keep - h;
      const double down = fm_predict(x, m);
      param = keep;
      fm_worst = std::max(fm_worst, gradcheck::relative_error(analytic, (up - down) / (2 * h)));
    };
    check(m.w0, g.w0);
    for (std::size_t i = 0; i < n; ++i) check(m.w[i], dw[i]);
    for (std::size_t j = 0; j < m.V.size(); ++j) check(m.V[j], dV[j]);
  }

  o.require(lstm_worst <= kLstmGradTol, "lstm rel err " + num(lstm_worst));
  o.require(lr_worst <= kLinearGradTol, "lr rel err " + num(lr_worst));
  o.require(fm_worst <= kLinearGradTol, "fm rel err " + num(fm_worst));
  budget(o, t0, kGradBudget);
  if (o.pass) o.detail = "worst rel err lstm " + num(lstm_worst) + ", lr " + num(lr_worst) + ", fm " + num(fm_worst);
  return o;
}

Outcome lstm_separable() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  LSTMTrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 50;
  cfg.seed = 42;
  const auto p = lstm_train(fixtures::separable_sequences(200, 42), lstm_init(22, 16, 16, 42), cfg);
  std::vector<bool> pred, gold;
  for (const auto& s : fixtures::separable_sequences(50, 43)) {
    pred.push_back(lstm_forward(s.tokens, p).score > 0);
    gold.push_back(s.label > 0);
  }
  const double f = f_score(pred, gold);
  o.require(f >= kLstmF, "test F " + num(f));
  budget(o, t0, kLstmBudget);
  if (o.pass) o.detail = "test F " + num(f);
  return o;
}

Outcome naive_bayes() {
  Outcome o;
  const auto m = nb_train({{"good"}, {"bad"}}, {Polarity::positive, Polarity::negative}, 1.0);
  const double p = nb_predict({"good"}, m).p_pos;
  o.require(std::abs(p - 2.0 / 3) <= kNbTol, "posterior " + num(p));
  Rng rng(11);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TokenList> docs;
    std::vector<Polarity> labels;
    for (int i = 0; i < 40; ++i) {
      TokenList d;
      for (std::size_t j = 0, len = 1 + rng.below(6); j < len; ++j) d.push_back("w" + std::to_string(rng.below(15)));
      docs.push_back(d);
      labels.push_back(i % 2 ? Polarity::positive : Polarity::negative);
    }
    const auto model = nb_train(docs, labels);
    for (int q = 0; q < 20; ++q) {
      TokenList d;
      for (std::size_t j = 0, len = rng.below(10); j < len; ++j) d.push_back("w" + std::to_string(rng.below(20)));
      const auto post = nb_predict(d, model);
      worst = std::max(worst, std::abs(post.p_pos + post.p_neg - 1.0));
    }
  }
  o.require(worst <= kNbTol, "posterior sum off by " + num(worst));
  if (o.pass) o.detail = "posterior " + num(p) + ", worst sum deviation " + num(worst);
  return o;
}

Outcome louvain_fixtures() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  auto phases_ok = [&](const LouvainResult& r) {
    for (std::size_t i = 1; i < r.phase_modularity.size(); ++i)
      if (r.phase_modularity[i] < r.phase_modularity[i - 1] - 1e-12) return false;
    return true;
  };
  const auto g = fixtures::bridged_k4s();
  const auto r = louvain(g);
  o.require(phases_ok(r), "bridged K4s: modularity fell between phases");
  bool cliques = true;
  for (ItemId v = 0; v < 8; ++v) cliques = cliques && (r.partition.at(v) == r.partition.at(v < 4 ? 0 : 4));
  cliques = cliques && r.partition.at(0) != r.partition.at(4);
  o.require(cliques, "bridged K4s not split into the two cliques");
  std::size_t count = 0;
  oracle::for_each_partition(8, [&](const std::vector<int>&) { ++count; });
  o.require(count == 4140, "enumerated " + std::to_string(count) + " partitions");
  const double best = oracle::best_modularity(fixtures::dense_adjacency(g));
  o.require(std::abs(r.modularity - best) <= kLouvainTol, "Q " + num(r.modularity) + " vs best " + num(best));

  const auto t = louvain(fixtures::k3());
  o.require(phases_ok(t), "K3: modularity fell between phases");
  std::set<int> ids;
  for (const auto& [v, c] : t.partition) ids.insert(c);
  o.require(ids.size() == 1, "K3 split into " + std::to_string(ids.size()));
  budget(o, t0, kLouvainBudget);
  if (o.pass) o.detail = "Q " + num(r.modularity) + " = exhaustive max over 4140 partitions";
  return o;
}

Outcome modularity_values() {
  Outcome o;
  const auto g = fixtures::two_k3s();
  const double split = modularity(g, {{0, 0}, {1, 0}, {2, 0}, {3, 1}, {4, 1}, {5, 1}});
  const double one = modularity(g, {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}});
  o.require(std::abs(split - 0.5) <= kModularityTol, "by component Q " + num(split));
  o.require(std::abs(one) <= kModularityTol, "single community Q " + num(one));
  if (o.pass) o.detail = "Q " + num(split) + " and " + num(one);
  return o;
}

Outcome lda_checks() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(4);
  std::vector<std::vector<std::string>> docs;
  for (int d = 0; d < 100; ++d) {
    std::vector<std::string> doc;
    for (std::size_t i = 0, len = 1 + rng.below(30); i < len; ++i) doc.push_back("w" + std::to_string(rng.below(40)));
    docs.push_back(doc);
  }
  LDAConfig cfg;
  cfg.topics = 5;
  cfg.sweeps = 50;
  std::size_t bad = 0, sweeps = 0;
  lda_train(docs, cfg, [&](const TopicModel& m, std::size_t) {
    ++sweeps;
    if (!lda_counts_consistent(m)) ++bad;
  });
  o.require(bad == 0 && sweeps == 50, std::to_string(bad) + " inconsistent sweeps of " + std::to_string(sweeps));

  LDAConfig planted;
  planted.topics = 2;
  planted.sweeps = 500;
  planted.seed = 42;
  const auto m = lda_train(fixtures::planted_topics(50, 20, 42), planted);
  double worst = 1.0;
  for (std::size_t k = 0; k < 2; ++k) {
    std::size_t a = 0, b = 0;
    const auto top = top_words(m, k, 10);
    for (const auto& wp : top) (wp.token[0] == 'a' ? a : b)++;
    worst = std::min(worst, static_cast<double>(std::max(a, b)) / static_cast<double>(top.size()));
  }
  o.require(worst >= kLdaPurity, "top-10 purity " + num(worst));
  budget(o, t0, kLdaBudget);
  if (o.pass) o.detail = "top-10 purity " + num(worst);
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  SynthConfig sc;  // seed 42, 50 users, 10 restaurants, 12 items, noise 0.15
  const auto s = synth_corpus(sc);
  const auto corpus = ingest(corpus_from_synth(s));
  const auto reports = run_benchmark(corpus, s.item_ratings);
  std::map<Method, double> rmse;
  for (const auto& r : reports) rmse[r.method] = r.rmse;
  o.require(rmse.at(Method::fm) < rmse.at(Method::baseline),
            "fm " + num(rmse.at(Method::fm)) + " >= baseline " + num(rmse.at(Method::baseline)));
  o.require(rmse.at(Method::user_item) < rmse.at(Method::baseline),
            "user " + num(rmse.at(Method::user_item)) + " >= baseline " + num(rmse.at(Method::baseline)));
  budget(o, t0, kPipelineBudget);
  if (o.pass)
    o.detail = "rmse baseline " + num(rmse.at(Method::baseline)) + ", user " + num(rmse.at(Method::user_item)) +
               ", item " + num(rmse.at(Method::item_item)) + ", fm " + num(rmse.at(Method::fm));
  return o;
}

Outcome metric_oracles() {
  Outcome o;
  auto close = [&](double got, double want, const std::string& what) {
    o.require(std::abs(got - want) <= kMetricTol, what + " = " + num(got));
  };
  close(rmse({3, 0, 0}, {0, 0, 0}), std::sqrt(3.0), "rmse(3,0,0)");
  close(mae({3, 0, 0}, {0, 0, 0}), 1.0, "mae(3,0,0)");
  close(rmse({2, 0}, {1, 1}), 1.0, "rmse(+1,-1)");
  close(f_score(Confusion{8, 2, 2, 0}), 0.8, "F(8,2,2)");
  const Column a{"r1", 1}, b{"r2", 1}, c{"r3", 1};
  close(precision_at_k({{{a, b, c}, {{a, 4.0}, {b, 2.0}}}}), 0.5, "precision half");
  close(precision_at_k({{{a, b}, {{a, 5.0}, {b, 4.5}}}}), 1.0, "precision all");
  constexpr auto P = Label::positive, N = Label::negative;
  close(fleiss_kappa({{P, P, N}, {P, P, P}, {N, N, N}, {P, N, N}}), 1.0 / 3, "kappa fixture");
  Rng rng(1000);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(1 + rng.below(20)), g(p.size(), 0.0);
    for (auto& x : p) x = rng.uniform(-4, 4);
    if (rmse(p, g) < mae(p, g) - 1e-15) ++violations;
  }
  o.require(violations == 0, std::to_string(violations) + " rmse < mae cases");
  if (o.pass) o.detail = "7 constants matched, rmse >= mae on 1000 random vectors";
  return o;
}

// -- determinism through the command-line tool -------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd =
      "\"" + std::string(FIDUCIA_CLI_PATH) + "\" " + args + " >\"" + stdout_file.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Runs the full command sequence in `dir`; returns the artifacts produced.
std::map<std::string, std::string> command_round(const fs::path& dir, Outcome& o) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto q = [&](const std::string& name) { return "\"" + (dir / name).string() + "\""; };
  const auto syn = dir / "synth";
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"synth", "synth --users 20 --out " + q("synth")},
      {"ingest", "ingest --reviews \"" + (syn / "reviews.jsonl").string() + "\" --restaurants \"" +
                     (syn / "restaurants.jsonl").string() + "\" --lexicons \"" + (syn / "lexicons").string() +
                     "\" --fragment-labels \"" + (syn / "fragment_labels.tsv").string() + "\" --out " + q("corpus.json")},
      {"train-nb", "train-sentiment --corpus " + q("corpus.json") + " --out " + q("nb.json")},
      {"train-lstm", "train-sentiment --corpus " + q("corpus.json") + " --model lstm --epochs 3 --out " + q("lstm.json")},
      {"recommend-user", "recommend --corpus " + q("corpus.json") + " --sentiment-model " + q("nb.json") +
                             " --user u00 --item 0"},
      {"recommend-fm", "recommend --corpus " + q("corpus.json") + " --method fm --user u03 --item 1"},
      {"ratings", "ratings --corpus " + q("corpus.json") + " --out " + q("ratings.tsv")},
      {"sides-louvain", "sides --corpus " + q("corpus.json") + " --out " + q("louvain.tsv")},
      {"sides-lda", "sides --corpus " + q("corpus.json") + " --method lda --topics 3 --sweeps 100 --out " + q("lda.tsv")},
      {"evaluate", "evaluate --users 20 --out " + q("eval.json")},
  };
  std::map<std::string, std::string> out;
  for (const auto& [name, args] : steps) {
    const auto so = dir / (name + ".stdout");
    const int rc = run_cli(args, so);
    o.require(rc == 0, name + " exited " + std::to_string(rc));
    out[name + " stdout"] = slurp(so);
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() == ".stdout") continue;
    out[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
  }
  return out;
}

Outcome determinism() {
  Outcome o;
  const auto root = fs::temp_directory_path() / "fiducia_acceptance_determinism";
  const auto a = command_round(root / "a", o);
  const auto b = command_round(root / "b", o);
  o.require(a.size() == b.size(), "artifact sets differ");
  std::size_t differing = 0;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) {
      ++differing;
      o.require(false, name + " differs");
    }
  }
  fs::remove_all(root);
  if (o.pass) o.detail = std::to_string(a.size()) + " artifacts byte-identical across reruns";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"formula-oracle equivalence", formula_oracles},
      {"cosine similarity cases", cosine_cases},
      {"fm linear-time vs naive", fm_linear_time},
      {"fm planted recovery", fm_recovery},
      {"gradient checks", gradient_checks},
      {"lstm separable corpus", lstm_separable},
      {"naive bayes closed form", naive_bayes},
      {"louvain fixtures", louvain_fixtures},
      {"modularity hand values", modularity_values},
      {"lda invariants and purity", lda_checks},
      {"end-to-end ordering", end_to_end},
      {"metric oracles", metric_oracles},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1 < 10 ? " " : "") << i + 1 << "  " << criteria[i].first
              << "  (" << o.detail << "; " << num(seconds_since(t0)) << " s)" << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - failed << "/" << criteria.size() << "\n";
  return failed ? 1 : 0;
}
