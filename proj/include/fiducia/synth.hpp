#pragma once

// Synthetic review corpus with planted tastes, used as ground truth for the
// end-to-end pipeline.
//
// Users belong to taste clusters; the items of a user's cluster are the
// user's favourites. Every (restaurant, item) has a quality of +1 or -1, and
//   true rating = 3 + 1.5 * pref + 0.5 * quality   in {1, 2, 4, 5}
// with pref = +1 for favourites and -1 otherwise. Review text describes each
// item with an adjective whose strength follows that rating.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fiducia/cf.hpp"
#include "fiducia/corpus.hpp"
#include "fiducia/error.hpp"
#include "fiducia/fragmenter.hpp"
#include "fiducia/rng.hpp"
#include "fiducia/text_io.hpp"

namespace fiducia {

struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t n_users = 50;
  std::size_t n_restaurants = 10;
  std::size_t n_items = 12;
  double noise = 0.15;
  std::size_t reviews_per_user = 8;
  std::size_t max_items_per_review = 3;
  std::size_t taste_clusters = 4;
};

struct GoldItemRating {
  std::string review_id;
  std::string user_id;
  std::string restaurant_id;
  ItemId item_id = 0;
  double rating = 0.0;
};

struct GoldFragmentLabel {
  std::string review_id;
  ItemId item_id = 0;
  Label label = Label::unlabeled;
};

struct SynthCorpus {
  SynthConfig config;
  std::vector<ReviewRecord> reviews;
  std::vector<RestaurantProfile> restaurants;
  std::string stopwords_txt, emoticons_tsv, slang_tsv, items_tsv;
  std::vector<GoldItemRating> item_ratings;
  std::vector<GoldFragmentLabel> fragment_labels;
  std::map<std::string, std::size_t> user_cluster;
  std::map<std::string, std::set<ItemId>> favorites;
  std::map<Column, int> quality;
  std::map<std::string, std::vector<ItemId>> menus;

  LexiconSet lexicons() const {
    std::istringstream s(stopwords_txt), e(emoticons_tsv), g(slang_tsv);
    auto stop = parse_stopwords(s);
    auto emo = parse_emoticons(e);
    auto slang = parse_slang(g);
    return LexiconSet(std::move(stop), std::move(emo), std::move(slang));
  }

  ItemLexicon items() const {
    std::istringstream in(items_tsv);
    return parse_item_lexicon(in);
  }

  json planted() const;
};

namespace detail {

inline const std::vector<std::vector<std::string>>& synth_item_names() {
  // canonical name first, then extra aliases
  static const std::vector<std::vector<std::string>> names = {
      {"pasta"},         {"pizza"},        {"garlic bread"},  {"biryani"},      {"paneer tikka"},
      {"masala dosa"},   {"momos", "momo"}, {"burger"},       {"noodles"},      {"french fries", "fries"},
      {"mango lassi"},   {"brownie"},      {"tiramisu"},      {"butter naan"},  {"dal makhani"},
      {"samosa"},        {"spring rolls"}, {"cheesecake"},    {"fried rice"},   {"hot chocolate"}};
  return names;
}

// Adjectives by true rating; slang and code-mixed spellings are expanded by
// the slang table.
inline const std::vector<std::string>& synth_adjectives(int rating) {
  static const std::vector<std::string> r5 = {"amazing", "delicious", "excellent", "gr8", "mast"};
  static const std::vector<std::string> r4 = {"good", "nice", "tasty", "accha"};
  static const std::vector<std::string> r2 = {"bland", "stale", "soggy", "bekaar"};
  static const std::vector<std::string> r1 = {"awful", "terrible", "disgusting", "bakwas"};
  switch (rating) {
    case 5: return r5;
    case 4: return r4;
    case 2: return r2;
    default: return r1;
  }
}

inline std::string two_digits(std::size_t i, std::size_t width) {
  auto s = std::to_string(i);
  while (s.size() < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace detail

inline SynthCorpus synth_corpus(const SynthConfig& config = {}) {
  if (config.n_users == 0 || config.n_restaurants == 0 || config.n_items == 0 || config.reviews_per_user == 0 ||
      config.max_items_per_review == 0 || config.taste_clusters == 0)
    throw Error(Errc::invalid_config, "synthetic corpus sizes must be positive");
  if (!(config.noise >= 0.0) || !std::isfinite(config.noise))
    throw Error(Errc::invalid_config, "noise must be a finite non-negative number");

  Rng rng(config.seed);
  SynthCorpus out;
  out.config = config;

  // lexicons
  out.stopwords_txt = "# synthetic stopwords\nthe\na\nan\nwas\nwere\nis\nit\nand\ni\nwe\nreally\nvery\ntried\nhad\n";
  out.emoticons_tsv = "# emoticon\tsentinel\n:)\tPOS_EMO\n:-)\tPOS_EMO\n:D\tPOS_EMO\n:(\tNEG_EMO\n:-(\tNEG_EMO\n";
  out.slang_tsv =
      "# slang\treplacement\ngr8\tgreat\nmast\tawesome\naccha\tgood\nbekaar\tbad\nbakwas\tterrible\n";
  std::vector<std::string> item_names;
  for (std::size_t i = 0; i < config.n_items; ++i) {
    const auto& pool = detail::synth_item_names();
    std::vector<std::string> aliases = i < pool.size() ? pool[i] : std::vector<std::string>{"dish" + std::to_string(i)};
    item_names.push_back(aliases.front());
    out.items_tsv += std::to_string(i) + "\t" + aliases.front() + "\t" + text::join(aliases, "|") + "\n";
  }

  const auto users_w = std::to_string(config.n_users - 1).size();
  const auto rest_w = std::to_string(config.n_restaurants - 1).size();
  auto user_id = [&](std::size_t u) { return "u" + detail::two_digits(u, users_w); };
  auto restaurant_id = [&](std::size_t r) { return "r" + detail::two_digits(r, rest_w); };

  // menus: each item on roughly 60% of menus, and on at least two when possible
  std::vector<std::vector<bool>> serves(config.n_restaurants, std::vector<bool>(config.n_items, false));
  for (std::size_t r = 0; r < config.n_restaurants; ++r)
    for (std::size_t i = 0; i < config.n_items; ++i) serves[r][i] = rng.bernoulli(0.6);
  const std::size_t min_servers = std::min<std::size_t>(2, config.n_restaurants);
  for (std::size_t i = 0; i < config.n_items; ++i) {
    std::size_t count = 0;
    for (std::size_t r = 0; r < config.n_restaurants; ++r) count += serves[r][i];
    for (auto r : rng.permutation(config.n_restaurants)) {
      if (count >= min_servers) break;
      if (!serves[r][i]) {
        serves[r][i] = true;
        ++count;
      }
    }
  }
  for (std::size_t r = 0; r < config.n_restaurants; ++r) {
    if (std::none_of(serves[r].begin(), serves[r].end(), [](bool b) { return b; }))
      serves[r][static_cast<std::size_t>(rng.below(config.n_items))] = true;
    auto& menu = out.menus[restaurant_id(r)];
    double quality_sum = 0;
    for (std::size_t i = 0; i < config.n_items; ++i) {
      if (!serves[r][i]) continue;
      menu.push_back(static_cast<ItemId>(i));
      const int q = rng.bernoulli(0.5) ? 1 : -1;
      out.quality[{restaurant_id(r), static_cast<ItemId>(i)}] = q;
      quality_sum += q;
    }
    const double mean_q = quality_sum / static_cast<double>(menu.size());
    out.restaurants.push_back({restaurant_id(r), "Synthetic Kitchen " + std::to_string(r), {"synthetic"},
                               std::round((3.0 + mean_q) * 2.0) / 2.0});
  }

  // taste clusters
  const std::size_t clusters = std::min(config.taste_clusters, config.n_items);
  std::vector<std::size_t> item_cluster(config.n_items);
  {
    const auto order = rng.permutation(config.n_items);
    for (std::size_t j = 0; j < order.size(); ++j) item_cluster[order[j]] = j % clusters;
  }
  for (std::size_t u = 0; u < config.n_users; ++u) {
    const auto c = static_cast<std::size_t>(rng.below(clusters));
    out.user_cluster[user_id(u)] = c;
    auto& fav = out.favorites[user_id(u)];
    for (std::size_t i = 0; i < config.n_items; ++i)
      if (item_cluster[i] == c) fav.insert(static_cast<ItemId>(i));
  }

  // reviews
  std::size_t next_review = 0;
  const auto review_w = std::to_string(config.n_users * config.reviews_per_user - 1).size();
  for (std::size_t u = 0; u < config.n_users; ++u) {
    const auto uid = user_id(u);
    const auto& fav = out.favorites[uid];
    for (std::size_t n = 0; n < config.reviews_per_user; ++n) {
      const auto rid = restaurant_id(static_cast<std::size_t>(rng.below(config.n_restaurants)));
      const auto& menu = out.menus[rid];
      const std::size_t want =
          1 + static_cast<std::size_t>(rng.below(std::min(config.max_items_per_review, menu.size())));
      // favourites are three times as likely to be ordered
      std::vector<ItemId> pool(menu.begin(), menu.end()), chosen;
      while (chosen.size() < want) {
        double total = 0;
        for (auto i : pool) total += fav.count(i) ? 3.0 : 1.0;
        double pick = rng.uniform() * total;
        std::size_t at = 0;
        for (; at + 1 < pool.size(); ++at) {
          pick -= fav.count(pool[at]) ? 3.0 : 1.0;
          if (pick < 0) break;
        }
        chosen.push_back(pool[at]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(at));
      }

      const std::string review_id = "rv" + detail::two_digits(next_review++, review_w);
      std::string body;
      double gold_sum = 0;
      std::size_t positive_clauses = 0;
      int previous_polarity = 0;
      for (std::size_t j = 0; j < chosen.size(); ++j) {
        const ItemId item = chosen[j];
        const int pref = fav.count(item) ? 1 : -1;
        const int q = out.quality.at({rid, item});
        const double exact = 3.0 + 1.5 * pref + 0.5 * q;
        const int level = static_cast<int>(exact);
        const double gold = clamp_rating(exact + rng.normal(0.0, config.noise));
        gold_sum += gold;
        out.item_ratings.push_back({review_id, uid, rid, item, gold});

        int shown = level;
        if (config.noise > 0 && rng.bernoulli(std::min(1.0, config.noise))) shown = 6 - level;  // 5<->1, 4<->2
        const int polarity = shown >= 3 ? 1 : -1;
        if (polarity > 0) ++positive_clauses;
        out.fragment_labels.push_back({review_id, item, polarity > 0 ? Label::positive : Label::negative});

        const auto& adjs = detail::synth_adjectives(shown);
        const auto& adj = adjs[static_cast<std::size_t>(rng.below(adjs.size()))];
        const auto& name = item_names[static_cast<std::size_t>(item)];
        std::string clause;
        switch (rng.below(3)) {
          case 0: clause = "The " + name + " was " + adj; break;
          case 1: clause = name + " was really " + adj; break;
          default: clause = "tried the " + name + " and it was " + adj; break;
        }
        if (rng.bernoulli(0.3)) clause += polarity > 0 ? (rng.bernoulli(0.5) ? " :)" : " :D") : " :(";
        if (j > 0) {
          if (polarity != previous_polarity)
            body += " but ";
          else
            body += rng.bernoulli(0.5) ? ". " : " and then ";
        }
        body += clause;
        previous_polarity = polarity;
      }
      if (rng.bernoulli(0.2)) body += " while service was quick";
      body += ".";

      ReviewRecord rec;
      rec.review_id = review_id;
      rec.restaurant_id = rid;
      rec.user_id = uid;
      rec.stars = std::clamp(std::floor(gold_sum / static_cast<double>(chosen.size()) * 2.0 + 0.5) / 2.0, 1.0, 5.0);
      rec.text = body;
      rec.annotated_label = 2 * positive_clauses >= chosen.size() ? Label::positive : Label::negative;
      out.reviews.push_back(std::move(rec));
    }
  }
  return out;
}

inline json SynthCorpus::planted() const {
  json clusters = json::object(), favs = json::object(), qual = json::object(), menu = json::object();
  for (const auto& [u, c] : user_cluster) clusters[u] = c;
  for (const auto& [u, f] : favorites) favs[u] = std::vector<ItemId>(f.begin(), f.end());
  for (const auto& [col, q] : quality) qual[col.key()] = q;
  for (const auto& [r, m] : menus) menu[r] = m;
  return {{"seed", config.seed},
          {"n_users", config.n_users},
          {"n_restaurants", config.n_restaurants},
          {"n_items", config.n_items},
          {"noise", config.noise},
          {"reviews_per_user", config.reviews_per_user},
          {"max_items_per_review", config.max_items_per_review},
          {"taste_clusters", config.taste_clusters},
          {"user_cluster", clusters},
          {"favorites", favs},
          {"quality", qual},
          {"menus", menu}};
}

inline std::string serialize_item_ratings(const std::vector<GoldItemRating>& ratings) {
  std::string out = "# review_id\tuser_id\trestaurant_id\titem_id\trating\n";
  for (const auto& g : ratings)
    out += g.review_id + "\t" + g.user_id + "\t" + g.restaurant_id + "\t" + std::to_string(g.item_id) + "\t" +
           text::format_double(g.rating) + "\n";
  return out;
}

inline std::string serialize_fragment_labels(const std::vector<GoldFragmentLabel>& labels) {
  std::string out = "# review_id\titem_id\tlabel\n";
  for (const auto& g : labels)
    out += g.review_id + "\t" + std::to_string(g.item_id) + "\t" + std::string(label_name(g.label)) + "\n";
  return out;
}

/// Layout: reviews.jsonl, restaurants.jsonl, lexicons/{stopwords.txt,
/// emoticons.tsv, slang.tsv, items.tsv}, fragment_labels.tsv,
/// item_ratings.tsv and planted.json.
inline void write_synth_corpus(const SynthCorpus& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "lexicons");
  text::write_file_atomic(dir / "reviews.jsonl", serialize_reviews(c.reviews));
  std::string restaurants;
  for (const auto& r : c.restaurants) restaurants += restaurant_to_json(r).dump() + "\n";
  text::write_file_atomic(dir / "restaurants.jsonl", restaurants);
  text::write_file_atomic(dir / "lexicons" / "stopwords.txt", c.stopwords_txt);
  text::write_file_atomic(dir / "lexicons" / "emoticons.tsv", c.emoticons_tsv);
  text::write_file_atomic(dir / "lexicons" / "slang.tsv", c.slang_tsv);
  text::write_file_atomic(dir / "lexicons" / "items.tsv", c.items_tsv);
  text::write_file_atomic(dir / "fragment_labels.tsv", serialize_fragment_labels(c.fragment_labels));
  text::write_file_atomic(dir / "item_ratings.tsv", serialize_item_ratings(c.item_ratings));
  text::write_file_atomic(dir / "planted.json", c.planted().dump(1) + "\n");
}

}  // namespace fiducia
