#pragma once

// Memory-based collaborative filtering over a sparse user x (restaurant, item)
// rating matrix, plus the positive-count baseline and top-k ranking.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fiducia/error.hpp"
#include "fiducia/fragmenter.hpp"
#include "fiducia/text_io.hpp"

namespace fiducia {

inline constexpr double kMinRating = 1.0;
inline constexpr double kMaxRating = 5.0;
inline constexpr std::size_t kFullNeighborhood = std::numeric_limits<std::size_t>::max();

inline double clamp_rating(double r) { return std::clamp(r, kMinRating, kMaxRating); }

/// Item rating from review stars and fragment sentiment s in [-1, 1]:
/// clamp(stars + 2 s w, 1, 5).
inline double derive_item_rating(double stars, double sentiment, double blend = 0.5) {
  return clamp_rating(stars + 2.0 * sentiment * blend);
}

struct Column {
  std::string restaurant_id;
  ItemId item_id = 0;

  auto operator<=>(const Column&) const = default;

  std::string key() const { return restaurant_id + ":" + std::to_string(item_id); }
};

struct RatingTriple {
  std::string user_id;
  Column column;
  double rating;
};

using SparseVector = std::map<std::size_t, double>;

class RatingMatrix {
 public:
  RatingMatrix() = default;

  /// Users and columns are indexed in sorted order. `extra_users` and
  /// `extra_columns` widen the index space without adding ratings. Repeated
  /// (user, column) pairs are averaged into one entry.
  static RatingMatrix build(const std::vector<RatingTriple>& triples,
                            const std::vector<std::string>& extra_users = {},
                            const std::vector<Column>& extra_columns = {}) {
    std::set<std::string> users(extra_users.begin(), extra_users.end());
    std::set<Column> columns(extra_columns.begin(), extra_columns.end());
    for (const auto& t : triples) {
      if (!(t.rating >= kMinRating && t.rating <= kMaxRating))
        throw Error(Errc::invalid_config, "rating " + text::format_double(t.rating) + " outside [1, 5]");
      users.insert(t.user_id);
      columns.insert(t.column);
    }
    RatingMatrix m;
    m.users_.assign(users.begin(), users.end());
    m.columns_.assign(columns.begin(), columns.end());
    for (std::size_t i = 0; i < m.users_.size(); ++i) m.user_index_[m.users_[i]] = i;
    for (std::size_t i = 0; i < m.columns_.size(); ++i) m.column_index_[m.columns_[i]] = i;
    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> sums;
    for (const auto& t : triples) {
      auto& s = sums[{m.user_index_.at(t.user_id), m.column_index_.at(t.column)}];
      s.first += t.rating;
      s.second += 1;
    }
    m.rows_.resize(m.users_.size());
    m.cols_.resize(m.columns_.size());
    for (const auto& [key, s] : sums) {
      const double r = s.first / static_cast<double>(s.second);
      m.rows_[key.first][key.second] = r;
      m.cols_[key.second][key.first] = r;
    }
    m.entries_ = sums.size();
    return m;
  }

  std::size_t num_users() const { return users_.size(); }
  std::size_t num_columns() const { return columns_.size(); }
  std::size_t num_entries() const { return entries_; }
  const std::vector<std::string>& users() const { return users_; }
  const std::vector<Column>& columns() const { return columns_; }
  const std::string& user(std::size_t u) const { return users_.at(u); }
  const Column& column(std::size_t c) const { return columns_.at(c); }

  std::optional<std::size_t> user_index(const std::string& id) const {
    const auto it = user_index_.find(id);
    return it == user_index_.end() ? std::nullopt : std::optional(it->second);
  }

  std::optional<std::size_t> column_index(const Column& col) const {
    const auto it = column_index_.find(col);
    return it == column_index_.end() ? std::nullopt : std::optional(it->second);
  }

  std::size_t require_user(const std::string& id) const {
    if (auto u = user_index(id)) return *u;
    throw Error(Errc::unknown_user, "user '" + id + "'");
  }

  std::size_t require_column(const Column& col) const {
    if (auto c = column_index(col)) return *c;
    throw Error(Errc::unknown_column, "column '" + col.key() + "'");
  }

  const SparseVector& row(std::size_t u) const { return rows_.at(u); }
  const SparseVector& col(std::size_t c) const { return cols_.at(c); }

  std::optional<double> rating(std::size_t u, std::size_t c) const {
    const auto& r = rows_.at(u);
    const auto it = r.find(c);
    return it == r.end() ? std::nullopt : std::optional(it->second);
  }

  std::optional<double> user_mean(std::size_t u) const { return mean_of(rows_.at(u)); }
  std::optional<double> column_mean(std::size_t c) const { return mean_of(cols_.at(c)); }

  /// Mean of all entries; the scale midpoint for an empty matrix.
  double global_mean() const {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& r : rows_)
      for (const auto& [c, v] : r) {
        sum += v;
        ++n;
      }
    return n ? sum / static_cast<double>(n) : 0.5 * (kMinRating + kMaxRating);
  }

  /// Column indices for one item, in restaurant order.
  std::vector<std::size_t> item_columns(ItemId item) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < columns_.size(); ++c)
      if (columns_[c].item_id == item) out.push_back(c);
    return out;
  }

  /// `user_id<TAB>restaurant_id:item_id<TAB>rating`, user-major in index order.
  std::string export_tsv() const {
    std::string out;
    for (std::size_t u = 0; u < users_.size(); ++u)
      for (const auto& [c, v] : rows_[u])
        out += users_[u] + "\t" + columns_[c].key() + "\t" + text::format_double(v) + "\n";
    return out;
  }

 private:
  static std::optional<double> mean_of(const SparseVector& v) {
    if (v.empty()) return std::nullopt;
    double sum = 0;
    for (const auto& [k, x] : v) sum += x;
    return sum / static_cast<double>(v.size());
  }

  std::vector<std::string> users_;
  std::vector<Column> columns_;
  std::map<std::string, std::size_t> user_index_;
  std::map<Column, std::size_t> column_index_;
  std::vector<SparseVector> rows_;
  std::vector<SparseVector> cols_;
  std::size_t entries_ = 0;
};

/// a.b / (|a| |b|) with absent coordinates read as zero; 0 when either norm is 0.
inline double cosine_sim(const SparseVector& a, const SparseVector& b) {
  double dot = 0, na = 0, nb = 0;
  for (const auto& [k, v] : a) {
    na += v * v;
    if (const auto it = b.find(k); it != b.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : b) nb += v * v;
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  void set(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

namespace detail {
inline SimilarityMatrix pairwise_cosine(const std::vector<const SparseVector*>& vectors) {
  SimilarityMatrix s(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    s.set(i, i, vectors[i]->empty() ? 0.0 : 1.0);
    for (std::size_t j = i + 1; j < vectors.size(); ++j) s.set(i, j, cosine_sim(*vectors[i], *vectors[j]));
  }
  return s;
}
}  // namespace detail

/// User-user cosine over rating rows.
inline SimilarityMatrix user_similarity(const RatingMatrix& R) {
  std::vector<const SparseVector*> rows;
  for (std::size_t u = 0; u < R.num_users(); ++u) rows.push_back(&R.row(u));
  return detail::pairwise_cosine(rows);
}

/// Column-column cosine over rating columns.
inline SimilarityMatrix column_similarity(const RatingMatrix& R) {
  std::vector<const SparseVector*> cols;
  for (std::size_t c = 0; c < R.num_columns(); ++c) cols.push_back(&R.col(c));
  return detail::pairwise_cosine(cols);
}

enum class Method { baseline, user_item, item_item, fm };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::baseline: return "baseline";
    case Method::user_item: return "user";
    case Method::item_item: return "item";
    case Method::fm: return "fm";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view name) {
  if (name == "baseline") return Method::baseline;
  if (name == "user" || name == "user-item") return Method::user_item;
  if (name == "item" || name == "item-item") return Method::item_item;
  if (name == "fm") return Method::fm;
  return std::nullopt;
}

struct Prediction {
  std::string user_id;
  Column column;
  double raw = 0.0;     // before clamping
  double rating = 0.0;  // clamped to [1, 5]
  Method method = Method::user_item;
};

/// How the neighbour deviation in the user-item formula is centred.
enum class Centering {
  user,  // mean of the neighbour's own ratings
  item,  // mean of the ratings given to the target column
};

namespace detail {
// Indices of candidates ordered by |similarity| descending, index ascending,
// truncated to n.
inline std::vector<std::size_t> top_by_abs(std::vector<std::pair<std::size_t, double>> cands, std::size_t n) {
  std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
    return std::abs(a.second) > std::abs(b.second);
  });
  if (cands.size() > n) cands.resize(n);
  std::vector<std::size_t> out;
  out.reserve(cands.size());
  for (const auto& c : cands) out.push_back(c.first);
  return out;
}
}  // namespace detail

/// x_k + sum sim(k,a) (x_{a,m} - centre_a) / sum |sim(k,a)| over the N users
/// most similar to k (by |sim|) who rated m. Falls back to x_k when the
/// denominator vanishes and to the global mean when k has no ratings.
inline Prediction predict_user_item(std::size_t k, std::size_t m, const RatingMatrix& R,
                                    const SimilarityMatrix& S_u, std::size_t N = 20,
                                    Centering center = Centering::user) {
  if (k >= R.num_users()) throw Error(Errc::unknown_user, "user index " + std::to_string(k));
  if (m >= R.num_columns()) throw Error(Errc::unknown_column, "column index " + std::to_string(m));
  const double base = R.user_mean(k).value_or(R.global_mean());
  std::vector<std::pair<std::size_t, double>> cands;
  for (const auto& [a, v] : R.col(m))
    if (a != k) cands.emplace_back(a, S_u.at(k, a));
  double num = 0, den = 0;
  const double column_centre = R.column_mean(m).value_or(0.0);
  for (auto a : detail::top_by_abs(std::move(cands), N)) {
    const double sim = S_u.at(k, a);
    const double centre = center == Centering::user ? *R.user_mean(a) : column_centre;
    num += sim * (*R.rating(a, m) - centre);
    den += std::abs(sim);
  }
  Prediction p;
  p.user_id = R.user(k);
  p.column = R.column(m);
  p.method = Method::user_item;
  p.raw = den > 0 ? base + num / den : base;
  p.rating = clamp_rating(p.raw);
  return p;
}

/// sum sim(m,b) x_{k,b} / sum |sim(m,b)| over the N columns most similar to m
/// that k rated. Falls back to k's mean, else the global mean.
inline Prediction predict_item_item(std::size_t k, std::size_t m, const RatingMatrix& R,
                                    const SimilarityMatrix& S_i, std::size_t N = 20) {
  if (k >= R.num_users()) throw Error(Errc::unknown_user, "user index " + std::to_string(k));
  if (m >= R.num_columns()) throw Error(Errc::unknown_column, "column index " + std::to_string(m));
  std::vector<std::pair<std::size_t, double>> cands;
  for (const auto& [b, v] : R.row(k))
    if (b != m) cands.emplace_back(b, S_i.at(m, b));
  double num = 0, den = 0;
  for (auto b : detail::top_by_abs(std::move(cands), N)) {
    const double sim = S_i.at(m, b);
    num += sim * *R.rating(k, b);
    den += std::abs(sim);
  }
  Prediction p;
  p.user_id = R.user(k);
  p.column = R.column(m);
  p.method = Method::item_item;
  p.raw = den > 0 ? num / den : R.user_mean(k).value_or(R.global_mean());
  p.rating = clamp_rating(p.raw);
  return p;
}

// ---------------------------------------------------------------------------
// Baseline and ranking

/// A fragment after sentiment scoring, with the identities the recommenders need.
struct ScoredFragment {
  std::string review_id;
  std::string user_id;
  std::string restaurant_id;
  ItemId item_id = 0;
  double score = 0.0;  // sentiment in [-1, 1]
};

struct RestaurantCount {
  std::string restaurant_id;
  std::size_t positive = 0;

  bool operator==(const RestaurantCount&) const = default;
};

/// Restaurants with at least one fragment for `item`, ranked by the number of
/// positively scored fragments; ties by restaurant id.
inline std::vector<RestaurantCount> baseline_recommend(ItemId item, const std::vector<ScoredFragment>& fragments) {
  std::map<std::string, std::size_t> counts;
  for (const auto& f : fragments) {
    if (f.item_id != item) continue;
    auto& c = counts[f.restaurant_id];
    if (f.score > 0) ++c;
  }
  std::vector<RestaurantCount> out;
  for (const auto& [r, c] : counts) out.push_back({r, c});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.positive > b.positive; });
  return out;
}

/// Rating implied by the baseline ranking: 1 + 4 * count / best count for the
/// item, so the top restaurant maps to 5. Items with no positive fragment
/// anywhere fall back to `fallback`.
class BaselineRater {
 public:
  BaselineRater(const std::vector<ScoredFragment>& fragments, double fallback) : fallback_(fallback) {
    for (const auto& f : fragments) {
      auto& c = counts_[{f.restaurant_id, f.item_id}];
      if (f.score > 0) ++c;
      auto& best = best_[f.item_id];
      best = std::max(best, c);
    }
  }

  double rating(const Column& col) const {
    const auto best = best_.find(col.item_id);
    if (best == best_.end() || best->second == 0) return fallback_;
    const auto it = counts_.find(col);
    const double count = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
    return clamp_rating(1.0 + 4.0 * count / static_cast<double>(best->second));
  }

 private:
  std::map<Column, std::size_t> counts_;
  std::map<ItemId, std::size_t> best_;
  double fallback_;
};

/// Fraction of `co_members` with a positively scored fragment at `restaurant`;
/// 0 when there are no co-members.
inline double side_score(const std::vector<ItemId>& co_members, const std::string& restaurant,
                         const std::vector<ScoredFragment>& fragments) {
  if (co_members.empty()) return 0.0;
  std::set<ItemId> liked;
  for (const auto& f : fragments)
    if (f.restaurant_id == restaurant && f.score > 0) liked.insert(f.item_id);
  std::size_t hits = 0;
  for (auto m : co_members) hits += liked.count(m);
  return static_cast<double>(hits) / static_cast<double>(co_members.size());
}

struct RankedRestaurant {
  std::string restaurant_id;
  double score;

  bool operator==(const RankedRestaurant&) const = default;
};

/// Scores every restaurant serving `item` as predicted(column) + lambda *
/// side(restaurant) and returns the best k, ties by restaurant id.
inline std::vector<RankedRestaurant> recommend_top_k(const RatingMatrix& R, ItemId item,
                                                     const std::function<double(std::size_t)>& predicted,
                                                     const std::function<double(const std::string&)>& side,
                                                     double lambda, std::size_t k) {
  const auto cols = R.item_columns(item);
  if (cols.empty()) throw Error(Errc::unknown_item, "no restaurant serves item " + std::to_string(item));
  std::vector<RankedRestaurant> out;
  for (auto c : cols) {
    const auto& restaurant = R.column(c).restaurant_id;
    const double bonus = lambda != 0.0 ? lambda * side(restaurant) : 0.0;
    out.push_back({restaurant, predicted(c) + bonus});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.restaurant_id < b.restaurant_id;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace fiducia
