#pragma once

// Independent reference computations. Plain loops over dense data, written
// from the textbook formulas without reusing library code paths.

#include <cmath>
#include <functional>
#include <vector>

#include "fiducia/lstm.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

// FM prediction with the O(n^2) pairwise double loop.
inline double fm_naive(const std::vector<double>& x, double w0, const std::vector<double>& w,
                       const std::vector<double>& V, std::size_t k) {
  const std::size_t n = x.size();
  double y = w0;
  for (std::size_t i = 0; i < n; ++i) y += w[i] * x[i];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double dot = 0;
      for (std::size_t f = 0; f < k; ++f) dot += V[i * k + f] * V[j * k + f];
      y += dot * x[i] * x[j];
    }
  return y;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / std::sqrt(na * nb);
}

inline double row_mean(const Dense& X, std::size_t u) {
  double s = 0;
  for (double v : X[u]) s += v;
  return s / static_cast<double>(X[u].size());
}

inline double col_mean(const Dense& X, std::size_t m) {
  double s = 0;
  for (const auto& row : X) s += row[m];
  return s / static_cast<double>(X.size());
}

inline std::vector<double> column(const Dense& X, std::size_t m) {
  std::vector<double> out;
  for (const auto& row : X) out.push_back(row[m]);
  return out;
}

// User-item prediction on a fully dense matrix, all other users as
// neighbours, before clamping.
inline double user_item(const Dense& X, std::size_t k, std::size_t m, bool centre_on_item = false) {
  double num = 0, den = 0;
  for (std::size_t a = 0; a < X.size(); ++a) {
    if (a == k) continue;
    const double s = cosine(X[k], X[a]);
    const double centre = centre_on_item ? col_mean(X, m) : row_mean(X, a);
    num += s * (X[a][m] - centre);
    den += std::abs(s);
  }
  return row_mean(X, k) + (den > 0 ? num / den : 0.0);
}

// Item-item prediction on a dense matrix, all other columns as neighbours.
inline double item_item(const Dense& X, std::size_t k, std::size_t m) {
  double num = 0, den = 0;
  const auto cm = column(X, m);
  for (std::size_t b = 0; b < X[k].size(); ++b) {
    if (b == m) continue;
    const double s = cosine(cm, column(X, b));
    num += s * X[k][b];
    den += std::abs(s);
  }
  return den > 0 ? num / den : row_mean(X, k);
}

// Step-by-step LSTM recurrence with scalar loops.
inline double lstm_score(const std::vector<std::size_t>& seq, const fiducia::LSTMParams& p) {
  const std::size_t de = p.embed_dim(), dh = p.hidden_dim();
  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  std::vector<double> h(dh, 0.0), c(dh, 0.0);
  for (auto tok : seq) {
    std::vector<double> x(de);
    for (std::size_t j = 0; j < de; ++j) x[j] = p.embedding(static_cast<long>(tok), static_cast<long>(j));
    std::vector<double> hn(dh), cn(dh);
    for (std::size_t r = 0; r < dh; ++r) {
      double pre[4];
      for (std::size_t g = 0; g < 4; ++g) {
        double z = p.b[g](static_cast<long>(r));
        for (std::size_t j = 0; j < de; ++j) z += p.W[g](static_cast<long>(r), static_cast<long>(j)) * x[j];
        for (std::size_t j = 0; j < dh; ++j) z += p.U[g](static_cast<long>(r), static_cast<long>(j)) * h[j];
        pre[g] = z;
      }
      const double i = sig(pre[0]), f = sig(pre[1]), o = sig(pre[2]), cand = std::tanh(pre[3]);
      cn[r] = f * c[r] + i * cand;
      hn[r] = o * std::tanh(cn[r]);
    }
    h = hn;
    c = cn;
  }
  double z = p.b_out;
  for (std::size_t r = 0; r < dh; ++r) z += p.w_out(static_cast<long>(r)) * h[r];
  return std::tanh(z);
}

// Every set partition of {0..n-1} as a restricted growth string.
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> a(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_used) {
    if (i == n) {
      f(a);
      return;
    }
    for (int c = 0; c <= max_used + 1; ++c) {
      a[i] = c;
      rec(i + 1, std::max(max_used, c));
    }
  };
  if (n == 0) {
    f(a);
    return;
  }
  a[0] = 0;
  rec(1, 0);
}

// Newman modularity from a dense symmetric adjacency matrix, straight from
// (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j).
inline double modularity(const Dense& A, const std::vector<int>& comm) {
  const std::size_t n = A.size();
  std::vector<double> k(n, 0.0);
  double two_m = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      k[i] += A[i][j];
      two_m += A[i][j];
    }
  if (two_m == 0) return 0;
  double q = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (comm[i] == comm[j]) q += A[i][j] - k[i] * k[j] / two_m;
  return q / two_m;
}

// Highest modularity over every partition of the nodes.
inline double best_modularity(const Dense& A, std::vector<int>* argmax = nullptr) {
  double best = -2;
  for_each_partition(A.size(), [&](const std::vector<int>& comm) {
    const double q = modularity(A, comm);
    if (q > best) {
      best = q;
      if (argmax) *argmax = comm;
    }
  });
  return best;
}

// Fleiss' kappa, counted per category.
inline double fleiss(const std::vector<std::vector<int>>& counts) {
  const double N = static_cast<double>(counts.size());
  double n = 0;
  for (int c : counts[0]) n += c;
  std::vector<double> pj(counts[0].size(), 0.0);
  double pbar = 0;
  for (const auto& row : counts) {
    double s = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      s += row[j] * (row[j] - 1.0);
      pj[j] += row[j];
    }
    pbar += s / (n * (n - 1));
  }
  pbar /= N;
  double pe = 0;
  for (double p : pj) pe += (p / (N * n)) * (p / (N * n));
  return (pbar - pe) / (1 - pe);
}

}  // namespace oracle
