#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dfcgcn/common.hpp"
#include "dfcgcn/featsel_types.hpp"

namespace dfcgcn {

struct ForestConfig {
  int trees = 200;
  int min_leaf = 1;
};

namespace detail {

inline double gini(int n0, int n1) {
  const double n = n0 + n1;
  if (n == 0.0) return 0.0;
  const double p0 = n0 / n, p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct TreeGrower {
  const Matrix& x;
  const std::vector<int>& y;
  int n_candidates;
  Rng& rng;
  std::vector<double>& importance;  // accumulated impurity decrease, root-weighted
  int n_root;
  ForestConfig cfg;

  // scratch
  std::vector<int> feature_pool;
  std::vector<std::pair<double, int>> sorted;  // (value, class)

  void grow(std::vector<int>& samples) {
    int n0 = 0;
    for (int s : samples) n0 += y[static_cast<std::size_t>(s)] == 0;
    const int n1 = static_cast<int>(samples.size()) - n0;
    if (n0 == 0 || n1 == 0 || static_cast<int>(samples.size()) < 2 * cfg.min_leaf) return;

    // draw candidate features without replacement
    const int m = static_cast<int>(x.cols());
    feature_pool.resize(static_cast<std::size_t>(m));
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    const int k = std::min(n_candidates, m);
    for (int i = 0; i < k; ++i)
      std::swap(feature_pool[static_cast<std::size_t>(i)],
                feature_pool[static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(m - i))]);

    const double parent = gini(n0, n1);
    double best_decrease = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (int ci = 0; ci < k; ++ci) {
      const int f = feature_pool[static_cast<std::size_t>(ci)];
      sorted.clear();
      for (int s : samples)
        sorted.emplace_back(x(s, f), y[static_cast<std::size_t>(s)]);
      std::sort(sorted.begin(), sorted.end());
      int l0 = 0, l1 = 0;
      const int n = static_cast<int>(sorted.size());
      for (int i = 0; i + 1 < n; ++i) {
        (sorted[static_cast<std::size_t>(i)].second == 0 ? l0 : l1)++;
        if (sorted[static_cast<std::size_t>(i)].first == sorted[static_cast<std::size_t>(i + 1)].first) continue;
        const int nl = i + 1, nr = n - nl;
        if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
        const double child =
            (nl * gini(l0, l1) + nr * gini(n0 - l0, n1 - l1)) / static_cast<double>(n);
        const double decrease = parent - child;
        const double threshold =
            0.5 * (sorted[static_cast<std::size_t>(i)].first + sorted[static_cast<std::size_t>(i + 1)].first);
        if (decrease <= 0.0) continue;
        // ties: lower feature index, then lower threshold
        bool take = false;
        if (best_feature < 0 || decrease > best_decrease)
          take = true;
        else if (decrease == best_decrease)
          take = f < best_feature || (f == best_feature && threshold < best_threshold);
        if (take) {
          best_decrease = decrease;
          best_feature = f;
          best_threshold = threshold;
        }
      }
    }
    if (best_feature < 0) return;

    importance[static_cast<std::size_t>(best_feature)] +=
        static_cast<double>(samples.size()) / n_root * best_decrease;

    std::vector<int> left, right;
    for (int s : samples)
      (x(s, best_feature) <= best_threshold ? left : right).push_back(s);
    grow(left);
    grow(right);
  }
};

}  // namespace detail

/// Mean-decrease-in-impurity importances from a Gini random forest
/// (bootstrap resampling, sqrt(m) candidate features per node, trees grown to
/// purity). Per-tree importances are normalized before averaging; the final
/// vector is normalized to sum 1. Deterministic given `seed`.
inline std::vector<double> rf_mdi_importance(const Matrix& x, const std::vector<int>& y,
                                             std::uint64_t seed, ForestConfig cfg = {}) {
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(x.cols());
  if (n != static_cast<int>(y.size())) fail(Errc::dimension_mismatch, "rf: |y| != rows(X)");
  if (n < 4) fail(Errc::bad_dimension, "rf: need at least 4 samples");
  const bool has0 = std::count(y.begin(), y.end(), 0) > 0;
  const bool has1 = std::count(y.begin(), y.end(), 1) > 0;
  if (!has0 || !has1) fail(Errc::single_class, "rf: both classes required");

  const int n_candidates = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(m)))));
  std::vector<double> total(static_cast<std::size_t>(m), 0.0);
  for (int t = 0; t < cfg.trees; ++t) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<int> samples(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) samples[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    std::vector<double> imp(static_cast<std::size_t>(m), 0.0);
    detail::TreeGrower grower{x, y, n_candidates, rng, imp, n, cfg, {}, {}};
    grower.grow(samples);
    double s = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (s > 0.0)
      for (int f = 0; f < m; ++f) total[static_cast<std::size_t>(f)] += imp[static_cast<std::size_t>(f)] / s;
  }
  double s = std::accumulate(total.begin(), total.end(), 0.0);
  if (s > 0.0)
    for (double& v : total) v /= s;
  return total;
}

/// Top-k features by forest importance; importance ties break toward the
/// lower index. `selected` is reported in increasing index order.
inline SelectionReport rf_importance(const Matrix& x, const std::vector<int>& y, int k,
                                     std::uint64_t seed, ForestConfig cfg = {}) {
  const int m = static_cast<int>(x.cols());
  if (k < 1 || k > m) fail(Errc::invalid_config, "rf_importance: k out of range");
  SelectionReport rep;
  rep.method = SelectionMethod::rf_top_k;
  rep.scores = rf_mdi_importance(x, y, seed, cfg);
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return rep.scores[static_cast<std::size_t>(a)] > rep.scores[static_cast<std::size_t>(b)];
  });
  rep.selected.assign(order.begin(), order.begin() + k);
  std::sort(rep.selected.begin(), rep.selected.end());
  return rep;
}

}  // namespace dfcgcn
