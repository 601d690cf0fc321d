#pragma once

// Independent oracles used by the tests. These deliberately re-derive results
// by brute force and must stay decoupled from the library implementations
// they check.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dfcgcn/common.hpp"

namespace oracle {

/// BH step-up by trying every cutoff k explicitly.
inline std::vector<std::uint8_t> bh_bruteforce(const std::vector<double>& p, double alpha) {
  const std::size_t m = p.size();
  std::vector<double> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  std::size_t best_k = 0;
  for (std::size_t k = 1; k <= m; ++k)
    if (sorted[k - 1] <= static_cast<double>(k) * alpha / static_cast<double>(m)) best_k = k;
  std::vector<std::uint8_t> reject(m, 0);
  if (best_k > 0) {
    const double cut = sorted[best_k - 1];
    for (std::size_t i = 0; i < m; ++i) reject[i] = p[i] <= cut ? 1 : 0;
  }
  return reject;
}

/// Mann-Whitney AUC by explicit O(pos * neg) pair counting.
inline double auc_paircount(const std::vector<double>& scores, const std::vector<int>& is_pos) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!is_pos[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (is_pos[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

/// Window starts by literal clamped enumeration.
inline std::vector<int> window_starts_bruteforce(int t, int length, int step) {
  std::vector<int> starts;
  int k = 0;
  while (true) {
    int s = k * step;
    if (s > t - length) s = t - length;
    starts.push_back(s);
    if (s == t - length) break;
    ++k;
  }
  return starts;
}

/// Dense D^{-1/2} (S+I) D^{-1/2} computed the obvious way.
inline dfcgcn::Matrix normalize_bruteforce(const dfcgcn::BinaryMatrix& s) {
  const Eigen::Index n = s.rows();
  dfcgcn::Matrix shat(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) shat(i, j) = (i == j) ? 1.0 : double(s(i, j));
  dfcgcn::Matrix d = dfcgcn::Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) d(i, i) = 1.0 / std::sqrt(shat.row(i).sum());
  return d * shat * d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

/// KS critical value at level alpha (asymptotic).
inline double ks_critical(std::size_t n, std::size_t m, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt((n + m) / (double(n) * double(m)));
}

inline std::filesystem::path fresh_tmp_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("dfcgcn_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Plain largest-remainder apportionment, no minimum-share repair.
inline std::vector<int> largest_remainder(int count, const std::vector<double>& ratios) {
  const int k = static_cast<int>(ratios.size());
  double total = 0.0;
  for (double r : ratios) total += r;
  std::vector<double> quota(k);
  std::vector<int> share(k);
  int assigned = 0;
  for (int i = 0; i < k; ++i) {
    quota[i] = count * ratios[i] / total;
    share[i] = static_cast<int>(std::floor(quota[i]));
    assigned += share[i];
  }
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return quota[a] - share[a] > quota[b] - share[b]; });
  for (int r = 0; r < count - assigned; ++r) ++share[order[r % k]];
  return share;
}

/// Pearson correlation of two columns over the full series.
inline double corr(const dfcgcn::Vector& x, const dfcgcn::Vector& y) {
  const double mx = x.mean(), my = y.mean();
  const auto xc = x.array() - mx;
  const auto yc = y.array() - my;
  return (xc * yc).sum() / std::sqrt(xc.square().sum() * yc.square().sum());
}

}  // namespace oracle
