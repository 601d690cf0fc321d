#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dfcgcn/common.hpp"
#include "dfcgcn/featsel_types.hpp"

namespace dfcgcn {

struct LinearSvmModel {
  Vector w;          // weights in the internally standardized feature space
  double bias = 0.0;
};

struct SvmConfig {
  double lambda = 0.01;
  int epochs = 200;
};

/// Primal hinge-loss SVM minimizing lambda/2 ||w||^2 + mean hinge, trained by
/// cyclic per-sample subgradient steps of size 1/(lambda * t) from a zero
/// start. Features are standardized internally (constant columns map to 0);
/// the bias is not regularized. Fully deterministic; `seed` is accepted for
/// interface uniformity with the other selectors.
inline LinearSvmModel train_linear_svm(const Matrix& x, const std::vector<int>& y_pm1,
                                       double lambda, int epochs,
                                       [[maybe_unused]] std::uint64_t seed = 0) {
  const Eigen::Index n = x.rows(), m = x.cols();
  if (n != static_cast<Eigen::Index>(y_pm1.size())) fail(Errc::dimension_mismatch, "svm: |y| != rows(X)");
  if (!(lambda > 0.0)) fail(Errc::invalid_config, "svm: lambda must be > 0");
  bool pos = false, neg = false;
  for (int v : y_pm1) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else fail(Errc::invalid_config, "svm: labels must be +1/-1");
  }
  if (!pos || !neg) fail(Errc::single_class, "svm: both classes required");

  Matrix xs = x;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double mean = xs.col(j).mean();
    const double var = (xs.col(j).array() - mean).square().mean();
    if (var > 0.0)
      xs.col(j) = (xs.col(j).array() - mean) / std::sqrt(var);
    else
      xs.col(j).setZero();
  }

  LinearSvmModel model;
  model.w = Vector::Zero(m);
  long t = 0;
  for (int e = 0; e < epochs; ++e) {
    for (Eigen::Index i = 0; i < n; ++i) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double yi = y_pm1[static_cast<std::size_t>(i)];
      const double margin = yi * (xs.row(i).dot(model.w) + model.bias);
      model.w *= (1.0 - eta * lambda);
      if (margin < 1.0) {
        model.w += eta * yi * xs.row(i).transpose();
        model.bias += eta * yi;
      }
    }
  }
  return model;
}

/// Recursive feature elimination: repeatedly retrain the SVM on the surviving
/// columns and drop the one with the smallest |w| (ties drop the higher
/// original index) until `target` remain. `scores` records each feature's
/// elimination round; survivors share round m - target + 1.
inline SelectionReport rfe_svm(const Matrix& x, const std::vector<int>& y_pm1, int target,
                               std::uint64_t seed, SvmConfig cfg = {}) {
  const int m = static_cast<int>(x.cols());
  if (target < 1 || target > m) fail(Errc::invalid_config, "rfe_svm: target out of range");

  SelectionReport rep;
  rep.method = SelectionMethod::rfe_svm;
  rep.scores.assign(static_cast<std::size_t>(m), 0.0);
  std::vector<int> survivors(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) survivors[static_cast<std::size_t>(i)] = i;

  int round = 1;
  while (static_cast<int>(survivors.size()) > target) {
    Matrix sub(x.rows(), static_cast<Eigen::Index>(survivors.size()));
    for (std::size_t k = 0; k < survivors.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = x.col(survivors[k]);
    const auto model = train_linear_svm(sub, y_pm1, cfg.lambda, cfg.epochs, seed);
    std::size_t drop = 0;
    for (std::size_t k = 1; k < survivors.size(); ++k) {
      const double cur = std::abs(model.w(static_cast<Eigen::Index>(k)));
      const double best = std::abs(model.w(static_cast<Eigen::Index>(drop)));
      if (cur < best || (cur == best && survivors[k] > survivors[drop])) drop = k;
    }
    rep.scores[static_cast<std::size_t>(survivors[drop])] = round++;
    survivors.erase(survivors.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  for (int s : survivors) rep.scores[static_cast<std::size_t>(s)] = m - target + 1;
  std::sort(survivors.begin(), survivors.end());
  rep.selected = std::move(survivors);
  return rep;
}

}  // namespace dfcgcn
