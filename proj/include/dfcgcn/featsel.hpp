#pragma once

#include <string>
#include <vector>

#include "dfcgcn/cohort.hpp"
#include "dfcgcn/common.hpp"
#include "dfcgcn/featsel_types.hpp"
#include "dfcgcn/forest.hpp"
#include "dfcgcn/stats.hpp"
#include "dfcgcn/svm.hpp"

namespace dfcgcn {

/// Welch t-test per column (rows split by label) with BH-FDR control; selected
/// columns are those surviving at level alpha. `scores` are the t statistics.
inline SelectionReport ttest_fdr_select(const Matrix& x, const std::vector<Label>& labels,
                                        const std::vector<std::uint8_t>& row_mask, double alpha) {
  const int m = static_cast<int>(x.cols());
  SelectionReport rep;
  rep.method = SelectionMethod::ttest_fdr;
  rep.scores.assign(static_cast<std::size_t>(m), 0.0);
  std::vector<double> pvals(static_cast<std::size_t>(m), 1.0);
  for (int j = 0; j < m; ++j) {
    std::vector<double> a, b;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (!row_mask[static_cast<std::size_t>(i)]) continue;
      (labels[static_cast<std::size_t>(i)] == Label::AD ? a : b).push_back(x(i, j));
    }
    const auto r = welch_ttest(a, b);
    rep.scores[static_cast<std::size_t>(j)] = r.t;
    pvals[static_cast<std::size_t>(j)] = r.p;
  }
  const auto reject = bh_fdr(pvals, alpha);
  for (int j = 0; j < m; ++j)
    if (reject[static_cast<std::size_t>(j)]) rep.selected.push_back(j);
  return rep;
}

/// Column subset of a feature matrix.
inline FeatureMatrix select_columns(const FeatureMatrix& in, const std::vector<int>& cols) {
  FeatureMatrix out;
  out.subject_ids = in.subject_ids;
  out.values.resize(in.values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.values.col(static_cast<Eigen::Index>(k)) = in.values.col(cols[k]);
    out.feature_names.push_back(in.feature_names[static_cast<std::size_t>(cols[k])]);
  }
  return out;
}

/// Horizontal concatenation (scalar block first), then per-column
/// standardization using statistics from training-mask rows only. A column
/// constant on the training rows becomes all-zero and is flagged.
inline FeatureMatrix assemble_features(const FeatureMatrix& scalars, const FeatureMatrix& fc,
                                       const std::vector<std::uint8_t>& train_mask,
                                       std::vector<std::string>* flags = nullptr) {
  if (!scalars.subject_ids.empty() && !fc.subject_ids.empty() &&
      scalars.subject_ids != fc.subject_ids)
    fail(Errc::subject_mismatch, "assemble_features: subject order differs between blocks");

  FeatureMatrix out;
  out.subject_ids = scalars.subject_ids.empty() ? fc.subject_ids : scalars.subject_ids;
  const int n = static_cast<int>(out.subject_ids.size());
  if (static_cast<int>(train_mask.size()) != n)
    fail(Errc::dimension_mismatch, "assemble_features: mask length mismatch");
  const int ms = scalars.feature_names.empty() ? 0 : scalars.m();
  const int mf = fc.feature_names.empty() ? 0 : fc.m();
  out.values.resize(n, ms + mf);
  if (ms) out.values.leftCols(ms) = scalars.values;
  if (mf) out.values.rightCols(mf) = fc.values;
  out.feature_names = scalars.feature_names;
  out.feature_names.insert(out.feature_names.end(), fc.feature_names.begin(), fc.feature_names.end());

  std::vector<int> train_rows;
  for (int i = 0; i < n; ++i)
    if (train_mask[static_cast<std::size_t>(i)]) train_rows.push_back(i);
  if (train_rows.empty()) fail(Errc::empty_mask, "assemble_features: empty training mask");

  for (int j = 0; j < out.m(); ++j) {
    double mean = 0.0;
    for (int i : train_rows) mean += out.values(i, j);
    mean /= static_cast<double>(train_rows.size());
    double var = 0.0;
    for (int i : train_rows) var += (out.values(i, j) - mean) * (out.values(i, j) - mean);
    var /= static_cast<double>(train_rows.size());
    if (var > 0.0) {
      out.values.col(j) = (out.values.col(j).array() - mean) / std::sqrt(var);
    } else {
      out.values.col(j).setZero();
      if (flags) flags->push_back("constant_training_column:" + out.feature_names[static_cast<std::size_t>(j)]);
    }
  }
  if (!out.values.allFinite()) fail(Errc::non_finite, "assemble_features: non-finite feature value");
  return out;
}

}  // namespace dfcgcn
