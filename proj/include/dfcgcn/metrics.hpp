#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfcgcn/cohort.hpp"
#include "dfcgcn/common.hpp"

namespace dfcgcn {

/// Binary confusion counts with AD as the positive class.
struct Confusion {
  long tp = 0, fp = 0, fn = 0, tn = 0;

  long total() const { return tp + fp + fn + tn; }
};

inline Confusion confusion(const std::vector<Label>& y_true, const std::vector<Label>& y_pred,
                           const std::vector<std::uint8_t>& mask) {
  if (y_true.size() != y_pred.size() || y_true.size() != mask.size())
    fail(Errc::dimension_mismatch, "confusion: input sizes differ");
  Confusion c;
  bool any = false;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (!mask[i]) continue;
    any = true;
    const bool pos = y_true[i] == Label::AD;
    const bool hat = y_pred[i] == Label::AD;
    if (pos && hat) ++c.tp;
    else if (!pos && hat) ++c.fp;
    else if (pos && !hat) ++c.fn;
    else ++c.tn;
  }
  if (!any) fail(Errc::empty_mask, "confusion: empty mask");
  return c;
}

struct PrfResult {
  double acc = 0.0, pre = 0.0, rec = 0.0, f1 = 0.0;
  std::vector<std::string> flags;  // notes for zero-denominator conventions
};

/// Accuracy/precision/recall/F1; undefined ratios become 0 and are flagged.
inline PrfResult prf(const Confusion& c) {
  PrfResult r;
  const long total = c.total();
  if (total == 0) fail(Errc::empty_mask, "prf: empty confusion");
  r.acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
  if (c.tp + c.fp > 0)
    r.pre = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  else
    r.flags.push_back("precision_undefined");
  if (c.tp + c.fn > 0)
    r.rec = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  else
    r.flags.push_back("recall_undefined");
  if (r.pre + r.rec > 0.0)
    r.f1 = 2.0 * r.pre * r.rec / (r.pre + r.rec);
  else
    r.flags.push_back("f1_undefined");
  return r;
}

/// Mann-Whitney AUC: probability a random positive outranks a random negative,
/// ties counted half. Computed from midranks, so wins + ties/2 stays an exact
/// multiple of 1/2 and the division is the only rounding step.
inline double roc_auc(const Vector& scores, const std::vector<Label>& y_true,
                      const std::vector<std::uint8_t>& mask) {
  if (static_cast<std::size_t>(scores.size()) != y_true.size() || y_true.size() != mask.size())
    fail(Errc::dimension_mismatch, "roc_auc: input sizes differ");
  std::vector<std::pair<double, int>> pts;  // (score, is_positive)
  for (std::size_t i = 0; i < y_true.size(); ++i)
    if (mask[i]) pts.emplace_back(scores(static_cast<Eigen::Index>(i)), y_true[i] == Label::AD ? 1 : 0);
  long npos = 0;
  for (auto& [_, p] : pts) npos += p;
  const long nneg = static_cast<long>(pts.size()) - npos;
  if (npos == 0 || nneg == 0) fail(Errc::single_class, "roc_auc: need both classes in mask");

  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;  // sum of positive midranks (k + 0.5 values, exact)
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    while (j < pts.size() && pts[j].first == pts[i].first) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (pts[k].second) rank_sum_pos += midrank;
    i = j;
  }
  const double wins_plus_half_ties =
      rank_sum_pos - static_cast<double>(npos) * (static_cast<double>(npos) + 1.0) / 2.0;
  return wins_plus_half_ties / (static_cast<double>(npos) * static_cast<double>(nneg));
}

struct MetricsResult {
  double acc = 0.0, pre = 0.0, rec = 0.0, f1 = 0.0, auc = 0.0;
  Confusion conf;
  int n = 0;
  std::vector<std::string> flags;
};

inline MetricsResult compute_metrics(const std::vector<Label>& y_true,
                                     const std::vector<Label>& y_pred, const Vector& p_ad,
                                     const std::vector<std::uint8_t>& mask) {
  MetricsResult r;
  r.conf = confusion(y_true, y_pred, mask);
  const auto basic = prf(r.conf);
  r.acc = basic.acc;
  r.pre = basic.pre;
  r.rec = basic.rec;
  r.f1 = basic.f1;
  r.flags = basic.flags;
  r.n = static_cast<int>(r.conf.total());
  try {
    r.auc = roc_auc(p_ad, y_true, mask);
  } catch (const Error& e) {
    if (e.code() != Errc::single_class) throw;
    r.auc = 0.0;
    r.flags.push_back("auc_undefined");
  }
  return r;
}

inline nlohmann::json metrics_to_json(const MetricsResult& r) {
  nlohmann::json j;
  j["acc"] = r.acc;
  j["pre"] = r.pre;
  j["rec"] = r.rec;
  j["f1"] = r.f1;
  j["auc"] = r.auc;
  j["n"] = r.n;
  j["confusion"] = {{"tp", r.conf.tp}, {"fp", r.conf.fp}, {"fn", r.conf.fn}, {"tn", r.conf.tn}};
  j["flags"] = r.flags;
  return j;
}

/// ROC curve points (fpr, tpr) at every distinct score cut, for plot emission.
inline std::vector<std::pair<double, double>> roc_points(const Vector& scores,
                                                         const std::vector<Label>& y_true,
                                                         const std::vector<std::uint8_t>& mask) {
  std::vector<std::pair<double, int>> pts;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    if (mask[i]) pts.emplace_back(scores(static_cast<Eigen::Index>(i)), y_true[i] == Label::AD ? 1 : 0);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  long npos = 0;
  for (auto& [_, p] : pts) npos += p;
  const long nneg = static_cast<long>(pts.size()) - npos;
  std::vector<std::pair<double, double>> out{{0.0, 0.0}};
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    while (j < pts.size() && pts[j].first == pts[i].first) {
      (pts[j].second ? tp : fp)++;
      ++j;
    }
    out.emplace_back(nneg ? static_cast<double>(fp) / nneg : 0.0,
                     npos ? static_cast<double>(tp) / npos : 0.0);
    i = j;
  }
  return out;
}

}  // namespace dfcgcn
