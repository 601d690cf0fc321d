#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfcgcn/common.hpp"
#include "dfcgcn/csv.hpp"

namespace dfcgcn {

using json = nlohmann::json;

enum class Label : int { AD = 0, NC = 1 };

inline std::string to_string(Label l) { return l == Label::AD ? "AD" : "NC"; }

inline Label label_from_string(const std::string& s) {
  if (s == "AD") return Label::AD;
  if (s == "NC") return Label::NC;
  fail(Errc::unknown_label, "unknown label '" + s + "'");
}

struct Subject {
  std::string id;
  Label label = Label::NC;
  // name -> value, kept sorted by name (canonical order).
  std::vector<std::pair<std::string, double>> scalars;
  std::string timeseries;  // path relative to the manifest directory
};

struct RoiTimeSeries {
  std::string subject_id;
  Matrix data;  // T x N, rows = time points
  double dt = 1.0;
};

struct Cohort {
  int roi_count = 0;
  double dt_seconds = 1.0;
  std::vector<Subject> subjects;
  std::filesystem::path base_dir;

  int n() const { return static_cast<int>(subjects.size()); }

  std::vector<Label> labels() const {
    std::vector<Label> out;
    out.reserve(subjects.size());
    for (const auto& s : subjects) out.push_back(s.label);
    return out;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(subjects.size());
    for (const auto& s : subjects) out.push_back(s.id);
    return out;
  }

  std::vector<std::string> scalar_names() const {
    std::vector<std::string> out;
    if (!subjects.empty())
      for (const auto& [name, _] : subjects.front().scalars) out.push_back(name);
    return out;
  }

  /// n x (number of scalar features), manifest subject order.
  Matrix scalar_matrix() const {
    const auto m = subjects.empty() ? 0 : subjects.front().scalars.size();
    Matrix out(n(), static_cast<Eigen::Index>(m));
    for (int i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < m; ++j) out(i, static_cast<Eigen::Index>(j)) = subjects[i].scalars[j].second;
    return out;
  }

  std::filesystem::path timeseries_path(int i) const {
    return base_dir / subjects[static_cast<std::size_t>(i)].timeseries;
  }
};

struct SplitMasks {
  std::vector<std::uint8_t> train, val, test;

  int n() const { return static_cast<int>(train.size()); }
  int count(const std::vector<std::uint8_t>& m) const {
    return static_cast<int>(std::count(m.begin(), m.end(), std::uint8_t{1}));
  }
};

// ---------------------------------------------------------------------------
// Manifest I/O
// ---------------------------------------------------------------------------

inline void validate_cohort(const Cohort& c) {
  std::set<std::string> seen;
  std::vector<std::string> ref_names;
  for (const auto& s : c.subjects) {
    if (!seen.insert(s.id).second) fail(Errc::duplicate_id, "duplicate subject id '" + s.id + "'");
    std::vector<std::string> names;
    for (const auto& [name, _] : s.scalars) names.push_back(name);
    if (&s == &c.subjects.front())
      ref_names = names;
    else if (names != ref_names)
      fail(Errc::inconsistent_scalars, "scalar feature names differ for subject '" + s.id + "'");
  }
}

inline Cohort load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(Errc::io, "manifest not found: " + path.string());
  json doc;
  try {
    doc = json::parse(csv::read_file(path));
  } catch (const json::exception& e) {
    fail(Errc::parse, "manifest parse error: " + std::string(e.what()));
  }
  Cohort c;
  c.base_dir = path.parent_path();
  try {
    c.roi_count = doc.at("roi_count").get<int>();
    c.dt_seconds = doc.at("dt_seconds").get<double>();
    for (const auto& js : doc.at("subjects")) {
      Subject s;
      s.id = js.at("id").get<std::string>();
      s.label = label_from_string(js.at("label").get<std::string>());
      s.timeseries = js.at("timeseries").get<std::string>();
      for (const auto& [name, value] : js.at("scalars").items()) {
        if (!value.is_number()) fail(Errc::parse, "scalar '" + name + "' is not numeric");
        s.scalars.emplace_back(name, value.get<double>());
      }
      std::sort(s.scalars.begin(), s.scalars.end());
      c.subjects.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    fail(Errc::parse, "manifest schema error: " + std::string(e.what()));
  }
  if (c.roi_count < 2) fail(Errc::bad_dimension, "roi_count must be >= 2");
  validate_cohort(c);
  return c;
}

inline void save_manifest(const Cohort& c, const std::filesystem::path& path) {
  json doc;
  doc["roi_count"] = c.roi_count;
  doc["dt_seconds"] = c.dt_seconds;
  doc["subjects"] = json::array();
  for (const auto& s : c.subjects) {
    json js;
    js["id"] = s.id;
    js["label"] = to_string(s.label);
    js["timeseries"] = s.timeseries;
    json scal = json::object();
    for (const auto& [name, value] : s.scalars) scal[name] = value;
    js["scalars"] = scal;
    doc["subjects"].push_back(js);
  }
  csv::write_file(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Time series
// ---------------------------------------------------------------------------

inline RoiTimeSeries load_timeseries(const std::filesystem::path& path, double dt = 1.0,
                                     std::string subject_id = {}) {
  RoiTimeSeries ts;
  ts.subject_id = std::move(subject_id);
  ts.dt = dt;
  ts.data = csv::read_matrix(path);
  if (ts.data.rows() < 2) fail(Errc::bad_dimension, "time series needs T >= 2: " + path.string());
  if (ts.data.cols() < 2) fail(Errc::bad_dimension, "time series needs N >= 2: " + path.string());
  return ts;
}

/// Load every subject's series, checking the common ROI count.
inline std::vector<RoiTimeSeries> load_all_timeseries(const Cohort& c) {
  std::vector<RoiTimeSeries> out;
  out.reserve(c.subjects.size());
  for (int i = 0; i < c.n(); ++i) {
    auto ts = load_timeseries(c.timeseries_path(i), c.dt_seconds, c.subjects[static_cast<std::size_t>(i)].id);
    if (ts.data.cols() != c.roi_count)
      fail(Errc::bad_dimension, "subject '" + ts.subject_id + "' has " +
                                    std::to_string(ts.data.cols()) + " ROIs, manifest says " +
                                    std::to_string(c.roi_count));
    out.push_back(std::move(ts));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stratified splitting
// ---------------------------------------------------------------------------

namespace detail {

/// Largest-remainder apportionment of `count` into shares proportional to
/// `ratios`, then repaired so every share is >= 1 (callers guarantee
/// count >= ratios.size()). Remainder ties go to the earlier mask.
inline std::vector<int> apportion(int count, const std::vector<double>& ratios) {
  const int k = static_cast<int>(ratios.size());
  double total = 0.0;
  for (double r : ratios) total += r;
  std::vector<double> quota(static_cast<std::size_t>(k));
  std::vector<int> share(static_cast<std::size_t>(k));
  int assigned = 0;
  for (int i = 0; i < k; ++i) {
    quota[i] = count * ratios[i] / total;
    share[i] = static_cast<int>(std::floor(quota[i]));
    assigned += share[i];
  }
  std::vector<int> order(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return quota[a] - share[a] > quota[b] - share[b];
  });
  for (int r = 0; r < count - assigned; ++r) ++share[order[static_cast<std::size_t>(r % k)]];
  // repair zero shares by taking from the most over-allocated donor
  for (int i = 0; i < k; ++i) {
    while (share[i] == 0) {
      int donor = -1;
      double best = -1e300;
      for (int j = 0; j < k; ++j) {
        if (share[j] >= 2 && share[j] - quota[j] > best) {
          best = share[j] - quota[j];
          donor = j;
        }
      }
      if (donor < 0) fail(Errc::infeasible_split, "cannot place one subject of each label in every mask");
      --share[donor];
      ++share[i];
    }
  }
  return share;
}

}  // namespace detail

/// Stratified train/val/test masks: per-label largest-remainder apportionment
/// of the given ratios, membership shuffled deterministically by `seed`.
inline SplitMasks split_masks(const std::vector<Label>& labels,
                              const std::array<double, 3>& ratios, std::uint64_t seed) {
  const int n = static_cast<int>(labels.size());
  for (double r : ratios)
    if (!(r > 0.0) || !std::isfinite(r))
      fail(Errc::infeasible_split, "split ratios must be positive");
  if (n < 6) fail(Errc::infeasible_split, "need at least 3 subjects per label");

  SplitMasks masks;
  masks.train.assign(static_cast<std::size_t>(n), 0);
  masks.val.assign(static_cast<std::size_t>(n), 0);
  masks.test.assign(static_cast<std::size_t>(n), 0);

  Rng rng(seed);
  const std::vector<double> rv{ratios[0], ratios[1], ratios[2]};
  for (Label lab : {Label::AD, Label::NC}) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (labels[static_cast<std::size_t>(i)] == lab) idx.push_back(i);
    if (static_cast<int>(idx.size()) < 3)
      fail(Errc::infeasible_split, "fewer than 3 subjects with label " + to_string(lab));
    rng.shuffle(idx);
    auto share = detail::apportion(static_cast<int>(idx.size()), rv);
    int pos = 0;
    for (int i = 0; i < share[0]; ++i) masks.train[static_cast<std::size_t>(idx[static_cast<std::size_t>(pos++)])] = 1;
    for (int i = 0; i < share[1]; ++i) masks.val[static_cast<std::size_t>(idx[static_cast<std::size_t>(pos++)])] = 1;
    for (int i = 0; i < share[2]; ++i) masks.test[static_cast<std::size_t>(idx[static_cast<std::size_t>(pos++)])] = 1;
  }
  return masks;
}

}  // namespace dfcgcn
