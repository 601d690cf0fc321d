#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "dfcgcn/cohort.hpp"
#include "dfcgcn/common.hpp"
#include "dfcgcn/featsel_types.hpp"

namespace dfcgcn {

enum class EdgeDirection { ge, lt_paper };
enum class Symmetrize { or_both, and_both, mean_then_threshold };

inline std::string to_string(EdgeDirection d) { return d == EdgeDirection::ge ? "ge" : "lt_paper"; }
inline std::string to_string(Symmetrize s) {
  switch (s) {
    case Symmetrize::or_both: return "or";
    case Symmetrize::and_both: return "and";
    case Symmetrize::mean_then_threshold: return "mean_then_threshold";
  }
  return "?";
}

struct SimilarityConfig {
  double t = 0.0;
  EdgeDirection direction = EdgeDirection::ge;
  Symmetrize symmetrize = Symmetrize::or_both;
};

/// s(A_i, A_j) = 1 - sum (A_i - A_j)^2 / sum A_i^2, over all entries. For
/// binary inputs this is 1 - hamming / popcount(A_i); it is asymmetric in
/// (i, j) and may be negative. A_i must contain at least one 1.
inline double similarity(const BinaryMatrix& a, const BinaryMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(Errc::dimension_mismatch, "similarity: shapes differ");
  long diff = 0, pop = 0;
  const auto* pa = a.data();
  const auto* pb = b.data();
  const auto size = static_cast<std::size_t>(a.size());
  for (std::size_t k = 0; k < size; ++k) {
    pop += pa[k];
    diff += pa[k] != pb[k];
  }
  if (pop == 0) fail(Errc::degenerate_subject, "similarity: reference adjacency is all-zero");
  return 1.0 - static_cast<double>(diff) / static_cast<double>(pop);
}

/// All ordered pairwise similarities; diagonal is zero by convention.
inline Matrix similarity_matrix(const std::vector<BinaryMatrix>& adjacencies) {
  const int n = static_cast<int>(adjacencies.size());
  if (n < 2) fail(Errc::bad_dimension, "similarity_matrix: need at least 2 subjects");
  Matrix s = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) s(i, j) = similarity(adjacencies[static_cast<std::size_t>(i)], adjacencies[static_cast<std::size_t>(j)]);
  return s;
}

namespace detail {

/// The scalar each unordered pair is thresholded on; chosen so that
/// "test each direction, then symmetrize" collapses to one comparison.
inline double pair_stat(double sij, double sji, EdgeDirection dir, Symmetrize sym) {
  switch (sym) {
    case Symmetrize::or_both:
      return dir == EdgeDirection::ge ? std::max(sij, sji) : std::min(sij, sji);
    case Symmetrize::and_both:
      return dir == EdgeDirection::ge ? std::min(sij, sji) : std::max(sij, sji);
    case Symmetrize::mean_then_threshold:
      return 0.5 * (sij + sji);
  }
  return 0.0;
}

inline bool pair_edge(double stat, double t, EdgeDirection dir) {
  return dir == EdgeDirection::ge ? stat >= t : stat < t;
}

}  // namespace detail

/// Threshold a precomputed similarity matrix into a binary symmetric
/// zero-diagonal subject graph.
inline BinaryMatrix threshold_similarity(const Matrix& s, const SimilarityConfig& cfg) {
  if (s.rows() != s.cols()) fail(Errc::bad_dimension, "threshold_similarity: matrix not square");
  if (!std::isfinite(cfg.t)) fail(Errc::invalid_config, "threshold_similarity: t must be finite");
  const Eigen::Index n = s.rows();
  BinaryMatrix out = BinaryMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double stat = detail::pair_stat(s(i, j), s(j, i), cfg.direction, cfg.symmetrize);
      if (detail::pair_edge(stat, cfg.t, cfg.direction)) {
        out(i, j) = 1;
        out(j, i) = 1;
      }
    }
  return out;
}

inline BinaryMatrix build_similarity_graph(const std::vector<BinaryMatrix>& adjacencies,
                                           const SimilarityConfig& cfg) {
  return threshold_similarity(similarity_matrix(adjacencies), cfg);
}

/// Median (upper-median convention avoided: even counts average the two
/// central values) of an integer degree sequence.
inline double median_degree(const BinaryMatrix& graph) {
  std::vector<int> deg(static_cast<std::size_t>(graph.rows()), 0);
  for (Eigen::Index i = 0; i < graph.rows(); ++i)
    for (Eigen::Index j = 0; j < graph.cols(); ++j) deg[static_cast<std::size_t>(i)] += graph(i, j);
  std::sort(deg.begin(), deg.end());
  const std::size_t n = deg.size();
  if (n % 2 == 1) return deg[n / 2];
  return 0.5 * (deg[n / 2 - 1] + deg[n / 2]);
}

/// Pick the threshold whose graph has median degree closest to `target`,
/// scanning every distinct pair statistic. Ties prefer the sparser graph.
inline double choose_threshold_median_degree(const Matrix& s, EdgeDirection dir, Symmetrize sym,
                                             int target) {
  const Eigen::Index n = s.rows();
  std::vector<double> stats;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      stats.push_back(detail::pair_stat(s(i, j), s(j, i), dir, sym));
  std::sort(stats.begin(), stats.end());
  stats.erase(std::unique(stats.begin(), stats.end()), stats.end());
  if (stats.empty()) fail(Errc::bad_dimension, "choose_threshold: no candidate thresholds");

  // candidate cut points; for lt_paper also one past the largest stat
  std::vector<double> candidates = stats;
  if (dir == EdgeDirection::lt_paper)
    candidates.push_back(std::nextafter(stats.back(), std::numeric_limits<double>::infinity()));

  double best_t = candidates.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (double t : candidates) {
    SimilarityConfig cfg{t, dir, sym};
    const double med = median_degree(threshold_similarity(s, cfg));
    const double err = std::abs(med - target);
    const bool sparser = dir == EdgeDirection::ge ? t > best_t : t < best_t;
    if (err < best_err || (err == best_err && sparser)) {
      best_err = err;
      best_t = t;
    }
  }
  return best_t;
}

// ---------------------------------------------------------------------------
// Assembled population graph
// ---------------------------------------------------------------------------

struct PopulationGraph {
  BinaryMatrix s;  // binary symmetric subject-adjacency
  FeatureMatrix x;
  std::vector<Label> labels;
  SplitMasks masks;

  int n() const { return static_cast<int>(s.rows()); }
};

inline PopulationGraph assemble_graph(BinaryMatrix s, FeatureMatrix x, std::vector<Label> labels,
                                      SplitMasks masks) {
  const int n = static_cast<int>(s.rows());
  if (s.cols() != n) fail(Errc::dimension_mismatch, "assemble_graph: S not square");
  if (x.n() != n) fail(Errc::dimension_mismatch, "assemble_graph: feature rows != n");
  if (static_cast<int>(labels.size()) != n) fail(Errc::dimension_mismatch, "assemble_graph: labels != n");
  if (masks.n() != n) fail(Errc::dimension_mismatch, "assemble_graph: masks != n");
  for (int i = 0; i < n; ++i) {
    if (s(i, i) != 0) fail(Errc::invalid_config, "assemble_graph: S has nonzero diagonal");
    for (int j = 0; j < n; ++j) {
      if (s(i, j) != s(j, i)) fail(Errc::invalid_config, "assemble_graph: S not symmetric");
      if (s(i, j) > 1) fail(Errc::invalid_config, "assemble_graph: S entries must be 0/1");
    }
  }
  return PopulationGraph{std::move(s), std::move(x), std::move(labels), std::move(masks)};
}

}  // namespace dfcgcn
