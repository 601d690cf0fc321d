#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "dfcgcn/cohort.hpp"
#include "dfcgcn/common.hpp"

namespace dfcgcn {

enum class FcKind { pearson, fisher_z, thresholded };

/// Which values the |.| > tau test is applied to.
enum class ThresholdOn { fisher_z, correlation };

struct WindowConfig {
  int length = 39;   // L, time points per window
  int step = 5;      // s
  double tau = 0.3;  // threshold on |z| (or |c| with ThresholdOn::correlation)
  ThresholdOn threshold_on = ThresholdOn::fisher_z;
};

struct FcMatrix {
  Matrix values;
  FcKind kind = FcKind::pearson;

  Eigen::Index n() const { return values.rows(); }
};

struct DfcResult {
  std::vector<FcMatrix> windows;  // K thresholded matrices
  Matrix accumulated;             // elementwise sum over windows
  BinaryMatrix support;           // 1 where accumulated > 0
  Vector fc_vector;               // strict upper triangle of accumulated
  int zero_variance_events = 0;   // windows x columns with no variance
};

// ---------------------------------------------------------------------------
// Window enumeration: K = ceil((T-L)/s) + 1 ranges of length exactly L.
// When s does not divide T-L the final start is clamped to T-L, so the last
// window ends at T and all windows keep identical length.
// ---------------------------------------------------------------------------

inline std::vector<std::pair<int, int>> sliding_windows(int t_points, int length, int step) {
  if (length < 2) fail(Errc::bad_dimension, "window length must be >= 2");
  if (length > t_points) fail(Errc::bad_dimension, "window length exceeds series length");
  if (step < 1) fail(Errc::bad_dimension, "window step must be >= 1");
  const int span = t_points - length;
  const int k = (span + step - 1) / step + 1;  // ceil(span/step) + 1
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    int start = std::min(i * step, span);
    out.emplace_back(start, start + length);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-window Pearson correlation. Diagonal forced to zero; a zero-variance
// column yields zero correlations and bumps the caller's event counter.
// ---------------------------------------------------------------------------

inline FcMatrix window_fc(const RoiTimeSeries& ts, std::pair<int, int> range,
                          int* zero_variance_events = nullptr) {
  const auto [lo, hi] = range;
  if (lo < 0 || hi > ts.data.rows() || hi - lo < 2)
    fail(Errc::bad_dimension, "window range out of bounds");
  const Eigen::Index n = ts.data.cols();
  const Eigen::Index w = hi - lo;
  Matrix block = ts.data.middleRows(lo, w);
  Vector mean = block.colwise().mean();
  block.rowwise() -= mean.transpose();
  Vector ss = block.colwise().squaredNorm();

  FcMatrix out;
  out.kind = FcKind::pearson;
  out.values = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ss(i) == 0.0 && zero_variance_events) ++*zero_variance_events;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double denom = ss(i) * ss(j);
      double c = 0.0;
      if (denom > 0.0) {
        c = block.col(i).dot(block.col(j)) / std::sqrt(denom);
        c = std::clamp(c, -1.0, 1.0);
      }
      out.values(i, j) = c;
      out.values(j, i) = c;
    }
  }
  return out;
}

/// Elementwise atanh; |c| within 1e-7 of 1 is clamped so the result stays finite.
inline FcMatrix fisher_z(const FcMatrix& c) {
  if (c.kind != FcKind::pearson) fail(Errc::invalid_config, "fisher_z expects a pearson matrix");
  constexpr double kClamp = 1.0 - 1e-7;
  FcMatrix out;
  out.kind = FcKind::fisher_z;
  out.values =
      c.values.unaryExpr([kClamp](double v) { return std::atanh(std::clamp(v, -kClamp, kClamp)); });
  return out;
}

/// Eq-style magnitude threshold: keep |v| when strictly above tau, else 0.
inline FcMatrix threshold_abs(const FcMatrix& m, double tau) {
  if (tau < 0.0) fail(Errc::invalid_config, "tau must be >= 0");
  FcMatrix out;
  out.kind = FcKind::thresholded;
  out.values = m.values.unaryExpr([tau](double v) { return std::abs(v) > tau ? std::abs(v) : 0.0; });
  return out;
}

inline BinaryMatrix binarize(const FcMatrix& m) {
  if (m.kind != FcKind::thresholded) fail(Errc::invalid_config, "binarize expects a thresholded matrix");
  BinaryMatrix out(m.values.rows(), m.values.cols());
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j)
      out(i, j) = m.values(i, j) > 0.0 ? 1 : 0;
  return out;
}

/// Elementwise sum over windows, computed order-independently.
inline Matrix accumulate(const std::vector<FcMatrix>& windows) {
  if (windows.empty()) fail(Errc::bad_dimension, "accumulate: no windows");
  const Eigen::Index n = windows.front().values.rows();
  for (const auto& w : windows)
    if (w.values.rows() != n || w.values.cols() != n)
      fail(Errc::dimension_mismatch, "accumulate: window sizes differ");
  Matrix out(n, n);
  std::vector<double> terms(windows.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (std::size_t l = 0; l < windows.size(); ++l) terms[l] = windows[l].values(i, j);
      out(i, j) = stable_sum(terms);
    }
  return out;
}

/// Row-major strict upper triangle (i < j), length N(N-1)/2.
inline Vector vectorize_upper(const Matrix& m) {
  if (m.rows() != m.cols()) fail(Errc::bad_dimension, "vectorize_upper: matrix is not square");
  const Eigen::Index n = m.rows();
  Vector out(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) out(k++) = m(i, j);
  return out;
}

/// Inverse of vectorize_upper onto a symmetric zero-diagonal matrix.
inline Matrix devectorize_upper(const Vector& v, Eigen::Index n) {
  if (v.size() != n * (n - 1) / 2) fail(Errc::bad_dimension, "devectorize_upper: length mismatch");
  Matrix m = Matrix::Zero(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      m(i, j) = v(k);
      m(j, i) = v(k);
      ++k;
    }
  return m;
}

/// Column index of ROI pair (i, j), i < j, in the vectorized upper triangle.
inline int upper_index(int i, int j, int n) {
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

/// ROI pair (i, j) for a vectorized-upper-triangle column index.
inline std::pair<int, int> upper_pair(int index, int n) {
  int k = index;
  for (int i = 0; i < n; ++i) {
    const int row = n - i - 1;
    if (k < row) return {i, i + 1 + k};
    k -= row;
  }
  fail(Errc::bad_dimension, "upper_pair: index out of range");
}

// ---------------------------------------------------------------------------
// Full per-subject chain: window -> PCC -> (Fisher z) -> threshold, then
// accumulation, support, and vectorization.
// ---------------------------------------------------------------------------

inline DfcResult compute_dfc(const RoiTimeSeries& ts, const WindowConfig& cfg) {
  DfcResult res;
  for (auto range : sliding_windows(static_cast<int>(ts.data.rows()), cfg.length, cfg.step)) {
    FcMatrix c = window_fc(ts, range, &res.zero_variance_events);
    FcMatrix basis = cfg.threshold_on == ThresholdOn::fisher_z ? fisher_z(c) : std::move(c);
    res.windows.push_back(threshold_abs(basis, cfg.tau));
  }
  res.accumulated = accumulate(res.windows);
  res.support = BinaryMatrix(res.accumulated.rows(), res.accumulated.cols());
  for (Eigen::Index i = 0; i < res.accumulated.rows(); ++i)
    for (Eigen::Index j = 0; j < res.accumulated.cols(); ++j)
      res.support(i, j) = res.accumulated(i, j) > 0.0 ? 1 : 0;
  res.fc_vector = vectorize_upper(res.accumulated);
  return res;
}

/// Per-window binarized matrices stacked vertically into one (K*N) x N binary
/// matrix; the windowed counterpart of DfcResult::support.
inline BinaryMatrix window_stack(const DfcResult& dfc) {
  if (dfc.windows.empty()) fail(Errc::bad_dimension, "window_stack: no windows");
  const Eigen::Index n = dfc.windows.front().values.rows();
  BinaryMatrix out(static_cast<Eigen::Index>(dfc.windows.size()) * n, n);
  for (std::size_t l = 0; l < dfc.windows.size(); ++l)
    out.middleRows(static_cast<Eigen::Index>(l) * n, n) = binarize(dfc.windows[l]);
  return out;
}

// ---------------------------------------------------------------------------
// ROI-level ALFF: mean sqrt(periodogram PSD) over frequency bins inside the
// band, computed on the demeaned series with a direct per-bin DFT.
// ---------------------------------------------------------------------------

inline double roi_alff(const Vector& series, double dt,
                       std::pair<double, double> band = {0.01, 0.08}) {
  const Eigen::Index t = series.size();
  if (t < 8) fail(Errc::bad_dimension, "roi_alff: need T >= 8");
  const auto [lo, hi] = band;
  const double nyquist = 1.0 / (2.0 * dt);
  if (!(lo > 0.0) || !(lo < hi) || !(hi < nyquist))
    fail(Errc::invalid_config, "roi_alff: band must satisfy 0 < lo < hi < Nyquist");
  Vector x = series.array() - series.mean();
  double sum = 0.0;
  int bins = 0;
  for (Eigen::Index k = 1; k <= t / 2; ++k) {
    const double f = static_cast<double>(k) / (static_cast<double>(t) * dt);
    if (f < lo || f > hi) continue;
    double re = 0.0, im = 0.0;
    for (Eigen::Index i = 0; i < t; ++i) {
      const double phase = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(i) / static_cast<double>(t);
      re += x(i) * std::cos(phase);
      im += x(i) * std::sin(phase);
    }
    const double psd = 2.0 * dt / static_cast<double>(t) * (re * re + im * im);
    sum += std::sqrt(psd);
    ++bins;
  }
  if (bins == 0) fail(Errc::invalid_config, "roi_alff: no frequency bins inside band");
  return sum / bins;
}

}  // namespace dfcgcn
