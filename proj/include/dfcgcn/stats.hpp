#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "dfcgcn/common.hpp"

namespace dfcgcn {

// ---------------------------------------------------------------------------
// Regularized incomplete beta via Lentz's continued fraction, the classic
// route to the Student-t tail.
// ---------------------------------------------------------------------------

namespace detail {

inline double beta_cont_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// I_x(a, b), the regularized incomplete beta function.
inline double incomplete_beta_reg(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) fail(Errc::invalid_config, "incomplete_beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cont_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_cont_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided Student-t tail probability, 2 * P(T_df > |t|).
inline double student_t_sf2(double t, double df) {
  if (!(df > 0.0)) fail(Errc::invalid_config, "student_t_sf2: df must be > 0");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta_reg(df / 2.0, 0.5, x);
}

// ---------------------------------------------------------------------------
// Welch two-sample t-test.
// ---------------------------------------------------------------------------

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

inline TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  if (a.size() < 2 || b.size() < 2) fail(Errc::bad_dimension, "welch_ttest: need >= 2 values per sample");

  auto mean_var = [](std::span<const double> xs, double n) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= n;
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return std::pair{m, v / (n - 1.0)};
  };
  const auto [ma, va] = mean_var(a, na);
  const auto [mb, vb] = mean_var(b, nb);

  TTestResult r;
  const double se2 = va / na + vb / nb;
  if (se2 == 0.0) {
    // both samples constant: identical means -> no evidence, else certain difference
    if (ma == mb) return {0.0, 1.0, na + nb - 2.0};
    return {ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity(),
            0.0, na + nb - 2.0};
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
  r.p = student_t_sf2(r.t, r.df);
  return r;
}

// ---------------------------------------------------------------------------
// Benjamini-Hochberg step-up FDR control.
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> bh_fdr(std::span<const double> pvals, double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) fail(Errc::invalid_config, "bh_fdr: alpha must be in (0,1)");
  const std::size_t m = pvals.size();
  for (double p : pvals)
    if (!(p >= 0.0) || !(p <= 1.0)) fail(Errc::invalid_config, "bh_fdr: p-values must lie in [0,1]");
  std::vector<double> sorted(pvals.begin(), pvals.end());
  std::sort(sorted.begin(), sorted.end());
  double cutoff = -1.0;
  for (std::size_t k = m; k >= 1; --k) {
    if (sorted[k - 1] <= static_cast<double>(k) * alpha / static_cast<double>(m)) {
      cutoff = sorted[k - 1];
      break;
    }
  }
  std::vector<std::uint8_t> reject(m, 0);
  if (cutoff >= 0.0)
    for (std::size_t i = 0; i < m; ++i) reject[i] = pvals[i] <= cutoff ? 1 : 0;
  return reject;
}

}  // namespace dfcgcn
