#include <catch2/catch_amalgamated.hpp>

#include "dfcgcn/metrics.hpp"
#include "testutil.hpp"

using namespace dfcgcn;

TEST_CASE("confusion: all correct, all wrong") {
  const std::vector<Label> truth{Label::AD, Label::NC, Label::AD};
  const std::vector<std::uint8_t> mask{1, 1, 1};
  const auto right = confusion(truth, truth, mask);
  REQUIRE(right.fp == 0);
  REQUIRE(right.fn == 0);
  REQUIRE(right.tp == 2);
  REQUIRE(right.tn == 1);

  const std::vector<Label> wrong{Label::NC, Label::AD, Label::NC};
  const auto bad = confusion(truth, wrong, mask);
  REQUIRE(bad.tp == 0);
  REQUIRE(bad.tn == 0);
  REQUIRE(bad.fp == 1);
  REQUIRE(bad.fn == 2);

  REQUIRE_THROWS_MATCHES(confusion(truth, truth, {0, 0, 0}), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::empty_mask; }));
}

TEST_CASE("prf reproduces the reference confusion row") {
  // tp=7 fp=0 fn=2 tn=14 -> ACC 91.3, PRE 100, REC 77.8, F1 87.5 (percent)
  const Confusion c{7, 0, 2, 14};
  const auto r = prf(c);
  REQUIRE(100.0 * r.acc == Catch::Approx(91.3).margin(0.05));
  REQUIRE(100.0 * r.pre == Catch::Approx(100.0).margin(0.05));
  REQUIRE(100.0 * r.rec == Catch::Approx(77.8).margin(0.05));
  REQUIRE(100.0 * r.f1 == Catch::Approx(87.5).margin(0.05));
  REQUIRE(r.flags.empty());
}

TEST_CASE("prf conventions for undefined ratios") {
  const Confusion no_pred{0, 0, 3, 5};
  const auto r = prf(no_pred);
  REQUIRE(r.pre == 0.0);
  REQUIRE(std::find(r.flags.begin(), r.flags.end(), "precision_undefined") != r.flags.end());

  const Confusion perfect{4, 0, 0, 6};
  const auto p = prf(perfect);
  REQUIRE(p.acc == 1.0);
  REQUIRE(p.pre == 1.0);
  REQUIRE(p.rec == 1.0);
  REQUIRE(p.f1 == 1.0);
}

TEST_CASE("prf outputs stay in [0,1]; f1 lies between pre and rec") {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    Confusion c{long(rng.below(20)), long(rng.below(20)), long(rng.below(20)), long(rng.below(20))};
    if (c.total() == 0) c.tn = 1;
    const auto r = prf(c);
    for (double v : {r.acc, r.pre, r.rec, r.f1}) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
    if (r.pre > 0.0 && r.rec > 0.0) {
      REQUIRE(r.f1 >= std::min(r.pre, r.rec) - 1e-12);
      REQUIRE(r.f1 <= std::max(r.pre, r.rec) + 1e-12);
    }
  }
}

namespace {

Vector to_vec(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

}  // namespace

TEST_CASE("roc_auc: pinned cases") {
  const std::vector<Label> sep{Label::AD, Label::AD, Label::NC, Label::NC};
  const std::vector<std::uint8_t> mask{1, 1, 1, 1};
  REQUIRE(roc_auc(to_vec({0.9, 0.8, 0.2, 0.1}), sep, mask) == 1.0);
  REQUIRE(roc_auc(to_vec({0.5, 0.5, 0.5, 0.5}), sep, mask) == 0.5);

  const std::vector<Label> three{Label::AD, Label::NC, Label::AD};
  REQUIRE(roc_auc(to_vec({0.9, 0.8, 0.3}), three, {1, 1, 1}) == 0.5);

  REQUIRE_THROWS_MATCHES(roc_auc(to_vec({0.5, 0.4}), {Label::AD, Label::AD}, {1, 1}), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::single_class; }));
}

TEST_CASE("roc_auc equals brute-force pair counting, including ties") {
  Rng rng(20);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(30));
    std::vector<double> scores;
    std::vector<int> pos;
    std::vector<Label> labels;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 1);
    for (int i = 0; i < n; ++i) {
      // coarse grid forces plenty of ties
      scores.push_back(static_cast<double>(rng.below(6)) / 5.0);
      pos.push_back(rng.below(2) == 0 ? 1 : 0);
      labels.push_back(pos.back() ? Label::AD : Label::NC);
    }
    if (std::count(pos.begin(), pos.end(), 1) == 0) { pos[0] = 1; labels[0] = Label::AD; }
    if (std::count(pos.begin(), pos.end(), 0) == 0) { pos[1] = 0; labels[1] = Label::NC; }
    REQUIRE(roc_auc(to_vec(scores), labels, mask) == oracle::auc_paircount(scores, pos));
  }
}

TEST_CASE("roc_auc: monotone-transform invariance and complement identity") {
  Rng rng(30);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(20));
    std::vector<double> scores;
    std::vector<Label> labels;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 1);
    for (int i = 0; i < n; ++i) {
      scores.push_back(rng.normal());
      labels.push_back(i % 2 ? Label::NC : Label::AD);
    }
    const double base = roc_auc(to_vec(scores), labels, mask);
    std::vector<double> warped = scores;
    for (double& s : warped) s = std::exp(2.0 * s) + 3.0;  // strictly increasing
    REQUIRE(roc_auc(to_vec(warped), labels, mask) == base);
    std::vector<double> negated = scores;
    for (double& s : negated) s = -s;
    // continuous scores: no ties, so the complement identity is exact
    REQUIRE(roc_auc(to_vec(negated), labels, mask) == Catch::Approx(1.0 - base).margin(1e-12));
  }
}

TEST_CASE("compute_metrics bundles everything and emits schema-stable JSON") {
  const std::vector<Label> truth{Label::AD, Label::AD, Label::NC, Label::NC, Label::AD};
  const std::vector<Label> pred{Label::AD, Label::NC, Label::NC, Label::AD, Label::AD};
  const Vector p_ad = to_vec({0.8, 0.4, 0.3, 0.6, 0.9});
  const std::vector<std::uint8_t> mask{1, 1, 1, 1, 1};
  const auto m = compute_metrics(truth, pred, p_ad, mask);
  REQUIRE(m.n == 5);
  REQUIRE(m.conf.tp == 2);
  REQUIRE(m.conf.fn == 1);
  REQUIRE(m.conf.fp == 1);
  REQUIRE(m.conf.tn == 1);
  const auto j = metrics_to_json(m);
  for (const auto* key : {"acc", "pre", "rec", "f1", "auc", "n", "confusion", "flags"})
    REQUIRE(j.contains(key));
  REQUIRE(j["confusion"]["tp"] == 2);
}

TEST_CASE("roc_points spans (0,0) to (1,1)") {
  const std::vector<Label> truth{Label::AD, Label::NC, Label::AD, Label::NC};
  const Vector s = to_vec({0.9, 0.7, 0.7, 0.1});
  const auto pts = roc_points(s, truth, {1, 1, 1, 1});
  REQUIRE(pts.front() == std::pair<double, double>{0.0, 0.0});
  REQUIRE(pts.back() == std::pair<double, double>{1.0, 1.0});
}
