#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/students_t.hpp>

#include "dfcgcn/stats.hpp"
#include "testutil.hpp"

using namespace dfcgcn;

TEST_CASE("welch_ttest: identical samples give t=0, p=1") {
  std::vector<double> a{1, 2, 3, 4};
  const auto r = welch_ttest(a, a);
  REQUIRE(r.t == 0.0);
  REQUIRE(r.p == Catch::Approx(1.0));
  std::vector<double> c{5, 5, 5};
  const auto rc = welch_ttest(c, c);
  REQUIRE(rc.t == 0.0);
  REQUIRE(rc.p == 1.0);
}

TEST_CASE("welch_ttest: cleanly separated samples give tiny p") {
  std::vector<double> a{0.0, 1e-6, -1e-6, 2e-6};
  std::vector<double> b{1.0, 1.0 + 1e-6, 1.0 - 1e-6, 1.0 + 2e-6};
  REQUIRE(welch_ttest(a, b).p < 1e-6);
}

TEST_CASE("welch_ttest: reference values from a high-precision oracle") {
  // (1..5) vs (3..7): Welch statistic is exactly -2 with df = 8 (SciPy
  // reference run: t = -2.0, p = 0.0805162380)
  std::vector<double> a{1, 2, 3, 4, 5};
  std::vector<double> b{3, 4, 5, 6, 7};
  const auto r = welch_ttest(a, b);
  REQUIRE(r.t == Catch::Approx(-2.0).margin(1e-12));
  REQUIRE(r.df == Catch::Approx(8.0).margin(1e-12));
  REQUIRE(r.p == Catch::Approx(0.0805162380).margin(1e-9));

  const auto r0 = welch_ttest(std::vector<double>{2.1, 3.4, 1.9, 4.2, 2.8, 3.1},
                              std::vector<double>{4.9, 5.3, 6.1, 4.4});
  REQUIRE(r0.t == Catch::Approx(-4.517545163644).margin(1e-9));
  REQUIRE(r0.p == Catch::Approx(0.002403304645).margin(1e-9));

  const auto r1 = welch_ttest(std::vector<double>{0.0, 0.1, -0.2, 0.05, 0.3},
                              std::vector<double>{0.02, -0.1, 0.2, 0.07, -0.3, 0.15});
  REQUIRE(r1.t == Catch::Approx(0.394192859268).margin(1e-9));
  REQUIRE(r1.p == Catch::Approx(0.702933976475).margin(1e-9));
}

TEST_CASE("welch_ttest: antisymmetry and affine invariance") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 5 + static_cast<int>(rng.below(10)); ++i) a.push_back(rng.normal());
    for (int i = 0; i < 5 + static_cast<int>(rng.below(10)); ++i) b.push_back(rng.normal() + 0.4);
    const auto ab = welch_ttest(a, b);
    const auto ba = welch_ttest(b, a);
    REQUIRE(ab.t == Catch::Approx(-ba.t).margin(1e-12));
    REQUIRE(ab.p == Catch::Approx(ba.p).margin(1e-12));

    auto scale = [&](std::vector<double> v) {
      for (double& x : v) x = 3.0 * x - 11.0;
      return v;
    };
    const auto scaled = welch_ttest(scale(a), scale(b));
    REQUIRE(scaled.p == Catch::Approx(ab.p).margin(1e-9));
  }
}

TEST_CASE("welch_ttest: degenerate inputs") {
  REQUIRE_THROWS_AS(welch_ttest(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), Error);
  // distinct constants: infinite statistic, zero p
  const auto r = welch_ttest(std::vector<double>{1, 1, 1}, std::vector<double>{2, 2, 2});
  REQUIRE(std::isinf(r.t));
  REQUIRE(r.p == 0.0);
}

TEST_CASE("student_t_sf2 agrees with Boost.Math across a grid") {
  for (double df : {1.0, 2.5, 4.0, 8.0, 15.0, 40.0, 120.0}) {
    boost::math::students_t dist(df);
    for (double t : {0.0, 0.3, 1.0, 2.0, 2.8284271247461903, 4.0, 7.5}) {
      const double expect = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
      REQUIRE(student_t_sf2(t, df) == Catch::Approx(expect).margin(1e-12));
    }
  }
  // frozen SciPy reference points
  REQUIRE(student_t_sf2(2.0, 8.0) == Catch::Approx(0.080516237957).margin(1e-10));
  REQUIRE(student_t_sf2(2.8284271247461903, 8.0) == Catch::Approx(0.022203904140).margin(1e-10));
  REQUIRE(student_t_sf2(0.5, 3.7) == Catch::Approx(0.645335633320).margin(1e-10));
  REQUIRE(student_t_sf2(4.0, 12.3) == Catch::Approx(0.001680089505).margin(1e-10));
}

TEST_CASE("bh_fdr: hand-executed example and degenerate vectors") {
  std::vector<double> p{0.001, 0.02, 0.03, 0.2};
  REQUIRE(bh_fdr(p, 0.05) == std::vector<std::uint8_t>{1, 1, 1, 0});
  std::vector<double> ones(5, 1.0);
  REQUIRE(bh_fdr(ones, 0.05) == std::vector<std::uint8_t>{0, 0, 0, 0, 0});
  std::vector<double> zeros(5, 0.0);
  REQUIRE(bh_fdr(zeros, 0.05) == std::vector<std::uint8_t>{1, 1, 1, 1, 1});
}

TEST_CASE("bh_fdr equals the brute-force step-up on random vectors") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(40));
    std::vector<double> p(static_cast<std::size_t>(m));
    for (double& x : p) x = rng.below(4) == 0 ? rng.uniform() * 0.02 : rng.uniform();
    const double alpha = 0.01 + 0.3 * rng.uniform();
    REQUIRE(bh_fdr(p, alpha) == oracle::bh_bruteforce(p, alpha));
  }
}

TEST_CASE("bh_fdr validates inputs") {
  REQUIRE_THROWS_AS(bh_fdr(std::vector<double>{0.5, 1.2}, 0.05), Error);
  REQUIRE_THROWS_AS(bh_fdr(std::vector<double>{0.5}, 0.0), Error);
}
