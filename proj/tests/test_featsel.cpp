#include <catch2/catch_amalgamated.hpp>

#include "dfcgcn/featsel.hpp"

using namespace dfcgcn;

namespace {

FeatureMatrix block(int n, int m, const std::string& prefix, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix f;
  f.values.resize(n, m);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values.data()[i] = rng.normal();
  for (int j = 0; j < m; ++j) f.feature_names.push_back(prefix + std::to_string(j));
  for (int i = 0; i < n; ++i) f.subject_ids.push_back("s" + std::to_string(i));
  return f;
}

}  // namespace

TEST_CASE("assemble_features: 4 + 5 + 9 columns make an 18-wide matrix") {
  const int n = 12;
  auto scal = block(n, 9, "scal_", 1);   // stands in for 4 ALFF + 5 ReHo
  auto fc = block(n, 9, "fc_", 2);
  std::vector<std::uint8_t> train(n, 0);
  for (int i = 0; i < 8; ++i) train[static_cast<std::size_t>(i)] = 1;
  const auto x = assemble_features(scal, fc, train);
  REQUIRE(x.m() == 18);
  REQUIRE(x.feature_names.front() == "scal_0");
  REQUIRE(x.feature_names[9] == "fc_0");
  REQUIRE(x.feature_names.back() == "fc_8");
}

TEST_CASE("assemble_features: empty FC block leaves the scalar count") {
  const int n = 10;
  auto scal = block(n, 4, "scal_", 3);
  FeatureMatrix fc;
  std::vector<std::uint8_t> train(n, 1);
  const auto x = assemble_features(scal, fc, train);
  REQUIRE(x.m() == 4);
}

TEST_CASE("assemble_features standardizes on training rows only") {
  const int n = 16;
  auto scal = block(n, 3, "a_", 4);
  auto fc = block(n, 2, "b_", 5);
  std::vector<std::uint8_t> train(n, 0);
  for (int i = 0; i < 9; ++i) train[static_cast<std::size_t>(i)] = 1;
  const auto x = assemble_features(scal, fc, train);
  for (int j = 0; j < x.m(); ++j) {
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < 9; ++i) mean += x.values(i, j);
    mean /= 9.0;
    for (int i = 0; i < 9; ++i) var += (x.values(i, j) - mean) * (x.values(i, j) - mean);
    var /= 9.0;
    REQUIRE(mean == Catch::Approx(0.0).margin(1e-9));
    REQUIRE(var == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("assemble_features: subject mismatch and constant columns") {
  auto scal = block(8, 2, "a_", 6);
  auto fc = block(8, 2, "b_", 7);
  fc.subject_ids[3] = "other";
  std::vector<std::uint8_t> train(8, 1);
  REQUIRE_THROWS_MATCHES(assemble_features(scal, fc, train), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::subject_mismatch; }));

  auto fc2 = block(8, 2, "b_", 8);
  fc2.values.col(1).setConstant(3.0);
  std::vector<std::string> flags;
  const auto x = assemble_features(scal, fc2, train, &flags);
  REQUIRE(x.values.col(3).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(flags.size() == 1);
}

TEST_CASE("ttest_fdr_select finds separated scalar features") {
  const int n = 40;
  Rng rng(11);
  Matrix x(n, 5);
  std::vector<Label> labels;
  for (int i = 0; i < n; ++i) {
    const bool ad = i < n / 2;
    labels.push_back(ad ? Label::AD : Label::NC);
    x(i, 0) = (ad ? 2.0 : 0.0) + 0.5 * rng.normal();  // strong effect
    x(i, 1) = rng.normal();
    x(i, 2) = (ad ? 1.5 : 0.0) + 0.5 * rng.normal();  // strong effect
    x(i, 3) = rng.normal();
    x(i, 4) = rng.normal();
  }
  std::vector<std::uint8_t> mask(n, 1);
  const auto rep = ttest_fdr_select(x, labels, mask, 0.05);
  REQUIRE(std::find(rep.selected.begin(), rep.selected.end(), 0) != rep.selected.end());
  REQUIRE(std::find(rep.selected.begin(), rep.selected.end(), 2) != rep.selected.end());
  REQUIRE(rep.scores[0] > 0.0);  // AD mean higher -> positive t
  REQUIRE(rep.method == SelectionMethod::ttest_fdr);
}

TEST_CASE("selection report JSON schema") {
  SelectionReport rep;
  rep.method = SelectionMethod::rf_top_k;
  rep.selected = {1, 4};
  rep.scores = {0.1, 0.6, 0.0, 0.0, 0.3};
  rep.feature_names = {"a", "b", "c", "d", "e"};
  const auto j = rep.to_json();
  REQUIRE(j["method"] == "rf_top_k");
  REQUIRE(j["selected"].size() == 2);
  REQUIRE(j["scores"].size() == 5);
  REQUIRE(j["feature_names"][1] == "b");
}
