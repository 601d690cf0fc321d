#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "dfcgcn/cohort.hpp"
#include "dfcgcn/csv.hpp"
#include "testutil.hpp"

using namespace dfcgcn;
namespace fs = std::filesystem;

namespace {

json minimal_manifest() {
  return json{{"roi_count", 3},
              {"dt_seconds", 2.0},
              {"subjects",
               {{{"id", "s01"}, {"label", "AD"}, {"timeseries", "s01.csv"}, {"scalars", {{"alff_a", 0.5}}}},
                {{"id", "s02"}, {"label", "NC"}, {"timeseries", "s02.csv"}, {"scalars", {{"alff_a", -0.1}}}}}}};
}

fs::path write_manifest(const json& doc, const std::string& tag) {
  auto dir = oracle::fresh_tmp_dir(tag);
  csv::write_file(dir / "manifest.json", doc.dump(2));
  return dir / "manifest.json";
}

}  // namespace

TEST_CASE("load_manifest accepts a minimal two-subject cohort") {
  const auto path = write_manifest(minimal_manifest(), "manifest_ok");
  const Cohort c = load_manifest(path);
  REQUIRE(c.n() == 2);
  REQUIRE(c.subjects[0].id == "s01");
  REQUIRE(c.subjects[0].label == Label::AD);
  REQUIRE(c.subjects[1].label == Label::NC);
  REQUIRE(c.roi_count == 3);
  REQUIRE(c.scalar_names() == std::vector<std::string>{"alff_a"});
}

TEST_CASE("load_manifest rejects duplicate ids, bad labels, inconsistent scalars") {
  auto dup = minimal_manifest();
  dup["subjects"][1]["id"] = "s01";
  REQUIRE_THROWS_MATCHES(load_manifest(write_manifest(dup, "manifest_dup")), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::duplicate_id; }));

  auto lab = minimal_manifest();
  lab["subjects"][0]["label"] = "MCI";
  REQUIRE_THROWS_MATCHES(load_manifest(write_manifest(lab, "manifest_label")), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::unknown_label; }));

  auto scal = minimal_manifest();
  scal["subjects"][1]["scalars"] = {{"reho_b", 1.0}};
  REQUIRE_THROWS_MATCHES(load_manifest(write_manifest(scal, "manifest_scal")), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::inconsistent_scalars; }));

  REQUIRE_THROWS_AS(load_manifest("/nonexistent/manifest.json"), Error);
}

TEST_CASE("load_manifest handles a cohort at clinical scale") {
  json doc{{"roi_count", 4}, {"dt_seconds", 2.0}, {"subjects", json::array()}};
  for (int i = 0; i < 204; ++i) {
    doc["subjects"].push_back({{"id", "subj_" + std::to_string(i)},
                               {"label", i < 94 ? "AD" : "NC"},
                               {"timeseries", "x.csv"},
                               {"scalars", json::object()}});
  }
  const Cohort c = load_manifest(write_manifest(doc, "manifest_scale"));
  REQUIRE(c.n() == 204);
  int ad = 0;
  for (const auto& s : c.subjects) ad += s.label == Label::AD;
  REQUIRE(ad == 94);
  REQUIRE(c.n() - ad == 110);
}

TEST_CASE("save_manifest then load_manifest is the identity") {
  const auto path = write_manifest(minimal_manifest(), "manifest_rt");
  const Cohort a = load_manifest(path);
  const auto dir = oracle::fresh_tmp_dir("manifest_rt2");
  save_manifest(a, dir / "manifest.json");
  const Cohort b = load_manifest(dir / "manifest.json");
  REQUIRE(a.roi_count == b.roi_count);
  REQUIRE(a.dt_seconds == b.dt_seconds);
  REQUIRE(a.n() == b.n());
  for (int i = 0; i < a.n(); ++i) {
    REQUIRE(a.subjects[i].id == b.subjects[i].id);
    REQUIRE(a.subjects[i].label == b.subjects[i].label);
    REQUIRE(a.subjects[i].scalars == b.subjects[i].scalars);
    REQUIRE(a.subjects[i].timeseries == b.subjects[i].timeseries);
  }
}

TEST_CASE("load_timeseries parses plain CSV") {
  const auto dir = oracle::fresh_tmp_dir("ts");
  csv::write_file(dir / "ts.csv", "1,2\n2,3\n3,5\n");
  const auto ts = load_timeseries(dir / "ts.csv", 2.0, "s01");
  REQUIRE(ts.data.rows() == 3);
  REQUIRE(ts.data.cols() == 2);
  REQUIRE(ts.data(0, 0) == 1.0);
  REQUIRE(ts.data(2, 1) == 5.0);
  REQUIRE(ts.dt == 2.0);
}

TEST_CASE("load_timeseries rejects bad input") {
  const auto dir = oracle::fresh_tmp_dir("ts_bad");
  csv::write_file(dir / "nan.csv", "1,2\nnan,3\n");
  REQUIRE_THROWS_MATCHES(load_timeseries(dir / "nan.csv"), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::non_finite; }));
  csv::write_file(dir / "ragged.csv", "1,2\n3\n");
  REQUIRE_THROWS_AS(load_timeseries(dir / "ragged.csv"), Error);
  csv::write_file(dir / "alpha.csv", "1,2\n3,x\n");
  REQUIRE_THROWS_AS(load_timeseries(dir / "alpha.csv"), Error);
  csv::write_file(dir / "short.csv", "1,2\n");
  REQUIRE_THROWS_AS(load_timeseries(dir / "short.csv"), Error);
}

namespace {

std::vector<Label> alternating_labels(int n_ad, int n_nc) {
  std::vector<Label> labels;
  for (int i = 0; i < n_ad; ++i) labels.push_back(Label::AD);
  for (int i = 0; i < n_nc; ++i) labels.push_back(Label::NC);
  return labels;
}

int count_where(const std::vector<std::uint8_t>& mask, const std::vector<Label>& labels, Label want) {
  int c = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) c += mask[i] && labels[i] == want;
  return c;
}

}  // namespace

TEST_CASE("split_masks: 10 subjects, 6:2:2") {
  const auto labels = alternating_labels(5, 5);
  const auto masks = split_masks(labels, {6, 2, 2}, 0);
  REQUIRE(masks.count(masks.train) == 6);
  REQUIRE(masks.count(masks.val) == 2);
  REQUIRE(masks.count(masks.test) == 2);
  REQUIRE(count_where(masks.train, labels, Label::AD) == 3);
  REQUIRE(count_where(masks.val, labels, Label::AD) == 1);
  REQUIRE(count_where(masks.test, labels, Label::AD) == 1);
}

TEST_CASE("split_masks membership regression (seed 0)") {
  const auto labels = alternating_labels(5, 5);
  const auto masks = split_masks(labels, {6, 2, 2}, 0);
  // frozen from the first run; guards the exact deterministic membership
  std::vector<int> train, val, test;
  for (int i = 0; i < 10; ++i) {
    if (masks.train[i]) train.push_back(i);
    if (masks.val[i]) val.push_back(i);
    if (masks.test[i]) test.push_back(i);
  }
  REQUIRE(train == std::vector<int>{0, 1, 2, 5, 8, 9});
  REQUIRE(val == std::vector<int>{3, 7});
  REQUIRE(test == std::vector<int>{4, 6});
}

TEST_CASE("split_masks: 20 subjects at 3:1:6 gives 6/2/12") {
  const auto labels = alternating_labels(10, 10);
  const auto masks = split_masks(labels, {3, 1, 6}, 1);
  REQUIRE(masks.count(masks.train) == 6);
  REQUIRE(masks.count(masks.val) == 2);
  REQUIRE(masks.count(masks.test) == 12);
}

TEST_CASE("split_masks rejects infeasible requests") {
  REQUIRE_THROWS_MATCHES(split_masks(alternating_labels(5, 5), {10, 0, 0}, 0), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::infeasible_split; }));
  REQUIRE_THROWS_AS(split_masks(alternating_labels(1, 9), {6, 2, 2}, 0), Error);
  REQUIRE_THROWS_AS(split_masks(alternating_labels(2, 2), {1, 1, 1}, 0), Error);
}

TEST_CASE("split_masks properties: partition, proportionality, determinism") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const int n_ad = 3 + static_cast<int>(rng.below(40));
    const int n_nc = 3 + static_cast<int>(rng.below(40));
    std::array<double, 3> ratios{1.0 + double(rng.below(8)), 1.0 + double(rng.below(4)),
                                 1.0 + double(rng.below(8))};
    auto labels = alternating_labels(n_ad, n_nc);
    rng.shuffle(labels);
    const std::uint64_t seed = rng.u64();
    const auto masks = split_masks(labels, ratios, seed);

    for (int i = 0; i < n_ad + n_nc; ++i)
      REQUIRE(masks.train[i] + masks.val[i] + masks.test[i] == 1);

    const double total = ratios[0] + ratios[1] + ratios[2];
    const std::vector<double> rv{ratios[0], ratios[1], ratios[2]};
    for (Label lab : {Label::AD, Label::NC}) {
      const int nl = lab == Label::AD ? n_ad : n_nc;
      const auto plain = oracle::largest_remainder(nl, rv);
      const bool repaired = *std::min_element(plain.begin(), plain.end()) == 0;
      const std::vector<const std::vector<std::uint8_t>*> ms{&masks.train, &masks.val, &masks.test};
      for (int k = 0; k < 3; ++k) {
        const int got = count_where(*ms[k], labels, lab);
        REQUIRE(got >= 1);
        if (!repaired) {
          // matches plain largest-remainder, which stays within 1 of proportional
          REQUIRE(got == plain[k]);
          REQUIRE(std::abs(got - nl * ratios[k] / total) < 1.0 + 1e-12);
        }
      }
    }

    const auto again = split_masks(labels, ratios, seed);
    REQUIRE(again.train == masks.train);
    REQUIRE(again.val == masks.val);
    REQUIRE(again.test == masks.test);
  }
}
