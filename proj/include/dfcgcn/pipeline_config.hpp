#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfcgcn/common.hpp"
#include "dfcgcn/dfc.hpp"
#include "dfcgcn/gcn.hpp"
#include "dfcgcn/popgraph.hpp"

namespace dfcgcn {

/// Which per-subject binary object the inter-subject similarity compares.
enum class GraphFeatures { window_stack, support };

inline std::string to_string(GraphFeatures g) {
  return g == GraphFeatures::window_stack ? "window_stack" : "support";
}

struct SimilarityOptions {
  std::optional<double> t;  // fixed threshold; unset -> calibrate by degree
  int auto_degree = 10;
  EdgeDirection direction = EdgeDirection::ge;
  Symmetrize symmetrize = Symmetrize::and_both;
  GraphFeatures features = GraphFeatures::window_stack;
};

enum class LeakageMode { train_only, whole_cohort };

inline std::string to_string(LeakageMode m) {
  return m == LeakageMode::train_only ? "train_only" : "whole_cohort";
}

struct SelectionOptions {
  double alpha = 0.05;
  int rf_trees = 200;
  int rf_k = 10;
  int rfe_target = 9;
  double svm_lambda = 0.01;
  int svm_epochs = 200;
  LeakageMode leakage = LeakageMode::train_only;
  bool use_scalars = true;
  bool use_fc = true;
};

struct SplitOptions {
  std::array<double, 3> ratios{6.0, 2.0, 2.0};
  std::uint64_t seed = 0;
};

struct PipelineConfig {
  WindowConfig window;
  SimilarityOptions similarity;
  SelectionOptions selection;
  TrainConfig train;
  SplitOptions split;
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path cohort_manifest;
  std::filesystem::path output_dir;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& known,
                       const std::string& where) {
  if (!j.is_object()) fail(Errc::invalid_config, "config: '" + where + "' must be an object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) fail(Errc::invalid_config, "config: unknown key '" + where + "." + key + "'");
}

}  // namespace detail

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                                const std::filesystem::path& config_dir = {}) {
  PipelineConfig cfg;
  detail::check_keys(j, {"window", "similarity", "selection", "train", "split", "seeds", "paths"}, "");
  try {
    if (j.contains("window")) {
      const auto& w = j["window"];
      detail::check_keys(w, {"length", "step", "tau", "threshold_on"}, "window");
      cfg.window.length = w.value("length", cfg.window.length);
      cfg.window.step = w.value("step", cfg.window.step);
      cfg.window.tau = w.value("tau", cfg.window.tau);
      if (w.contains("threshold_on")) {
        const auto s = w["threshold_on"].get<std::string>();
        if (s == "fisher_z") cfg.window.threshold_on = ThresholdOn::fisher_z;
        else if (s == "correlation") cfg.window.threshold_on = ThresholdOn::correlation;
        else fail(Errc::invalid_config, "config: window.threshold_on must be fisher_z|correlation");
      }
    }
    if (j.contains("similarity")) {
      const auto& s = j["similarity"];
      detail::check_keys(s, {"t", "auto_degree", "direction", "symmetrize", "features"}, "similarity");
      if (s.contains("t") && !s["t"].is_null()) cfg.similarity.t = s["t"].get<double>();
      cfg.similarity.auto_degree = s.value("auto_degree", cfg.similarity.auto_degree);
      if (s.contains("direction")) {
        const auto d = s["direction"].get<std::string>();
        if (d == "ge") cfg.similarity.direction = EdgeDirection::ge;
        else if (d == "lt_paper") cfg.similarity.direction = EdgeDirection::lt_paper;
        else fail(Errc::invalid_config, "config: similarity.direction must be ge|lt_paper");
      }
      if (s.contains("symmetrize")) {
        const auto m = s["symmetrize"].get<std::string>();
        if (m == "or") cfg.similarity.symmetrize = Symmetrize::or_both;
        else if (m == "and") cfg.similarity.symmetrize = Symmetrize::and_both;
        else if (m == "mean_then_threshold") cfg.similarity.symmetrize = Symmetrize::mean_then_threshold;
        else fail(Errc::invalid_config, "config: similarity.symmetrize must be or|and|mean_then_threshold");
      }
      if (s.contains("features")) {
        const auto f = s["features"].get<std::string>();
        if (f == "window_stack") cfg.similarity.features = GraphFeatures::window_stack;
        else if (f == "support") cfg.similarity.features = GraphFeatures::support;
        else fail(Errc::invalid_config, "config: similarity.features must be window_stack|support");
      }
    }
    if (j.contains("selection")) {
      const auto& s = j["selection"];
      detail::check_keys(s,
                         {"alpha", "rf_trees", "rf_k", "rfe_target", "svm_lambda", "svm_epochs",
                          "leakage_mode", "use_scalars", "use_fc"},
                         "selection");
      cfg.selection.alpha = s.value("alpha", cfg.selection.alpha);
      cfg.selection.rf_trees = s.value("rf_trees", cfg.selection.rf_trees);
      cfg.selection.rf_k = s.value("rf_k", cfg.selection.rf_k);
      cfg.selection.rfe_target = s.value("rfe_target", cfg.selection.rfe_target);
      cfg.selection.svm_lambda = s.value("svm_lambda", cfg.selection.svm_lambda);
      cfg.selection.svm_epochs = s.value("svm_epochs", cfg.selection.svm_epochs);
      if (s.contains("leakage_mode")) {
        const auto m = s["leakage_mode"].get<std::string>();
        if (m == "train_only") cfg.selection.leakage = LeakageMode::train_only;
        else if (m == "whole_cohort") cfg.selection.leakage = LeakageMode::whole_cohort;
        else fail(Errc::invalid_config, "config: selection.leakage_mode must be train_only|whole_cohort");
      }
      cfg.selection.use_scalars = s.value("use_scalars", cfg.selection.use_scalars);
      cfg.selection.use_fc = s.value("use_fc", cfg.selection.use_fc);
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      detail::check_keys(t,
                         {"lr", "dropout", "weight_decay", "epochs", "hidden", "seed", "adam_beta1",
                          "adam_beta2", "adam_eps"},
                         "train");
      cfg.train.lr = t.value("lr", cfg.train.lr);
      cfg.train.dropout = t.value("dropout", cfg.train.dropout);
      cfg.train.weight_decay = t.value("weight_decay", cfg.train.weight_decay);
      cfg.train.epochs = t.value("epochs", cfg.train.epochs);
      cfg.train.hidden = t.value("hidden", cfg.train.hidden);
      cfg.train.seed = t.value("seed", cfg.train.seed);
      cfg.train.adam_beta1 = t.value("adam_beta1", cfg.train.adam_beta1);
      cfg.train.adam_beta2 = t.value("adam_beta2", cfg.train.adam_beta2);
      cfg.train.adam_eps = t.value("adam_eps", cfg.train.adam_eps);
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      detail::check_keys(s, {"ratios", "seed"}, "split");
      if (s.contains("ratios")) {
        const auto r = s["ratios"].get<std::vector<double>>();
        if (r.size() != 3) fail(Errc::invalid_config, "config: split.ratios needs 3 entries");
        cfg.split.ratios = {r[0], r[1], r[2]};
      }
      cfg.split.seed = s.value("seed", cfg.split.seed);
    }
    if (j.contains("seeds")) {
      cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
      if (cfg.seeds.empty()) fail(Errc::invalid_config, "config: seeds must be non-empty");
    }
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      detail::check_keys(p, {"cohort", "output_dir"}, "paths");
      if (p.contains("cohort")) {
        std::filesystem::path c = p["cohort"].get<std::string>();
        cfg.cohort_manifest = c.is_absolute() ? c : config_dir / c;
      }
      if (p.contains("output_dir")) {
        std::filesystem::path o = p["output_dir"].get<std::string>();
        cfg.output_dir = o.is_absolute() ? o : config_dir / o;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, "config: " + std::string(e.what()));
  }
  cfg.train.validate();
  if (cfg.window.tau < 0.0) fail(Errc::invalid_config, "config: window.tau must be >= 0");
  if (cfg.selection.rf_k < cfg.selection.rfe_target)
    fail(Errc::invalid_config, "config: rf_k must be >= rfe_target");
  return cfg;
}

inline nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg) {
  nlohmann::json j;
  j["window"] = {{"length", cfg.window.length},
                 {"step", cfg.window.step},
                 {"tau", cfg.window.tau},
                 {"threshold_on",
                  cfg.window.threshold_on == ThresholdOn::fisher_z ? "fisher_z" : "correlation"}};
  j["similarity"] = {{"auto_degree", cfg.similarity.auto_degree},
                     {"direction", to_string(cfg.similarity.direction)},
                     {"symmetrize", to_string(cfg.similarity.symmetrize)},
                     {"features", to_string(cfg.similarity.features)}};
  if (cfg.similarity.t) j["similarity"]["t"] = *cfg.similarity.t;
  j["selection"] = {{"alpha", cfg.selection.alpha},
                    {"rf_trees", cfg.selection.rf_trees},
                    {"rf_k", cfg.selection.rf_k},
                    {"rfe_target", cfg.selection.rfe_target},
                    {"svm_lambda", cfg.selection.svm_lambda},
                    {"svm_epochs", cfg.selection.svm_epochs},
                    {"leakage_mode", to_string(cfg.selection.leakage)},
                    {"use_scalars", cfg.selection.use_scalars},
                    {"use_fc", cfg.selection.use_fc}};
  j["train"] = {{"lr", cfg.train.lr},
                {"dropout", cfg.train.dropout},
                {"weight_decay", cfg.train.weight_decay},
                {"epochs", cfg.train.epochs},
                {"hidden", cfg.train.hidden},
                {"seed", cfg.train.seed},
                {"adam_beta1", cfg.train.adam_beta1},
                {"adam_beta2", cfg.train.adam_beta2},
                {"adam_eps", cfg.train.adam_eps}};
  j["split"] = {{"ratios", cfg.split.ratios}, {"seed", cfg.split.seed}};
  j["seeds"] = cfg.seeds;
  j["paths"] = {{"cohort", cfg.cohort_manifest.string()},
                {"output_dir", cfg.output_dir.string()}};
  return j;
}

}  // namespace dfcgcn
