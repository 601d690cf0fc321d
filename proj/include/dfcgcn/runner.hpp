#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "dfcgcn/pipeline.hpp"

namespace dfcgcn {

struct PipelineResult {
  std::vector<SeedRun> runs;
  GraphStage graph;
  nlohmann::json aggregate;
};

namespace detail {

/// Rethrow module errors with the failing pipeline stage prepended.
template <typename Fn>
auto with_stage(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const TrainDivergence&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), "stage " + stage + ": " + e.what());
  }
}

inline nlohmann::json aggregate_metrics(const std::vector<SeedRun>& runs) {
  nlohmann::json agg;
  agg["n_seeds"] = runs.size();
  nlohmann::json seeds = nlohmann::json::array();
  nlohmann::json per_seed = nlohmann::json::array();
  std::map<std::string, std::vector<double>> series;
  for (const auto& r : runs) {
    seeds.push_back(r.seed);
    nlohmann::json row = metrics_to_json(r.test_metrics);
    row["seed"] = r.seed;
    row["best_epoch"] = r.trained.best_epoch;
    per_seed.push_back(row);
    series["acc"].push_back(r.test_metrics.acc);
    series["pre"].push_back(r.test_metrics.pre);
    series["rec"].push_back(r.test_metrics.rec);
    series["f1"].push_back(r.test_metrics.f1);
    series["auc"].push_back(r.test_metrics.auc);
  }
  agg["seeds"] = seeds;
  nlohmann::json stats;
  for (const auto& [name, values] : series)
    stats[name] = {{"mean", mean_of(values)}, {"sd", sample_sd(values)}};
  agg["metrics"] = stats;
  agg["per_seed"] = per_seed;
  return agg;
}

inline std::string hex64(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace detail

/// Content hashes of the cohort manifest and every time-series file.
inline nlohmann::json cohort_input_hashes(const Cohort& cohort,
                                          const std::filesystem::path& manifest_path) {
  nlohmann::json j;
  const std::string manifest = csv::read_file(manifest_path);
  j["manifest_fnv1a64"] = detail::hex64(fnv1a64({manifest.data(), manifest.size()}));
  std::uint64_t combined = 0xcbf29ce484222325ull;
  for (int i = 0; i < cohort.n(); ++i) {
    const std::string data = csv::read_file(cohort.timeseries_path(i));
    combined = splitmix64(combined ^ fnv1a64({data.data(), data.size()}));
  }
  j["timeseries_fnv1a64"] = detail::hex64(combined);
  return j;
}

/// Full multi-seed pipeline on an on-disk cohort; writes every artifact under
/// cfg.output_dir and returns the in-memory results.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, bool quiet = true) {
  namespace fs = std::filesystem;
  if (cfg.cohort_manifest.empty()) fail(Errc::invalid_config, "pipeline: paths.cohort not set");
  if (cfg.output_dir.empty()) fail(Errc::invalid_config, "pipeline: paths.output_dir not set");

  const Cohort cohort = load_manifest(cfg.cohort_manifest);
  const auto series = load_all_timeseries(cohort);
  auto log = [&](const std::string& msg) {
    if (!quiet) std::cerr << "[pipeline] " << msg << "\n";
  };

  log("dynamic FC over " + std::to_string(cohort.n()) + " subjects");
  PipelineResult result;
  const DfcStage dfc = detail::with_stage("dfc", [&] { return run_dfc_stage(cohort, series, cfg); });
  result.graph = detail::with_stage("graph", [&] { return build_graph_stage(dfc, cfg); });
  log("similarity threshold t = " + std::to_string(result.graph.t_used));

  fs::create_directories(cfg.output_dir);
  artifacts::write_dfc(cfg.output_dir / "dfc", cohort, dfc);

  for (std::uint64_t seed : cfg.seeds) {
    log("seed " + std::to_string(seed));
    SeedRun run = detail::with_stage("train[seed " + std::to_string(seed) + "]",
                                     [&] { return run_seed(cohort, dfc, result.graph, cfg, seed); });
    artifacts::write_seed_run(cfg.output_dir / ("seed_" + std::to_string(seed)), cohort,
                              result.graph, run, cfg);
    result.runs.push_back(std::move(run));
  }

  result.aggregate = detail::aggregate_metrics(result.runs);
  csv::write_file(cfg.output_dir / "aggregate.json", result.aggregate.dump(2) + "\n");

  nlohmann::json manifest;
  manifest["tool"] = {{"name", "dfcgcn"}, {"version", "0.1.0"}};
  {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    manifest["created_utc"] = buf;
  }
  manifest["config"] = pipeline_config_to_json(cfg);
  manifest["inputs"] = cohort_input_hashes(cohort, cfg.cohort_manifest);
  manifest["graph"] = {{"t_used", result.graph.t_used}};
  manifest["zero_variance_events"] = dfc.zero_variance_events;
  csv::write_file(cfg.output_dir / "run_manifest.json", manifest.dump(2) + "\n");
  return result;
}

/// Evaluate a serialized model against a graph bundle directory.
inline MetricsResult evaluate_bundle(const std::filesystem::path& model_path,
                                     const std::filesystem::path& graph_dir) {
  nlohmann::json mj;
  try {
    mj = nlohmann::json::parse(csv::read_file(model_path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, "model: " + std::string(e.what()));
  }
  const GcnParams params = params_from_json(mj);
  const GraphBundle bundle = load_graph_bundle(graph_dir);
  if (params.w0.rows() != bundle.graph.x.values.cols())
    fail(Errc::dimension_mismatch, "model input width " + std::to_string(params.w0.rows()) +
                                       " != graph feature width " +
                                       std::to_string(bundle.graph.x.values.cols()));
  const Prediction pred = predict(bundle.graph, params);
  return compute_metrics(bundle.graph.labels, pred.labels, pred.p_ad, bundle.graph.masks.test);
}

}  // namespace dfcgcn
