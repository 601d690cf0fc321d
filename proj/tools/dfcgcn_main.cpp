// dfcgcn: sliding-window dynamic functional connectivity + population-graph
// GCN classification pipeline over subject cohorts.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "dfcgcn/dfcgcn.hpp"

namespace fs = std::filesystem;
using namespace dfcgcn;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

PipelineConfig load_config(const std::string& path) {
  if (path.empty()) fail(Errc::invalid_config, "--config is required for this command");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, "config: " + std::string(e.what()));
  }
  return pipeline_config_from_json(j, fs::path(path).parent_path());
}

struct StageInputs {
  Cohort cohort;
  std::vector<RoiTimeSeries> series;
};

StageInputs load_inputs(const PipelineConfig& cfg) {
  if (cfg.cohort_manifest.empty()) fail(Errc::invalid_config, "config: paths.cohort not set");
  StageInputs in;
  in.cohort = load_manifest(cfg.cohort_manifest);
  in.series = load_all_timeseries(in.cohort);
  return in;
}

int run_synth(const std::string& spec_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, bool quiet) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_file(spec_path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, "synth spec: " + std::string(e.what()));
  }
  SynthSpec spec = synth_spec_from_json(j);
  if (seed) spec.seed = *seed;
  const SynthCohort cohort = generate_cohort(spec);
  write_cohort(cohort, out_dir);
  if (!quiet)
    std::cerr << "[synth] wrote " << cohort.cohort.n() << " subjects to " << out_dir << "\n";
  return 0;
}

int run_dfc_cmd(const PipelineConfig& cfg, const fs::path& out, bool alff, bool quiet) {
  const auto in = load_inputs(cfg);
  const DfcStage dfc = run_dfc_stage(in.cohort, in.series, cfg);
  fs::create_directories(out);
  artifacts::write_dfc(out / "dfc", in.cohort, dfc);
  if (alff) {
    Matrix a(in.cohort.n(), in.cohort.roi_count);
    for (int u = 0; u < in.cohort.n(); ++u)
      for (int r = 0; r < in.cohort.roi_count; ++r)
        a(u, r) = roi_alff(in.series[static_cast<std::size_t>(u)].data.col(r), in.cohort.dt_seconds);
    csv::write_matrix(out / "dfc" / "alff.csv", a);
  }
  if (!quiet) std::cerr << "[dfc] wrote " << (out / "dfc") << "\n";
  return 0;
}

std::uint64_t stage_seed(const PipelineConfig& cfg, std::optional<std::uint64_t> seed) {
  return seed.value_or(cfg.train.seed);
}

enum class Stage { features, graph, train };

int run_stage_cmd(const PipelineConfig& cfg, const fs::path& out,
                  std::optional<std::uint64_t> seed, Stage stage, bool quiet) {
  const auto in = load_inputs(cfg);
  const DfcStage dfc = run_dfc_stage(in.cohort, in.series, cfg);
  const std::uint64_t s = stage_seed(cfg, seed);
  fs::create_directories(out);
  artifacts::write_dfc(out / "dfc", in.cohort, dfc);
  if (stage == Stage::features) {
    artifacts::write_selection(out, run_selection(in.cohort, dfc, cfg, s));
    if (!quiet) std::cerr << "[features] wrote selection reports to " << out << "\n";
    return 0;
  }
  const GraphStage graph = build_graph_stage(dfc, cfg);
  if (stage == Stage::graph) {
    const SeedSelection sel = run_selection(in.cohort, dfc, cfg, s);
    artifacts::write_selection(out, sel);
    artifacts::write_graph_bundle(out / "graph", in.cohort, graph, sel, cfg);
    if (!quiet) std::cerr << "[graph] wrote " << (out / "graph") << "\n";
    return 0;
  }
  const SeedRun run = run_seed(in.cohort, dfc, graph, cfg, s);
  artifacts::write_seed_run(out / ("seed_" + std::to_string(s)), in.cohort, graph, run, cfg);
  if (!quiet) {
    std::cerr << "[train] best epoch " << run.trained.best_epoch << ", test metrics: "
              << metrics_to_json(run.test_metrics).dump() << "\n";
  }
  return 0;
}

int run_eval(const std::string& model, const std::string& graph_dir, const std::string& out,
             bool quiet) {
  const MetricsResult m = evaluate_bundle(model, graph_dir);
  const std::string doc = metrics_to_json(m).dump(2) + "\n";
  if (!out.empty())
    csv::write_file(out, doc);
  else
    std::cout << doc;
  if (!quiet && !out.empty()) std::cerr << "[eval] wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic functional connectivity + population-graph GCN pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir, spec_path, model_path, graph_path, eval_out;
  std::optional<std::uint64_t> seed;
  bool quiet = false, alff = false;
  app.add_flag("--quiet,-q", quiet, "suppress progress output");

  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort with planted effects");
  synth->add_option("--spec", spec_path, "synthesis spec JSON")->required();
  synth->add_option("--out", out_dir, "output cohort directory")->required();
  synth->add_option("--seed", seed, "override the spec seed");

  auto add_config_out = [&](CLI::App* cmd, bool seed_opt) {
    cmd->add_option("--config", config_path, "pipeline config JSON")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides paths.output_dir)");
    if (seed_opt) cmd->add_option("--seed", seed, "override the stage seed");
  };

  auto* dfc_cmd = app.add_subcommand("dfc", "sliding-window FC features and supports");
  add_config_out(dfc_cmd, false);
  dfc_cmd->add_flag("--alff", alff, "also emit per-ROI ALFF values");

  auto* features = app.add_subcommand("features", "feature selection for one seed");
  add_config_out(features, true);
  auto* graph = app.add_subcommand("graph", "population graph bundle for one seed");
  add_config_out(graph, true);
  auto* train_cmd = app.add_subcommand("train", "train + evaluate one seed");
  add_config_out(train_cmd, true);
  auto* pipeline = app.add_subcommand("pipeline", "full multi-seed pipeline with aggregate");
  add_config_out(pipeline, false);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a stored model on a graph bundle");
  eval_cmd->add_option("--model", model_path, "model.json path")->required();
  eval_cmd->add_option("--graph", graph_path, "graph bundle directory")->required();
  eval_cmd->add_option("--out", eval_out, "write metrics JSON here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(spec_path, out_dir, seed, quiet);

    if (eval_cmd->parsed()) return run_eval(model_path, graph_path, eval_out, quiet);

    PipelineConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (cfg.output_dir.empty()) fail(Errc::invalid_config, "no output directory (set --out or paths.output_dir)");

    if (dfc_cmd->parsed()) return run_dfc_cmd(cfg, cfg.output_dir, alff, quiet);
    if (features->parsed()) return run_stage_cmd(cfg, cfg.output_dir, seed, Stage::features, quiet);
    if (graph->parsed()) return run_stage_cmd(cfg, cfg.output_dir, seed, Stage::graph, quiet);
    if (train_cmd->parsed()) return run_stage_cmd(cfg, cfg.output_dir, seed, Stage::train, quiet);
    if (pipeline->parsed()) {
      run_pipeline(cfg, quiet);
      return 0;
    }
  } catch (const TrainDivergence& e) {
    std::cerr << "error (divergence): " << e.what() << "\n";
    return kExitRuntime;
  } catch (const Error& e) {
    const bool runtime = e.code() == Errc::divergence || e.code() == Errc::non_finite;
    std::cerr << "error: " << e.what() << "\n";
    return runtime ? kExitRuntime : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
