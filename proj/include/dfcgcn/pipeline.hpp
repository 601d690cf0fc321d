#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "dfcgcn/cohort.hpp"
#include "dfcgcn/csv.hpp"
#include "dfcgcn/dfc.hpp"
#include "dfcgcn/featsel.hpp"
#include "dfcgcn/gcn.hpp"
#include "dfcgcn/metrics.hpp"
#include "dfcgcn/pipeline_config.hpp"
#include "dfcgcn/popgraph.hpp"
#include "dfcgcn/synth.hpp"

namespace dfcgcn {

// ---------------------------------------------------------------------------
// Stage 1: per-subject dynamic FC (seed-independent)
// ---------------------------------------------------------------------------

struct DfcStage {
  FeatureMatrix fc;                           // accumulated-FC features, cols fc_<i>_<j>
  std::vector<BinaryMatrix> supports;         // per subject
  std::vector<BinaryMatrix> graph_adjacency;  // object compared by the similarity
  int zero_variance_events = 0;
};

inline DfcStage run_dfc_stage(const Cohort& cohort, const std::vector<RoiTimeSeries>& series,
                              const PipelineConfig& cfg) {
  DfcStage out;
  const int n = cohort.n();
  const int n_pairs = cohort.roi_count * (cohort.roi_count - 1) / 2;
  out.fc.subject_ids = cohort.ids();
  out.fc.values.resize(n, n_pairs);
  for (int i = 0; i < cohort.roi_count; ++i)
    for (int j = i + 1; j < cohort.roi_count; ++j)
      out.fc.feature_names.push_back("fc_" + std::to_string(i) + "_" + std::to_string(j));
  for (int u = 0; u < n; ++u) {
    DfcResult dfc = compute_dfc(series[static_cast<std::size_t>(u)], cfg.window);
    out.fc.values.row(u) = dfc.fc_vector.transpose();
    out.zero_variance_events += dfc.zero_variance_events;
    out.graph_adjacency.push_back(cfg.similarity.features == GraphFeatures::window_stack
                                      ? window_stack(dfc)
                                      : dfc.support);
    out.supports.push_back(std::move(dfc.support));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stage 2: population graph (seed-independent)
// ---------------------------------------------------------------------------

struct GraphStage {
  BinaryMatrix s;
  double t_used = 0.0;
};

inline GraphStage build_graph_stage(const DfcStage& dfc, const PipelineConfig& cfg) {
  const Matrix sim = similarity_matrix(dfc.graph_adjacency);
  GraphStage out;
  out.t_used = cfg.similarity.t
                   ? *cfg.similarity.t
                   : choose_threshold_median_degree(sim, cfg.similarity.direction,
                                                    cfg.similarity.symmetrize,
                                                    cfg.similarity.auto_degree);
  out.s = threshold_similarity(
      sim, SimilarityConfig{out.t_used, cfg.similarity.direction, cfg.similarity.symmetrize});
  return out;
}

// ---------------------------------------------------------------------------
// Stage 3: per-seed selection, training, evaluation
// ---------------------------------------------------------------------------

/// Split + selection + feature assembly for one repetition seed.
struct SeedSelection {
  std::uint64_t seed = 0;
  SplitMasks masks;
  SelectionReport scalar_report;  // over scalar features
  SelectionReport fc_rf_report;   // over all FC pairs
  SelectionReport fc_rfe_report;  // over the rf-selected pairs
  std::vector<int> fc_selected;   // final FC columns in fc-vector space
  FeatureMatrix features;
};

struct SeedRun : SeedSelection {
  TrainResult trained;
  Prediction prediction;
  MetricsResult test_metrics;
};

inline SeedSelection run_selection(const Cohort& cohort, const DfcStage& dfc,
                                   const PipelineConfig& cfg, std::uint64_t seed) {
  SeedSelection run;
  run.seed = seed;
  const auto labels = cohort.labels();
  run.masks = split_masks(labels, cfg.split.ratios, seed);
  const std::vector<std::uint8_t> all_rows(static_cast<std::size_t>(cohort.n()), 1);
  const auto& fit_mask =
      cfg.selection.leakage == LeakageMode::train_only ? run.masks.train : all_rows;

  FeatureMatrix scalar_block;  // empty when scalars are disabled or none survive
  if (cfg.selection.use_scalars && !cohort.scalar_names().empty()) {
    const Matrix scalars = cohort.scalar_matrix();
    run.scalar_report = ttest_fdr_select(scalars, labels, fit_mask, cfg.selection.alpha);
    run.scalar_report.feature_names = cohort.scalar_names();
    FeatureMatrix all_scalars{scalars, cohort.scalar_names(), cohort.ids()};
    scalar_block = select_columns(all_scalars, run.scalar_report.selected);
  }

  FeatureMatrix fc_block;
  if (cfg.selection.use_fc) {
    std::vector<int> fit_rows;
    for (int i = 0; i < cohort.n(); ++i)
      if (fit_mask[static_cast<std::size_t>(i)]) fit_rows.push_back(i);
    Matrix fit_x(static_cast<Eigen::Index>(fit_rows.size()), dfc.fc.values.cols());
    std::vector<int> fit_y;
    std::vector<int> fit_pm1;
    for (std::size_t r = 0; r < fit_rows.size(); ++r) {
      fit_x.row(static_cast<Eigen::Index>(r)) = dfc.fc.values.row(fit_rows[r]);
      const bool ad = labels[static_cast<std::size_t>(fit_rows[r])] == Label::AD;
      fit_y.push_back(ad ? 0 : 1);
      fit_pm1.push_back(ad ? 1 : -1);
    }
    run.fc_rf_report = rf_importance(fit_x, fit_y, cfg.selection.rf_k, seed,
                                     ForestConfig{cfg.selection.rf_trees, 1});
    run.fc_rf_report.feature_names = dfc.fc.feature_names;

    Matrix top_x(fit_x.rows(), static_cast<Eigen::Index>(run.fc_rf_report.selected.size()));
    for (std::size_t k = 0; k < run.fc_rf_report.selected.size(); ++k)
      top_x.col(static_cast<Eigen::Index>(k)) = fit_x.col(run.fc_rf_report.selected[k]);
    run.fc_rfe_report = rfe_svm(top_x, fit_pm1, cfg.selection.rfe_target, seed,
                                SvmConfig{cfg.selection.svm_lambda, cfg.selection.svm_epochs});
    for (int k : run.fc_rfe_report.selected) {
      run.fc_selected.push_back(run.fc_rf_report.selected[static_cast<std::size_t>(k)]);
      run.fc_rfe_report.feature_names.push_back(
          dfc.fc.feature_names[static_cast<std::size_t>(run.fc_rf_report.selected[static_cast<std::size_t>(k)])]);
    }
    fc_block = select_columns(dfc.fc, run.fc_selected);
  }

  run.features = assemble_features(scalar_block, fc_block, run.masks.train);
  if (run.features.m() == 0)
    fail(Errc::bad_dimension, "selection produced an empty feature matrix");
  return run;
}

inline SeedRun run_seed(const Cohort& cohort, const DfcStage& dfc, const GraphStage& graph,
                        const PipelineConfig& cfg, std::uint64_t seed) {
  SeedRun run;
  static_cast<SeedSelection&>(run) = run_selection(cohort, dfc, cfg, seed);
  const auto labels = cohort.labels();
  TrainConfig tcfg = cfg.train;
  tcfg.seed = seed;
  const auto pg = assemble_graph(graph.s, run.features, labels, run.masks);
  run.trained = train(pg, tcfg);
  run.prediction = predict(pg, run.trained.params);
  run.test_metrics = compute_metrics(labels, run.prediction.labels, run.prediction.p_ad,
                                     run.masks.test);
  return run;
}

// ---------------------------------------------------------------------------
// Artifact writers
// ---------------------------------------------------------------------------

namespace artifacts {

namespace fs = std::filesystem;

inline void write_dfc(const fs::path& dir, const Cohort& cohort, const DfcStage& dfc) {
  fs::create_directories(dir / "support");
  csv::write_matrix(dir / "fc_vectors.csv", dfc.fc.values);
  {
    std::ofstream out(dir / "fc_columns.csv");
    out << "column,roi_i,roi_j\n";
    for (std::size_t c = 0; c < dfc.fc.feature_names.size(); ++c) {
      const auto [i, j] = upper_pair(static_cast<int>(c), cohort.roi_count);
      out << c << ',' << i << ',' << j << '\n';
    }
  }
  for (int u = 0; u < cohort.n(); ++u)
    csv::write_edge_list(dir / "support" / (cohort.subjects[static_cast<std::size_t>(u)].id + ".csv"),
                         dfc.supports[static_cast<std::size_t>(u)]);
}

inline nlohmann::json graph_sidecar(const BinaryMatrix& s, double t_used,
                                    const SimilarityOptions& opt) {
  std::vector<int> degree(static_cast<std::size_t>(s.rows()), 0);
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j) degree[static_cast<std::size_t>(i)] += s(i, j);
  const int max_deg = degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
  std::vector<int> hist(static_cast<std::size_t>(max_deg) + 1, 0);
  for (int d : degree) ++hist[static_cast<std::size_t>(d)];
  nlohmann::json j;
  j["n"] = s.rows();
  j["t_used"] = t_used;
  j["direction"] = to_string(opt.direction);
  j["symmetrize"] = to_string(opt.symmetrize);
  j["features"] = to_string(opt.features);
  j["degree_histogram"] = hist;
  return j;
}

inline void write_feature_matrix(const fs::path& path, const FeatureMatrix& x) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  out << "subject_id";
  for (const auto& name : x.feature_names) out << ',' << name;
  out << '\n';
  for (int i = 0; i < x.n(); ++i) {
    out << x.subject_ids[static_cast<std::size_t>(i)];
    for (int j = 0; j < x.m(); ++j) out << ',' << csv::format_double(x.values(i, j));
    out << '\n';
  }
}

inline FeatureMatrix read_feature_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(Errc::parse, "empty feature matrix: " + path.string());
  FeatureMatrix x;
  std::vector<std::string> header;
  std::stringstream hs(line);
  std::string tok;
  while (std::getline(hs, tok, ',')) header.push_back(tok);
  if (header.empty() || header[0] != "subject_id")
    fail(Errc::parse, "feature matrix must start with subject_id column");
  x.feature_names.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::getline(ls, tok, ',');
    x.subject_ids.push_back(tok);
    std::vector<double> row;
    while (std::getline(ls, tok, ',')) row.push_back(csv::parse_double(tok, path.string()));
    if (row.size() != x.feature_names.size()) fail(Errc::parse, "ragged feature matrix row");
    rows.push_back(std::move(row));
  }
  x.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(x.feature_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      x.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return x;
}

inline void write_subjects(const fs::path& path, const Cohort& cohort, const SplitMasks& masks) {
  std::ofstream out(path);
  out << "subject_id,label,split\n";
  for (int i = 0; i < cohort.n(); ++i) {
    const char* split = masks.train[static_cast<std::size_t>(i)] ? "train"
                        : masks.val[static_cast<std::size_t>(i)] ? "val"
                                                                 : "test";
    out << cohort.subjects[static_cast<std::size_t>(i)].id << ','
        << to_string(cohort.subjects[static_cast<std::size_t>(i)].label) << ',' << split << '\n';
  }
}

inline void write_history(const fs::path& path, const std::vector<EpochStats>& history) {
  std::ofstream out(path);
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& e : history)
    out << e.epoch << ',' << csv::format_double(e.train_loss) << ',' << csv::format_double(e.train_acc)
        << ',' << csv::format_double(e.val_loss) << ',' << csv::format_double(e.val_acc) << '\n';
}

inline void write_selection(const fs::path& dir, const SeedSelection& run) {
  fs::create_directories(dir);
  csv::write_file(dir / "selection_scalars.json", run.scalar_report.to_json().dump(2) + "\n");
  csv::write_file(dir / "selection_fc_rf.json", run.fc_rf_report.to_json().dump(2) + "\n");
  csv::write_file(dir / "selection_fc_rfe.json", run.fc_rfe_report.to_json().dump(2) + "\n");
  write_feature_matrix(dir / "feature_matrix.csv", run.features);
}

/// Everything eval needs: edges, features, labels, masks.
inline void write_graph_bundle(const fs::path& dir, const Cohort& cohort, const GraphStage& graph,
                               const SeedSelection& run, const PipelineConfig& cfg) {
  fs::create_directories(dir);
  csv::write_edge_list(dir / "edges.csv", graph.s);
  csv::write_file(dir / "graph.json",
                  graph_sidecar(graph.s, graph.t_used, cfg.similarity).dump(2) + "\n");
  write_feature_matrix(dir / "feature_matrix.csv", run.features);
  write_subjects(dir / "subjects.csv", cohort, run.masks);
}

inline void write_seed_run(const fs::path& dir, const Cohort& cohort, const GraphStage& graph,
                           const SeedRun& run, const PipelineConfig& cfg) {
  fs::create_directories(dir);
  csv::write_file(dir / "selection_scalars.json", run.scalar_report.to_json().dump(2) + "\n");
  csv::write_file(dir / "selection_fc_rf.json", run.fc_rf_report.to_json().dump(2) + "\n");
  csv::write_file(dir / "selection_fc_rfe.json", run.fc_rfe_report.to_json().dump(2) + "\n");
  write_graph_bundle(dir / "graph", cohort, graph, run, cfg);
  TrainConfig tcfg = cfg.train;
  tcfg.seed = run.seed;
  csv::write_file(dir / "model.json", params_to_json(run.trained.params, run.seed, tcfg).dump(2) + "\n");
  write_history(dir / "history.csv", run.trained.history);
  csv::write_file(dir / "metrics.json", metrics_to_json(run.test_metrics).dump(2) + "\n");
  {
    std::ofstream roc(dir / "roc_points.csv");
    roc << "fpr,tpr\n";
    for (auto [fpr, tpr] : roc_points(run.prediction.p_ad, cohort.labels(), run.masks.test))
      roc << csv::format_double(fpr) << ',' << csv::format_double(tpr) << '\n';
  }
}

}  // namespace artifacts

// ---------------------------------------------------------------------------
// Graph-bundle loading (for `eval`)
// ---------------------------------------------------------------------------

struct GraphBundle {
  PopulationGraph graph;
  std::vector<std::string> subject_ids;
};

inline GraphBundle load_graph_bundle(const std::filesystem::path& dir) {
  GraphBundle out;
  FeatureMatrix x = artifacts::read_feature_matrix(dir / "feature_matrix.csv");
  const int n = x.n();

  std::ifstream subj(dir / "subjects.csv");
  if (!subj) fail(Errc::io, "cannot open " + (dir / "subjects.csv").string());
  std::string line;
  std::getline(subj, line);  // header
  std::vector<Label> labels;
  SplitMasks masks;
  std::vector<std::string> ids;
  while (std::getline(subj, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string id, lab, split;
    std::getline(ls, id, ',');
    std::getline(ls, lab, ',');
    std::getline(ls, split, ',');
    ids.push_back(id);
    labels.push_back(label_from_string(lab));
    masks.train.push_back(split == "train");
    masks.val.push_back(split == "val");
    masks.test.push_back(split == "test");
  }
  if (static_cast<int>(ids.size()) != n || ids != x.subject_ids)
    fail(Errc::subject_mismatch, "graph bundle: subjects.csv does not match feature_matrix.csv");

  BinaryMatrix s = BinaryMatrix::Zero(n, n);
  std::ifstream edges(dir / "edges.csv");
  if (!edges) fail(Errc::io, "cannot open " + (dir / "edges.csv").string());
  while (std::getline(edges, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const int i = std::stoi(line.substr(0, comma));
    const int j = std::stoi(line.substr(comma + 1));
    if (i < 0 || j < 0 || i >= n || j >= n) fail(Errc::parse, "graph bundle: edge index out of range");
    s(i, j) = 1;
    s(j, i) = 1;
  }
  out.graph = assemble_graph(std::move(s), std::move(x), std::move(labels), std::move(masks));
  out.subject_ids = std::move(ids);
  return out;
}

}  // namespace dfcgcn
