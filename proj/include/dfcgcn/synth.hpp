#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfcgcn/cohort.hpp"
#include "dfcgcn/common.hpp"
#include "dfcgcn/csv.hpp"

namespace dfcgcn {

struct PlantedEdge {
  int i = 0;
  int j = 0;
  double delta_corr = 0.0;
};

struct PlantedScalar {
  std::string name;
  double delta_mean = 0.0;
  double sigma = 1.0;
};

struct SynthSpec {
  int n_per_group = 30;
  int n_rois = 20;
  int t_points = 200;
  double dt_seconds = 2.0;
  std::vector<PlantedEdge> planted_edges;
  std::vector<PlantedScalar> planted_scalars;
  double rho_base = 0.2;
  double ar_coeff = 0.5;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
};

struct GroundTruth {
  std::vector<std::pair<int, int>> planted_edges;
  std::vector<std::string> planted_scalars;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["planted_edges"] = nlohmann::json::array();
    for (auto [i, k] : planted_edges) j["planted_edges"].push_back({i, k});
    j["planted_scalars"] = planted_scalars;
    return j;
  }
};

struct SynthCohort {
  Cohort cohort;                    // timeseries paths filled in by write_cohort
  std::vector<Matrix> timeseries;   // per subject, T x N
  GroundTruth truth;
};

inline void validate_spec(const SynthSpec& spec) {
  if (spec.n_per_group < 1) fail(Errc::invalid_config, "synth: n_per_group must be >= 1");
  if (spec.n_rois < 2) fail(Errc::invalid_config, "synth: n_rois must be >= 2");
  if (spec.t_points < 2) fail(Errc::invalid_config, "synth: t_points must be >= 2");
  if (!(spec.dt_seconds > 0.0)) fail(Errc::invalid_config, "synth: dt_seconds must be > 0");
  if (!(spec.ar_coeff >= 0.0 && spec.ar_coeff < 1.0))
    fail(Errc::invalid_config, "synth: ar_coeff must lie in [0,1)");
  if (!(spec.noise_sigma > 0.0)) fail(Errc::invalid_config, "synth: noise_sigma must be > 0");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : spec.planted_edges) {
    if (!(0 <= e.i && e.i < e.j && e.j < spec.n_rois))
      fail(Errc::invalid_config, "synth: planted edge indices must satisfy i < j < n_rois");
    if (!seen.insert({e.i, e.j}).second) fail(Errc::invalid_config, "synth: duplicate planted edge");
    for (double rho : {spec.rho_base, spec.rho_base + e.delta_corr})
      if (!(rho > -1.0 && rho < 1.0))
        fail(Errc::invalid_config, "synth: base + delta correlation must stay inside (-1, 1)");
  }
  std::set<std::string> names;
  for (const auto& s : spec.planted_scalars) {
    if (s.name.empty()) fail(Errc::invalid_config, "synth: scalar feature name must be non-empty");
    if (!(s.sigma > 0.0)) fail(Errc::invalid_config, "synth: scalar sigma must be > 0");
    if (!names.insert(s.name).second) fail(Errc::invalid_config, "synth: duplicate scalar name");
  }
}

namespace detail {

/// Unit-variance stationary AR(1) path.
inline Vector ar1_path(int t, double phi, Rng& rng) {
  Vector f(t);
  f(0) = rng.normal();
  const double innov = std::sqrt(1.0 - phi * phi);
  for (int k = 1; k < t; ++k) f(k) = phi * f(k - 1) + innov * rng.normal();
  return f;
}

}  // namespace detail

/// Generate a two-group cohort. Each planted edge couples its two ROIs through
/// a shared AR(1) latent whose loading is solved per group so the population
/// correlation equals rho_base (NC) or rho_base + delta_corr (AD); every other
/// ROI pair is uncorrelated. Observation noise is i.i.d. Gaussian. Scalar
/// features are Normal(delta_mean, sigma) for AD and Normal(0, sigma) for NC.
/// Deterministic: subject u consumes the stream mix_seed(spec.seed, u).
inline SynthCohort generate_cohort(const SynthSpec& spec) {
  validate_spec(spec);
  SynthCohort out;
  out.cohort.roi_count = spec.n_rois;
  out.cohort.dt_seconds = spec.dt_seconds;

  for (const auto& e : spec.planted_edges) out.truth.planted_edges.emplace_back(e.i, e.j);
  for (const auto& s : spec.planted_scalars) out.truth.planted_scalars.push_back(s.name);

  const int n = 2 * spec.n_per_group;
  for (int u = 0; u < n; ++u) {
    const Label label = u < spec.n_per_group ? Label::AD : Label::NC;
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(u)));

    Matrix x(spec.t_points, spec.n_rois);
    for (int t = 0; t < spec.t_points; ++t)
      for (int r = 0; r < spec.n_rois; ++r) x(t, r) = spec.noise_sigma * rng.normal();

    for (const auto& e : spec.planted_edges) {
      const double rho = spec.rho_base + (label == Label::AD ? e.delta_corr : 0.0);
      const double mag = std::abs(rho);
      if (mag == 0.0) {
        // keep the stream layout identical across groups
        detail::ar1_path(spec.t_points, spec.ar_coeff, rng);
        continue;
      }
      const double loading = spec.noise_sigma * std::sqrt(mag / (1.0 - mag));
      const Vector f = detail::ar1_path(spec.t_points, spec.ar_coeff, rng);
      x.col(e.i) += loading * f;
      x.col(e.j) += (rho < 0.0 ? -loading : loading) * f;
    }

    Subject subj;
    subj.id = (label == Label::AD ? "ad_" : "nc_") + std::to_string(u % spec.n_per_group + 1000).substr(1);
    subj.label = label;
    for (const auto& s : spec.planted_scalars) {
      const double mu = label == Label::AD ? s.delta_mean : 0.0;
      subj.scalars.emplace_back(s.name, mu + s.sigma * rng.normal());
    }
    std::sort(subj.scalars.begin(), subj.scalars.end());
    subj.timeseries = "timeseries/" + subj.id + ".csv";
    out.cohort.subjects.push_back(std::move(subj));
    out.timeseries.push_back(std::move(x));
  }
  validate_cohort(out.cohort);
  return out;
}

/// Write manifest + per-subject CSVs + ground truth under `dir`. Output bytes
/// are a pure function of the spec.
inline void write_cohort(const SynthCohort& sc, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "timeseries");
  for (std::size_t u = 0; u < sc.timeseries.size(); ++u)
    csv::write_matrix(dir / sc.cohort.subjects[u].timeseries, sc.timeseries[u]);
  Cohort manifest_cohort = sc.cohort;
  manifest_cohort.base_dir = dir;
  save_manifest(manifest_cohort, dir / "manifest.json");
  csv::write_file(dir / "ground_truth.json", sc.truth.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Spec JSON (CLI input)
// ---------------------------------------------------------------------------

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec spec;
  std::set<std::string> known{"n_per_group", "n_rois",       "t_points",        "dt_seconds",
                              "planted_edges", "planted_scalars", "rho_base",    "ar_coeff",
                              "noise_sigma",  "seed"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) fail(Errc::invalid_config, "synth spec: unknown key '" + key + "'");
  try {
    spec.n_per_group = j.value("n_per_group", spec.n_per_group);
    spec.n_rois = j.value("n_rois", spec.n_rois);
    spec.t_points = j.value("t_points", spec.t_points);
    spec.dt_seconds = j.value("dt_seconds", spec.dt_seconds);
    spec.rho_base = j.value("rho_base", spec.rho_base);
    spec.ar_coeff = j.value("ar_coeff", spec.ar_coeff);
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    spec.seed = j.value("seed", spec.seed);
    for (const auto& je : j.value("planted_edges", nlohmann::json::array())) {
      PlantedEdge e;
      e.i = je.at("i").get<int>();
      e.j = je.at("j").get<int>();
      e.delta_corr = je.at("delta_corr").get<double>();
      spec.planted_edges.push_back(e);
    }
    for (const auto& js : j.value("planted_scalars", nlohmann::json::array())) {
      PlantedScalar s;
      s.name = js.at("name").get<std::string>();
      s.delta_mean = js.at("delta_mean").get<double>();
      s.sigma = js.value("sigma", 1.0);
      spec.planted_scalars.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, "synth spec: " + std::string(e.what()));
  }
  validate_spec(spec);
  return spec;
}

}  // namespace dfcgcn
