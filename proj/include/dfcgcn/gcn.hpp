#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfcgcn/common.hpp"
#include "dfcgcn/popgraph.hpp"

namespace dfcgcn {

struct TrainConfig {
  double lr = 0.06;
  double dropout = 0.5;
  double weight_decay = 0.0005;
  int epochs = 150;
  int hidden = 16;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const {
    if (!(lr >= 0.0)) fail(Errc::invalid_config, "train: lr must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail(Errc::invalid_config, "train: dropout must lie in [0,1)");
    if (epochs < 1) fail(Errc::invalid_config, "train: epochs must be >= 1");
    if (hidden < 1) fail(Errc::invalid_config, "train: hidden must be >= 1");
  }
};

struct GcnParams {
  Matrix w0;  // in_dim x hidden
  Matrix w1;  // hidden x 2
};

struct NormalizedAdjacency {
  Matrix values;  // D^{-1/2} (S + I) D^{-1/2}
};

/// Symmetric renormalization with self-loops. Degrees are >= 1, so the
/// result is always well defined; isolated nodes reduce to identity rows.
inline NormalizedAdjacency normalize_adjacency(const BinaryMatrix& s) {
  const Eigen::Index n = s.rows();
  if (s.cols() != n) fail(Errc::dimension_mismatch, "normalize_adjacency: S not square");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s(i, i) != 0) fail(Errc::invalid_config, "normalize_adjacency: diagonal must be zero");
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (s(i, j) != s(j, i)) fail(Errc::invalid_config, "normalize_adjacency: S not symmetric");
  }
  std::vector<long> degree(static_cast<std::size_t>(n), 1);  // self-loop
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) degree[static_cast<std::size_t>(i)] += s(i, j);
  NormalizedAdjacency out;
  out.values = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double shat = (i == j) ? 1.0 : static_cast<double>(s(i, j));
      if (shat != 0.0)
        out.values(i, j) = shat / std::sqrt(static_cast<double>(degree[static_cast<std::size_t>(i)]) *
                                            static_cast<double>(degree[static_cast<std::size_t>(j)]));
    }
  return out;
}

inline double elu(double z) { return z > 0.0 ? z : std::expm1(z); }
inline double elu_grad(double z) { return z > 0.0 ? 1.0 : std::exp(z); }

struct ForwardCache {
  Matrix anorm;       // propagation operator used
  Matrix m0, m1;      // dropout scale masks (all-ones in eval mode)
  Matrix ax;          // Anorm * drop(X)
  Matrix z0;          // ax * W0
  Matrix h1;          // ELU(z0)
  Matrix ah;          // Anorm * drop(h1)
  Matrix logits;      // ah * W1
  Matrix probs;       // row softmax
  bool training = false;
};

/// Two-layer propagation: H1 = ELU(A drop(X) W0), logits = A drop(H1) W1,
/// probabilities by row softmax. Dropout uses inverted scaling and fires only
/// in training mode; the mask stream is determined by `seed`. Matrix products
/// use order-canonical summation, so the pass is exactly permutation
/// equivariant when dropout is off.
inline ForwardCache forward(const Matrix& x, const NormalizedAdjacency& anorm,
                            const GcnParams& params, double dropout, bool training,
                            std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  if (anorm.values.rows() != n || anorm.values.cols() != n)
    fail(Errc::dimension_mismatch, "forward: adjacency size != feature rows");
  if (params.w0.rows() != x.cols()) fail(Errc::dimension_mismatch, "forward: W0 rows != in_dim");
  if (params.w1.rows() != params.w0.cols()) fail(Errc::dimension_mismatch, "forward: W1 rows != hidden");

  ForwardCache c;
  c.training = training;
  c.anorm = anorm.values;

  Rng rng(mix_seed(seed, 0x9d70f3u));
  const double keep = 1.0 - dropout;
  auto make_mask = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix m = Matrix::Ones(rows, cols);
    if (training && dropout > 0.0)
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return m;
  };

  c.m0 = make_mask(n, x.cols());
  c.ax = mul_stable(anorm.values, x.cwiseProduct(c.m0));
  c.z0 = mul_stable(c.ax, params.w0);
  c.h1 = c.z0.unaryExpr([](double z) { return elu(z); });
  c.m1 = make_mask(n, c.h1.cols());
  c.ah = mul_stable(anorm.values, c.h1.cwiseProduct(c.m1));
  c.logits = mul_stable(c.ah, params.w1);

  if (!c.logits.allFinite()) fail(Errc::non_finite, "forward: non-finite logits");
  c.probs.resize(n, c.logits.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = c.logits.row(i).maxCoeff();
    double denom = 0.0;
    for (Eigen::Index k = 0; k < c.logits.cols(); ++k) denom += std::exp(c.logits(i, k) - mx);
    for (Eigen::Index k = 0; k < c.logits.cols(); ++k)
      c.probs(i, k) = std::exp(c.logits(i, k) - mx) / denom;
  }
  return c;
}

inline int masked_count(const std::vector<std::uint8_t>& mask) {
  int n = 0;
  for (auto v : mask) n += v != 0;
  return n;
}

/// Masked mean cross-entropy plus (weight_decay / 2) * ||W||^2 over both layers.
inline double loss(const Matrix& probs, const std::vector<Label>& labels,
                   const std::vector<std::uint8_t>& mask, const GcnParams& params,
                   double weight_decay) {
  if (static_cast<Eigen::Index>(labels.size()) != probs.rows() || labels.size() != mask.size())
    fail(Errc::dimension_mismatch, "loss: label/mask sizes differ from probs");
  const int m = masked_count(mask);
  if (m == 0) fail(Errc::empty_mask, "loss: empty mask");
  double ce = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!mask[i]) continue;
    ce -= std::log(probs(static_cast<Eigen::Index>(i), static_cast<int>(labels[i])));
  }
  ce /= m;
  const double decay =
      0.5 * weight_decay * (params.w0.squaredNorm() + params.w1.squaredNorm());
  return ce + decay;
}

struct Gradients {
  Matrix dw0, dw1;
};

/// Exact gradients of `loss` with respect to both weight matrices, replaying
/// the cached dropout masks and ELU slopes from the forward pass.
inline Gradients backward(const ForwardCache& cache, const std::vector<Label>& labels,
                          const std::vector<std::uint8_t>& mask, const GcnParams& params,
                          double weight_decay) {
  const Eigen::Index n = cache.probs.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n || labels.size() != mask.size())
    fail(Errc::dimension_mismatch, "backward: label/mask sizes differ from cache");
  if (params.w0.rows() != cache.m0.cols() || params.w1.rows() != cache.h1.cols())
    fail(Errc::dimension_mismatch, "backward: params do not match cache");
  const int m = masked_count(mask);
  if (m == 0) fail(Errc::empty_mask, "backward: empty mask");

  Matrix r = Matrix::Zero(n, cache.probs.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    r.row(i) = cache.probs.row(i);
    r(i, static_cast<int>(labels[static_cast<std::size_t>(i)])) -= 1.0;
    r.row(i) /= static_cast<double>(m);
  }

  Gradients g;
  g.dw1 = mul_stable(cache.ah.transpose(), r) + weight_decay * params.w1;
  Matrix dh1d = mul_stable(cache.anorm, mul_stable(r, params.w1.transpose()));
  Matrix dz0 = dh1d.cwiseProduct(cache.m1)
                   .cwiseProduct(cache.z0.unaryExpr([](double z) { return elu_grad(z); }));
  g.dw0 = mul_stable(cache.ax.transpose(), dz0) + weight_decay * params.w0;
  return g;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
  Matrix m0, v0, m1, v1;

  static AdamState zeros_like(const GcnParams& p) {
    return {Matrix::Zero(p.w0.rows(), p.w0.cols()), Matrix::Zero(p.w0.rows(), p.w0.cols()),
            Matrix::Zero(p.w1.rows(), p.w1.cols()), Matrix::Zero(p.w1.rows(), p.w1.cols())};
  }
};

/// One bias-corrected Adam update; `step` counts from 1.
inline void adam_step(GcnParams& params, const Gradients& grads, AdamState& state, int step,
                      const TrainConfig& cfg) {
  if (step < 1) fail(Errc::invalid_config, "adam_step: step must be >= 1");
  auto update = [&](Matrix& w, const Matrix& g, Matrix& m, Matrix& v) {
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, step);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, step);
    Matrix mhat = m / bc1;
    Matrix denom = (v / bc2).cwiseSqrt();
    denom.array() += cfg.adam_eps;
    w -= cfg.lr * mhat.cwiseQuotient(denom);
  };
  update(params.w0, grads.dw0, state.m0, state.v0);
  update(params.w1, grads.dw1, state.m1, state.v1);
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0, train_acc = 0.0, val_loss = 0.0, val_acc = 0.0;
};

struct TrainResult {
  GcnParams params;  // best-validation-accuracy snapshot
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

class TrainDivergence : public Error {
 public:
  TrainDivergence(std::string what, std::vector<EpochStats> hist)
      : Error(Errc::divergence, std::move(what)), history(std::move(hist)) {}
  std::vector<EpochStats> history;
};

inline GcnParams glorot_init(Eigen::Index in_dim, int hidden, int out_dim, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x91075u));
  auto fill = [&](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = rng.uniform(-limit, limit);
    return w;
  };
  GcnParams p;
  p.w0 = fill(in_dim, hidden);
  p.w1 = fill(hidden, out_dim);
  return p;
}

inline double masked_accuracy(const Matrix& probs, const std::vector<Label>& labels,
                              const std::vector<std::uint8_t>& mask) {
  int hits = 0, total = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const int pred = probs(i, 1) > probs(i, 0) ? 1 : 0;  // tie -> class 0
    hits += pred == static_cast<int>(labels[static_cast<std::size_t>(i)]);
    ++total;
  }
  return total ? static_cast<double>(hits) / total : 0.0;
}

/// Full-batch transductive training. Each epoch draws fresh dropout masks,
/// steps Adam on the train-mask loss, then records eval-mode train/val curves.
/// Returns the parameters with the best validation accuracy (ties keep the
/// earlier epoch).
inline TrainResult train(const PopulationGraph& graph, const TrainConfig& cfg) {
  cfg.validate();
  if (masked_count(graph.masks.train) == 0) fail(Errc::empty_mask, "train: empty train mask");
  const NormalizedAdjacency anorm = normalize_adjacency(graph.s);
  const Matrix& x = graph.x.values;

  TrainResult res;
  GcnParams params = glorot_init(x.cols(), cfg.hidden, 2, cfg.seed);
  AdamState state = AdamState::zeros_like(params);
  res.params = params;
  double best_val = -1.0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    try {
      const auto cache =
          forward(x, anorm, params, cfg.dropout, true, mix_seed(cfg.seed, 0xe90cull + static_cast<std::uint64_t>(epoch)));
      const double train_loss = loss(cache.probs, graph.labels, graph.masks.train, params, cfg.weight_decay);
      if (!std::isfinite(train_loss)) throw Error(Errc::non_finite, "non-finite training loss");
      const auto grads = backward(cache, graph.labels, graph.masks.train, params, cfg.weight_decay);
      adam_step(params, grads, state, epoch, cfg);
      if (!params.w0.allFinite() || !params.w1.allFinite())
        throw Error(Errc::non_finite, "non-finite parameters");

      const auto eval = forward(x, anorm, params, 0.0, false, 0);
      EpochStats st;
      st.epoch = epoch;
      st.train_loss = loss(eval.probs, graph.labels, graph.masks.train, params, cfg.weight_decay);
      st.train_acc = masked_accuracy(eval.probs, graph.labels, graph.masks.train);
      if (masked_count(graph.masks.val) > 0) {
        st.val_loss = loss(eval.probs, graph.labels, graph.masks.val, params, cfg.weight_decay);
        st.val_acc = masked_accuracy(eval.probs, graph.labels, graph.masks.val);
      }
      res.history.push_back(st);
      if (st.val_acc > best_val) {
        best_val = st.val_acc;
        res.params = params;
        res.best_epoch = epoch;
      }
    } catch (const Error& e) {
      if (e.code() == Errc::non_finite)
        throw TrainDivergence("training diverged at epoch " + std::to_string(epoch) + ": " + e.what(),
                              res.history);
      throw;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

struct Prediction {
  std::vector<Label> labels;
  Vector p_ad;   // probability of the AD class, used for AUC
  Matrix probs;  // n x 2
};

inline Prediction predict(const Matrix& x, const NormalizedAdjacency& anorm,
                          const GcnParams& params) {
  const auto cache = forward(x, anorm, params, 0.0, false, 0);
  Prediction out;
  out.probs = cache.probs;
  out.p_ad = cache.probs.col(static_cast<int>(Label::AD));
  out.labels.reserve(static_cast<std::size_t>(cache.probs.rows()));
  for (Eigen::Index i = 0; i < cache.probs.rows(); ++i)
    out.labels.push_back(cache.probs(i, 1) > cache.probs(i, 0) ? Label::NC : Label::AD);
  return out;
}

inline Prediction predict(const PopulationGraph& graph, const GcnParams& params) {
  return predict(graph.x.values, normalize_adjacency(graph.s), params);
}

// ---------------------------------------------------------------------------
// Parameter serialization
// ---------------------------------------------------------------------------

inline nlohmann::json params_to_json(const GcnParams& p, std::uint64_t seed,
                                     const TrainConfig& cfg) {
  auto dump = [](const Matrix& w) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) out.push_back(w(i, j));
    return out;
  };
  nlohmann::json j;
  j["in_dim"] = p.w0.rows();
  j["hidden"] = p.w0.cols();
  j["out_dim"] = p.w1.cols();
  j["w0"] = dump(p.w0);
  j["w1"] = dump(p.w1);
  j["seed"] = seed;
  j["config"] = {{"lr", cfg.lr},
                 {"dropout", cfg.dropout},
                 {"weight_decay", cfg.weight_decay},
                 {"epochs", cfg.epochs},
                 {"hidden", cfg.hidden},
                 {"adam_beta1", cfg.adam_beta1},
                 {"adam_beta2", cfg.adam_beta2},
                 {"adam_eps", cfg.adam_eps}};
  return j;
}

inline GcnParams params_from_json(const nlohmann::json& j) {
  GcnParams p;
  const Eigen::Index in_dim = j.at("in_dim").get<Eigen::Index>();
  const Eigen::Index hidden = j.at("hidden").get<Eigen::Index>();
  const Eigen::Index out_dim = j.at("out_dim").get<Eigen::Index>();
  auto load = [](Matrix& w, const std::vector<double>& v) {
    if (static_cast<Eigen::Index>(v.size()) != w.size())
      fail(Errc::dimension_mismatch, "params: weight array length mismatch");
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j2 = 0; j2 < w.cols(); ++j2) w(i, j2) = v[k++];
  };
  p.w0.resize(in_dim, hidden);
  p.w1.resize(hidden, out_dim);
  load(p.w0, j.at("w0").get<std::vector<double>>());
  load(p.w1, j.at("w1").get<std::vector<double>>());
  return p;
}

}  // namespace dfcgcn
