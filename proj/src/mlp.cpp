#include "zsl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <omp.h>

#include "zsl/error.hpp"
#include "zsl/metrics.hpp"

namespace zsl {

namespace {

constexpr double kLogitClamp = 30.0;  // keeps sigmoid strictly inside (0,1)
constexpr std::size_t kChunk = 8;     // fixed reduction chunk; results are
                                      // identical for any thread count

inline double sigmoid(double z) {
  z = std::clamp(z, -kLogitClamp, kLogitClamp);
  return 1.0 / (1.0 + std::exp(-z));
}

// Per-sample activations for the backward pass.
struct Workspace {
  std::vector<std::vector<double>> pre;  // pre-activations per layer
  std::vector<std::vector<double>> act;  // post-activation (after dropout)
};

double forward_into(const MlpModel& model, std::span<const double> x,
                    const std::vector<std::vector<double>>* masks,
                    Workspace* ws) {
  const std::size_t L = model.n_layers();
  std::vector<double> cur(x.begin(), x.end());
  if (ws) {
    ws->pre.assign(L, {});
    ws->act.assign(L + 1, {});
    ws->act[0] = cur;
  }
  for (std::size_t l = 0; l < L; ++l) {
    const Matrix& W = model.weights[l];
    const auto& b = model.biases[l];
    std::vector<double> z(W.rows, 0.0);
    for (std::size_t r = 0; r < W.rows; ++r) {
      double acc = b[r];
      const double* wr = W.a.data() + r * W.cols;
      for (std::size_t c = 0; c < W.cols; ++c) acc += wr[c] * cur[c];
      z[r] = acc;
    }
    if (ws) ws->pre[l] = z;
    if (l + 1 == L) {
      double p = sigmoid(z[0]);
      if (ws) ws->act[l + 1] = {p};
      return p;
    }
    for (std::size_t r = 0; r < z.size(); ++r) {
      double a = z[r] > 0.0 ? z[r] : 0.0;
      if (masks) a *= (*masks)[l][r];
      z[r] = a;
    }
    if (ws) ws->act[l + 1] = z;
    cur = std::move(z);
  }
  return 0.0;  // unreachable
}

// Accumulates raw (unscaled) gradients of BCE for one sample.
void backward_into(const MlpModel& model, const Workspace& ws, int y,
                   const std::vector<std::vector<double>>* masks,
                   Gradients& g) {
  const std::size_t L = model.n_layers();
  const double p = ws.act[L][0];
  std::vector<double> delta = {p - static_cast<double>(y)};
  for (std::size_t l = L; l-- > 0;) {
    const Matrix& W = model.weights[l];
    const auto& a_prev = ws.act[l];
    for (std::size_t r = 0; r < W.rows; ++r) {
      const double d = delta[r];
      g.b[l][r] += d;
      double* gr = g.w[l].a.data() + r * W.cols;
      for (std::size_t c = 0; c < W.cols; ++c) gr[c] += d * a_prev[c];
    }
    if (l == 0) break;
    std::vector<double> prev(W.cols, 0.0);
    for (std::size_t r = 0; r < W.rows; ++r) {
      const double d = delta[r];
      const double* wr = W.a.data() + r * W.cols;
      for (std::size_t c = 0; c < W.cols; ++c) prev[c] += wr[c] * d;
    }
    // Backward through rectifier and the dropout mask of layer l-1.
    const auto& pre = ws.pre[l - 1];
    for (std::size_t c = 0; c < prev.size(); ++c) {
      double m = masks ? (*masks)[l - 1][c] : 1.0;
      prev[c] = pre[c] > 0.0 ? prev[c] * m : 0.0;
    }
    delta = std::move(prev);
  }
}

Gradients zero_gradients(const MlpModel& model) {
  Gradients g;
  g.w.reserve(model.n_layers());
  g.b.reserve(model.n_layers());
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    g.w.emplace_back(model.weights[l].rows, model.weights[l].cols);
    g.b.emplace_back(model.biases[l].size(), 0.0);
  }
  return g;
}

void add_scaled(Gradients& dst, const Gradients& src, double scale) {
  for (std::size_t l = 0; l < dst.w.size(); ++l) {
    for (std::size_t i = 0; i < dst.w[l].a.size(); ++i)
      dst.w[l].a[i] += scale * src.w[l].a[i];
    for (std::size_t i = 0; i < dst.b[l].size(); ++i)
      dst.b[l][i] += scale * src.b[l][i];
  }
}

struct BatchSample {
  const std::vector<double>* x;
  int y;
  const std::vector<std::vector<double>>* masks;  // null in infer mode
};

// Mean-BCE gradients over the batch. Per-sample gradients are summed within
// fixed-size chunks and the chunk partials are combined in chunk order, so
// the result does not depend on the thread count.
double batch_gradients(const MlpModel& model,
                       const std::vector<BatchSample>& batch, Gradients& out,
                       int threads) {
  const std::size_t B = batch.size();
  const std::size_t n_chunks = (B + kChunk - 1) / kChunk;
  std::vector<Gradients> partial(n_chunks);
  std::vector<double> loss_partial(n_chunks, 0.0);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, threads))
  for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(n_chunks); ++ci) {
    auto& g = partial[static_cast<std::size_t>(ci)];
    g = zero_gradients(model);
    Workspace ws;
    const std::size_t begin = static_cast<std::size_t>(ci) * kChunk;
    const std::size_t end = std::min(B, begin + kChunk);
    for (std::size_t s = begin; s < end; ++s) {
      const auto& smp = batch[s];
      double p = forward_into(model, *smp.x, smp.masks, &ws);
      loss_partial[static_cast<std::size_t>(ci)] += bce_loss(p, smp.y);
      backward_into(model, ws, smp.y, smp.masks, g);
    }
  }
  out = zero_gradients(model);
  double loss_sum = 0.0;
  const double inv = 1.0 / static_cast<double>(B);
  for (std::size_t ci = 0; ci < n_chunks; ++ci) {
    add_scaled(out, partial[ci], inv);
    loss_sum += loss_partial[ci];
  }
  return loss_sum * inv;
}

// Mean BCE over a sample set, infer mode, chunk-ordered reduction.
double mean_loss(const MlpModel& model,
                 const std::vector<std::vector<double>>& xs,
                 const std::vector<int>& ys,
                 const std::vector<std::size_t>& idx, int threads) {
  if (idx.empty()) return 0.0;
  const std::size_t n = idx.size();
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(n_chunks, 0.0);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, threads))
  for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(n_chunks); ++ci) {
    const std::size_t begin = static_cast<std::size_t>(ci) * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    double acc = 0.0;
    for (std::size_t s = begin; s < end; ++s) {
      double p = forward_into(model, xs[idx[s]], nullptr, nullptr);
      acc += bce_loss(p, ys[idx[s]]);
    }
    partial[static_cast<std::size_t>(ci)] = acc;
  }
  double sum = 0.0;
  for (double v : partial) sum += v;
  return sum / static_cast<double>(n);
}

bool grads_finite(const Gradients& g) {
  for (const auto& m : g.w)
    for (double v : m.a)
      if (!std::isfinite(v)) return false;
  for (const auto& b : g.b)
    for (double v : b)
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.a.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

std::vector<double> MlpModel::normalized(std::span<const double> x) const {
  std::vector<double> out(x.begin(), x.end());
  if (feat_mean.size() == out.size()) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (out[i] - feat_mean[i]) / feat_scale[i];
  }
  return out;
}

MlpModel init_model(std::size_t input_dim, std::uint64_t seed,
                    const std::vector<std::size_t>& hidden, double dropout) {
  if (input_dim == 0) throw UsageError("init_model: input_dim must be >= 1");
  for (std::size_t h : hidden)
    if (h == 0) throw UsageError("init_model: hidden layer size must be >= 1");

  MlpModel model;
  model.layout.push_back(input_dim);
  model.layout.insert(model.layout.end(), hidden.begin(), hidden.end());
  model.layout.push_back(1);
  model.dropout_rate = dropout;
  model.seed = seed;

  Rng rng = make_rng(seed, "mlp-init");
  for (std::size_t l = 0; l + 1 < model.layout.size(); ++l) {
    const std::size_t fan_in = model.layout[l];
    const std::size_t fan_out = model.layout[l + 1];
    Matrix W(fan_out, fan_in);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> uni(-bound, bound);
    for (auto& w : W.a) w = uni(rng);
    model.weights.push_back(std::move(W));
    model.biases.emplace_back(fan_out, 0.0);
  }
  return model;
}

double forward(const MlpModel& model, std::span<const double> x,
               ForwardMode mode, Rng* rng) {
  if (x.size() != model.input_dim())
    throw DataError("forward: input has " + std::to_string(x.size()) +
                    " entries, model expects " +
                    std::to_string(model.input_dim()));
  if (mode == ForwardMode::Infer)
    return forward_into(model, x, nullptr, nullptr);
  if (!rng) throw UsageError("forward: train mode requires an RNG");

  const double keep = 1.0 - model.dropout_rate;
  std::vector<std::vector<double>> masks(model.n_layers() - 1);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < model.layout.size() - 1; ++l) {
    masks[l].resize(model.layout[l + 1]);
    for (auto& m : masks[l]) m = uni(*rng) < keep ? 1.0 / keep : 0.0;
  }
  return forward_into(model, x, &masks, nullptr);
}

double bce_loss(double p, int y) {
  p = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state) {
  if (grads.w.size() != model.n_layers())
    throw DataError("adam_step: gradient shape mismatch");
  if (!grads_finite(grads))
    throw NumericError("adam_step: non-finite gradient; aborting run");
  if (state.m_w.empty()) {
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
      state.m_w.emplace_back(model.weights[l].rows, model.weights[l].cols);
      state.v_w.emplace_back(model.weights[l].rows, model.weights[l].cols);
      state.m_b.emplace_back(model.biases[l].size(), 0.0);
      state.v_b.emplace_back(model.biases[l].size(), 0.0);
    }
  }
  const auto& c = state.config;
  state.t += 1;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  auto update = [&](double& theta, double g, double& m, double& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    theta -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
  };
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    auto& W = model.weights[l];
    for (std::size_t i = 0; i < W.a.size(); ++i)
      update(W.a[i], grads.w[l].a[i], state.m_w[l].a[i], state.v_w[l].a[i]);
    auto& b = model.biases[l];
    for (std::size_t i = 0; i < b.size(); ++i)
      update(b[i], grads.b[l][i], state.m_b[l][i], state.v_b[l][i]);
  }
}

TrainResult train(const std::vector<FeatureVector>& pos,
                  const std::vector<FeatureVector>& neg,
                  const TrainConfig& config, std::uint64_t seed) {
  if (pos.empty() || neg.empty())
    throw DataError("train: positive and negative vector lists must be "
                    "non-empty");
  if (pos.size() != neg.size())
    throw DataError("train: balanced inputs required, got " +
                    std::to_string(pos.size()) + " positive and " +
                    std::to_string(neg.size()) + " negative vectors");
  const std::size_t dim = pos.front().values.size();
  for (const auto& v : pos)
    if (v.values.size() != dim)
      throw DataError("train: inconsistent vector dimensions");
  for (const auto& v : neg)
    if (v.values.size() != dim)
      throw DataError("train: inconsistent vector dimensions");
  if (config.split_train <= 0.0 || config.split_val < 0.0 ||
      config.split_train + config.split_val >= 1.0 + 1e-12)
    throw UsageError("train: invalid split fractions");

  const std::size_t n = pos.size() + neg.size();
  std::vector<const std::vector<double>*> raw(n);
  std::vector<int> ys(n);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    raw[i] = &pos[i].values;
    ys[i] = 1;
  }
  for (std::size_t i = 0; i < neg.size(); ++i) {
    raw[pos.size() + i] = &neg[i].values;
    ys[pos.size() + i] = 0;
  }

  // Shuffled split; partition sizes are the rounded fractions.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  {
    Rng rng = make_rng(seed, "train-shuffle");
    std::shuffle(order.begin(), order.end(), rng);
  }
  const auto n_train = static_cast<std::size_t>(
      std::lround(config.split_train * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(
      std::lround(config.split_val * static_cast<double>(n)));
  if (n_train == 0 || n_train + n_val > n)
    throw DataError("train: too few inputs for the requested split");

  TrainRun run;
  run.split_train = config.split_train;
  run.split_val = config.split_val;
  run.batch_size = config.batch_size;
  run.max_epochs = config.max_epochs;
  run.patience = config.patience;
  run.train_idx.assign(order.begin(), order.begin() + n_train);
  run.val_idx.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  run.test_idx.assign(order.begin() + n_train + n_val, order.end());

  // Per-feature z-score from the training partition only.
  std::vector<double> mean(dim, 0.0), scale(dim, 1.0);
  for (std::size_t i : run.train_idx)
    for (std::size_t d = 0; d < dim; ++d) mean[d] += (*raw[i])[d];
  for (auto& m : mean) m /= static_cast<double>(n_train);
  std::vector<double> var(dim, 0.0);
  for (std::size_t i : run.train_idx)
    for (std::size_t d = 0; d < dim; ++d) {
      const double dx = (*raw[i])[d] - mean[d];
      var[d] += dx * dx;
    }
  for (std::size_t d = 0; d < dim; ++d) {
    const double sd = std::sqrt(var[d] / static_cast<double>(n_train));
    scale[d] = sd < 1e-12 ? 1.0 : sd;
  }
  std::vector<std::vector<double>> xs(n, std::vector<double>(dim));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d)
      xs[i][d] = ((*raw[i])[d] - mean[d]) / scale[d];

  MlpModel model =
      init_model(dim, derive_seed(seed, "mlp-model"), config.hidden,
                 config.dropout);
  model.feat_mean = mean;
  model.feat_scale = scale;
  AdamState adam;
  adam.config = config.adam;

  Rng rng = make_rng(seed, "train-loop");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double keep = 1.0 - config.dropout;
  const std::size_t n_hidden_layers = model.n_layers() - 1;

  std::vector<Matrix> best_w = model.weights;
  std::vector<std::vector<double>> best_b = model.biases;
  double best_stop_loss = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs = 0;

  std::vector<std::size_t> perm = run.train_idx;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < perm.size();
         start += config.batch_size) {
      const std::size_t end =
          std::min(perm.size(), start + config.batch_size);
      const std::size_t bs = end - start;
      // Dropout masks are drawn serially so that training is reproducible
      // for any thread count.
      std::vector<std::vector<std::vector<double>>> masks(bs);
      for (std::size_t s = 0; s < bs; ++s) {
        masks[s].resize(n_hidden_layers);
        for (std::size_t l = 0; l < n_hidden_layers; ++l) {
          masks[s][l].resize(model.layout[l + 1]);
          for (auto& mval : masks[s][l])
            mval = uni(rng) < keep ? 1.0 / keep : 0.0;
        }
      }
      std::vector<BatchSample> batch(bs);
      for (std::size_t s = 0; s < bs; ++s)
        batch[s] = {&xs[perm[start + s]], ys[perm[start + s]], &masks[s]};
      Gradients grads;
      const double batch_loss =
          batch_gradients(model, batch, grads, config.threads);
      if (!grads_finite(grads))
        throw NumericError("train: non-finite gradient; aborting run");
      adam_step(model, grads, adam);
      epoch_loss += batch_loss * static_cast<double>(bs);
      seen += bs;
    }
    run.train_loss.push_back(epoch_loss / static_cast<double>(seen));
    double stop_loss;
    if (!run.val_idx.empty()) {
      run.val_loss.push_back(
          mean_loss(model, xs, ys, run.val_idx, config.threads));
      stop_loss = run.val_loss.back();
    } else {
      stop_loss = run.train_loss.back();
    }
    if (stop_loss < best_stop_loss) {
      best_stop_loss = stop_loss;
      run.best_epoch = epoch;
      best_w = model.weights;
      best_b = model.biases;
      bad_epochs = 0;
    } else if (++bad_epochs >= config.patience) {
      break;
    }
  }
  model.weights = std::move(best_w);
  model.biases = std::move(best_b);

  // Final metrics on the held-out test partition.
  if (!run.test_idx.empty()) {
    std::vector<double> probs;
    std::vector<int> labels;
    probs.reserve(run.test_idx.size());
    for (std::size_t i : run.test_idx) {
      probs.push_back(forward_into(model, xs[i], nullptr, nullptr));
      labels.push_back(ys[i]);
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < probs.size(); ++i)
      correct += (probs[i] >= 0.5 ? 1 : 0) == labels[i];
    run.test_accuracy_at_half =
        static_cast<double>(correct) / static_cast<double>(probs.size());
    const bool has_pos = std::count(labels.begin(), labels.end(), 1) > 0;
    const bool has_neg = std::count(labels.begin(), labels.end(), 0) > 0;
    if (has_pos && has_neg) run.test_auc = roc_auc(probs, labels);
  }
  return {std::move(model), std::move(run)};
}

double gradient_check(const MlpModel& model,
                      const std::vector<std::vector<double>>& xs,
                      const std::vector<int>& ys, double epsilon,
                      std::size_t max_params, std::uint64_t seed) {
  if (xs.empty() || xs.size() != ys.size())
    throw UsageError("gradient_check: batch must be non-empty and aligned");

  std::vector<BatchSample> batch(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    batch[i] = {&xs[i], ys[i], nullptr};
  Gradients analytic;
  batch_gradients(model, batch, analytic, 1);

  // Flattened parameter addressing: weights layer by layer, then biases.
  struct Slot {
    bool is_weight;
    std::size_t layer, index;
  };
  std::vector<Slot> slots;
  for (std::size_t l = 0; l < model.n_layers(); ++l)
    for (std::size_t i = 0; i < model.weights[l].a.size(); ++i)
      slots.push_back({true, l, i});
  for (std::size_t l = 0; l < model.n_layers(); ++l)
    for (std::size_t i = 0; i < model.biases[l].size(); ++i)
      slots.push_back({false, l, i});
  if (slots.size() > max_params) {
    Rng rng = make_rng(seed, "gradient-check-sample");
    std::shuffle(slots.begin(), slots.end(), rng);
    slots.resize(max_params);
  }

  MlpModel probe = model;
  auto loss_at = [&]() {
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double p = forward_into(probe, xs[i], nullptr, nullptr);
      acc += bce_loss(p, ys[i]);
    }
    return acc / static_cast<double>(xs.size());
  };

  double max_err = 0.0;
  for (const Slot& s : slots) {
    double* theta = s.is_weight ? &probe.weights[s.layer].a[s.index]
                                : &probe.biases[s.layer][s.index];
    const double saved = *theta;
    *theta = saved + epsilon;
    const double lp = loss_at();
    *theta = saved - epsilon;
    const double lm = loss_at();
    *theta = saved;
    const double numeric = (lp - lm) / (2.0 * epsilon);
    const double a = s.is_weight ? analytic.w[s.layer].a[s.index]
                                 : analytic.b[s.layer][s.index];
    const double denom = std::max(std::abs(a), std::abs(numeric));
    const double err =
        denom < 1e-6 ? std::abs(a - numeric) : std::abs(a - numeric) / denom;
    max_err = std::max(max_err, err);
  }
  return max_err;
}

std::vector<double> predict(const MlpModel& model,
                            const std::vector<FeatureVector>& vectors,
                            int threads) {
  for (const auto& v : vectors) {
    if (v.values.size() != model.input_dim())
      throw DataError("predict: vector \"" + v.doc_id + "\" has " +
                      std::to_string(v.values.size()) +
                      " entries, model expects " +
                      std::to_string(model.input_dim()));
  }
  std::vector<double> probs(vectors.size());
  const std::int64_t n = static_cast<std::int64_t>(vectors.size());
#pragma omp parallel for schedule(static) num_threads(std::max(1, threads))
  for (std::int64_t i = 0; i < n; ++i) {
    auto x = model.normalized(vectors[static_cast<std::size_t>(i)].values);
    probs[static_cast<std::size_t>(i)] =
        forward_into(model, x, nullptr, nullptr);
  }
  return probs;
}

}  // namespace zsl
