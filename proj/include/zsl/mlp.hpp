#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zsl/rng.hpp"
#include "zsl/space.hpp"

namespace zsl {

struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

struct AdamConfig {
  double lr = 0.0012;
  double beta1 = 0.92;
  double beta2 = 0.9992;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> m_w, v_w;
  std::vector<std::vector<double>> m_b, v_b;
  std::uint64_t t = 0;
};

// Feedforward binary classifier: rectifier hidden layers with inverted
// dropout, one sigmoid output unit. Input normalization (per-feature
// z-score fitted on the training partition) is stored with the model and
// applied on every prediction.
struct MlpModel {
  std::vector<std::size_t> layout;  // [input, hidden..., 1]
  std::vector<Matrix> weights;      // weights[l] is layout[l+1] x layout[l]
  std::vector<std::vector<double>> biases;
  double dropout_rate = 0.5;
  std::uint64_t seed = 0;
  std::vector<double> feat_mean, feat_scale;

  std::size_t input_dim() const { return layout.front(); }
  std::size_t n_layers() const { return weights.size(); }
  std::size_t parameter_count() const;
  std::vector<double> normalized(std::span<const double> x) const;
};

struct Gradients {
  std::vector<Matrix> w;
  std::vector<std::vector<double>> b;
};

enum class ForwardMode { Train, Infer };

inline const std::vector<std::size_t> kDefaultHidden = {70, 30, 70, 30, 70};

// Seeded fan-in-scaled uniform weights, zero biases.
MlpModel init_model(std::size_t input_dim, std::uint64_t seed,
                    const std::vector<std::size_t>& hidden = kDefaultHidden,
                    double dropout = 0.5);

// One forward pass on a raw (already normalized) input. Train mode drops
// each hidden activation with probability dropout_rate and scales survivors
// by 1/(1-rate); it needs an RNG. Infer mode is deterministic.
double forward(const MlpModel& model, std::span<const double> x,
               ForwardMode mode, Rng* rng = nullptr);

// Binary cross entropy with p clamped to [1e-12, 1 - 1e-12].
double bce_loss(double p, int y);

// Bias-corrected Adam update; gradients must be shape-matched and finite.
void adam_step(MlpModel& model, const Gradients& grads, AdamState& state);

struct TrainConfig {
  double split_train = 0.6, split_val = 0.2;  // test gets the remainder
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  AdamConfig adam;
  std::vector<std::size_t> hidden = kDefaultHidden;
  double dropout = 0.5;
  int threads = 1;
};

struct TrainRun {
  double split_train = 0.6, split_val = 0.2;
  std::size_t batch_size = 0, max_epochs = 0, patience = 0;
  std::vector<double> train_loss, val_loss;  // one entry per epoch run
  std::size_t best_epoch = 0;                // 0-based, into the histories
  std::vector<std::size_t> train_idx, val_idx, test_idx;
  std::optional<double> test_auc;   // absent when the test partition is
                                    // single-class or empty
  double test_accuracy_at_half = 0.0;
};

struct TrainResult {
  MlpModel model;
  TrainRun run;
};

// Trains on balanced positive/negative vector lists (equal sizes required):
// shuffled 60/20/20 split, mini-batch Adam with BCE, early stop on
// validation loss, best-validation weights returned.
TrainResult train(const std::vector<FeatureVector>& pos,
                  const std::vector<FeatureVector>& neg,
                  const TrainConfig& config, std::uint64_t seed);

// Compares analytic gradients against central finite differences on a
// sampled parameter subset, dropout off. Entries where both gradients are
// below 1e-6 in magnitude contribute their absolute difference; all others
// contribute |analytic - numeric| / max(|analytic|, |numeric|).
double gradient_check(const MlpModel& model,
                      const std::vector<std::vector<double>>& xs,
                      const std::vector<int>& ys, double epsilon = 1e-5,
                      std::size_t max_params = 256, std::uint64_t seed = 7);

// Infer-mode forward per vector; output order matches input order.
std::vector<double> predict(const MlpModel& model,
                            const std::vector<FeatureVector>& vectors,
                            int threads = 1);

}  // namespace zsl
