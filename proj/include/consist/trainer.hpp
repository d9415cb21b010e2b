#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "consist/dataset.hpp"
#include "consist/losses.hpp"
#include "consist/metrics.hpp"
#include "consist/model.hpp"

namespace consist {

struct TrainConfig {
  double learning_rate = 2e-4;
  int batch_size = 32;
  int steps = 2000;
  int eval_interval = 200;
  int hidden_dim = 64;
  // Probability of drawing a task batch followed by one entry per
  // evidence label; empty = uniform over the K+1 label types.
  std::vector<double> label_sampling;
  LossConfig loss;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
};

TrainConfig train_config_from_json(const nlohmann::json& doc);

struct AdamState {
  std::vector<double> m, v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update in place. Throws on non-finite gradients.
void adam_step(ModelParams& params, std::span<const double> grads, AdamState& state, double lr);

struct TrainResult {
  ModelParams best;
  double best_val_acc = 0.0;
  int best_step = 0;
  std::vector<nlohmann::json> trace;
};

using TraceSink = std::function<void(const nlohmann::json&)>;

// Stochastic training with per-step label sampling: each step picks a
// label type, draws a batch of matching pairs with replacement, and
// applies one Adam update on the regularized objective. Returns the
// checkpoint with the highest validation task accuracy seen at any eval
// point (ties keep the earliest, and the initial parameters count).
TrainResult train(const LoadedData& data, const ConstraintSpec& spec, const TrainConfig& config,
                  std::uint64_t seed, const TraceSink& sink = nullptr);

struct EvalMetrics {
  double acc_y = 0.0;
  double auc_y = 0.0;
  std::vector<double> acc_z;
  InconsistencyReport report;
};

EvalMetrics evaluate(const ModelParams& params, std::span<const Example> split,
                     const ConstraintSpec& spec);

// Macro one-vs-rest AUC from per-class scores, rank-based with midrank tie
// handling. Classes absent from the labels (or covering all of them) are
// skipped; 0.5 if every class is skipped.
double macro_ovr_auc(const std::vector<std::vector<double>>& scores,
                     const std::vector<int>& labels, int num_classes);

// Inverse-frequency class weights from the task pairs, rescaled to mean 1.
std::vector<double> inverse_frequency_weights(std::span<const LabeledPair> pairs,
                                              int num_classes);

}  // namespace consist
