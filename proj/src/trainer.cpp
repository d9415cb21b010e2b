#include "consist/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace consist {

TrainConfig train_config_from_json(const nlohmann::json& doc) {
  TrainConfig config;
  config.learning_rate = doc.value("learning_rate", config.learning_rate);
  config.batch_size = doc.value("batch_size", config.batch_size);
  config.steps = doc.value("steps", config.steps);
  config.eval_interval = doc.value("eval_interval", config.eval_interval);
  config.hidden_dim = doc.value("hidden_dim", config.hidden_dim);
  if (doc.contains("label_sampling"))
    config.label_sampling = doc.at("label_sampling").get<std::vector<double>>();
  if (doc.contains("seeds")) config.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  if (doc.contains("loss")) {
    const auto& loss = doc.at("loss");
    config.loss.omega1 = loss.value("omega1", 0.0);
    config.loss.omega2 = loss.value("omega2", 0.0);
    const std::string mode = loss.value("mode", "hard");
    if (mode == "hard") {
      config.loss.mode = LossConfig::Mode::Hard;
    } else if (mode == "soft") {
      config.loss.mode = LossConfig::Mode::Soft;
    } else {
      throw std::invalid_argument("unknown loss mode: " + mode);
    }
    if (loss.contains("class_weights"))
      config.loss.class_weights = loss.at("class_weights").get<std::vector<double>>();
    if (loss.contains("evidence_weights"))
      config.loss.evidence_weights =
          loss.at("evidence_weights").get<std::vector<std::array<double, 2>>>();
  }
  if (config.learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
  if (config.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  return config;
}

void adam_step(ModelParams& params, std::span<const double> grads, AdamState& state, double lr) {
  if (grads.size() != params.theta.size() || state.m.size() != params.theta.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  for (double g : grads) {
    if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params.theta[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

std::vector<double> inverse_frequency_weights(std::span<const LabeledPair> pairs,
                                              int num_classes) {
  std::vector<std::int64_t> counts(num_classes, 0);
  std::int64_t total = 0;
  for (const LabeledPair& pair : pairs) {
    if (pair.y) {
      counts[*pair.y] += 1;
      total += 1;
    }
  }
  std::vector<double> weights(num_classes, 1.0);
  if (total == 0) return weights;
  double sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    weights[c] = counts[c] > 0 ? static_cast<double>(total) / counts[c] : 0.0;
    sum += weights[c];
  }
  if (sum <= 0.0) return std::vector<double>(num_classes, 1.0);
  const double scale = num_classes / sum;
  for (double& w : weights) w *= scale;
  // classes never seen get the mean weight so their CE stays defined
  for (double& w : weights) {
    if (w == 0.0) w = 1.0;
  }
  return weights;
}

namespace {

double validation_accuracy(const ModelParams& params, std::span<const Example> split) {
  if (split.empty()) return 0.0;
  int correct = 0;
  for (const Example& ex : split) {
    const auto [y_hat, z_hat] = predict_map(forward_eval(params, ex.x));
    correct += (y_hat == ex.y);
  }
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

}  // namespace

TrainResult train(const LoadedData& data, const ConstraintSpec& spec, const TrainConfig& config,
                  std::uint64_t seed, const TraceSink& sink) {
  const int K = spec.num_evidence();
  if (data.train_pairs.empty()) throw std::invalid_argument("train: no training pairs");
  const int d = static_cast<int>(data.train_pairs.front().x.size());

  std::vector<double> sampling = config.label_sampling;
  if (sampling.empty()) sampling.assign(K + 1, 1.0 / (K + 1));
  if (static_cast<int>(sampling.size()) != K + 1)
    throw std::invalid_argument("label_sampling must have K+1 entries");
  double mass = 0.0;
  for (double p : sampling) {
    if (p < 0.0) throw std::invalid_argument("label_sampling entries must be >= 0");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9)
    throw std::invalid_argument("label_sampling must sum to 1");

  // pools[0] = task pairs, pools[1 + k] = pairs labeled with evidence k
  std::vector<std::vector<const LabeledPair*>> pools(K + 1);
  for (const LabeledPair& pair : data.train_pairs) {
    if (pair.y) {
      pools[0].push_back(&pair);
    } else if (pair.z) {
      pools[1 + pair.z->first].push_back(&pair);
    }
  }
  for (int t = 0; t <= K; ++t) {
    if (sampling[t] > 0.0 && pools[t].empty())
      throw std::runtime_error("train: no pairs available for sampled label type " +
                               std::to_string(t));
  }

  LossConfig loss = config.loss;
  if (loss.class_weights.empty())
    loss.class_weights = inverse_frequency_weights(data.train_pairs, spec.num_classes);

  ModelParams params = init_params(seed, d, config.hidden_dim, spec);
  AdamState adam(params.size());
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  TrainResult result;
  result.best = params;
  result.best_val_acc = validation_accuracy(params, data.validation);
  result.best_step = 0;

  auto record = [&](int step, double val_acc, double loss_value) {
    nlohmann::json row{{"step", step}, {"val_acc", val_acc}};
    if (std::isfinite(loss_value)) row["loss"] = loss_value;
    result.trace.push_back(row);
    if (sink) sink(row);
  };
  record(0, result.best_val_acc, std::numeric_limits<double>::quiet_NaN());

  std::vector<LabeledPair> batch(config.batch_size);
  double last_loss = std::numeric_limits<double>::quiet_NaN();
  for (int step = 1; step <= config.steps; ++step) {
    double u = unit(rng), acc = 0.0;
    int type = K;
    for (int t = 0; t <= K; ++t) {
      acc += sampling[t];
      if (u < acc) { type = t; break; }
    }
    const auto& pool = pools[type];
    if (pool.empty())
      throw std::runtime_error("train: no pairs available for sampled label type " +
                               std::to_string(type));
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (int b = 0; b < config.batch_size; ++b) batch[b] = *pool[pick(rng)];

    ad::Tape tape;
    TapedParams taped = put_on_tape(tape, params);
    const ad::Var obj = total_objective(spec, batch, loss, taped);
    last_loss = obj.value();
    if (!std::isfinite(last_loss)) throw std::runtime_error("train: loss diverged");
    tape.backward(obj);
    std::vector<double> grads(params.size());
    for (std::size_t i = 0; i < grads.size(); ++i) grads[i] = taped.theta[i].grad();
    adam_step(params, grads, adam, config.learning_rate);

    if ((config.eval_interval > 0 && step % config.eval_interval == 0) || step == config.steps) {
      const double val_acc = validation_accuracy(params, data.validation);
      record(step, val_acc, last_loss);
      if (val_acc > result.best_val_acc) {
        result.best_val_acc = val_acc;
        result.best = params;
        result.best_step = step;
      }
    }
  }
  return result;
}

double macro_ovr_auc(const std::vector<std::vector<double>>& scores,
                     const std::vector<int>& labels, int num_classes) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("macro_ovr_auc: shape mismatch or empty input");
  const std::size_t n = labels.size();
  double total = 0.0;
  int used = 0;
  for (int c = 0; c < num_classes; ++c) {
    std::size_t positives = 0;
    for (int y : labels) positives += (y == c);
    if (positives == 0 || positives == n) continue;

    // midranks of the class-c scores
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a][c] < scores[b][c];
    });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && scores[order[j + 1]][c] == scores[order[i]][c]) ++j;
      const double mid = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
      for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
      i = j + 1;
    }
    double rank_sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      if (labels[t] == c) rank_sum += rank[t];
    }
    const double pos = static_cast<double>(positives);
    const double neg = static_cast<double>(n - positives);
    total += (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
    ++used;
  }
  return used > 0 ? total / used : 0.5;
}

EvalMetrics evaluate(const ModelParams& params, std::span<const Example> split,
                     const ConstraintSpec& spec) {
  if (split.empty()) throw std::invalid_argument("evaluate: empty split");
  const int K = spec.num_evidence();
  EvalMetrics metrics;
  metrics.acc_z.assign(K, 0.0);
  std::vector<PredictionRecord> records;
  records.reserve(split.size());
  std::vector<std::vector<double>> scores;
  std::vector<int> labels;
  int correct = 0;
  for (const Example& ex : split) {
    const PosteriorEntry post = forward_eval(params, ex.x);
    const auto [y_hat, z_hat] = predict_map(post);
    correct += (y_hat == ex.y);
    for (int k = 0; k < K; ++k) metrics.acc_z[k] += (z_hat[k] == ex.z[k]);
    PredictionRecord rec;
    rec.y_hat = y_hat;
    rec.z_hat = z_hat;
    rec.y_true = ex.y;
    std::vector<double> posterior = post.task;
    posterior.insert(posterior.end(), post.evidence.begin(), post.evidence.end());
    rec.posterior = std::move(posterior);
    records.push_back(std::move(rec));
    scores.push_back(post.task);
    labels.push_back(ex.y);
  }
  const double n = static_cast<double>(split.size());
  metrics.acc_y = static_cast<double>(correct) / n;
  for (double& a : metrics.acc_z) a /= n;
  metrics.auc_y = macro_ovr_auc(scores, labels, spec.num_classes);
  metrics.report = dataset_report(spec, records);
  return metrics;
}

}  // namespace consist
