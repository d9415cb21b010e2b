#include "consist/synthdata.hpp"

#include <cmath>
#include <stdexcept>

namespace consist {

GenConfig gen_config_from_json(const nlohmann::json& doc) {
  GenConfig config;
  config.n_train = doc.value("n_train", config.n_train);
  config.n_val = doc.value("n_val", config.n_val);
  config.n_test = doc.value("n_test", config.n_test);
  config.feature_dim = doc.value("feature_dim", config.feature_dim);
  if (doc.contains("class_prior"))
    config.class_prior = doc.at("class_prior").get<std::vector<double>>();
  config.p_extra = doc.value("p_extra", config.p_extra);
  config.noise_sigma = doc.value("noise_sigma", config.noise_sigma);
  config.p_task_label = doc.value("p_task_label", config.p_task_label);
  config.p_evidence_label = doc.value("p_evidence_label", config.p_evidence_label);
  config.seed = doc.value("seed", config.seed);
  return config;
}

namespace {

void validate(const ConstraintSpec& spec, const GenConfig& config) {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " out of [0,1]");
  };
  prob(config.p_extra, "p_extra");
  prob(config.p_task_label, "p_task_label");
  prob(config.p_evidence_label, "p_evidence_label");
  if (config.noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
  if (config.feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
  if (!config.class_prior.empty()) {
    if (static_cast<int>(config.class_prior.size()) != spec.num_classes)
      throw std::invalid_argument("class_prior length mismatch");
    double total = 0.0;
    for (double p : config.class_prior) {
      prob(p, "class_prior entry");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("class_prior must sum to 1");
  }
}

Example draw_example(const ConstraintSpec& spec, const GenConfig& config,
                     const std::vector<double>& prior, const std::vector<double>& mix_class,
                     const std::vector<double>& mix_evidence, std::mt19937_64& rng) {
  const int C = spec.num_classes;
  const int K = spec.num_evidence();
  const int d = config.feature_dim;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Example ex;
  double u = unit(rng), acc = 0.0;
  ex.y = C - 1;
  for (int c = 0; c < C; ++c) {
    acc += prior[c];
    if (u < acc) { ex.y = c; break; }
  }

  ex.z.assign(K, -1);
  std::vector<char> forbidden(K, 0);
  for (int k : spec.incompatible[ex.y]) forbidden[k] = 1;
  int chosen = -1;
  if (!spec.direct_support[ex.y].empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, spec.direct_support[ex.y].size() - 1);
    chosen = spec.direct_support[ex.y][pick(rng)];
    ex.z[chosen] = 1;
  }
  for (int k = 0; k < K; ++k) {
    if (forbidden[k] || k == chosen) continue;
    if (unit(rng) < config.p_extra) ex.z[k] = 1;
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  ex.x.assign(d, 0.0);
  for (int i = 0; i < d; ++i) {
    double v = mix_class[static_cast<std::size_t>(i) * C + ex.y];
    for (int k = 0; k < K; ++k) {
      if (ex.z[k] == 1) v += mix_evidence[static_cast<std::size_t>(i) * K + k];
    }
    ex.x[i] = v + config.noise_sigma * noise(rng);
  }
  return ex;
}

}  // namespace

Dataset generate(const ConstraintSpec& spec, const GenConfig& config) {
  validate(spec, config);
  const int C = spec.num_classes;
  const int K = spec.num_evidence();
  std::vector<double> prior = config.class_prior;
  if (prior.empty()) prior.assign(C, 1.0 / C);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  std::vector<double> mix_class(static_cast<std::size_t>(config.feature_dim) * C);
  std::vector<double> mix_evidence(static_cast<std::size_t>(config.feature_dim) * K);
  for (double& v : mix_class) v = standard(rng);
  for (double& v : mix_evidence) v = standard(rng);

  Dataset data;
  auto fill = [&](std::vector<Example>& split, int n) {
    split.reserve(n);
    for (int i = 0; i < n; ++i)
      split.push_back(draw_example(spec, config, prior, mix_class, mix_evidence, rng));
  };
  fill(data.train, config.n_train);
  fill(data.validation, config.n_val);
  fill(data.test, config.n_test);
  return data;
}

std::vector<LabeledPair> make_pairs(std::span<const Example> split, const GenConfig& config,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<LabeledPair> pairs;
  for (const Example& ex : split) {
    if (unit(rng) < config.p_task_label) {
      LabeledPair pair;
      pair.x = ex.x;
      pair.y = ex.y;
      pairs.push_back(std::move(pair));
    }
    for (std::size_t k = 0; k < ex.z.size(); ++k) {
      if (unit(rng) < config.p_evidence_label) {
        LabeledPair pair;
        pair.x = ex.x;
        pair.z = {static_cast<int>(k), static_cast<int>(ex.z[k])};
        pairs.push_back(std::move(pair));
      }
    }
  }
  if (pairs.empty()) throw std::runtime_error("make_pairs: no pairs emitted");
  return pairs;
}

}  // namespace consist
