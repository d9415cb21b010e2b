#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "consist/constraints.hpp"
#include "consist/dataset.hpp"

namespace consist {

// Configuration for the synthetic generator. Ground-truth tuples are
// consistent by construction: incompatible evidence is forced absent and,
// when the class has direct-support evidence, one of it is forced present.
struct GenConfig {
  int n_train = 4096;
  int n_val = 512;
  int n_test = 512;
  int feature_dim = 16;
  std::vector<double> class_prior;  // empty = uniform
  double p_extra = 0.3;             // presence rate for other compatible evidence
  double noise_sigma = 1.0;
  double p_task_label = 1.0;
  double p_evidence_label = 0.3;
  std::uint64_t seed = 0;
};

GenConfig gen_config_from_json(const nlohmann::json& doc);

// Draw a dataset. Features are a linear mix of the class one-hot and the
// evidence indicator vector through fixed standard-normal matrices (drawn
// once from the seed) plus isotropic Gaussian noise. Deterministic in the
// config.
Dataset generate(const ConstraintSpec& spec, const GenConfig& config);

// Break full tuples into sub-tuple pairs: (x, y) with probability
// p_task_label and each (x, z_k) independently with probability
// p_evidence_label. Throws if nothing is emitted.
std::vector<LabeledPair> make_pairs(std::span<const Example> split, const GenConfig& config,
                                    std::mt19937_64& rng);

}  // namespace consist
