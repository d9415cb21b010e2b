#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "consist/autodiff.hpp"
#include "consist/constraints.hpp"

namespace consist {

struct ModelDims {
  int input_dim = 0;
  int hidden_dim = 0;
  int num_classes = 0;
  int num_evidence = 0;
  int output_dim() const { return num_classes + num_evidence; }
};

// One-hidden-layer MLP with a (C+K)-wide output head: C task logits
// softmaxed jointly, K evidence logits through independent sigmoids.
// Parameters live in one flat vector, layout [W1 (H x d), b1 (H),
// W2 ((C+K) x H), b2 (C+K)], row-major.
struct ModelParams {
  ModelDims dims;
  std::vector<double> theta;

  std::size_t size() const { return theta.size(); }
  static std::size_t param_count(const ModelDims& dims);
};

// Glorot-uniform weights, zero biases; deterministic in the seed.
ModelParams init_params(std::uint64_t seed, int input_dim, int hidden_dim,
                        const ConstraintSpec& spec);

// Posterior marginals for one example, plain numbers (inference path).
struct PosteriorEntry {
  std::vector<double> task;      // length C, sums to 1
  std::vector<double> evidence;  // length K, P(z_k = +1 | x)
};

// The same marginals as tape nodes (training path), with log-probabilities
// carried alongside so losses never take log of a saturated sigmoid.
struct PosteriorNodes {
  std::vector<ad::Var> task_logp;     // log p(y=c|x)
  std::vector<ad::Var> task_p;        // p(y=c|x)
  std::vector<ad::Var> ev_logp_pos;   // log p(z_k=+1|x)
  std::vector<ad::Var> ev_logp_neg;   // log p(z_k=-1|x)
  std::vector<ad::Var> ev_p;          // p(z_k=+1|x)
};

// Parameters registered as leaves on a tape, ids contiguous from the start
// of the tape so gradients can be read back positionally.
struct TapedParams {
  ad::Tape* tape = nullptr;
  std::vector<ad::Var> theta;
  ModelDims dims;
};

TapedParams put_on_tape(ad::Tape& tape, const ModelParams& params);
PosteriorNodes forward(const TapedParams& params, std::span<const double> x);
PosteriorEntry forward_eval(const ModelParams& params, std::span<const double> x);

// MAP labels: argmax task class with ties broken toward the smallest
// index; evidence +1 iff its probability strictly exceeds 0.5.
std::pair<int, EvidenceVector> predict_map(const PosteriorEntry& posterior);

// Checkpoint file: spec hash, dimensions, flat weights, plus whatever
// config the caller wants recorded.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const ConstraintSpec& spec, const nlohmann::json& extra);
ModelParams load_checkpoint(const std::string& path, const ConstraintSpec& spec);

}  // namespace consist
