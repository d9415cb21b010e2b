#include "consist/losses.hpp"

#include <stdexcept>

namespace consist {

namespace {

int argmax_task(const PosteriorNodes& post) {
  int best = 0;
  for (std::size_t c = 1; c < post.task_p.size(); ++c) {
    if (post.task_p[c].value() > post.task_p[best].value()) best = static_cast<int>(c);
  }
  return best;
}

ad::Var zero_like(const PosteriorNodes& post) { return post.task_p[0].tape->constant(0.0); }

// -sum_{k in I1(c)} log p(z_k = -1 | x)
ad::Var incompat_penalty(const ConstraintSpec& spec, const PosteriorNodes& post, int c) {
  ad::Var total = zero_like(post);
  for (int k : spec.incompatible[c]) total = total + post.ev_logp_neg[k];
  return -total;
}

// -LSE_{k in I2(c)} log p(z_k = +1 | x); caller guarantees I2(c) nonempty
ad::Var insuff_penalty(const ConstraintSpec& spec, const PosteriorNodes& post, int c) {
  std::vector<ad::Var> logps;
  logps.reserve(spec.direct_support[c].size());
  for (int k : spec.direct_support[c]) logps.push_back(post.ev_logp_pos[k]);
  return -ad::logsumexp(logps);
}

}  // namespace

ad::Var weighted_ce_task(const PosteriorNodes& post, int y, const LossConfig& config) {
  if (y < 0 || y >= static_cast<int>(post.task_logp.size()))
    throw std::invalid_argument("task label out of range");
  const double w = config.class_weights.empty() ? 1.0 : config.class_weights[y];
  return -w * post.task_logp[y];
}

ad::Var weighted_ce_evidence(const PosteriorNodes& post, int k, int z, const LossConfig& config) {
  if (k < 0 || k >= static_cast<int>(post.ev_logp_pos.size()))
    throw std::invalid_argument("evidence index out of range");
  if (z != -1 && z != 1) throw std::invalid_argument("evidence label must be -1 or +1");
  const double w = config.evidence_weights.empty()
                       ? 1.0
                       : config.evidence_weights[k][z == 1 ? 0 : 1];
  return -w * (z == 1 ? post.ev_logp_pos[k] : post.ev_logp_neg[k]);
}

ad::Var reg_r1_hard(const ConstraintSpec& spec, const PosteriorNodes& post) {
  const int y_hat = argmax_task(post);
  if (spec.incompatible[y_hat].empty()) return zero_like(post);
  return incompat_penalty(spec, post, y_hat);
}

ad::Var reg_r1_soft(const ConstraintSpec& spec, const PosteriorNodes& post) {
  ad::Var total = zero_like(post);
  for (int c = 0; c < spec.num_classes; ++c) {
    if (spec.incompatible[c].empty()) continue;
    total = total + post.task_p[c] * incompat_penalty(spec, post, c);
  }
  return total;
}

ad::Var reg_r2_hard(const ConstraintSpec& spec, const PosteriorNodes& post) {
  const int y_hat = argmax_task(post);
  if (spec.direct_support[y_hat].empty()) return zero_like(post);
  return insuff_penalty(spec, post, y_hat);
}

ad::Var reg_r2_soft(const ConstraintSpec& spec, const PosteriorNodes& post) {
  ad::Var total = zero_like(post);
  for (int c = 0; c < spec.num_classes; ++c) {
    if (spec.direct_support[c].empty()) continue;
    total = total + post.task_p[c] * insuff_penalty(spec, post, c);
  }
  return total;
}

ad::Var total_objective(const ConstraintSpec& spec, std::span<const LabeledPair> batch,
                        const LossConfig& config, const TapedParams& params) {
  if (batch.empty()) throw std::invalid_argument("total_objective: empty batch");
  const bool hard = config.mode == LossConfig::Mode::Hard;
  ad::Var ce = params.tape->constant(0.0);
  ad::Var r1 = params.tape->constant(0.0);
  ad::Var r2 = params.tape->constant(0.0);
  for (const LabeledPair& pair : batch) {
    const PosteriorNodes post = forward(params, pair.x);
    if (pair.y) {
      ce = ce + weighted_ce_task(post, *pair.y, config);
    } else if (pair.z) {
      ce = ce + weighted_ce_evidence(post, pair.z->first, pair.z->second, config);
    } else {
      throw std::invalid_argument("total_objective: pair carries no label");
    }
    if (config.omega1 != 0.0)
      r1 = r1 + (hard ? reg_r1_hard(spec, post) : reg_r1_soft(spec, post));
    if (config.omega2 != 0.0)
      r2 = r2 + (hard ? reg_r2_hard(spec, post) : reg_r2_soft(spec, post));
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  ad::Var obj = inv_n * ce;
  if (config.omega1 != 0.0) obj = obj + (config.omega1 * inv_n) * r1;
  if (config.omega2 != 0.0) obj = obj + (config.omega2 * inv_n) * r2;
  return obj;
}

}  // namespace consist
