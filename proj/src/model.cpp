#include "consist/model.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace consist {

std::size_t ModelParams::param_count(const ModelDims& dims) {
  return static_cast<std::size_t>(dims.hidden_dim) * dims.input_dim + dims.hidden_dim +
         static_cast<std::size_t>(dims.output_dim()) * dims.hidden_dim + dims.output_dim();
}

ModelParams init_params(std::uint64_t seed, int input_dim, int hidden_dim,
                        const ConstraintSpec& spec) {
  if (input_dim < 1 || hidden_dim < 1)
    throw std::invalid_argument("input_dim and hidden_dim must be >= 1");
  ModelParams params;
  params.dims = {input_dim, hidden_dim, spec.num_classes, spec.num_evidence()};
  params.theta.assign(ModelParams::param_count(params.dims), 0.0);

  std::mt19937_64 rng(seed);
  const int out = params.dims.output_dim();
  const double a1 = std::sqrt(6.0 / (input_dim + hidden_dim));
  const double a2 = std::sqrt(6.0 / (hidden_dim + out));
  std::uniform_real_distribution<double> u1(-a1, a1), u2(-a2, a2);

  std::size_t i = 0;
  for (int j = 0; j < hidden_dim * input_dim; ++j) params.theta[i++] = u1(rng);
  i += hidden_dim;  // b1 stays zero
  for (int j = 0; j < out * hidden_dim; ++j) params.theta[i++] = u2(rng);
  // b2 stays zero
  return params;
}

TapedParams put_on_tape(ad::Tape& tape, const ModelParams& params) {
  TapedParams taped;
  taped.tape = &tape;
  taped.dims = params.dims;
  taped.theta.reserve(params.theta.size());
  for (double v : params.theta) taped.theta.push_back(tape.leaf(v));
  return taped;
}

namespace {

struct Layout {
  std::size_t w1, b1, w2, b2;
};

Layout layout_of(const ModelDims& d) {
  Layout l;
  l.w1 = 0;
  l.b1 = l.w1 + static_cast<std::size_t>(d.hidden_dim) * d.input_dim;
  l.w2 = l.b1 + d.hidden_dim;
  l.b2 = l.w2 + static_cast<std::size_t>(d.output_dim()) * d.hidden_dim;
  return l;
}

void check_input(const ModelDims& dims, std::span<const double> x) {
  if (static_cast<int>(x.size()) != dims.input_dim)
    throw std::invalid_argument("input dimension mismatch");
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite input feature");
  }
}

}  // namespace

PosteriorNodes forward(const TapedParams& params, std::span<const double> x) {
  check_input(params.dims, x);
  const ModelDims& d = params.dims;
  const Layout l = layout_of(d);
  ad::Tape& tape = *params.tape;
  std::span<const ad::Var> theta(params.theta);

  std::vector<ad::Var> hidden;
  hidden.reserve(d.hidden_dim);
  for (int j = 0; j < d.hidden_dim; ++j) {
    ad::Var pre = tape.dot_const(theta.subspan(l.w1 + static_cast<std::size_t>(j) * d.input_dim,
                                               d.input_dim),
                                 x) +
                  theta[l.b1 + j];
    hidden.push_back(ad::relu(pre));
  }

  std::vector<ad::Var> logits;
  logits.reserve(d.output_dim());
  for (int o = 0; o < d.output_dim(); ++o) {
    logits.push_back(tape.dot(theta.subspan(l.w2 + static_cast<std::size_t>(o) * d.hidden_dim,
                                            d.hidden_dim),
                              hidden) +
                     theta[l.b2 + o]);
  }

  PosteriorNodes post;
  const std::span<const ad::Var> task_logits(logits.data(), d.num_classes);
  const ad::Var lse = ad::logsumexp(task_logits);
  for (int c = 0; c < d.num_classes; ++c) {
    post.task_logp.push_back(logits[c] - lse);
    post.task_p.push_back(ad::exp(post.task_logp.back()));
  }
  for (int k = 0; k < d.num_evidence; ++k) {
    const ad::Var t = logits[d.num_classes + k];
    post.ev_logp_pos.push_back(-ad::softplus(-t));
    post.ev_logp_neg.push_back(-ad::softplus(t));
    post.ev_p.push_back(ad::sigmoid(t));
  }
  return post;
}

PosteriorEntry forward_eval(const ModelParams& params, std::span<const double> x) {
  check_input(params.dims, x);
  const ModelDims& d = params.dims;
  const Layout l = layout_of(d);
  const std::vector<double>& t = params.theta;

  std::vector<double> hidden(d.hidden_dim);
  for (int j = 0; j < d.hidden_dim; ++j) {
    double pre = t[l.b1 + j];
    const std::size_t row = l.w1 + static_cast<std::size_t>(j) * d.input_dim;
    for (int i = 0; i < d.input_dim; ++i) pre += t[row + i] * x[i];
    hidden[j] = pre > 0.0 ? pre : 0.0;
  }

  std::vector<double> logits(d.output_dim());
  for (int o = 0; o < d.output_dim(); ++o) {
    double v = t[l.b2 + o];
    const std::size_t row = l.w2 + static_cast<std::size_t>(o) * d.hidden_dim;
    for (int j = 0; j < d.hidden_dim; ++j) v += t[row + j] * hidden[j];
    logits[o] = v;
  }

  PosteriorEntry post;
  double m = logits[0];
  for (int c = 1; c < d.num_classes; ++c) m = std::max(m, logits[c]);
  double total = 0.0;
  for (int c = 0; c < d.num_classes; ++c) total += std::exp(logits[c] - m);
  const double lse = m + std::log(total);
  post.task.resize(d.num_classes);
  for (int c = 0; c < d.num_classes; ++c) post.task[c] = std::exp(logits[c] - lse);
  post.evidence.resize(d.num_evidence);
  for (int k = 0; k < d.num_evidence; ++k) {
    const double v = logits[d.num_classes + k];
    const double sp = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    post.evidence[k] = std::exp(-(sp - v));  // sigmoid(v) = exp(v - softplus(v))
  }
  return post;
}

std::pair<int, EvidenceVector> predict_map(const PosteriorEntry& posterior) {
  int best = 0;
  for (std::size_t c = 1; c < posterior.task.size(); ++c) {
    if (posterior.task[c] > posterior.task[best]) best = static_cast<int>(c);
  }
  EvidenceVector z(posterior.evidence.size());
  for (std::size_t k = 0; k < posterior.evidence.size(); ++k)
    z[k] = posterior.evidence[k] > 0.5 ? 1 : -1;
  return {best, z};
}

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const ConstraintSpec& spec, const nlohmann::json& extra) {
  nlohmann::json doc;
  doc["spec_hash"] = spec_hash(spec);
  doc["dims"] = {{"input_dim", params.dims.input_dim},
                 {"hidden_dim", params.dims.hidden_dim},
                 {"num_classes", params.dims.num_classes},
                 {"num_evidence", params.dims.num_evidence}};
  doc["theta"] = params.theta;
  if (!extra.is_null()) doc["config"] = extra;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << doc.dump(2) << "\n";
}

ModelParams load_checkpoint(const std::string& path, const ConstraintSpec& spec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json doc;
  in >> doc;
  if (doc.at("spec_hash").get<std::uint64_t>() != spec_hash(spec))
    throw std::runtime_error("checkpoint was trained against a different constraint spec");
  ModelParams params;
  params.dims.input_dim = doc.at("dims").at("input_dim").get<int>();
  params.dims.hidden_dim = doc.at("dims").at("hidden_dim").get<int>();
  params.dims.num_classes = doc.at("dims").at("num_classes").get<int>();
  params.dims.num_evidence = doc.at("dims").at("num_evidence").get<int>();
  params.theta = doc.at("theta").get<std::vector<double>>();
  if (params.theta.size() != ModelParams::param_count(params.dims))
    throw std::runtime_error("checkpoint parameter count mismatch");
  return params;
}

}  // namespace consist
