// Acceptance gate: one pass/fail line per criterion, nonzero exit if any
// fails. Tolerances and runtime budgets are pinned here.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "consist/harness.hpp"
#include "consist/losses.hpp"
#include "consist/metrics.hpp"
#include "consist/synthdata.hpp"
#include "consist/trainer.hpp"

using namespace consist;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(int id, const std::string& name, bool pass, double seconds) {
  std::printf("[%s] criterion %2d: %s (%.2f s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename Fn>
void criterion(int id, const std::string& name, double budget_seconds, Fn&& body) {
  const auto start = Clock::now();
  bool pass = false;
  try {
    pass = body();
  } catch (const std::exception& e) {
    std::printf("  criterion %d threw: %s\n", id, e.what());
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  if (elapsed >= budget_seconds) {
    std::printf("  criterion %d over budget: %.2f s >= %.2f s\n", id, elapsed, budget_seconds);
    pass = false;
  }
  report(id, name, pass, elapsed);
}

ConstraintSpec edema() { return parse_spec_file(std::string(CONSIST_DATA_DIR) + "/edema.json"); }

EvidenceVector present(std::initializer_list<int> on) {
  EvidenceVector z(7, -1);
  for (int k : on) z[k] = 1;
  return z;
}

// Incompatible/direct-support sets restated by hand, independent of the
// parsed spec, so criterion 1 checks the library against a second source.
const std::vector<std::set<int>> kIncompat = {{0, 1, 2, 3, 4, 5, 6}, {3, 4, 5, 6}, {5, 6}, {}};
const std::vector<std::set<int>> kDirect = {{}, {0, 1, 2}, {3, 4}, {5, 6}};

// ---- sweep infrastructure shared by criteria 4-7 and 9 ----

struct RunOutcome {
  double omega1 = 0.0, omega2 = 0.0;
  std::uint64_t seed = 0;
  EvalMetrics metrics;
};

struct PointStats {
  double r1_mean = 0.0, r1_std = 0.0;
  double r2_mean = 0.0, r2_std = 0.0;
  double acc_mean = 0.0;
};

std::map<std::pair<double, double>, PointStats> summarize(const std::vector<RunOutcome>& runs) {
  std::map<std::pair<double, double>, std::vector<const RunOutcome*>> groups;
  for (const RunOutcome& run : runs) groups[{run.omega1, run.omega2}].push_back(&run);
  std::map<std::pair<double, double>, PointStats> out;
  for (const auto& [key, members] : groups) {
    PointStats stats;
    auto acc = [&members](auto get, double& mean, double& sd) {
      double total = 0.0;
      for (const RunOutcome* r : members) total += get(*r);
      mean = total / members.size();
      double ss = 0.0;
      for (const RunOutcome* r : members) ss += (get(*r) - mean) * (get(*r) - mean);
      sd = members.size() > 1 ? std::sqrt(ss / (members.size() - 1)) : 0.0;
    };
    double unused;
    acc([](const RunOutcome& r) { return r.metrics.report.r1_total; }, stats.r1_mean, stats.r1_std);
    acc([](const RunOutcome& r) { return r.metrics.report.r2_total; }, stats.r2_mean, stats.r2_std);
    acc([](const RunOutcome& r) { return r.metrics.acc_y; }, stats.acc_mean, unused);
    out[key] = stats;
  }
  return out;
}

// Train every (point, seed) job over a shared dataset, keeping the full
// evaluation (including per-class partitions) for the assertions below.
std::vector<RunOutcome> run_grid(const ConstraintSpec& spec, const LoadedData& data,
                                 const TrainConfig& base, LossConfig::Mode mode,
                                 const std::vector<std::pair<double, double>>& points,
                                 const std::vector<std::uint64_t>& seeds) {
  struct Job {
    double omega1, omega2;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& [o1, o2] : points)
    for (std::uint64_t seed : seeds) jobs.push_back({o1, o2, seed});

  std::vector<RunOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      TrainConfig config = base;
      config.loss.omega1 = jobs[i].omega1;
      config.loss.omega2 = jobs[i].omega2;
      config.loss.mode = mode;
      const TrainResult trained = train(data, spec, config, jobs[i].seed);
      outcomes[i] = {jobs[i].omega1, jobs[i].omega2, jobs[i].seed,
                     evaluate(trained.best, data.test, spec)};
    }
  };
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t workers = std::min<std::size_t>(hw > 0 ? hw : 1, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return outcomes;
}

PosteriorNodes one_hot_posterior(ad::Tape& tape, int hot, const std::vector<double>& ev_p) {
  PosteriorNodes post;
  for (int c = 0; c < 4; ++c) {
    post.task_p.push_back(tape.leaf(c == hot ? 1.0 : 0.0));
    post.task_logp.push_back(tape.leaf(c == hot ? 0.0 : -1e9));
  }
  for (double p : ev_p) {
    post.ev_p.push_back(tape.leaf(p));
    post.ev_logp_pos.push_back(tape.leaf(std::log(p)));
    post.ev_logp_neg.push_back(tape.leaf(std::log(1.0 - p)));
  }
  return post;
}

}  // namespace

int main() {
  const ConstraintSpec spec = edema();

  // 1. dataset_report vs brute-force counting on a 12-record fixture
  criterion(1, "report totals match brute-force enumeration", 1.0, [&]() {
    const std::vector<PredictionRecord> fixture = {
        {0, present({}), {}, {}},           {0, present({0, 3}), {}, {}},
        {0, present({0, 1, 2, 3, 4, 5, 6}), {}, {}},
        {1, present({0}), {}, {}},          {1, present({1, 3}), {}, {}},
        {1, present({}), {}, {}},           {1, present({3, 5}), {}, {}},
        {2, present({3, 6}), {}, {}},       {2, present({0, 1}), {}, {}},
        {3, present({5}), {}, {}},          {3, present({0, 1, 2, 3, 4}), {}, {}},
        {3, present({6}), {}, {}}};
    const InconsistencyReport report = dataset_report(spec, fixture);

    const int n = static_cast<int>(fixture.size());
    std::vector<long> r1_count(4, 0), r2_count(4, 0);
    for (const PredictionRecord& record : fixture) {
      for (int k : kIncompat[record.y_hat]) r1_count[record.y_hat] += record.z_hat[k] == 1;
      if (!kDirect[record.y_hat].empty()) {
        bool any = false;
        for (int k : kDirect[record.y_hat]) any |= record.z_hat[k] == 1;
        r2_count[record.y_hat] += !any;
      }
    }
    long r1_total = 0, r2_total = 0;
    bool ok = true;
    for (int c = 0; c < 4; ++c) {
      r1_total += r1_count[c];
      r2_total += r2_count[c];
      ok = ok && report.r1_by_class[c] == static_cast<double>(r1_count[c]) / n;
      ok = ok && report.r2_by_class[c] == static_cast<double>(r2_count[c]) / n;
    }
    ok = ok && report.r1_total == static_cast<double>(r1_total) / n;
    ok = ok && report.r2_total == static_cast<double>(r2_total) / n;
    return ok && report.n == n;
  });

  // 2. union / min bounds dominate the exact probabilities
  criterion(2, "union and min bounds hold over 1000 distributions", 5.0, [&]() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> p(7);
      for (double& v : p) v = unit(rng);
      for (int y = 0; y < 4; ++y) {
        const auto exact = exact_inconsistency_probability(spec, y, p);
        if (union_bound_incompatible(spec, y, p) < exact.incompatible) return false;
        if (min_bound_insufficient(spec, y, p) < exact.insufficient) return false;
      }
    }
    return true;
  });

  // 3. objective gradients vs central differences, both modes
  criterion(3, "objective passes finite-difference checks at 50 points", 30.0, [&]() {
    const int d = 6, H = 8;
    const ModelDims dims{d, H, 4, 7};
    const std::size_t n_params = ModelParams::param_count(dims);

    std::vector<LabeledPair> batch;
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto rand_x = [&]() {
      std::vector<double> x(d);
      for (double& v : x) v = normal(rng);
      return x;
    };
    batch.push_back({rand_x(), 1, {}});
    batch.push_back({rand_x(), 3, {}});
    batch.push_back({rand_x(), {}, std::pair<int, int>{0, 1}});
    batch.push_back({rand_x(), {}, std::pair<int, int>{5, -1}});

    // Central differences are meaningless across the argmax switch and the
    // relu kink, so sampled points keep a margin around both.
    auto well_separated = [&](const std::vector<double>& theta) {
      ModelParams params;
      params.dims = dims;
      params.theta = theta;
      for (const LabeledPair& pair : batch) {
        for (int j = 0; j < H; ++j) {
          double a = theta[static_cast<std::size_t>(H) * d + j];
          for (int i = 0; i < d; ++i) a += theta[static_cast<std::size_t>(j) * d + i] * pair.x[i];
          if (std::abs(a) < 1e-3) return false;
        }
        const PosteriorEntry post = forward_eval(params, pair.x);
        std::vector<double> sorted = post.task;
        std::sort(sorted.begin(), sorted.end());
        if (sorted[3] - sorted[2] < 1e-3) return false;
      }
      return true;
    };

    std::uniform_real_distribution<double> weight(-0.6, 0.6);
    double worst = 0.0;
    for (int point = 0; point < 50; ++point) {
      std::vector<double> theta(n_params);
      do {
        for (double& v : theta) v = weight(rng);
      } while (!well_separated(theta));
      for (const LossConfig::Mode mode : {LossConfig::Mode::Hard, LossConfig::Mode::Soft}) {
        LossConfig loss;
        loss.omega1 = 1.0;
        loss.omega2 = 1.0;
        loss.mode = mode;
        const double err = ad::grad_check(
            [&](ad::Tape& tape, std::span<const ad::Var> leaves) {
              TapedParams taped;
              taped.tape = &tape;
              taped.dims = dims;
              taped.theta.assign(leaves.begin(), leaves.end());
              return total_objective(spec, batch, loss, taped);
            },
            theta, 1e-5);
        worst = std::max(worst, err);
      }
    }
    std::printf("  max relative gradient error: %.3g\n", worst);
    return worst < 1e-4;
  });

  // shared sweeps for criteria 4-7 and 9
  const GenConfig gen = gen_config_from_json(
      nlohmann::json::parse(std::ifstream(std::string(CONSIST_DATA_DIR) + "/gen_default.json")));
  const TrainConfig base = train_config_from_json(
      nlohmann::json::parse(std::ifstream(std::string(CONSIST_DATA_DIR) + "/train_default.json")));
  const std::vector<std::uint64_t> seeds = {0, 1, 2};

  const Dataset raw = generate(spec, gen);
  std::mt19937_64 pair_rng(gen.seed ^ 0x7f4a7c159e3779b9ull);
  LoadedData data;
  data.train_pairs = make_pairs(raw.train, gen, pair_rng);
  data.validation = raw.validation;
  data.test = raw.test;

  const auto hard_start = Clock::now();
  const std::vector<RunOutcome> hard_runs = run_grid(
      spec, data, base, LossConfig::Mode::Hard, {{0, 0}, {10, 0}, {0, 10}, {10, 10}}, seeds);
  const double hard_elapsed = std::chrono::duration<double>(Clock::now() - hard_start).count();
  const auto hard_stats = summarize(hard_runs);
  const PointStats& base00 = hard_stats.at({0, 0});
  std::printf(
      "  hard sweep %.1f s; baseline r1 %.4f r2 %.4f acc %.3f | (10,10) r1 %.4f r2 %.4f acc "
      "%.3f\n",
      hard_elapsed, base00.r1_mean, base00.r2_mean, base00.acc_mean,
      hard_stats.at({10, 10}).r1_mean, hard_stats.at({10, 10}).r2_mean,
      hard_stats.at({10, 10}).acc_mean);

  // 4. regularization shrinks R1 without growing R2
  criterion(4, "hard regularizers cut mean R1 to <=40% of baseline", 600.0, [&]() {
    if (hard_elapsed >= 600.0) return false;
    const PointStats& reg = hard_stats.at({10, 10});
    if (base00.r1_mean <= 0.0) return false;  // nothing to reduce: the setup is broken
    return reg.r1_mean <= 0.4 * base00.r1_mean && reg.r2_mean <= base00.r2_mean + 1e-12;
  });

  // 5. penalizing one inconsistency does not reduce the other
  criterion(5, "cross-effect holds within one pooled std", 60.0, [&]() {
    auto pooled = [](double a, double b) { return std::sqrt((a * a + b * b) / 2.0); };
    const PointStats& r1_only = hard_stats.at({10, 0});
    const PointStats& r2_only = hard_stats.at({0, 10});
    const bool r2_up =
        r1_only.r2_mean >= base00.r2_mean - pooled(r1_only.r2_std, base00.r2_std);
    const bool r1_up =
        r2_only.r1_mean >= base00.r1_mean - pooled(r2_only.r1_std, base00.r1_std);
    return r2_up && r1_up;
  });

  // 6. task accuracy survives regularization
  criterion(6, "regularized accuracy within 0.05 of baseline", 60.0, [&]() {
    return std::abs(hard_stats.at({10, 10}).acc_mean - base00.acc_mean) <= 0.05;
  });

  // 7. the top class can never accumulate incompatibility mass
  criterion(7, "r1_by_class for the top class is exactly zero", 60.0, [&]() {
    for (const RunOutcome& run : hard_runs) {
      if (run.metrics.report.r1_by_class[3] != 0.0) return false;
    }
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<PredictionRecord> fixture;
    for (int i = 0; i < 500; ++i) {
      EvidenceVector z(7);
      for (auto& v : z) v = coin(rng) ? 1 : -1;
      fixture.push_back({3, z, {}, {}});
    }
    return dataset_report(spec, fixture).r1_by_class[3] == 0.0;
  });

  // 8. generator never emits an inconsistent ground-truth tuple
  criterion(8, "100000 synthetic tuples with zero violations", 60.0, [&]() {
    GenConfig config = gen;
    config.n_train = 100000;
    config.n_val = 0;
    config.n_test = 0;
    config.seed = 12345;
    const Dataset big = generate(spec, config);
    for (const Example& ex : big.train) {
      if (check_consistent(spec, ex.y, ex.z) != Verdict::Consistent) return false;
    }
    return big.train.size() == 100000;
  });

  // 9. the soft sweep runs through the harness and reduces R1
  criterion(9, "soft sweep completes and cuts mean R1 by >=40%", 600.0, [&]() {
    const fs::path dir = "acceptance_soft_sweep";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
      std::ifstream in(std::string(CONSIST_DATA_DIR) + "/gen_default.json");
      std::ofstream out(dir / "gen.json");
      out << in.rdbuf();
    }
    {
      std::ifstream in(std::string(CONSIST_DATA_DIR) + "/train_default.json");
      std::ofstream out(dir / "train.json");
      out << in.rdbuf();
    }
    {
      std::ofstream out(dir / "grid.json");
      out << R"({
        "spec": ")" << std::string(CONSIST_DATA_DIR) + "/edema.json" << R"(",
        "gen_config": "gen.json",
        "train_config": "train.json",
        "mode": "soft",
        "seeds": [0, 1, 2],
        "points": [[0, 0], [3, 3], [10, 6], [30, 10], [10, 10]]
      })";
    }
    const SweepGrid grid = load_sweep_grid((dir / "grid.json").string());
    const SweepResult result = run_sweep(grid, (dir / "out").string());
    if (!result.errors.empty()) return false;
    if (result.rows.size() != 15 || result.aggregates.size() != 5) return false;
    double r1_base = -1.0, r1_reg = -1.0;
    for (const SweepAggregate& agg : result.aggregates) {
      if (agg.omega1 == 0.0 && agg.omega2 == 0.0) r1_base = agg.r1_mean;
      if (agg.omega1 == 10.0 && agg.omega2 == 10.0) r1_reg = agg.r1_mean;
    }
    std::printf("  soft sweep baseline r1 %.4f -> (10,10) r1 %.4f\n", r1_base, r1_reg);
    if (r1_base <= 0.0 || r1_reg < 0.0) return false;
    const bool pass = r1_reg <= 0.6 * r1_base;
    fs::remove_all(dir);
    return pass;
  });

  // 10. soft regularizers collapse to the hard ones at a one-hot posterior
  criterion(10, "one-hot soft/hard reduction within 1e-12", 10.0, [&]() {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> ev_p(7);
      for (double& p : ev_p) p = unit(rng);
      const int hot = pick(rng);
      ad::Tape tape;
      const PosteriorNodes post = one_hot_posterior(tape, hot, ev_p);
      if (std::abs(reg_r1_soft(spec, post).value() - reg_r1_hard(spec, post).value()) > 1e-12)
        return false;
      if (std::abs(reg_r2_soft(spec, post).value() - reg_r2_hard(spec, post).value()) > 1e-12)
        return false;
    }
    return true;
  });

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
