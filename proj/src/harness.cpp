#include "consist/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "consist/dataset.hpp"
#include "consist/synthdata.hpp"
#include "consist/trainer.hpp"

namespace consist {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  nlohmann::json doc;
  in >> doc;
  return doc;
}

std::string resolve(const std::string& base_file, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_file).parent_path() / path).string();
}

std::string mode_name(LossConfig::Mode mode) {
  return mode == LossConfig::Mode::Hard ? "hard" : "soft";
}

LossConfig::Mode parse_mode(const std::string& mode) {
  if (mode == "hard") return LossConfig::Mode::Hard;
  if (mode == "soft") return LossConfig::Mode::Soft;
  throw std::invalid_argument("mode must be 'hard' or 'soft', got '" + mode + "'");
}

int worker_count(std::size_t jobs) {
  if (const char* env = std::getenv("CONSIST_JOBS")) {
    const int n = std::atoi(env);
    if (n > 0) return std::min<std::size_t>(n, jobs);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min<std::size_t>(hw > 0 ? hw : 1, jobs));
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

std::string rows_csv(const std::vector<SweepRow>& rows, int num_evidence) {
  std::ostringstream out;
  out << "omega1,omega2,mode,seed,r1,r2,acc_y,auc_y";
  for (int k = 0; k < num_evidence; ++k) out << ",acc_z" << k;
  out << "\n";
  for (const SweepRow& row : rows) {
    out << fmt(row.omega1) << "," << fmt(row.omega2) << "," << row.mode << "," << row.seed << ","
        << fmt(row.r1) << "," << fmt(row.r2) << "," << fmt(row.acc_y) << "," << fmt(row.auc_y);
    for (double a : row.acc_z) out << "," << fmt(a);
    out << "\n";
  }
  return out.str();
}

std::string aggregates_csv(const std::vector<SweepAggregate>& aggs) {
  std::ostringstream out;
  out << "omega1,omega2,mode,n_seeds,r1_mean,r1_std,r2_mean,r2_std,"
         "acc_y_mean,acc_y_std,auc_y_mean,auc_y_std\n";
  for (const SweepAggregate& a : aggs) {
    out << fmt(a.omega1) << "," << fmt(a.omega2) << "," << a.mode << "," << a.n_seeds << ","
        << fmt(a.r1_mean) << "," << fmt(a.r1_std) << "," << fmt(a.r2_mean) << "," << fmt(a.r2_std)
        << "," << fmt(a.acc_y_mean) << "," << fmt(a.acc_y_std) << "," << fmt(a.auc_y_mean) << ","
        << fmt(a.auc_y_std) << "\n";
  }
  return out.str();
}

nlohmann::json row_to_json(const SweepRow& row) {
  return nlohmann::json{{"omega1", row.omega1}, {"omega2", row.omega2}, {"mode", row.mode},
                        {"seed", row.seed},     {"r1", row.r1},         {"r2", row.r2},
                        {"acc_y", row.acc_y},   {"auc_y", row.auc_y},   {"acc_z", row.acc_z}};
}

SweepRow row_from_json(const nlohmann::json& doc) {
  SweepRow row;
  row.omega1 = doc.at("omega1").get<double>();
  row.omega2 = doc.at("omega2").get<double>();
  row.mode = doc.at("mode").get<std::string>();
  row.seed = doc.at("seed").get<std::uint64_t>();
  row.r1 = doc.at("r1").get<double>();
  row.r2 = doc.at("r2").get<double>();
  row.acc_y = doc.at("acc_y").get<double>();
  row.auc_y = doc.at("auc_y").get<double>();
  row.acc_z = doc.at("acc_z").get<std::vector<double>>();
  return row;
}

}  // namespace

SweepGrid load_sweep_grid(const std::string& path) {
  const nlohmann::json doc = read_json(path);
  SweepGrid grid;
  grid.spec_path = resolve(path, doc.at("spec").get<std::string>());
  if (doc.contains("dataset")) grid.dataset_path = resolve(path, doc.at("dataset").get<std::string>());
  if (doc.contains("gen_config"))
    grid.gen_config_path = resolve(path, doc.at("gen_config").get<std::string>());
  if (grid.dataset_path.empty() && grid.gen_config_path.empty())
    throw std::invalid_argument("grid needs 'dataset' or 'gen_config'");
  grid.train_config_path = resolve(path, doc.at("train_config").get<std::string>());
  grid.mode = parse_mode(doc.value("mode", "hard"));
  grid.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  if (grid.seeds.empty()) throw std::invalid_argument("grid needs at least one seed");
  for (const auto& point : doc.at("points")) {
    if (point.size() != 2) throw std::invalid_argument("grid points must be [omega1, omega2]");
    grid.points.push_back({point[0].get<double>(), point[1].get<double>()});
  }
  if (grid.points.empty()) throw std::invalid_argument("grid needs at least one point");
  return grid;
}

std::vector<SweepAggregate> aggregate_rows(const std::vector<SweepRow>& rows) {
  std::map<std::pair<double, double>, std::vector<const SweepRow*>> groups;
  for (const SweepRow& row : rows) groups[{row.omega1, row.omega2}].push_back(&row);
  std::vector<SweepAggregate> aggs;
  for (const auto& [key, members] : groups) {
    SweepAggregate agg;
    agg.omega1 = key.first;
    agg.omega2 = key.second;
    agg.mode = members.front()->mode;
    agg.n_seeds = static_cast<int>(members.size());
    auto stats = [&members](auto getter, double& mean, double& sd) {
      double total = 0.0;
      for (const SweepRow* row : members) total += getter(*row);
      mean = total / members.size();
      double ss = 0.0;
      for (const SweepRow* row : members) {
        const double d = getter(*row) - mean;
        ss += d * d;
      }
      sd = members.size() > 1 ? std::sqrt(ss / (members.size() - 1)) : 0.0;
    };
    stats([](const SweepRow& r) { return r.r1; }, agg.r1_mean, agg.r1_std);
    stats([](const SweepRow& r) { return r.r2; }, agg.r2_mean, agg.r2_std);
    stats([](const SweepRow& r) { return r.acc_y; }, agg.acc_y_mean, agg.acc_y_std);
    stats([](const SweepRow& r) { return r.auc_y; }, agg.auc_y_mean, agg.auc_y_std);
    aggs.push_back(agg);
  }
  return aggs;
}

SweepResult run_sweep(const SweepGrid& grid, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const ConstraintSpec spec = parse_spec_file(grid.spec_path);
  const TrainConfig base_config = train_config_from_json(read_json(grid.train_config_path));

  std::string dataset_path = grid.dataset_path;
  if (dataset_path.empty()) {
    const GenConfig gen = gen_config_from_json(read_json(grid.gen_config_path));
    const Dataset data = generate(spec, gen);
    std::mt19937_64 pair_rng(gen.seed ^ 0x7f4a7c159e3779b9ull);
    const std::vector<LabeledPair> pairs = make_pairs(data.train, gen, pair_rng);
    dataset_path = (fs::path(out_dir) / "dataset.jsonl").string();
    write_dataset_jsonl(dataset_path, pairs, data.validation, data.test);
  }
  const LoadedData data = load_dataset_jsonl(dataset_path, spec.num_evidence());

  struct Job {
    SweepPoint point;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const SweepPoint& point : grid.points) {
    for (std::uint64_t seed : grid.seeds) jobs.push_back({point, seed});
  }

  std::vector<SweepRow> slots(jobs.size());
  std::vector<char> ok(jobs.size(), 0);
  std::vector<std::string> errors;
  std::mutex error_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      try {
        TrainConfig config = base_config;
        config.loss.omega1 = job.point.omega1;
        config.loss.omega2 = job.point.omega2;
        config.loss.mode = grid.mode;
        const TrainResult trained = train(data, spec, config, job.seed);
        const EvalMetrics metrics = evaluate(trained.best, data.test, spec);
        SweepRow row;
        row.omega1 = job.point.omega1;
        row.omega2 = job.point.omega2;
        row.mode = mode_name(grid.mode);
        row.seed = job.seed;
        row.r1 = metrics.report.r1_total;
        row.r2 = metrics.report.r2_total;
        row.acc_y = metrics.acc_y;
        row.auc_y = metrics.auc_y;
        row.acc_z = metrics.acc_z;
        slots[i] = std::move(row);
        ok[i] = 1;
      } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << "(" << job.point.omega1 << "," << job.point.omega2 << ") seed " << job.seed << ": "
            << e.what();
        std::lock_guard<std::mutex> lock(error_mutex);
        errors.push_back(msg.str());
      }
    }
  };
  std::vector<std::thread> pool;
  const int workers = worker_count(jobs.size());
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  SweepResult result;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (ok[i]) result.rows.push_back(std::move(slots[i]));
  }
  result.aggregates = aggregate_rows(result.rows);
  result.errors = errors;

  write_text((fs::path(out_dir) / "results.csv").string(),
             rows_csv(result.rows, spec.num_evidence()));
  write_text((fs::path(out_dir) / "aggregate.csv").string(), aggregates_csv(result.aggregates));

  nlohmann::json doc;
  doc["rows"] = nlohmann::json::array();
  for (const SweepRow& row : result.rows) doc["rows"].push_back(row_to_json(row));
  doc["aggregates"] = nlohmann::json::array();
  for (const SweepAggregate& a : result.aggregates) {
    doc["aggregates"].push_back({{"omega1", a.omega1},
                                 {"omega2", a.omega2},
                                 {"mode", a.mode},
                                 {"n_seeds", a.n_seeds},
                                 {"r1_mean", a.r1_mean},
                                 {"r1_std", a.r1_std},
                                 {"r2_mean", a.r2_mean},
                                 {"r2_std", a.r2_std},
                                 {"acc_y_mean", a.acc_y_mean},
                                 {"acc_y_std", a.acc_y_std},
                                 {"auc_y_mean", a.auc_y_mean},
                                 {"auc_y_std", a.auc_y_std}});
  }
  doc["errors"] = result.errors;
  // timestamps live only here so the data files stay reproducible
  doc["metadata"] = {{"generated_at",
                      std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count()}};
  write_text((fs::path(out_dir) / "results.json").string(), doc.dump(2) + "\n");
  return result;
}

void cmd_validate(const std::string& spec_path, const std::string& predictions_path,
                  const std::string& out_dir) {
  const ConstraintSpec spec = parse_spec_file(spec_path);
  const std::vector<PredictionRecord> records =
      load_predictions_jsonl(predictions_path, spec.num_evidence());
  const InconsistencyReport report = dataset_report(spec, records);
  fs::create_directories(out_dir);
  write_text((fs::path(out_dir) / "report.json").string(), report_to_json(report).dump(2) + "\n");
  write_text((fs::path(out_dir) / "report.csv").string(), report_to_csv(report));
}

void cmd_gen(const std::string& config_path, const std::string& out_path) {
  const nlohmann::json doc = read_json(config_path);
  const ConstraintSpec spec = parse_spec_file(resolve(config_path, doc.at("spec").get<std::string>()));
  const GenConfig config = gen_config_from_json(doc);
  const Dataset data = generate(spec, config);
  std::mt19937_64 pair_rng(config.seed ^ 0x7f4a7c159e3779b9ull);
  const std::vector<LabeledPair> pairs = make_pairs(data.train, config, pair_rng);
  write_dataset_jsonl(out_path, pairs, data.validation, data.test);
}

void cmd_train(const std::string& spec_path, const std::string& data_path,
               const std::string& config_path, double omega1, double omega2,
               const std::string& mode, std::uint64_t seed, const std::string& out_dir) {
  const ConstraintSpec spec = parse_spec_file(spec_path);
  TrainConfig config = train_config_from_json(read_json(config_path));
  config.loss.omega1 = omega1;
  config.loss.omega2 = omega2;
  config.loss.mode = parse_mode(mode);
  const LoadedData data = load_dataset_jsonl(data_path, spec.num_evidence());

  fs::create_directories(out_dir);
  std::ofstream trace((fs::path(out_dir) / "trace.jsonl").string());
  if (!trace) throw std::runtime_error("cannot write trace file");
  const TrainResult trained = train(data, spec, config, seed,
                                    [&trace](const nlohmann::json& row) { trace << row << "\n"; });

  nlohmann::json extra{{"omega1", omega1},       {"omega2", omega2},
                       {"mode", mode},           {"seed", seed},
                       {"best_step", trained.best_step}, {"best_val_acc", trained.best_val_acc},
                       {"learning_rate", config.learning_rate}, {"batch_size", config.batch_size},
                       {"steps", config.steps}};
  save_checkpoint((fs::path(out_dir) / "checkpoint.json").string(), trained.best, spec, extra);

  const EvalMetrics metrics = evaluate(trained.best, data.test, spec);
  nlohmann::json eval{{"acc_y", metrics.acc_y},
                      {"auc_y", metrics.auc_y},
                      {"acc_z", metrics.acc_z},
                      {"report", report_to_json(metrics.report)}};
  write_text((fs::path(out_dir) / "eval.json").string(), eval.dump(2) + "\n");
}

bool cmd_sweep(const std::string& grid_path, const std::string& out_dir) {
  const SweepGrid grid = load_sweep_grid(grid_path);
  const SweepResult result = run_sweep(grid, out_dir);
  return result.errors.empty();
}

void cmd_report(const std::vector<std::string>& inputs, const std::string& out_path) {
  if (inputs.empty() || inputs.size() > 2)
    throw std::invalid_argument("report takes one or two sweep result inputs");

  auto load_rows = [](const std::string& input) {
    std::string file = input;
    if (fs::is_directory(file)) file = (fs::path(file) / "results.json").string();
    const nlohmann::json doc = read_json(file);
    std::vector<SweepRow> rows;
    for (const auto& row : doc.at("rows")) rows.push_back(row_from_json(row));
    return aggregate_rows(rows);
  };
  const std::vector<SweepAggregate> a = load_rows(inputs[0]);
  const std::vector<SweepAggregate> b = load_rows(inputs.size() == 2 ? inputs[1] : inputs[0]);

  std::map<std::pair<double, double>, const SweepAggregate*> b_index;
  for (const SweepAggregate& agg : b) b_index[{agg.omega1, agg.omega2}] = &agg;

  std::ostringstream out;
  out << "omega1,omega2,mode_a,mode_b,r1_a,r1_b,r1_delta,r2_a,r2_b,r2_delta,"
         "acc_a,acc_b,acc_delta\n";
  for (const SweepAggregate& agg : a) {
    const auto it = b_index.find({agg.omega1, agg.omega2});
    if (it == b_index.end()) {
      std::ostringstream msg;
      msg << "grid point (" << agg.omega1 << "," << agg.omega2 << ") missing from "
          << (inputs.size() == 2 ? inputs[1] : inputs[0]);
      throw std::runtime_error(msg.str());
    }
    const SweepAggregate& other = *it->second;
    out << fmt(agg.omega1) << "," << fmt(agg.omega2) << "," << agg.mode << "," << other.mode << ","
        << fmt(agg.r1_mean) << "," << fmt(other.r1_mean) << "," << fmt(other.r1_mean - agg.r1_mean)
        << "," << fmt(agg.r2_mean) << "," << fmt(other.r2_mean) << ","
        << fmt(other.r2_mean - agg.r2_mean) << "," << fmt(agg.acc_y_mean) << ","
        << fmt(other.acc_y_mean) << "," << fmt(other.acc_y_mean - agg.acc_y_mean) << "\n";
  }
  if (a.size() != b_index.size())
    throw std::runtime_error("sweep inputs cover different grids");
  write_text(out_path, out.str());
}

}  // namespace consist
