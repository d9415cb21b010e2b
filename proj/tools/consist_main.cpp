// Command-line front end. Links only the C API so it doubles as a living
// example of driving the shared library from C-compatible code.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "consist.h"

namespace {

int check(consist_status status) {
  if (status == CONSIST_OK) return 0;
  std::fprintf(stderr, "error (%s): %s\n", consist_status_name(status), consist_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"consistency-constrained multitask classification toolkit"};
  app.require_subcommand(1);

  std::string spec, predictions, out, config, data, mode = "hard", grid;
  std::vector<std::string> inputs;
  double omega1 = 0.0, omega2 = 0.0;
  std::uint64_t seed = 0;

  auto* validate = app.add_subcommand("validate", "score a predictions file against a spec");
  validate->add_option("--spec", spec, "constraint spec file")->required();
  validate->add_option("--predictions", predictions, "predictions JSONL file")->required();
  validate->add_option("--out", out, "output directory")->required();

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--config", config, "generator config file")->required();
  gen->add_option("--out", out, "output dataset file")->required();

  auto* train = app.add_subcommand("train", "train one model");
  train->add_option("--spec", spec, "constraint spec file")->required();
  train->add_option("--data", data, "dataset JSONL file")->required();
  train->add_option("--config", config, "training config file")->required();
  train->add_option("--omega1", omega1, "incompatibility regularizer strength");
  train->add_option("--omega2", omega2, "insufficiency regularizer strength");
  train->add_option("--mode", mode, "regularizer mode: hard|soft");
  train->add_option("--seed", seed, "training seed");
  train->add_option("--out", out, "output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "run a regularization grid");
  sweep->add_option("--grid", grid, "sweep grid file")->required();
  sweep->add_option("--out", out, "output directory")->required();

  auto* report = app.add_subcommand("report", "merge sweep results into a comparison table");
  report->add_option("--in", inputs, "sweep result dirs or files (1 or 2)")->required();
  report->add_option("--out", out, "output CSV file")->required();

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed())
    return check(consist_cmd_validate(spec.c_str(), predictions.c_str(), out.c_str()));
  if (gen->parsed()) return check(consist_cmd_gen(config.c_str(), out.c_str()));
  if (train->parsed())
    return check(consist_cmd_train(spec.c_str(), data.c_str(), config.c_str(), omega1, omega2,
                                   mode.c_str(), seed, out.c_str()));
  if (sweep->parsed()) return check(consist_cmd_sweep(grid.c_str(), out.c_str()));
  if (report->parsed()) {
    std::vector<const char*> raw;
    for (const std::string& s : inputs) raw.push_back(s.c_str());
    return check(consist_cmd_report(raw.data(), static_cast<int>(raw.size()), out.c_str()));
  }
  return 1;
}
