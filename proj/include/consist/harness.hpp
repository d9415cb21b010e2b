#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "consist/losses.hpp"

namespace consist {

struct SweepPoint {
  double omega1 = 0.0;
  double omega2 = 0.0;
};

// Grid file contents: constraint spec, dataset source, training config,
// regularizer mode, seeds, and the (omega1, omega2) points to cover.
struct SweepGrid {
  std::string spec_path;
  std::string dataset_path;     // either this...
  std::string gen_config_path;  // ...or this must be set
  std::string train_config_path;
  LossConfig::Mode mode = LossConfig::Mode::Hard;
  std::vector<std::uint64_t> seeds;
  std::vector<SweepPoint> points;
};

SweepGrid load_sweep_grid(const std::string& path);

struct SweepRow {
  double omega1 = 0.0, omega2 = 0.0;
  std::string mode;
  std::uint64_t seed = 0;
  double r1 = 0.0, r2 = 0.0, acc_y = 0.0, auc_y = 0.0;
  std::vector<double> acc_z;
};

struct SweepAggregate {
  double omega1 = 0.0, omega2 = 0.0;
  std::string mode;
  int n_seeds = 0;
  double r1_mean = 0.0, r1_std = 0.0;
  double r2_mean = 0.0, r2_std = 0.0;
  double acc_y_mean = 0.0, acc_y_std = 0.0;
  double auc_y_mean = 0.0, auc_y_std = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepAggregate> aggregates;
  std::vector<std::string> errors;
};

// Mean and sample standard deviation per grid point, recomputed from the
// stored rows.
std::vector<SweepAggregate> aggregate_rows(const std::vector<SweepRow>& rows);

// Run every (point, seed) job, sharing one dataset, in a worker pool whose
// width defaults to the hardware concurrency and can be pinned with the
// CONSIST_JOBS environment variable. Failed runs are recorded and the
// sweep continues.
SweepResult run_sweep(const SweepGrid& grid, const std::string& out_dir);

// CLI entry points. Each returns normally on success and throws on a
// usage/parse error; cmd_sweep returns false when any grid run failed.
void cmd_validate(const std::string& spec_path, const std::string& predictions_path,
                  const std::string& out_dir);
void cmd_gen(const std::string& config_path, const std::string& out_path);
void cmd_train(const std::string& spec_path, const std::string& data_path,
               const std::string& config_path, double omega1, double omega2,
               const std::string& mode, std::uint64_t seed, const std::string& out_dir);
bool cmd_sweep(const std::string& grid_path, const std::string& out_dir);
void cmd_report(const std::vector<std::string>& inputs, const std::string& out_path);

}  // namespace consist
