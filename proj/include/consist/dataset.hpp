#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "consist/constraints.hpp"

namespace consist {

// A training pair: a feature vector with exactly one label attached,
// either the task label or one evidence label (index, +-1).
struct LabeledPair {
  std::vector<double> x;
  std::optional<int> y;
  std::optional<std::pair<int, int>> z;
};

// Full ground-truth tuple, used for evaluation splits.
struct Example {
  std::vector<double> x;
  int y = 0;
  EvidenceVector z;
};

struct Dataset {
  std::vector<Example> train;
  std::vector<Example> validation;
  std::vector<Example> test;
};

// The on-disk dataset view consumed by training: the train split reduced
// to labeled pairs, the evaluation splits kept as full tuples.
struct LoadedData {
  std::vector<LabeledPair> train_pairs;
  std::vector<Example> validation;
  std::vector<Example> test;
};

// JSON-lines dataset file: each line carries `x`, a `split` tag, and
// either `y`, or `z` as an object mapping evidence index to +-1 (a single
// entry for pair lines, all K entries for evaluation lines).
void write_dataset_jsonl(const std::string& path, std::span<const LabeledPair> train_pairs,
                         std::span<const Example> validation, std::span<const Example> test);
LoadedData load_dataset_jsonl(const std::string& path, int num_evidence);

}  // namespace consist
