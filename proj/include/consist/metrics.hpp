#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "consist/constraints.hpp"

namespace consist {

// One MAP prediction, optionally with the ground-truth task label and the
// raw posterior vector (task block of length C followed by K evidence
// probabilities).
struct PredictionRecord {
  int y_hat = 0;
  EvidenceVector z_hat;
  std::optional<int> y_true;
  std::optional<std::vector<double>> posterior;
};

// Dataset-level inconsistency summary. Per-class entries are
// population-normalized (divided by the total record count), so the
// by-class vectors sum to the totals.
struct InconsistencyReport {
  double r1_total = 0.0;
  double r2_total = 0.0;
  double r1_normalized_total = 0.0;
  std::vector<double> r1_by_class;
  std::vector<double> r2_by_class;
  std::size_t n = 0;
};

// Count of incompatible evidence present under class y.
int r1_example(const ConstraintSpec& spec, int y, const EvidenceVector& z);

// 1 when class y has direct-support evidence but none of it is present,
// else 0. Classes with empty direct_support always score 0.
int r2_example(const ConstraintSpec& spec, int y, const EvidenceVector& z);

// Averages of r1/r2 over records, partitioned by predicted class.
// Integer counts are accumulated and divided by n once at the end.
// r1_normalized_total averages count/|incompatible(y_hat)| over records,
// with empty-incompatible records contributing 0 (still divided by n).
InconsistencyReport dataset_report(const ConstraintSpec& spec,
                                   std::span<const PredictionRecord> records);

struct InconsistencyProbability {
  double incompatible = 0.0;   // P(some forbidden evidence present)
  double insufficient = 0.0;   // P(no direct evidence present); 1 for empty sets
};

// Exact probabilities under independent Bernoulli evidence with
// P(z_k = +1) = p[k]. Note the insufficiency value follows the literal
// definition (empty direct_support gives probability 1), unlike r2_example
// which applies the exemption; callers comparing the two conventions get
// both from here. Serves as the brute-force oracle for the bounds below.
InconsistencyProbability exact_inconsistency_probability(const ConstraintSpec& spec, int y,
                                                         std::span<const double> p);

// Additive upper bound on the incompatibility probability.
double union_bound_incompatible(const ConstraintSpec& spec, int y, std::span<const double> p);

// Min-based upper bound on the insufficiency probability.
double min_bound_insufficient(const ConstraintSpec& spec, int y, std::span<const double> p);

// Predictions file IO: JSON-lines, one record per line with fields `y_hat`,
// `z_hat` (array of +-1), optional `y_true`, optional `posterior`.
std::vector<PredictionRecord> load_predictions_jsonl(const std::string& path, int num_evidence);

nlohmann::json report_to_json(const InconsistencyReport& report);
std::string report_to_csv(const InconsistencyReport& report);

}  // namespace consist
