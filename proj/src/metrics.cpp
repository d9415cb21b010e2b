#include "consist/metrics.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace consist {

int r1_example(const ConstraintSpec& spec, int y, const EvidenceVector& z) {
  if (y < 0 || y >= spec.num_classes) throw std::invalid_argument("task label out of range");
  if (static_cast<int>(z.size()) != spec.num_evidence())
    throw std::invalid_argument("evidence vector length mismatch");
  int count = 0;
  for (int k : spec.incompatible[y]) count += (z[k] == 1);
  return count;
}

int r2_example(const ConstraintSpec& spec, int y, const EvidenceVector& z) {
  if (y < 0 || y >= spec.num_classes) throw std::invalid_argument("task label out of range");
  if (static_cast<int>(z.size()) != spec.num_evidence())
    throw std::invalid_argument("evidence vector length mismatch");
  if (spec.direct_support[y].empty()) return 0;
  for (int k : spec.direct_support[y]) {
    if (z[k] == 1) return 0;
  }
  return 1;
}

InconsistencyReport dataset_report(const ConstraintSpec& spec,
                                   std::span<const PredictionRecord> records) {
  if (records.empty()) throw std::invalid_argument("dataset_report: empty input");
  const int C = spec.num_classes;
  std::vector<std::int64_t> r1_counts(C, 0), r2_counts(C, 0);
  double normalized_sum = 0.0;
  for (const auto& rec : records) {
    const int c = rec.y_hat;
    const int r1 = r1_example(spec, c, rec.z_hat);
    r1_counts[c] += r1;
    r2_counts[c] += r2_example(spec, c, rec.z_hat);
    if (!spec.incompatible[c].empty())
      normalized_sum += static_cast<double>(r1) / static_cast<double>(spec.incompatible[c].size());
  }
  InconsistencyReport report;
  report.n = records.size();
  const double n = static_cast<double>(records.size());
  report.r1_by_class.resize(C);
  report.r2_by_class.resize(C);
  std::int64_t r1_total = 0, r2_total = 0;
  for (int c = 0; c < C; ++c) {
    r1_total += r1_counts[c];
    r2_total += r2_counts[c];
    report.r1_by_class[c] = static_cast<double>(r1_counts[c]) / n;
    report.r2_by_class[c] = static_cast<double>(r2_counts[c]) / n;
  }
  report.r1_total = static_cast<double>(r1_total) / n;
  report.r2_total = static_cast<double>(r2_total) / n;
  report.r1_normalized_total = normalized_sum / n;
  return report;
}

namespace {
void check_probs(const ConstraintSpec& spec, int y, std::span<const double> p) {
  if (y < 0 || y >= spec.num_classes) throw std::invalid_argument("task label out of range");
  if (static_cast<int>(p.size()) != spec.num_evidence())
    throw std::invalid_argument("probability vector length mismatch");
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("probability out of range");
  }
}
}  // namespace

InconsistencyProbability exact_inconsistency_probability(const ConstraintSpec& spec, int y,
                                                         std::span<const double> p) {
  check_probs(spec, y, p);
  InconsistencyProbability out;
  double none_forbidden = 1.0;
  for (int k : spec.incompatible[y]) none_forbidden *= 1.0 - p[k];
  out.incompatible = 1.0 - none_forbidden;
  double none_direct = 1.0;  // empty product: probability 1 under the literal definition
  for (int k : spec.direct_support[y]) none_direct *= 1.0 - p[k];
  out.insufficient = none_direct;
  return out;
}

double union_bound_incompatible(const ConstraintSpec& spec, int y, std::span<const double> p) {
  check_probs(spec, y, p);
  double sum = 0.0;
  for (int k : spec.incompatible[y]) sum += p[k];
  return sum;
}

double min_bound_insufficient(const ConstraintSpec& spec, int y, std::span<const double> p) {
  check_probs(spec, y, p);
  double best = 1.0;
  for (int k : spec.direct_support[y]) best = std::min(best, 1.0 - p[k]);
  return best;
}

std::vector<PredictionRecord> load_predictions_jsonl(const std::string& path, int num_evidence) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions file: " + path);
  std::vector<PredictionRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    try {
      PredictionRecord rec;
      rec.y_hat = doc.at("y_hat").get<int>();
      for (const auto& v : doc.at("z_hat")) rec.z_hat.push_back(v.get<int>());
      if (static_cast<int>(rec.z_hat.size()) != num_evidence)
        throw std::runtime_error("z_hat length mismatch");
      if (doc.contains("y_true")) rec.y_true = doc.at("y_true").get<int>();
      if (doc.contains("posterior"))
        rec.posterior = doc.at("posterior").get<std::vector<double>>();
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

nlohmann::json report_to_json(const InconsistencyReport& report) {
  return nlohmann::json{{"r1_total", report.r1_total},
                        {"r2_total", report.r2_total},
                        {"r1_normalized_total", report.r1_normalized_total},
                        {"r1_by_class", report.r1_by_class},
                        {"r2_by_class", report.r2_by_class},
                        {"n", report.n}};
}

std::string report_to_csv(const InconsistencyReport& report) {
  std::ostringstream out;
  out << "class,r1,r2\n";
  out.precision(17);
  for (std::size_t c = 0; c < report.r1_by_class.size(); ++c)
    out << c << "," << report.r1_by_class[c] << "," << report.r2_by_class[c] << "\n";
  out << "total," << report.r1_total << "," << report.r2_total << "\n";
  return out.str();
}

}  // namespace consist
