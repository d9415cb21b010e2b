#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "consist/metrics.hpp"

using namespace consist;

namespace {

ConstraintSpec edema() { return parse_spec_file(std::string(CONSIST_DATA_DIR) + "/edema.json"); }

EvidenceVector present(int K, std::initializer_list<int> on) {
  EvidenceVector z(K, -1);
  for (int k : on) z[k] = 1;
  return z;
}

}  // namespace

TEST_CASE("per-example incompatibility counts") {
  const ConstraintSpec spec = edema();
  CHECK(r1_example(spec, 1, present(7, {1, 3})) == 1);
  CHECK(r1_example(spec, 3, present(7, {0, 1, 2, 3, 4, 5, 6})) == 0);
  CHECK(r1_example(spec, 0, present(7, {0, 1, 2, 3, 4, 5, 6})) == 7);
  CHECK_THROWS_AS(r1_example(spec, 1, present(5, {})), std::invalid_argument);
}

TEST_CASE("per-example insufficiency indicator") {
  const ConstraintSpec spec = edema();
  CHECK(r2_example(spec, 3, present(7, {3})) == 1);
  CHECK(r2_example(spec, 2, present(7, {0, 3, 4})) == 0);
  CHECK(r2_example(spec, 0, present(7, {})) == 0);
  CHECK_THROWS_AS(r2_example(spec, 0, present(8, {})), std::invalid_argument);
}

TEST_CASE("dataset report on hand-built records") {
  const ConstraintSpec spec = edema();
  std::vector<PredictionRecord> records;
  records.push_back({1, present(7, {1, 3}), {}, {}});  // one incompatible finding, not insufficient
  records.push_back({3, present(7, {5}), {}, {}});     // fully consistent
  const InconsistencyReport report = dataset_report(spec, records);
  CHECK(report.n == 2);
  CHECK(report.r1_total == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.r2_total == doctest::Approx(0.0));
  CHECK(report.r1_by_class[1] == doctest::Approx(0.5));
  CHECK(report.r1_by_class[3] == 0.0);
  // count/|I1(1)| = 1/4 over two records
  CHECK(report.r1_normalized_total == doctest::Approx(0.125));
}

TEST_CASE("all-consistent records give a zero report") {
  const ConstraintSpec spec = edema();
  std::vector<PredictionRecord> records{{1, present(7, {0}), {}, {}},
                                        {2, present(7, {3}), {}, {}}};
  const InconsistencyReport report = dataset_report(spec, records);
  CHECK(report.r1_total == 0.0);
  CHECK(report.r2_total == 0.0);
  CHECK(report.r1_normalized_total == 0.0);
}

TEST_CASE("top class never contributes incompatibility") {
  const ConstraintSpec spec = edema();
  std::vector<PredictionRecord> records{{3, present(7, {0, 1, 2, 3, 4}), {}, {}}};
  const InconsistencyReport report = dataset_report(spec, records);
  CHECK(report.r1_by_class[3] == 0.0);
  CHECK(report.r2_by_class[3] == doctest::Approx(1.0));  // no direct severe finding present
}

TEST_CASE("dataset report rejects empty input") {
  const ConstraintSpec spec = edema();
  CHECK_THROWS_AS(dataset_report(spec, {}), std::invalid_argument);
}

TEST_CASE("by-class partitions sum to the totals") {
  const ConstraintSpec spec = edema();
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick_y(0, 3), coin(0, 1);
  std::vector<PredictionRecord> records;
  for (int i = 0; i < 500; ++i) {
    EvidenceVector z(7);
    for (auto& v : z) v = coin(rng) ? 1 : -1;
    records.push_back({pick_y(rng), z, {}, {}});
  }
  const InconsistencyReport report = dataset_report(spec, records);
  double r1 = 0.0, r2 = 0.0;
  for (int c = 0; c < 4; ++c) {
    r1 += report.r1_by_class[c];
    r2 += report.r2_by_class[c];
  }
  CHECK(r1 == doctest::Approx(report.r1_total).epsilon(1e-12));
  CHECK(r2 == doctest::Approx(report.r2_total).epsilon(1e-12));
  CHECK(report.r2_total <= 1.0);
  CHECK(report.r2_total >= 0.0);
}

TEST_CASE("exact inconsistency probabilities") {
  const ConstraintSpec spec = edema();
  SUBCASE("degenerate all-zero distribution") {
    std::vector<double> p(7, 0.0);
    const auto probs = exact_inconsistency_probability(spec, 2, p);
    CHECK(probs.incompatible == 0.0);
    CHECK(probs.insufficient == 1.0);
  }
  SUBCASE("worked two-finding case") {
    std::vector<double> p(7, 0.0);
    p[5] = 0.3;  // air bronchograms
    p[6] = 0.3;  // parenchymal opacity
    const auto probs = exact_inconsistency_probability(spec, 2, p);
    CHECK(probs.incompatible == doctest::Approx(0.51).epsilon(1e-12));
    CHECK(union_bound_incompatible(spec, 2, p) == doctest::Approx(0.6));
    CHECK(union_bound_incompatible(spec, 2, p) >= probs.incompatible);
  }
  SUBCASE("empty direct support reports the literal probability 1") {
    std::vector<double> p(7, 0.5);
    CHECK(exact_inconsistency_probability(spec, 0, p).insufficient == 1.0);
  }
  SUBCASE("probability out of range") {
    std::vector<double> p(7, 1.5);
    CHECK_THROWS_AS(exact_inconsistency_probability(spec, 0, p), std::invalid_argument);
  }
}

TEST_CASE("union and min bounds dominate the exact probabilities") {
  const ConstraintSpec spec = edema();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(7);
    for (double& v : p) v = unit(rng);
    for (int y = 0; y < 4; ++y) {
      const auto probs = exact_inconsistency_probability(spec, y, p);
      CHECK(union_bound_incompatible(spec, y, p) >= probs.incompatible - 1e-15);
      CHECK(min_bound_insufficient(spec, y, p) >= probs.insufficient - 1e-15);
    }
  }
}

TEST_CASE("predictions JSONL round trip and parse errors") {
  const ConstraintSpec spec = edema();
  const std::string path = "metrics_test_predictions.jsonl";
  {
    std::ofstream out(path);
    out << R"({"y_hat":1,"z_hat":[1,-1,-1,1,-1,-1,-1],"y_true":2})" << "\n";
    out << R"({"y_hat":3,"z_hat":[-1,-1,-1,-1,-1,1,-1]})" << "\n";
  }
  const auto records = load_predictions_jsonl(path, 7);
  REQUIRE(records.size() == 2);
  CHECK(records[0].y_hat == 1);
  CHECK(records[0].y_true == 2);
  CHECK(records[1].z_hat[5] == 1);

  {
    std::ofstream out(path);
    out << "{ not json\n";
  }
  try {
    load_predictions_jsonl(path, 7);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    // error message names the offending line
    CHECK(std::string(e.what()).find(":1:") != std::string::npos);
  }
  std::remove(path.c_str());
}
