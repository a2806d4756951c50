#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <thread>

#include "radsentry/classifiers.hpp"
#include "radsentry/error.hpp"
#include "radsentry/evaluation.hpp"
#include "radsentry/rng.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace radsentry;

TEST_CASE("split: stratification arithmetic (100 rows, 30 positive)") {
  std::vector<std::uint8_t> labels(100, 0);
  for (std::size_t i = 0; i < 30; ++i) labels[i] = 1;
  SplitConfig cfg;
  cfg.test_fraction = 0.2;
  cfg.seed = 5;
  SplitIndices split = split_train_test(labels, cfg);
  std::size_t test_pos = 0, test_neg = 0;
  for (std::size_t i : split.test) (labels[i] ? test_pos : test_neg)++;
  CHECK(test_pos == 6);
  CHECK(test_neg == 14);
  CHECK(split.train.size() == 80);
}

TEST_CASE("split: deterministic per seed; disjoint and exhaustive") {
  std::vector<std::uint8_t> labels(1000);
  Rng rng(3);
  for (auto& l : labels) l = rng.uniform() < 0.3;
  SplitConfig cfg;
  cfg.seed = 11;
  SplitIndices a = split_train_test(labels, cfg);
  SplitIndices b = split_train_test(labels, cfg);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);

  std::set<std::size_t> seen;
  for (std::size_t i : a.train) CHECK(seen.insert(i).second);
  for (std::size_t i : a.test) CHECK(seen.insert(i).second);
  CHECK(seen.size() == 1000);
  CHECK(*seen.rbegin() == 999);
}

TEST_CASE("split: class with fewer than 2 rows fails under stratification") {
  std::vector<std::uint8_t> labels(50, 0);
  labels[7] = 1;
  SplitConfig cfg;
  CHECK_THROWS_AS(split_train_test(labels, cfg), InvalidArgument);
  cfg.stratified = false;
  CHECK_NOTHROW(split_train_test(labels, cfg));
}

TEST_CASE("metrics: perfect predictions") {
  std::vector<std::uint8_t> y = {1, 0, 1, 1, 0};
  MetricsReport r = compute_metrics(y, y);
  CHECK(r.accuracy == 1.0);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
  CHECK(!r.degenerate);
}

TEST_CASE("metrics: hand-computed confusion (tp=2 fp=1 fn=1 tn=6)") {
  std::vector<std::uint8_t> truth = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  std::vector<std::uint8_t> pred = {1, 1, 0, 1, 0, 0, 0, 0, 0, 0};
  MetricsReport r = compute_metrics(pred, truth);
  CHECK(r.counts.tp == 2);
  CHECK(r.counts.fp == 1);
  CHECK(r.counts.fn == 1);
  CHECK(r.counts.tn == 6);
  CHECK(r.accuracy == doctest::Approx(0.8));
  CHECK(r.precision == doctest::Approx(2.0 / 3.0));
  CHECK(r.recall == doctest::Approx(2.0 / 3.0));
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("metrics: zero denominators flag degenerate") {
  std::vector<std::uint8_t> truth = {0, 0, 0};
  std::vector<std::uint8_t> pred = {0, 0, 0};
  MetricsReport r = compute_metrics(pred, truth);
  CHECK(r.degenerate);
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);

  CHECK_THROWS_AS(
      compute_metrics(std::vector<std::uint8_t>{1},
                      std::vector<std::uint8_t>{1, 0}),
      InvalidArgument);
}

TEST_CASE("metrics: agrees with brute-force confusion on 1000 random pairs") {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    std::size_t n = 1 + rng.uniform_index(64);
    std::vector<std::uint8_t> truth(n), pred(n);
    for (std::size_t r = 0; r < n; ++r) {
      truth[r] = rng.uniform() < 0.5;
      pred[r] = rng.uniform() < 0.5;
    }
    MetricsReport m = compute_metrics(pred, truth);
    oracles::Confusion c = oracles::count_confusion(pred, truth);
    CHECK(m.counts.tp == c.tp);
    CHECK(m.counts.fp == c.fp);
    CHECK(m.counts.fn == c.fn);
    CHECK(m.counts.tn == c.tn);
    double expect_acc =
        static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
    CHECK(m.accuracy == doctest::Approx(expect_acc).epsilon(1e-12));
    // f1 is exactly the harmonic mean of the reported precision/recall.
    if (m.precision + m.recall > 0.0)
      CHECK(m.f1 == doctest::Approx(2.0 * m.precision * m.recall /
                                    (m.precision + m.recall))
                        .epsilon(1e-12));
  }
}

TEST_CASE("bench_latency: positive, finite, and monotone in work") {
  // Busy-work pass functions with a 2x work ratio; the bigger one must not
  // report lower latency (0.8x slack for timer noise), retrying a few times
  // for scheduler hiccups.
  volatile double sink = 0.0;
  auto work = [&](int reps) {
    for (int i = 0; i < reps; ++i) sink = sink + std::sqrt(double(i));
  };
  LatencyOptions opts;
  opts.warmup_passes = 2;
  opts.measured_passes = 9;
  bool ok = false;
  for (int attempt = 0; attempt < 5 && !ok; ++attempt) {
    double half = bench_latency([&]() { work(200000); }, 1000, opts);
    double full = bench_latency([&]() { work(400000); }, 1000, opts);
    CHECK(half > 0.0);
    CHECK(std::isfinite(full));
    ok = full >= 0.8 * half;
  }
  CHECK(ok);
}

TEST_CASE("compare_models: rows in input order with latency fields") {
  FeatureMatrix m = testutil::random_matrix(300, 3, 21);
  std::vector<std::uint8_t> y = testutil::noisy_linear_labels(m, 2, 0.1);
  SplitConfig cfg;
  cfg.seed = 4;
  SplitIndices split = split_train_test(y, cfg);
  FeatureMatrix train = m.select_rows(split.train);
  FeatureMatrix test = m.select_rows(split.test);
  std::vector<std::uint8_t> train_y, test_y;
  for (auto i : split.train) train_y.push_back(y[i]);
  for (auto i : split.test) test_y.push_back(y[i]);

  GbdtParams gp;
  gp.n_estimators = 5;
  gp.min_samples_leaf = 5;
  GbdtClassifier gbdt("lightgbm_style_gbdt", gp);
  LogRegParams lp;
  lp.epochs = 100;
  LogRegClassifier lr(lp);
  std::vector<Classifier*> models = {&gbdt, &lr};

  LatencyOptions lat;
  lat.warmup_passes = 1;
  lat.measured_passes = 3;
  auto rows = compare_models(models, train, train_y, test, test_y, true, lat);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].model == "lightgbm_style_gbdt");
  CHECK(rows[1].model == "logistic_regression");
  for (const auto& row : rows) {
    CHECK(row.metrics.prediction_time_per_sample_us > 0.0);
    CHECK(row.metrics.accuracy > 0.5);
  }

  // Metrics reproducible from stored predictions.
  auto again = compute_metrics(gbdt.predict(test), test_y);
  CHECK(again.f1 == rows[0].metrics.f1);

  std::ostringstream csv;
  write_report_csv(csv, rows);
  std::string text = csv.str();
  CHECK(text.find("model,accuracy,precision,recall,f1,pred_time_us") == 0);
  CHECK(text.find("lightgbm_style_gbdt") != std::string::npos);

  std::string table = format_report_table(rows);
  CHECK(table.find("logistic_regression") != std::string::npos);
}

TEST_CASE("report csv: latency field left empty when unmeasured") {
  ModelReportRow row;
  row.model = "m";
  row.metrics.accuracy = 1.0;
  row.metrics.precision = 1.0;
  row.metrics.recall = 1.0;
  row.metrics.f1 = 1.0;
  std::ostringstream out;
  write_report_csv(out, std::vector<ModelReportRow>{row});
  CHECK(out.str().find("1.000000,\n") != std::string::npos);
}
