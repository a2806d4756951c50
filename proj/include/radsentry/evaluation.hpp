#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "radsentry/matrix.hpp"

namespace radsentry {

struct SplitConfig {
  double test_fraction = 0.20;
  bool stratified = true;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Disjoint, exhaustive row split; stratified mode keeps each class's test
// count at round(test_fraction * class size). Deterministic per seed.
SplitIndices split_train_test(std::span<const std::uint8_t> labels,
                              const SplitConfig& config);

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double prediction_time_per_sample_us = -1.0;  // < 0 when not measured
  bool degenerate = false;  // some metric had a zero denominator
  ConfusionCounts counts;
};

// Positive class is 1 (attack). Zero denominators yield 0 and set the
// degenerate flag.
MetricsReport compute_metrics(std::span<const std::uint8_t> predicted,
                              std::span<const std::uint8_t> truth);

struct LatencyOptions {
  int warmup_passes = 3;
  int measured_passes = 10;
};

// Runs predict_pass warmup_passes times untimed, then measured_passes times,
// and reports median pass wall time / n_rows in microseconds. The pass
// callable must run single-threaded for comparability.
double bench_latency(const std::function<void()>& predict_pass,
                     std::size_t n_rows, const LatencyOptions& options = {});

// Uniform training/prediction surface over the four model families so the
// comparison harness can treat them alike.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string name() const = 0;
  virtual void fit(const FeatureMatrix& matrix,
                   std::span<const std::uint8_t> labels) = 0;
  // threads is a cap for training-time parallelism inside fit; prediction
  // here is always single-threaded (it feeds the latency benchmark).
  virtual std::vector<std::uint8_t> predict(
      const FeatureMatrix& matrix) const = 0;
};

struct ModelReportRow {
  std::string model;
  MetricsReport metrics;
};

// Trains every classifier on the same train split and evaluates on the same
// test split; rows come back in input order (Table-style layout).
std::vector<ModelReportRow> compare_models(
    std::span<Classifier* const> models, const FeatureMatrix& train,
    std::span<const std::uint8_t> train_labels, const FeatureMatrix& test,
    std::span<const std::uint8_t> test_labels, bool measure_latency,
    const LatencyOptions& latency = {});

// CSV columns: model,accuracy,precision,recall,f1,pred_time_us. The latency
// field is left empty when it was not measured.
void write_report_csv(std::ostream& out,
                      std::span<const ModelReportRow> rows);
std::string format_report_table(std::span<const ModelReportRow> rows);

}  // namespace radsentry
