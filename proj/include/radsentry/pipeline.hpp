#pragma once

#include <string>

#include "radsentry/config.hpp"
#include "radsentry/model_store.hpp"

namespace radsentry {

// In-memory results of a full pipeline run; the driver also persists every
// stage artifact under the output directory.
struct PipelineResult {
  IngestReport ingest;
  std::size_t cluster_k = 0;
  bool cluster_criterion_met = true;
  std::size_t n_anomaly_rows = 0;
  std::size_t n_synthetic = 0;
  std::size_t n_dataset_rows = 0;

  GbdtParams best_params;
  FeatureSelection selection;

  MetricsReport untuned_test;
  MetricsReport tuned_test;
  MetricsReport compact_test;

  GradientBoostedEnsemble untuned_model;
  GradientBoostedEnsemble tuned_model;
  GradientBoostedEnsemble compact_model;

  std::vector<ModelReportRow> report_rows;

  // Test split, full feature space (for downstream benchmarking).
  FeatureMatrix test_matrix;
  std::vector<std::uint8_t> test_labels;
  FeatureMatrix train_matrix;
  std::vector<std::uint8_t> train_labels;
};

// Runs ingest -> cluster labeling -> SMOTE synthesis -> split -> training ->
// tuning -> compaction -> evaluation. Artifacts written to out_dir:
// readings.csv, cluster_labels.csv, dataset.rdm, dataset_columns.csv,
// dataset_labels.csv, trials.csv, best_params.json, selection.json,
// model_full.rds1, model.rds1, report.csv, effective_config.json.
// with_baselines controls whether the report includes the three baseline
// model rows (the slow part is the kernel SVM).
PipelineResult run_pipeline(const PipelineConfig& config,
                            const std::string& input_csv,
                            const std::string& out_dir,
                            bool with_baselines = true);

}  // namespace radsentry
