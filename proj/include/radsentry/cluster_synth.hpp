#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radsentry/kmeans.hpp"
#include "radsentry/matrix.hpp"
#include "radsentry/preprocess.hpp"

namespace radsentry {

// Thresholds used to flag anomalous clusters from their mean raw reading.
struct AnomalyRules {
  double near_zero_absolute = 0.0;  // cluster mean at or below this is flat-zero
  double near_zero_ratio = 0.5;     // < ratio x next-smallest cluster mean
  double high_outlier_ratio = 10.0; // > ratio x next-highest unflagged mean
  // Row-wise suspicion thresholds for the cluster-count search are derived
  // from these quantiles of the raw values (see search_cluster_count).
  double low_quantile = 0.05;
  double high_quantile = 0.95;
  double purity = 0.99;  // isolation criterion for the search
};

struct LabeledDataset {
  FeatureMatrix matrix;
  std::vector<std::uint8_t> labels;      // 1 = anomaly / attack
  std::vector<std::uint8_t> provenance;  // 0 = original, 1 = synthetic
};

struct AnomalyLabelReport {
  std::vector<double> cluster_means;       // mean raw value per cluster
  std::vector<std::uint8_t> cluster_flag;  // 1 = anomalous cluster
  std::size_t n_flagged_rows = 0;
};

// Flags whole clusters by their mean raw value: flat-zero or near-zero
// clusters (iteratively, smallest mean < ratio x next smallest) and
// high-outlier clusters (everything above the first ratio-sized gap scanning
// from the top). Throws when every cluster ends up flagged.
LabeledDataset label_anomalies(const FeatureMatrix& matrix,
                               std::span<const double> raw_values,
                               const ClusterModel& clusters,
                               const AnomalyRules& rules,
                               AnomalyLabelReport* report = nullptr);

struct ClusterSearchOptions {
  std::size_t k_min = 5;
  std::size_t k_max = 100;
  std::size_t n_trials = 12;
  std::uint64_t seed = 0;
  KMeansOptions kmeans;
};

struct ClusterTrial {
  std::size_t k = 0;
  double score = 0.0;
};

struct ClusterSearchResult {
  std::size_t k = 0;
  double score = 0.0;
  bool criterion_met = false;  // false means best-effort pick, warn upstream
  std::vector<ClusterTrial> trials;
  // The clustering that produced the winning score; downstream labeling must
  // use this model, not a refit, so the validated isolation carries over.
  ClusterModel model;
};

// Samples cluster counts uniformly without replacement from [k_min, k_max],
// fits K-Means per candidate (ascending) and scores how cleanly
// row-wise-suspicious readings are isolated. Returns the smallest k whose
// clusters isolate them at the configured purity (stopping there), or the
// best-scoring k with criterion_met=false.
ClusterSearchResult search_cluster_count(const FeatureMatrix& scaled,
                                         std::span<const double> raw_values,
                                         const AnomalyRules& rules,
                                         const ClusterSearchOptions& options);

struct SmoteConfig {
  std::size_t n_synthetic = 0;
  std::size_t k_neighbors = 5;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SmoteReport {
  std::size_t k_used = 0;
  bool k_clamped = false;
};

// Each synthetic row is x + lambda * (x_nn - x) for a uniformly chosen
// minority row x, one of its k nearest minority neighbours x_nn (Euclidean)
// and lambda ~ U(0,1). Deterministic for a fixed seed.
FeatureMatrix smote_oversample(const FeatureMatrix& minority_rows,
                               const SmoteConfig& config,
                               SmoteReport* report = nullptr);

// Original rows (original labels) + n_synthetic SMOTE rows built from the
// label-1 rows, then Gaussian noise, then a seeded row shuffle.
LabeledDataset build_attack_dataset(const LabeledDataset& labeled,
                                    const SmoteConfig& smote,
                                    const NoiseConfig& noise,
                                    std::uint64_t shuffle_seed,
                                    bool noise_synthetic_only = false);

// Sidecar CSV with one label,provenance pair per dataset row.
void write_labels_csv(std::ostream& out, const LabeledDataset& dataset);
void read_labels_csv(std::istream& in, LabeledDataset& dataset);

}  // namespace radsentry
