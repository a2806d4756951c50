#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "radsentry/matrix.hpp"

namespace radsentry {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct GbdtParams {
  int n_estimators = 100;
  int max_depth = 8;
  int num_leaves = 31;
  double learning_rate = 0.1;
  int n_bins = 255;
  int min_samples_leaf = 20;
  double l2_reg = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// One tree node; leaves have left == right == -1 and carry leaf_value.
// Thresholds and leaf values are f32-cast at fit time so that serialized
// models predict bit-identically to in-memory ones.
struct GbdtNode {
  int feature = -1;  // retained-space column index (internal nodes)
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf_value = 0.0;
  double gain = 0.0;

  bool is_leaf() const { return left < 0; }
};

struct GbdtTree {
  std::vector<GbdtNode> nodes;  // node 0 is the root
};

// Candidate split considered during leaf-wise growth (debug recording).
struct SplitCandidate {
  int round = 0;
  int node_id = -1;
  int feature = -1;
  int bin = -1;
  double gain = 0.0;
};

struct GbdtFitDiagnostics {
  bool record_candidates = false;  // input: retain per-step candidate lists

  std::vector<double> train_loss;  // mean logistic loss after each round
  struct GrowthStep {
    std::vector<SplitCandidate> candidates;
    SplitCandidate chosen;
  };
  std::vector<GrowthStep> steps;
  bool single_class = false;  // fit degenerated to a constant model
};

// Leaf-wise histogram-grown boosted trees for binary classification.
class GradientBoostedEnsemble {
 public:
  std::vector<GbdtTree> trees;
  double base_score = 0.0;  // prior log-odds, f32-cast
  GbdtParams params;
  // Tree feature indices live in retained space; retained_columns maps them
  // back to original dataset columns (identity for full models).
  std::vector<std::size_t> retained_columns;
  std::size_t n_original_features = 0;

  std::size_t n_retained() const { return retained_columns.size(); }

  // Accepts either full-width matrices (n_original_features columns,
  // projected internally through retained_columns) or already-projected
  // matrices (n_retained columns).
  std::vector<double> predict_raw(const FeatureMatrix& matrix,
                                  int threads = 1) const;
  std::vector<double> predict_proba(const FeatureMatrix& matrix,
                                    int threads = 1) const;
  std::vector<std::uint8_t> predict_labels(const FeatureMatrix& matrix,
                                           int threads = 1) const;

  // Per-original-feature summed split gain.
  std::vector<double> feature_importances() const;
};

// Trains on the given matrix; labels must be binary. Histogram bins are
// equal-frequency over the training data. Deterministic for fixed inputs
// and any thread count.
GradientBoostedEnsemble gbdt_fit(const FeatureMatrix& matrix,
                                 std::span<const std::uint8_t> labels,
                                 const GbdtParams& params,
                                 GbdtFitDiagnostics* diagnostics = nullptr,
                                 int threads = 1);

std::vector<double> gbdt_importances(const GradientBoostedEnsemble& model);

// Normalized copy summing to 1 (all-zero input stays all-zero).
std::vector<double> normalize_importances(std::span<const double> raw);

}  // namespace radsentry
