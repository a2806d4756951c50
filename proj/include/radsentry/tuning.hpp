#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "radsentry/evaluation.hpp"
#include "radsentry/gbdt.hpp"
#include "radsentry/rng.hpp"

namespace radsentry {

// Inclusive integer ranges for the three searched hyperparameters.
struct SearchSpace {
  std::pair<int, int> n_estimators{10, 50};
  std::pair<int, int> max_depth{3, 8};
  std::pair<int, int> num_leaves{4, 20};

  void validate() const;
  std::size_t size() const;
};

struct TrialResult {
  GbdtParams params;
  MetricsReport validation;
  std::size_t trial_index = 0;
  int rank = 0;  // 1 = best
};

struct RandomSearchResult {
  GbdtParams best;
  std::vector<TrialResult> trials;
  bool trials_clamped = false;  // n_trials exceeded the space size
};

// One uniform draw from the space (independent per dimension), applied on
// top of base. Exposed so the sampling distribution is testable.
GbdtParams sample_params(const SearchSpace& space, const GbdtParams& base,
                         Rng& rng);

// Uniform random search, without replacement while the space is small
// enough to dedupe. Winner: highest validation F1, ties by higher accuracy,
// then fewer estimators, then earlier trial. Deterministic per seed; trials
// may evaluate in parallel.
RandomSearchResult random_search(const SearchSpace& space,
                                 std::size_t n_trials,
                                 const FeatureMatrix& train,
                                 std::span<const std::uint8_t> train_labels,
                                 const FeatureMatrix& validation,
                                 std::span<const std::uint8_t> val_labels,
                                 const GbdtParams& base, std::uint64_t seed,
                                 int threads = 1);

struct FeatureSelection {
  std::vector<std::size_t> retained;  // original indices, importance-descending
  double cumulative_importance = 0.0;
  double threshold = 0.90;
};

// Minimal importance-descending prefix whose normalized cumulative sum
// reaches the threshold; importance ties break to the lower feature index.
FeatureSelection select_features(std::span<const double> importances,
                                 double threshold = 0.90);

// Retrains with best params on the retained columns only; the result keeps
// the column mapping so it can predict on full-width matrices directly.
GradientBoostedEnsemble retrain_compact(const FeatureMatrix& matrix,
                                        std::span<const std::uint8_t> labels,
                                        const FeatureSelection& selection,
                                        const GbdtParams& best_params,
                                        int threads = 1);

// Trial log CSV: n_estimators,max_depth,num_leaves,accuracy,precision,
// recall,f1,rank.
void write_trials_csv(std::ostream& out,
                      std::span<const TrialResult> trials);

}  // namespace radsentry
