#include "radsentry/tuning.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>

#include "radsentry/error.hpp"
#include "radsentry/threads.hpp"

namespace radsentry {

void SearchSpace::validate() const {
  auto check = [](std::pair<int, int> range, const char* name) {
    if (range.first > range.second)
      throw InvalidArgument(std::string("search space: empty range for ") +
                            name);
  };
  check(n_estimators, "n_estimators");
  check(max_depth, "max_depth");
  check(num_leaves, "num_leaves");
}

std::size_t SearchSpace::size() const {
  auto span = [](std::pair<int, int> r) {
    return static_cast<std::size_t>(r.second - r.first + 1);
  };
  return span(n_estimators) * span(max_depth) * span(num_leaves);
}

GbdtParams sample_params(const SearchSpace& space, const GbdtParams& base,
                         Rng& rng) {
  GbdtParams p = base;
  p.n_estimators = static_cast<int>(
      rng.uniform_int(space.n_estimators.first, space.n_estimators.second));
  p.max_depth = static_cast<int>(
      rng.uniform_int(space.max_depth.first, space.max_depth.second));
  p.num_leaves = static_cast<int>(
      rng.uniform_int(space.num_leaves.first, space.num_leaves.second));
  return p;
}

RandomSearchResult random_search(const SearchSpace& space,
                                 std::size_t n_trials,
                                 const FeatureMatrix& train,
                                 std::span<const std::uint8_t> train_labels,
                                 const FeatureMatrix& validation,
                                 std::span<const std::uint8_t> val_labels,
                                 const GbdtParams& base, std::uint64_t seed,
                                 int threads) {
  space.validate();
  if (n_trials < 1)
    throw InvalidArgument("random_search: n_trials must be >= 1");

  RandomSearchResult result;
  const std::size_t space_size = space.size();
  if (n_trials > space_size) {
    n_trials = space_size;
    result.trials_clamped = true;
  }

  // Sample the trial parameter sets up front; dedupe (without replacement)
  // while the space is enumerable.
  Rng rng(seed);
  std::vector<GbdtParams> picks;
  const bool without_replacement = space_size <= 65536;
  std::set<std::tuple<int, int, int>> seen;
  while (picks.size() < n_trials) {
    GbdtParams p = sample_params(space, base, rng);
    if (without_replacement) {
      auto key = std::make_tuple(p.n_estimators, p.max_depth, p.num_leaves);
      if (!seen.insert(key).second) continue;
    }
    picks.push_back(p);
  }

  result.trials.resize(picks.size());
  parallel_chunks(picks.size(), 1, threads, [&](std::size_t, std::size_t tb,
                                                std::size_t te) {
    for (std::size_t t = tb; t < te; ++t) {
      GbdtParams params = picks[t];
      params.seed = Rng::derive(seed, t);
      GradientBoostedEnsemble model =
          gbdt_fit(train, train_labels, params, nullptr, 1);
      TrialResult& trial = result.trials[t];
      trial.params = params;
      trial.trial_index = t;
      trial.validation =
          compute_metrics(model.predict_labels(validation), val_labels);
    }
  });

  // Winner comparator; also used to assign ranks.
  auto better = [](const TrialResult& a, const TrialResult& b) {
    if (a.validation.f1 != b.validation.f1)
      return a.validation.f1 > b.validation.f1;
    if (a.validation.accuracy != b.validation.accuracy)
      return a.validation.accuracy > b.validation.accuracy;
    if (a.params.n_estimators != b.params.n_estimators)
      return a.params.n_estimators < b.params.n_estimators;
    return a.trial_index < b.trial_index;
  };
  std::vector<std::size_t> order(result.trials.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return better(result.trials[a], result.trials[b]);
  });
  for (std::size_t i = 0; i < order.size(); ++i)
    result.trials[order[i]].rank = static_cast<int>(i + 1);
  result.best = result.trials[order[0]].params;
  return result;
}

FeatureSelection select_features(std::span<const double> importances,
                                 double threshold) {
  if (importances.empty())
    throw InvalidArgument("select_features: no importances");
  for (double v : importances)
    if (v < 0.0)
      throw InvalidArgument("select_features: negative importance");
  const double total =
      std::accumulate(importances.begin(), importances.end(), 0.0);
  if (total <= 0.0)
    throw InvalidArgument(
        "select_features: all importances are zero (model never split)");

  std::vector<std::size_t> order(importances.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (importances[a] != importances[b])
      return importances[a] > importances[b];
    return a < b;  // ties -> lower feature index first
  });

  FeatureSelection sel;
  sel.threshold = threshold;
  double cum = 0.0;
  for (std::size_t idx : order) {
    sel.retained.push_back(idx);
    cum += importances[idx] / total;
    if (cum >= threshold) break;
  }
  sel.cumulative_importance = cum;
  return sel;
}

GradientBoostedEnsemble retrain_compact(const FeatureMatrix& matrix,
                                        std::span<const std::uint8_t> labels,
                                        const FeatureSelection& selection,
                                        const GbdtParams& best_params,
                                        int threads) {
  if (selection.retained.empty())
    throw InvalidArgument("retrain_compact: empty selection");
  for (std::size_t c : selection.retained)
    if (c >= matrix.n_cols)
      throw InvalidArgument("retrain_compact: selection exceeds columns");

  // Project in ascending column order: keeping the surviving features'
  // relative order makes equal-gain tie-breaks resolve exactly as in the
  // full model, so an all-feature selection reproduces it.
  std::vector<std::size_t> columns = selection.retained;
  std::sort(columns.begin(), columns.end());
  FeatureMatrix projected = matrix.select_columns(columns);
  GradientBoostedEnsemble model =
      gbdt_fit(projected, labels, best_params, nullptr, threads);
  model.retained_columns = std::move(columns);
  model.n_original_features = matrix.n_cols;
  return model;
}

void write_trials_csv(std::ostream& out,
                      std::span<const TrialResult> trials) {
  out << "trial,n_estimators,max_depth,num_leaves,accuracy,precision,recall,"
         "f1,rank\n";
  char buf[160];
  for (const TrialResult& t : trials) {
    std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%d,%.6f,%.6f,%.6f,%.6f,%d\n",
                  t.trial_index, t.params.n_estimators, t.params.max_depth,
                  t.params.num_leaves, t.validation.accuracy,
                  t.validation.precision, t.validation.recall,
                  t.validation.f1, t.rank);
    out << buf;
  }
}

}  // namespace radsentry
