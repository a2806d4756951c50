#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "radsentry/error.hpp"
#include "radsentry/tuning.hpp"
#include "support/testutil.hpp"

using namespace radsentry;

namespace {

struct TuneFixture {
  FeatureMatrix train, val;
  std::vector<std::uint8_t> train_y, val_y;
};

TuneFixture make_fixture(std::uint64_t seed) {
  TuneFixture f;
  f.train = testutil::random_matrix(400, 4, seed);
  f.train_y = testutil::noisy_linear_labels(f.train, seed + 1, 0.1);
  f.val = testutil::random_matrix(150, 4, seed + 2);
  f.val_y = testutil::noisy_linear_labels(f.val, seed + 1, 0.1);
  return f;
}

GbdtParams small_base() {
  GbdtParams base;
  base.min_samples_leaf = 5;
  return base;
}

}  // namespace

TEST_CASE("random_search: collapsed space returns exactly that point") {
  TuneFixture f = make_fixture(10);
  SearchSpace space;
  space.n_estimators = {42, 42};
  space.max_depth = {6, 6};
  space.num_leaves = {18, 18};
  RandomSearchResult result = random_search(
      space, 3, f.train, f.train_y, f.val, f.val_y, small_base(), 9);
  CHECK(result.trials_clamped);  // 3 > 1 distinct combination
  CHECK(result.trials.size() == 1);
  CHECK(result.best.n_estimators == 42);
  CHECK(result.best.max_depth == 6);
  CHECK(result.best.num_leaves == 18);
}

TEST_CASE("random_search: deterministic trial sequence and winner") {
  TuneFixture f = make_fixture(20);
  SearchSpace space;  // Table-2 ranges by default
  RandomSearchResult a = random_search(space, 5, f.train, f.train_y, f.val,
                                       f.val_y, small_base(), 123);
  RandomSearchResult b = random_search(space, 5, f.train, f.train_y, f.val,
                                       f.val_y, small_base(), 123);
  REQUIRE(a.trials.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.trials[i].params.n_estimators == b.trials[i].params.n_estimators);
    CHECK(a.trials[i].params.max_depth == b.trials[i].params.max_depth);
    CHECK(a.trials[i].params.num_leaves == b.trials[i].params.num_leaves);
    CHECK(a.trials[i].validation.f1 == b.trials[i].validation.f1);
  }
  CHECK(a.best.n_estimators == b.best.n_estimators);

  // Winner's F1 is >= every other trial's F1, and ranks agree.
  const TrialResult* winner = nullptr;
  for (const auto& t : a.trials)
    if (t.rank == 1) winner = &t;
  REQUIRE(winner != nullptr);
  for (const auto& t : a.trials) CHECK(winner->validation.f1 >= t.validation.f1);
  CHECK(a.best.n_estimators == winner->params.n_estimators);
}

TEST_CASE("random_search: parallel trials match sequential") {
  TuneFixture f = make_fixture(30);
  SearchSpace space;
  RandomSearchResult seq = random_search(space, 6, f.train, f.train_y, f.val,
                                         f.val_y, small_base(), 5, 1);
  RandomSearchResult par = random_search(space, 6, f.train, f.train_y, f.val,
                                         f.val_y, small_base(), 5, 4);
  REQUIRE(seq.trials.size() == par.trials.size());
  for (std::size_t i = 0; i < seq.trials.size(); ++i) {
    CHECK(seq.trials[i].validation.f1 == par.trials[i].validation.f1);
    CHECK(seq.trials[i].rank == par.trials[i].rank);
  }
}

TEST_CASE("random_search: samples without replacement; draws are uniform") {
  // Small space: 2 x 3 x 2 = 12 combinations.
  SearchSpace space;
  space.n_estimators = {10, 11};
  space.max_depth = {3, 5};
  space.num_leaves = {4, 5};
  CHECK(space.size() == 12);

  // Without replacement: n_trials == space size hits every combination.
  TuneFixture f = make_fixture(44);
  RandomSearchResult all = random_search(space, 12, f.train, f.train_y,
                                         f.val, f.val_y, small_base(), 77);
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& t : all.trials)
    seen.insert({t.params.n_estimators, t.params.max_depth,
                 t.params.num_leaves});
  CHECK(seen.size() == 12);

  // Uniformity of the raw sampler: each combination within 3 sigma.
  Rng rng(99);
  std::map<std::tuple<int, int, int>, std::size_t> counts;
  const std::size_t draws = 10000;
  GbdtParams base;
  for (std::size_t i = 0; i < draws; ++i) {
    GbdtParams p = sample_params(space, base, rng);
    ++counts[{p.n_estimators, p.max_depth, p.num_leaves}];
  }
  const double expected = draws / 12.0;
  const double sigma = std::sqrt(draws * (1.0 / 12.0) * (11.0 / 12.0));
  CHECK(counts.size() == 12);
  for (const auto& [combo, count] : counts)
    CHECK(std::abs(static_cast<double>(count) - expected) <= 3.0 * sigma);
}

TEST_CASE("select_features: prefix arithmetic") {
  std::vector<double> imp = {0.5, 0.3, 0.15, 0.05};
  FeatureSelection sel = select_features(imp, 0.90);
  CHECK(sel.retained == std::vector<std::size_t>{0, 1, 2});
  CHECK(sel.cumulative_importance == doctest::Approx(0.95));

  std::vector<double> one = {2.5};
  FeatureSelection single = select_features(one, 0.90);
  CHECK(single.retained == std::vector<std::size_t>{0});
  CHECK(single.cumulative_importance == doctest::Approx(1.0));
}

TEST_CASE("select_features: all-zero is an error; ties break by index") {
  std::vector<double> zeros(4, 0.0);
  CHECK_THROWS_AS(select_features(zeros, 0.9), InvalidArgument);

  std::vector<double> tied = {0.25, 0.25, 0.25, 0.25};
  FeatureSelection sel = select_features(tied, 0.5);
  CHECK(sel.retained == std::vector<std::size_t>{0, 1});
}

TEST_CASE("select_features: matches exhaustive prefix scan; minimal") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> imp(20);
    double total = 0.0;
    for (double& v : imp) {
      v = rng.uniform();
      total += v;
    }
    FeatureSelection sel = select_features(imp, 0.90);

    // Exhaustive oracle: sort indices by (importance desc, index asc), walk.
    std::vector<std::size_t> order(20);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (imp[a] != imp[b]) return imp[a] > imp[b];
      return a < b;
    });
    double cum = 0.0;
    std::vector<std::size_t> expect;
    for (std::size_t idx : order) {
      expect.push_back(idx);
      cum += imp[idx] / total;
      if (cum >= 0.90) break;
    }
    CHECK(sel.retained == expect);

    // Minimality: dropping the last retained feature dips below threshold.
    double without_last = sel.cumulative_importance -
                          imp[sel.retained.back()] / total;
    CHECK(without_last < 0.90);
  }
}

TEST_CASE("retrain_compact: identity selection reproduces the full model") {
  FeatureMatrix m = testutil::random_matrix(300, 4, 61);
  std::vector<std::uint8_t> y = testutil::noisy_linear_labels(m, 3, 0.1);
  GbdtParams params = small_base();
  params.n_estimators = 8;
  GradientBoostedEnsemble full = gbdt_fit(m, y, params);

  FeatureSelection sel = select_features(full.feature_importances(), 1.0);
  GradientBoostedEnsemble compact = retrain_compact(m, y, sel, params);
  CHECK(compact.n_retained() == 4);
  // Same split structure modulo the column permutation: predictions agree
  // bit for bit on fresh data.
  FeatureMatrix probe = testutil::random_matrix(100, 4, 62);
  CHECK(compact.predict_raw(probe) == full.predict_raw(probe));
}

TEST_CASE("retrain_compact: dropping a constant column changes nothing") {
  FeatureMatrix m = testutil::random_matrix(300, 4, 71);
  for (std::size_t r = 0; r < m.n_rows; ++r) m.at(r, 2) = 0.25;  // constant
  std::vector<std::uint8_t> y = testutil::noisy_linear_labels(m, 5, 0.1);
  GbdtParams params = small_base();
  params.n_estimators = 6;
  GradientBoostedEnsemble full = gbdt_fit(m, y, params);
  std::vector<double> imp = full.feature_importances();
  CHECK(imp[2] == 0.0);

  FeatureSelection sel = select_features(imp, 1.0);
  CHECK(std::find(sel.retained.begin(), sel.retained.end(), 2) ==
        sel.retained.end());
  GradientBoostedEnsemble compact = retrain_compact(m, y, sel, params);
  CHECK(compact.n_retained() == 3);

  FeatureMatrix probe = testutil::random_matrix(150, 4, 72);
  for (std::size_t r = 0; r < probe.n_rows; ++r) probe.at(r, 2) = 0.25;
  std::vector<double> a = compact.predict_raw(probe);
  std::vector<double> b = full.predict_raw(probe);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("trials csv: one row per trial with params and rank") {
  TuneFixture f = make_fixture(50);
  SearchSpace space;
  RandomSearchResult result = random_search(space, 4, f.train, f.train_y,
                                            f.val, f.val_y, small_base(), 3);
  std::ostringstream out;
  write_trials_csv(out, result.trials);
  std::string text = out.str();
  CHECK(text.find("trial,n_estimators,max_depth,num_leaves") == 0);
  std::size_t lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == 5);  // header + 4 trials
}
