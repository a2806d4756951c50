// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Runs against the bundled desk-scale dataset.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "radsentry/classifiers.hpp"
#include "radsentry/datagen.hpp"
#include "radsentry/model_store.hpp"
#include "radsentry/pipeline.hpp"
#include "radsentry/threads.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

namespace fs = std::filesystem;
using namespace radsentry;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name,
               const std::function<void()>& body) {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  std::string failure;
  try {
    body();
  } catch (const std::exception& e) {
    failure = e.what();
  }
  double secs = std::chrono::duration<double>(clock::now() - t0).count();
  if (failure.empty()) {
    std::printf("[PASS] criterion %d: %s (%.1fs)\n", number, name.c_str(),
                secs);
  } else {
    std::printf("[FAIL] criterion %d: %s (%.1fs)\n       %s\n", number,
                name.c_str(), secs, failure.c_str());
    ++g_failures;
  }
  std::fflush(stdout);
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path work_dir() {
  fs::path dir = fs::temp_directory_path() / "radsentry_acceptance";
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------- criterion 1

void check_kmeans_oracle() {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    FeatureMatrix m = testutil::random_matrix(8, 2, 9000 + seed, -1.0, 1.0);
    double optimal = oracles::exhaustive_kmeans_inertia(m, 3);
    KMeansOptions opts;
    opts.restarts = 20;
    ClusterModel model = kmeans_fit(m, 3, seed, opts);
    require(model.inertia <= optimal * 1.0 + 1e-9,
            "kmeans inertia " + std::to_string(model.inertia) +
                " above exhaustive optimum " + std::to_string(optimal));
  }
}

void check_stump_oracle() {
  FeatureMatrix m = testutil::random_matrix(150, 3, 777, -1.0, 1.0);
  std::vector<std::uint8_t> y = testutil::noisy_linear_labels(m, 4, 0.1);
  GbdtParams params;
  params.n_estimators = 1;
  params.num_leaves = 2;
  params.max_depth = 1;
  params.min_samples_leaf = 5;
  GradientBoostedEnsemble model = gbdt_fit(m, y, params);
  require(!model.trees.empty() && !model.trees[0].nodes[0].is_leaf(),
          "stump did not split");
  const GbdtNode& root = model.trees[0].nodes[0];

  const double p0 = sigmoid(model.base_score);
  std::vector<double> grad(m.n_rows), hess(m.n_rows);
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    grad[r] = p0 - static_cast<double>(y[r]);
    hess[r] = p0 * (1.0 - p0);
  }
  std::vector<std::vector<double>> candidates(m.n_cols);
  for (std::size_t c = 0; c < m.n_cols; ++c) {
    std::set<double> vals;
    for (std::size_t r = 0; r < m.n_rows; ++r)
      vals.insert(static_cast<double>(static_cast<float>(m.at(r, c))));
    candidates[c].assign(vals.begin(), vals.end());
  }
  auto stump = oracles::exhaustive_stump(m, grad, hess, candidates, 5, 1.0);
  require(root.feature == stump.feature, "stump feature mismatch");
  require(std::abs(root.threshold - stump.threshold) < 1e-12,
          "stump threshold mismatch");
  require(std::abs(root.gain - stump.gain) < 1e-9 * std::abs(stump.gain),
          "stump gain mismatch");
}

void check_metrics_oracle() {
  Rng rng(5150);
  for (int i = 0; i < 1000; ++i) {
    std::size_t n = 1 + rng.uniform_index(50);
    std::vector<std::uint8_t> truth(n), pred(n);
    for (std::size_t r = 0; r < n; ++r) {
      truth[r] = rng.uniform() < 0.5;
      pred[r] = rng.uniform() < 0.5;
    }
    MetricsReport m = compute_metrics(pred, truth);
    oracles::Confusion c = oracles::count_confusion(pred, truth);
    require(m.counts.tp == c.tp && m.counts.fp == c.fp &&
                m.counts.fn == c.fn && m.counts.tn == c.tn,
            "confusion counts disagree with brute force");
  }
}

void check_smote_oracle() {
  FeatureMatrix minority = testutil::random_matrix(50, 3, 4242);
  SmoteConfig cfg;
  cfg.n_synthetic = 500;
  cfg.k_neighbors = 5;
  cfg.seed = 99;
  FeatureMatrix synth = smote_oversample(minority, cfg);
  auto knn = oracles::brute_knn(minority, 5);
  for (std::size_t s = 0; s < synth.n_rows; ++s) {
    bool explained = false;
    for (std::size_t i = 0; i < minority.n_rows && !explained; ++i) {
      for (std::size_t nn : knn[i]) {
        double lambda = -1.0;
        bool usable = true;
        for (std::size_t c = 0; c < minority.n_cols; ++c) {
          double delta = minority.at(nn, c) - minority.at(i, c);
          double need = synth.at(s, c) - minority.at(i, c);
          if (std::abs(delta) > 1e-15) {
            double l = need / delta;
            if (lambda < 0.0)
              lambda = l;
            else if (std::abs(l - lambda) > 1e-6)
              usable = false;
          } else if (std::abs(need) > 1e-9) {
            usable = false;
          }
        }
        if (!usable || lambda < -1e-9 || lambda > 1.0 + 1e-9) continue;
        lambda = std::clamp(lambda, 0.0, 1.0);
        bool match = true;
        for (std::size_t c = 0; c < minority.n_cols; ++c) {
          double expect = minority.at(i, c) +
                          lambda * (minority.at(nn, c) - minority.at(i, c));
          if (std::abs(expect - synth.at(s, c)) > 1e-9) match = false;
        }
        if (match) {
          explained = true;
          break;
        }
      }
    }
    require(explained, "synthetic row " + std::to_string(s) +
                           " is not on any (point, 5-NN) segment");
  }
}

// ----------------------------------------------------- shared pipeline state

PipelineConfig desk_config() {
  PipelineConfig config;
  config.seed = 20240401;
  config.threads = 0;  // hardware
  return config;
}

struct DeskRun {
  fs::path input;
  fs::path out_dir;
  PipelineResult result;
};

DeskRun g_desk;

void run_desk_pipeline() {
  fs::path dir = work_dir();
  g_desk.input = dir / "safecast_desk.csv";
  {
    DatasetSpec spec;  // ~10k normal rows + attack burst + cpm rows
    std::ofstream out(g_desk.input);
    write_safecast_fixture(out, spec);
  }
  g_desk.out_dir = dir / "desk_out";
  fs::remove_all(g_desk.out_dir);
  g_desk.result = run_pipeline(desk_config(), g_desk.input.string(),
                               g_desk.out_dir.string(),
                               /*with_baselines=*/false);
}

// ---------------------------------------------------------------- criterion 2

void check_detection_quality() {
  run_desk_pipeline();
  const MetricsReport& m = g_desk.result.untuned_test;
  require(m.accuracy >= 0.95, "held-out accuracy " +
                                  std::to_string(m.accuracy) + " below 0.95");
  require(m.f1 >= 0.90,
          "held-out F1 " + std::to_string(m.f1) + " below 0.90");
  require(g_desk.result.cluster_criterion_met,
          "cluster-count search never isolated the anomalies");
}

// ---------------------------------------------------------------- criterion 3

struct TuneState {
  GbdtParams best;
  double best_f1 = 0.0;
  double untuned_f1 = 0.0;
};
TuneState g_tune;

void check_tuning_effect() {
  const PipelineConfig config = desk_config();
  const PipelineResult& r = g_desk.result;
  require(r.train_matrix.n_rows > 0, "criterion 2 must run first");

  SplitConfig val_cfg;
  val_cfg.test_fraction = config.tuning.validation_fraction;
  val_cfg.seed = Rng::derive(config.seed, kSeedValidationSplit);
  SplitIndices vs = split_train_test(r.train_labels, val_cfg);
  FeatureMatrix tr = r.train_matrix.select_rows(vs.train);
  FeatureMatrix val = r.train_matrix.select_rows(vs.test);
  std::vector<std::uint8_t> tr_y(vs.train.size()), val_y(vs.test.size());
  for (std::size_t i = 0; i < vs.train.size(); ++i)
    tr_y[i] = r.train_labels[vs.train[i]];
  for (std::size_t i = 0; i < vs.test.size(); ++i)
    val_y[i] = r.train_labels[vs.test[i]];

  // Table-2 search spaces, >= 20 trials.
  SearchSpace space;
  require(space.n_estimators.first == 10 && space.n_estimators.second == 50 &&
              space.max_depth.first == 3 && space.max_depth.second == 8 &&
              space.num_leaves.first == 4 && space.num_leaves.second == 20,
          "search space does not match the published ranges");
  RandomSearchResult search = random_search(
      space, 20, tr, tr_y, val, val_y, config.gbdt,
      Rng::derive(config.seed, kSeedTuning), resolve_threads(0));

  GbdtParams untuned = config.gbdt;  // 100 estimators, 31 leaves, depth 8
  GradientBoostedEnsemble untuned_model = gbdt_fit(tr, tr_y, untuned, nullptr,
                                                   resolve_threads(0));
  double untuned_f1 =
      compute_metrics(untuned_model.predict_labels(val), val_y).f1;

  double best_f1 = 0.0;
  for (const TrialResult& t : search.trials)
    if (t.rank == 1) best_f1 = t.validation.f1;

  g_tune.best = search.best;
  g_tune.best_f1 = best_f1;
  g_tune.untuned_f1 = untuned_f1;
  require(best_f1 >= untuned_f1 - 0.005,
          "tuned validation F1 " + std::to_string(best_f1) +
              " fell more than 0.005 below untuned " +
              std::to_string(untuned_f1));
}

// ---------------------------------------------------------------- criterion 4

void check_compaction() {
  const PipelineResult& r = g_desk.result;
  require(r.train_matrix.n_rows > 0, "criterion 2 must run first");

  // Selection is a minimal >= 90% prefix of the tuned model's importances.
  const FeatureSelection& sel = r.selection;
  require(sel.cumulative_importance >= 0.90,
          "cumulative importance below 0.90");
  std::vector<double> imp =
      normalize_importances(r.tuned_model.feature_importances());
  double without_last = sel.cumulative_importance - imp[sel.retained.back()];
  require(without_last < 0.90, "selection prefix is not minimal");

  // Latency: compact model on the projected test matrix vs the full tuned
  // model on the full matrix, single-threaded medians.
  FeatureMatrix projected =
      r.test_matrix.select_columns(r.compact_model.retained_columns);
  LatencyOptions lat;
  lat.warmup_passes = 3;
  lat.measured_passes = 15;
  std::vector<std::uint8_t> sink;
  double full_us = bench_latency(
      [&]() { sink = r.tuned_model.predict_labels(r.test_matrix, 1); },
      r.test_matrix.n_rows, lat);
  double compact_us = bench_latency(
      [&]() { sink = r.compact_model.predict_labels(projected, 1); },
      projected.n_rows, lat);
  require(compact_us <= 1.0 * full_us,
          "compact latency " + std::to_string(compact_us) +
              "us/sample above full tuned " + std::to_string(full_us) + "us");

  // Quality within 0.02 F1 of the full tuned model.
  require(std::abs(r.compact_test.f1 - r.tuned_test.f1) <= 0.02,
          "compact F1 " + std::to_string(r.compact_test.f1) +
              " differs from tuned " + std::to_string(r.tuned_test.f1) +
              " by more than 0.02");
}

// ---------------------------------------------------------------- criterion 5

void check_model_ordering() {
  const PipelineConfig config = desk_config();
  const PipelineResult& r = g_desk.result;
  require(r.train_matrix.n_rows > 0, "criterion 2 must run first");

  LatencyOptions lat;
  lat.warmup_passes = 3;
  lat.measured_passes = 10;
  std::vector<std::uint8_t> sink;

  // Untuned GBDT, Table-1 style.
  double gbdt_us = bench_latency(
      [&]() { sink = r.untuned_model.predict_labels(r.test_matrix, 1); },
      r.test_matrix.n_rows, lat);

  LogRegClassifier logreg(config.baselines.logreg);
  logreg.fit(r.train_matrix, r.train_labels);
  double logreg_us = bench_latency(
      [&]() { sink = logreg.predict(r.test_matrix); }, r.test_matrix.n_rows,
      lat);

  SvmParams sp = config.baselines.svm;
  sp.seed = Rng::derive(config.seed, kSeedBaselines);
  SvmClassifier svm(sp, config.baselines.svm_max_train,
                    Rng::derive(config.seed, kSeedSvmSubsample));
  svm.fit(r.train_matrix, r.train_labels);
  double svm_us = bench_latency([&]() { sink = svm.predict(r.test_matrix); },
                                r.test_matrix.n_rows, lat);

  std::printf("       latency us/sample: logreg %.4f, gbdt %.4f, svm %.4f "
              "(svm support vectors: %zu)\n",
              logreg_us, gbdt_us, svm_us, svm.model().n_support());
  require(svm_us >= 50.0 * gbdt_us,
          "kernel SVM latency " + std::to_string(svm_us) +
              "us/sample is not >= 50x GBDT's " + std::to_string(gbdt_us));
  require(logreg_us <= gbdt_us,
          "logistic regression latency " + std::to_string(logreg_us) +
              "us/sample above GBDT's " + std::to_string(gbdt_us));
}

// ---------------------------------------------------------------- criterion 6

void check_determinism() {
  fs::path dir = work_dir();
  fs::path input = dir / "safecast_mid.csv";
  {
    DatasetSpec spec;
    spec.n_normal = 2000;
    spec.n_zero = 60;
    spec.n_near_zero = 40;
    spec.n_high = 8;
    spec.n_cpm = 100;
    spec.seed = 77;
    std::ofstream out(input);
    write_safecast_fixture(out, spec);
  }
  nlohmann::json cfg = {
      {"seed", 31},
      {"cluster", {{"k_min", 5}, {"k_max", 40}, {"search_trials", 8}}},
      {"tuning", {{"trials", 6}}},
      {"baselines",
       {{"svm_max_train", 500},
        {"rf", {{"n_trees", 20}}},
        {"logreg", {{"epochs", 100}}}}}};
  fs::path cfg_path = dir / "determinism_cfg.json";
  {
    std::ofstream out(cfg_path);
    out << cfg.dump(2);
  }

  auto run_once = [&](const std::string& name, int threads) {
    fs::path out_dir = dir / name;
    fs::remove_all(out_dir);
    std::string cmd = std::string(RADSENTRY_BIN) + " pipeline --config " +
                      cfg_path.string() + " --input " + input.string() +
                      " --out-dir " + out_dir.string() + " --threads " +
                      std::to_string(threads) + " > " +
                      (dir / (name + ".log")).string() + " 2>&1";
    int status = std::system(cmd.c_str());
    require(WIFEXITED(status) && WEXITSTATUS(status) == 0,
            "pipeline run " + name + " failed");
    return out_dir;
  };

  fs::path a = run_once("det_a", 1);
  fs::path b = run_once("det_b", 1);
  fs::path c = run_once("det_c", 4);
  for (const char* artifact : {"model.rds1", "model_full.rds1", "report.csv"}) {
    std::string ba = read_file(a / artifact);
    require(ba == read_file(b / artifact),
            std::string(artifact) + " differs between identical reruns");
    require(ba == read_file(c / artifact),
            std::string(artifact) + " differs between 1 and 4 threads");
  }
}

// ---------------------------------------------------------------- criterion 7

void check_serialization() {
  Rng rng(31337);
  for (int i = 0; i < 100; ++i) {
    std::size_t cols = 1 + rng.uniform_index(6);
    FeatureMatrix m = testutil::random_matrix(150, cols, 100000 + i);
    std::vector<std::uint8_t> y = testutil::noisy_linear_labels(m, i, 0.15);
    GbdtParams params;
    params.n_estimators = 1 + static_cast<int>(rng.uniform_index(10));
    params.num_leaves = 2 + static_cast<int>(rng.uniform_index(10));
    params.max_depth = 1 + static_cast<int>(rng.uniform_index(6));
    params.min_samples_leaf = 4;
    GradientBoostedEnsemble model = gbdt_fit(m, y, params);
    std::vector<std::uint8_t> blob = export_compact(model);
    GradientBoostedEnsemble loaded = load_compact(blob);
    require(export_compact(loaded) == blob,
            "re-encode of fuzz model " + std::to_string(i) +
                " is not byte-identical");
    FeatureMatrix probe = testutil::random_matrix(40, cols, 200000 + i);
    require(model.predict_raw(probe) == loaded.predict_raw(probe),
            "fuzz model " + std::to_string(i) +
                " predictions differ after round trip");
  }

  // Table-2-optimal compact model fits the 64 KiB budget.
  const PipelineResult& r = g_desk.result;
  require(r.train_matrix.n_rows > 0, "criterion 2 must run first");
  GbdtParams optimal = desk_config().gbdt;
  optimal.n_estimators = 42;
  optimal.max_depth = 6;
  optimal.num_leaves = 18;
  GradientBoostedEnsemble full =
      gbdt_fit(r.train_matrix, r.train_labels, optimal, nullptr,
               resolve_threads(0));
  FeatureSelection sel = select_features(full.feature_importances(), 0.90);
  GradientBoostedEnsemble compact = retrain_compact(
      r.train_matrix, r.train_labels, sel, optimal, resolve_threads(0));
  std::vector<std::uint8_t> blob = export_compact(compact);
  std::printf("       compact Table-2-optimal blob: %zu bytes\n",
              blob.size());
  require(blob.size() <= 64 * 1024,
          "compact blob " + std::to_string(blob.size()) + " bytes > 64 KiB");
}

// ---------------------------------------------------------------- criterion 8

void check_numerics() {
  // Logistic gradient vs finite differences.
  {
    FeatureMatrix m = testutil::random_matrix(80, 3, 12321, -1.0, 1.0);
    std::vector<std::uint8_t> y = testutil::noisy_linear_labels(m, 3, 0.2);
    Rng rng(8);
    std::vector<double> point(4);
    for (double& v : point) v = rng.uniform(-0.5, 0.5);
    std::vector<double> analytic;
    logreg_objective(m, y, std::span(point).first(3), point[3], 0.01,
                     &analytic);
    auto numeric = oracles::finite_difference(
        [&](std::span<const double> x) {
          return logreg_objective(m, y, x.first(3), x[3], 0.01, nullptr);
        },
        point);
    for (std::size_t i = 0; i < 4; ++i)
      require(std::abs(analytic[i] - numeric[i]) <=
                  1e-5 * std::max(1.0, std::abs(numeric[i])),
              "logistic gradient component " + std::to_string(i) +
                  " off finite difference");
  }

  // Hinge sub-gradient vs finite differences at a differentiable point.
  {
    FeatureMatrix m = testutil::random_matrix(60, 2, 999, -1.0, 1.0);
    std::vector<std::uint8_t> y = testutil::noisy_linear_labels(m, 6, 0.2);
    Rng rng(15);
    bool checked = false;
    for (int attempt = 0; attempt < 20 && !checked; ++attempt) {
      std::vector<double> point(3);
      for (double& v : point) v = rng.uniform(-0.8, 0.8);
      bool differentiable = true;
      for (std::size_t r = 0; r < m.n_rows; ++r) {
        double z = point[2];
        for (std::size_t c = 0; c < 2; ++c) z += point[c] * m.at(r, c);
        if (std::abs((y[r] ? 1.0 : -1.0) * z - 1.0) < 1e-4)
          differentiable = false;
      }
      if (!differentiable) continue;
      std::vector<double> analytic;
      hinge_objective(m, y, std::span(point).first(2), point[2], 1.0,
                      &analytic);
      auto numeric = oracles::finite_difference(
          [&](std::span<const double> x) {
            return hinge_objective(m, y, x.first(2), x[2], 1.0, nullptr);
          },
          point);
      for (std::size_t i = 0; i < 3; ++i)
        require(std::abs(analytic[i] - numeric[i]) <=
                    1e-5 * std::max(1.0, std::abs(numeric[i])),
                "hinge gradient component " + std::to_string(i) +
                    " off finite difference");
      checked = true;
    }
    require(checked, "never found a differentiable probe point");
  }

  // GBDT training loss monotone decreasing.
  {
    FeatureMatrix m = testutil::random_matrix(500, 4, 2468);
    std::vector<std::uint8_t> y = testutil::noisy_linear_labels(m, 9, 0.05);
    GbdtParams params;
    params.n_estimators = 25;
    params.num_leaves = 8;
    params.learning_rate = 0.1;
    GbdtFitDiagnostics diag;
    gbdt_fit(m, y, params, &diag);
    for (std::size_t i = 1; i < diag.train_loss.size(); ++i)
      require(diag.train_loss[i] < diag.train_loss[i - 1] + 1e-12,
              "train loss rose at round " + std::to_string(i));
  }

  // K-Means inertia monotone non-increasing every iteration.
  {
    FeatureMatrix m = testutil::random_matrix(800, 3, 1357);
    ClusterModel model = kmeans_fit(m, 12, 5);
    require(!model.inertia_history.empty(), "no inertia history");
    for (std::size_t i = 1; i < model.inertia_history.size(); ++i)
      require(model.inertia_history[i] <=
                  model.inertia_history[i - 1] + 1e-12,
              "inertia rose at iteration " + std::to_string(i));
  }
}

}  // namespace

int main() {
  std::printf("radsentry acceptance suite\n");
  criterion(1, "oracle equivalence on small instances", []() {
    check_kmeans_oracle();
    check_stump_oracle();
    check_metrics_oracle();
    check_smote_oracle();
  });
  criterion(2, "end-to-end detection quality (accuracy >= 0.95, F1 >= 0.90)",
            check_detection_quality);
  criterion(3, "random-search tuning does not regress validation F1",
            check_tuning_effect);
  criterion(4, "feature-selected compact model: minimal prefix, latency, F1",
            check_compaction);
  criterion(5, "model latency ordering: svm >= 50x gbdt, logreg <= gbdt",
            check_model_ordering);
  criterion(6, "pipeline determinism: reruns and thread counts byte-identical",
            check_determinism);
  criterion(7, "serialization: 100 fuzzed round trips, compact blob <= 64KiB",
            check_serialization);
  criterion(8, "numerical checks: gradients, loss and inertia monotonicity",
            check_numerics);

  if (g_failures == 0)
    std::printf("all acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  return g_failures;
}
