#include "radsentry/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <numeric>

#include "radsentry/classifiers.hpp"
#include "radsentry/csv.hpp"
#include "radsentry/error.hpp"
#include "radsentry/threads.hpp"

namespace radsentry {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  return out;
}

std::vector<std::uint8_t> gather(std::span<const std::uint8_t> values,
                                 std::span<const std::size_t> idx) {
  std::vector<std::uint8_t> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = values[idx[i]];
  return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config,
                            const std::string& input_csv,
                            const std::string& out_dir, bool with_baselines) {
  config.validate();
  const int threads = resolve_threads(config.threads);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  PipelineResult result;

  // Stage 1: ingest and unit filtering.
  std::ifstream in(input_csv, std::ios::binary);
  if (!in) throw Error("cannot open input: " + input_csv);
  auto [readings, ingest_report] = ingest_stream(in, config.ingest);
  result.ingest = ingest_report;
  if (readings.size() < 10)
    throw Error("pipeline: only " + std::to_string(readings.size()) +
                " radiation readings after filtering");
  {
    auto f = open_out(out / "readings.csv");
    write_readings_csv(f, readings);
  }

  // Stage 2: clustering features (no device columns), scaled.
  FeatureMatrix base = readings_to_matrix(readings);
  std::vector<double> raw_values = base.column(3);
  FeatureMatrix scaled_base = apply_minmax(base, fit_minmax(base));

  KMeansOptions kmeans_opts;
  kmeans_opts.max_iters = config.cluster.max_iters;
  kmeans_opts.tol = config.cluster.tol;
  kmeans_opts.restarts = config.cluster.restarts;
  kmeans_opts.threads = threads;

  // The labeling clustering is the search's validated model when searching;
  // a refit from a different seed could land in a different local optimum.
  ClusterModel clusters;
  if (config.cluster.k == 0) {
    ClusterSearchOptions search;
    search.k_min = config.cluster.k_min;
    search.k_max = config.cluster.k_max;
    search.n_trials = config.cluster.search_trials;
    search.seed = Rng::derive(config.seed, kSeedClusterSearch);
    search.kmeans = kmeans_opts;
    ClusterSearchResult found =
        search_cluster_count(scaled_base, raw_values, config.cluster.rules,
                             search);
    result.cluster_criterion_met = found.criterion_met;
    clusters = std::move(found.model);
  } else {
    clusters = kmeans_fit(scaled_base,
                          static_cast<std::size_t>(config.cluster.k),
                          Rng::derive(config.seed, kSeedCluster), kmeans_opts);
  }
  result.cluster_k = clusters.k;
  AnomalyLabelReport label_report;
  LabeledDataset labeled_base =
      label_anomalies(scaled_base, raw_values, clusters, config.cluster.rules,
                      &label_report);
  result.n_anomaly_rows = label_report.n_flagged_rows;
  {
    auto f = open_out(out / "cluster_labels.csv");
    write_labels_csv(f, labeled_base);
  }

  // Stage 3: full feature matrix with one-hot devices, scaled.
  EncoderMap encoder = EncoderMap::fit(readings);
  FeatureMatrix full = readings_to_matrix_with_devices(readings, encoder);
  FeatureMatrix scaled_full = apply_minmax(full, fit_minmax(full));

  LabeledDataset labeled;
  labeled.matrix = std::move(scaled_full);
  labeled.labels = labeled_base.labels;
  labeled.provenance.assign(labeled.matrix.n_rows, 0);

  // Stage 4: SMOTE synthesis plus Gaussian noise.
  SmoteConfig smote;
  smote.n_synthetic =
      config.smote.n_synthetic >= 0
          ? static_cast<std::size_t>(config.smote.n_synthetic)
          : static_cast<std::size_t>(std::llround(
                config.smote.ratio * static_cast<double>(labeled.matrix.n_rows)));
  smote.k_neighbors = config.smote.k_neighbors;
  smote.seed = Rng::derive(config.seed, kSeedSmote);
  smote.threads = threads;
  result.n_synthetic = smote.n_synthetic;

  NoiseConfig noise;
  noise.eta = config.noise.eta;
  noise.seed = Rng::derive(config.seed, kSeedNoise);
  noise.continuous_columns = {0, 1, 2, 3, 4};  // device one-hots untouched

  LabeledDataset dataset = build_attack_dataset(
      labeled, smote, noise, Rng::derive(config.seed, kSeedShuffle),
      config.noise.scope == "synthetic");
  result.n_dataset_rows = dataset.matrix.n_rows;
  {
    auto f = open_out(out / "dataset.rdm");
    write_matrix_rdm(f, dataset.matrix);
    auto g = open_out(out / "dataset_columns.csv");
    write_csv_row(g, dataset.matrix.column_names);
    auto h = open_out(out / "dataset_labels.csv");
    write_labels_csv(h, dataset);
  }

  // Stage 5: stratified train/test split.
  SplitConfig split_cfg = config.split;
  split_cfg.seed = Rng::derive(config.seed, kSeedSplit);
  SplitIndices split = split_train_test(dataset.labels, split_cfg);
  result.train_matrix = dataset.matrix.select_rows(split.train);
  result.train_labels = gather(dataset.labels, split.train);
  result.test_matrix = dataset.matrix.select_rows(split.test);
  result.test_labels = gather(dataset.labels, split.test);

  // Stage 6: untuned reference model.
  GbdtParams untuned = config.gbdt;
  untuned.seed = Rng::derive(config.seed, kSeedGbdt);
  result.untuned_model =
      gbdt_fit(result.train_matrix, result.train_labels, untuned, nullptr,
               threads);
  result.untuned_test = compute_metrics(
      result.untuned_model.predict_labels(result.test_matrix, 1),
      result.test_labels);

  // Stage 7: random-search tuning on a validation slice of the train split.
  SplitConfig val_cfg;
  val_cfg.test_fraction = config.tuning.validation_fraction;
  val_cfg.stratified = true;
  val_cfg.seed = Rng::derive(config.seed, kSeedValidationSplit);
  SplitIndices val_split = split_train_test(result.train_labels, val_cfg);
  FeatureMatrix tune_train = result.train_matrix.select_rows(val_split.train);
  std::vector<std::uint8_t> tune_train_y =
      gather(result.train_labels, val_split.train);
  FeatureMatrix tune_val = result.train_matrix.select_rows(val_split.test);
  std::vector<std::uint8_t> tune_val_y =
      gather(result.train_labels, val_split.test);

  RandomSearchResult search = random_search(
      config.search_space, config.tuning.trials, tune_train, tune_train_y,
      tune_val, tune_val_y, config.gbdt,
      Rng::derive(config.seed, kSeedTuning), threads);
  result.best_params = search.best;
  {
    auto f = open_out(out / "trials.csv");
    write_trials_csv(f, search.trials);
    nlohmann::json jb = {{"n_estimators", search.best.n_estimators},
                         {"max_depth", search.best.max_depth},
                         {"num_leaves", search.best.num_leaves}};
    auto g = open_out(out / "best_params.json");
    g << jb.dump(2) << '\n';
  }

  // Stage 8: tuned model on the full train split, then feature selection
  // and the compact retrain.
  GbdtParams best = search.best;
  best.seed = Rng::derive(config.seed, kSeedGbdt);
  result.tuned_model =
      gbdt_fit(result.train_matrix, result.train_labels, best, nullptr,
               threads);
  result.tuned_test = compute_metrics(
      result.tuned_model.predict_labels(result.test_matrix, 1),
      result.test_labels);

  result.selection = select_features(result.tuned_model.feature_importances(),
                                     config.tuning.feature_threshold);
  result.compact_model =
      retrain_compact(result.train_matrix, result.train_labels,
                      result.selection, best, threads);
  result.compact_test = compute_metrics(
      result.compact_model.predict_labels(result.test_matrix, 1),
      result.test_labels);
  {
    nlohmann::json js = {
        {"threshold", result.selection.threshold},
        {"cumulative_importance", result.selection.cumulative_importance},
        {"retained", result.selection.retained},
        {"retained_names", nlohmann::json::array()}};
    for (std::size_t c : result.selection.retained)
      js["retained_names"].push_back(dataset.matrix.column_names[c]);
    auto f = open_out(out / "selection.json");
    f << js.dump(2) << '\n';
  }
  save_model((out / "model_full.rds1").string(), result.tuned_model);
  save_model((out / "model.rds1").string(), result.compact_model);

  // Stage 9: model comparison report.
  GbdtClassifier gbdt_c("lightgbm_style_gbdt", untuned, threads);
  ForestParams rf_params = config.baselines.rf;
  rf_params.seed = Rng::derive(config.seed, kSeedBaselines);
  ForestClassifier rf_c(rf_params, threads);
  LogRegClassifier lr_c(config.baselines.logreg);
  SvmParams svm_params = config.baselines.svm;
  svm_params.seed = Rng::derive(config.seed, kSeedBaselines);
  SvmClassifier svm_c(svm_params, config.baselines.svm_max_train,
                      Rng::derive(config.seed, kSeedSvmSubsample));

  std::vector<Classifier*> models;
  models.push_back(&gbdt_c);
  if (with_baselines) {
    models.push_back(&rf_c);
    models.push_back(&lr_c);
    models.push_back(&svm_c);
  }
  result.report_rows = compare_models(
      models, result.train_matrix, result.train_labels, result.test_matrix,
      result.test_labels, config.evaluation.measure_latency,
      config.evaluation.latency);

  // Table-3-style rows for the tuned and compacted models.
  auto append_row = [&](const std::string& name,
                        const GradientBoostedEnsemble& model,
                        MetricsReport metrics) {
    if (config.evaluation.measure_latency) {
      std::vector<std::uint8_t> sink;
      metrics.prediction_time_per_sample_us = bench_latency(
          [&]() { sink = model.predict_labels(result.test_matrix, 1); },
          result.test_matrix.n_rows, config.evaluation.latency);
    }
    result.report_rows.push_back({name, metrics});
  };
  append_row("gbdt_tuned", result.tuned_model, result.tuned_test);
  append_row("gbdt_tuned_compact", result.compact_model, result.compact_test);

  {
    auto f = open_out(out / "report.csv");
    write_report_csv(f, result.report_rows);
    auto g = open_out(out / "effective_config.json");
    g << config_to_json(config).dump(2) << '\n';
  }
  return result;
}

}  // namespace radsentry
