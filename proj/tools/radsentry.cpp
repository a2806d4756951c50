// radsentry: DoS intrusion detection toolkit for radiation sensor networks.
//
// Subcommands chain through files: ingest produces a readings CSV, label and
// preprocess turn it into labels and a feature matrix, synth builds the
// attack dataset, train/tune/compact produce models, eval/bench/predict
// consume them. `pipeline` runs everything end to end. Every subcommand
// finishes with a single machine-readable JSON summary line on stdout.
// Exit codes: 0 ok, 1 runtime failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <json.hpp>

#include "radsentry/classifiers.hpp"
#include "radsentry/config.hpp"
#include "radsentry/csv.hpp"
#include "radsentry/error.hpp"
#include "radsentry/pipeline.hpp"
#include "radsentry/threads.hpp"
#include "radsentry/version.hpp"

namespace rs = radsentry;
using nlohmann::json;

namespace {

void print_summary(const json& j) { std::cout << j.dump() << std::endl; }

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rs::Error("cannot open: " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rs::Error("cannot open for writing: " + path);
  return out;
}

std::vector<rs::RadiationReading> load_readings(const std::string& path) {
  auto in = open_in(path);
  return rs::read_readings_csv(in);
}

rs::LabeledDataset load_dataset(const std::string& matrix_path,
                                const std::string& labels_path) {
  rs::LabeledDataset d;
  d.matrix = rs::load_matrix(matrix_path);
  auto in = open_in(labels_path);
  rs::read_labels_csv(in, d);
  if (d.labels.size() != d.matrix.n_rows)
    throw rs::Error("labels file has " + std::to_string(d.labels.size()) +
                    " rows but matrix has " + std::to_string(d.matrix.n_rows));
  return d;
}

json metrics_json(const rs::MetricsReport& m) {
  json j = {{"accuracy", m.accuracy},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1}};
  if (m.prediction_time_per_sample_us >= 0.0)
    j["pred_time_us"] = m.prediction_time_per_sample_us;
  return j;
}

struct SplitData {
  rs::FeatureMatrix train, test;
  std::vector<std::uint8_t> train_y, test_y;
};

SplitData make_split(const rs::LabeledDataset& d,
                     const rs::PipelineConfig& config) {
  rs::SplitConfig split_cfg = config.split;
  split_cfg.seed = rs::Rng::derive(config.seed, rs::kSeedSplit);
  rs::SplitIndices split = rs::split_train_test(d.labels, split_cfg);
  SplitData out;
  out.train = d.matrix.select_rows(split.train);
  out.test = d.matrix.select_rows(split.test);
  out.train_y.resize(split.train.size());
  out.test_y.resize(split.test.size());
  for (std::size_t i = 0; i < split.train.size(); ++i)
    out.train_y[i] = d.labels[split.train[i]];
  for (std::size_t i = 0; i < split.test.size(); ++i)
    out.test_y[i] = d.labels[split.test[i]];
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"radsentry - intrusion detection toolkit for radiation "
               "detection systems"};
  app.set_version_flag("--version", rs::kVersion);
  app.require_subcommand(1);

  std::string config_path, input, output, labels_path, model_path, out_dir;
  std::string best_path;
  int threads_flag = 0;
  std::uint64_t seed_flag = 0;
  bool seed_set = false, threads_set = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "pipeline config JSON");
    cmd->add_option("--threads", threads_flag, "worker thread cap")
        ->each([&](const std::string&) { threads_set = true; });
    cmd->add_option("--seed", seed_flag, "root RNG seed")
        ->each([&](const std::string&) { seed_set = true; });
  };

  auto* c_ingest = app.add_subcommand(
      "ingest", "parse a daily-export CSV into filtered radiation readings");
  c_ingest->add_option("--input", input, "raw export CSV")->required();
  c_ingest->add_option("--out", output, "filtered readings CSV")->required();
  add_common(c_ingest);

  auto* c_pre = app.add_subcommand(
      "preprocess", "build the scaled one-hot feature matrix from readings");
  c_pre->add_option("--input", input, "readings CSV")->required();
  c_pre->add_option("--out", output, "matrix file (.csv or .rdm)")
      ->required();
  add_common(c_pre);

  std::string k_arg = "search";
  auto* c_label = app.add_subcommand(
      "label", "discover anomalies with K-Means and label them");
  c_label->add_option("--input", input, "readings CSV")->required();
  c_label->add_option("--out", output, "labels sidecar CSV")->required();
  c_label->add_option("--k", k_arg, "cluster count or 'search'");
  add_common(c_label);

  std::int64_t synth_n = -2;
  auto* c_synth = app.add_subcommand(
      "synth", "SMOTE-oversample anomalies into an attack dataset");
  c_synth->add_option("--input", input, "feature matrix (.csv/.rdm)")
      ->required();
  c_synth->add_option("--labels", labels_path, "labels sidecar CSV")
      ->required();
  c_synth->add_option("--out", output, "output dataset prefix")->required();
  c_synth->add_option("--n", synth_n, "synthetic row count (-1 = ratio)");
  add_common(c_synth);

  std::string model_kind = "gbdt";
  auto* c_train = app.add_subcommand("train", "train one model and report "
                                              "held-out metrics");
  c_train->add_option("--input", input, "dataset matrix")->required();
  c_train->add_option("--labels", labels_path, "dataset labels CSV")
      ->required();
  c_train->add_option("--model", model_kind, "one of gbdt, rf, logreg, svm");
  c_train->add_option("--out", output, "model output path (gbdt only)");
  add_common(c_train);

  std::size_t trials_flag = 0;
  auto* c_tune = app.add_subcommand(
      "tune", "random-search GBDT hyperparameters on a validation slice");
  c_tune->add_option("--input", input, "dataset matrix")->required();
  c_tune->add_option("--labels", labels_path, "dataset labels CSV")
      ->required();
  c_tune
      ->add_option("--out-dir", out_dir,
                   "directory for trials.csv and best_params.json")
      ->required();
  c_tune->add_option("--trials", trials_flag, "number of search trials");
  add_common(c_tune);

  double threshold_flag = 0.0;
  auto* c_compact = app.add_subcommand(
      "compact", "feature-select and retrain a compact model");
  c_compact->add_option("--input", input, "dataset matrix")->required();
  c_compact->add_option("--labels", labels_path, "dataset labels CSV")
      ->required();
  c_compact->add_option("--best", best_path, "best_params.json from tune");
  c_compact->add_option("--out", output, "compact model path")->required();
  c_compact->add_option("--threshold", threshold_flag,
                        "cumulative importance threshold");
  add_common(c_compact);

  auto* c_eval = app.add_subcommand(
      "eval", "train and compare the four model families");
  c_eval->add_option("--input", input, "dataset matrix")->required();
  c_eval->add_option("--labels", labels_path, "dataset labels CSV")
      ->required();
  c_eval->add_option("--out", output, "report CSV path")->required();
  add_common(c_eval);

  auto* c_bench = app.add_subcommand(
      "bench", "measure per-sample prediction latency of a saved model");
  c_bench->add_option("--model", model_path, "model .rds1")->required();
  c_bench->add_option("--input", input, "matrix to predict on")->required();
  add_common(c_bench);

  auto* c_predict = app.add_subcommand(
      "predict", "print label,probability per row of a matrix");
  c_predict->add_option("--model", model_path, "model .rds1")->required();
  c_predict->add_option("--input", input, "matrix to predict on")
      ->required();
  add_common(c_predict);

  bool no_baselines = false;
  auto* c_pipe = app.add_subcommand(
      "pipeline", "run every stage end to end from a config file");
  c_pipe->add_option("--input", input, "raw export CSV");
  c_pipe->add_option("--out-dir", out_dir, "artifact directory");
  c_pipe->add_flag("--no-baselines", no_baselines,
                   "skip the baseline model comparison");
  add_common(c_pipe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  rs::PipelineConfig config =
      config_path.empty() ? rs::PipelineConfig{}
                          : rs::load_config_file(config_path);
  if (seed_set) config.seed = seed_flag;
  if (threads_set) config.threads = threads_flag;
  const int threads = rs::resolve_threads(config.threads);

  if (c_ingest->parsed()) {
    auto in = open_in(input);
    auto [readings, report] = rs::ingest_stream(in, config.ingest);
    auto outf = open_out(output);
    rs::write_readings_csv(outf, readings);
    print_summary({{"cmd", "ingest"},
                   {"rows_read", report.rows_read},
                   {"rows_kept", report.rows_kept},
                   {"rows_dropped_malformed", report.rows_dropped_malformed},
                   {"rows_dropped_unit", report.rows_dropped_unit},
                   {"out", output}});
    return 0;
  }

  if (c_pre->parsed()) {
    auto readings = load_readings(input);
    rs::EncoderMap encoder = rs::EncoderMap::fit(readings);
    rs::FeatureMatrix full =
        rs::readings_to_matrix_with_devices(readings, encoder);
    rs::FeatureMatrix scaled = rs::apply_minmax(full, rs::fit_minmax(full));
    rs::save_matrix(output, scaled);
    print_summary({{"cmd", "preprocess"},
                   {"rows", scaled.n_rows},
                   {"cols", scaled.n_cols},
                   {"devices", encoder.devices.size()},
                   {"out", output}});
    return 0;
  }

  if (c_label->parsed()) {
    auto readings = load_readings(input);
    rs::FeatureMatrix base = rs::readings_to_matrix(readings);
    std::vector<double> raw = base.column(3);
    rs::FeatureMatrix scaled = rs::apply_minmax(base, rs::fit_minmax(base));

    rs::KMeansOptions opts;
    opts.max_iters = config.cluster.max_iters;
    opts.tol = config.cluster.tol;
    opts.restarts = config.cluster.restarts;
    opts.threads = threads;

    rs::ClusterModel clusters;
    bool criterion_met = true;
    if (k_arg == "search") {
      rs::ClusterSearchOptions search;
      search.k_min = config.cluster.k_min;
      search.k_max = config.cluster.k_max;
      search.n_trials = config.cluster.search_trials;
      search.seed = rs::Rng::derive(config.seed, rs::kSeedClusterSearch);
      search.kmeans = opts;
      auto found =
          rs::search_cluster_count(scaled, raw, config.cluster.rules, search);
      criterion_met = found.criterion_met;
      if (!criterion_met)
        std::cerr << "warning: no cluster count met the isolation criterion; "
                     "using best-scoring k="
                  << found.k << "\n";
      clusters = std::move(found.model);
    } else {
      clusters = rs::kmeans_fit(
          scaled, static_cast<std::size_t>(std::stoul(k_arg)),
          rs::Rng::derive(config.seed, rs::kSeedCluster), opts);
    }
    const std::size_t k = clusters.k;
    rs::AnomalyLabelReport report;
    rs::LabeledDataset labeled = rs::label_anomalies(
        scaled, raw, clusters, config.cluster.rules, &report);
    auto outf = open_out(output);
    rs::write_labels_csv(outf, labeled);
    print_summary({{"cmd", "label"},
                   {"k", k},
                   {"criterion_met", criterion_met},
                   {"anomaly_rows", report.n_flagged_rows},
                   {"rows", labeled.labels.size()},
                   {"out", output}});
    return 0;
  }

  if (c_synth->parsed()) {
    rs::LabeledDataset d = load_dataset(input, labels_path);
    rs::SmoteConfig smote;
    std::int64_t n = synth_n > -2 ? synth_n : config.smote.n_synthetic;
    smote.n_synthetic =
        n >= 0 ? static_cast<std::size_t>(n)
               : static_cast<std::size_t>(std::llround(
                     config.smote.ratio *
                     static_cast<double>(d.matrix.n_rows)));
    smote.k_neighbors = config.smote.k_neighbors;
    smote.seed = rs::Rng::derive(config.seed, rs::kSeedSmote);
    smote.threads = threads;

    rs::NoiseConfig noise;
    noise.eta = config.noise.eta;
    noise.seed = rs::Rng::derive(config.seed, rs::kSeedNoise);
    for (std::size_t c = 0; c < d.matrix.n_cols; ++c)
      if (d.matrix.column_names[c].rfind("device:", 0) != 0)
        noise.continuous_columns.push_back(c);

    rs::LabeledDataset out_ds = rs::build_attack_dataset(
        d, smote, noise, rs::Rng::derive(config.seed, rs::kSeedShuffle),
        config.noise.scope == "synthetic");
    rs::save_matrix(output + ".rdm", out_ds.matrix);
    auto lf = open_out(output + "_labels.csv");
    rs::write_labels_csv(lf, out_ds);
    print_summary({{"cmd", "synth"},
                   {"original_rows", d.matrix.n_rows},
                   {"synthetic_rows", smote.n_synthetic},
                   {"total_rows", out_ds.matrix.n_rows},
                   {"out", output + ".rdm"}});
    return 0;
  }

  if (c_train->parsed()) {
    rs::LabeledDataset d = load_dataset(input, labels_path);
    SplitData s = make_split(d, config);
    rs::MetricsReport metrics;
    if (model_kind == "gbdt") {
      rs::GbdtParams gp = config.gbdt;
      gp.seed = rs::Rng::derive(config.seed, rs::kSeedGbdt);
      auto model = rs::gbdt_fit(s.train, s.train_y, gp, nullptr, threads);
      metrics = rs::compute_metrics(model.predict_labels(s.test, 1), s.test_y);
      if (!output.empty()) rs::save_model(output, model);
    } else if (model_kind == "rf") {
      rs::ForestParams fp = config.baselines.rf;
      fp.seed = rs::Rng::derive(config.seed, rs::kSeedBaselines);
      auto model = rs::rf_fit(s.train, s.train_y, fp, threads);
      metrics = rs::compute_metrics(model.predict(s.test, 1), s.test_y);
    } else if (model_kind == "logreg") {
      auto model = rs::logreg_fit(s.train, s.train_y, config.baselines.logreg);
      metrics = rs::compute_metrics(model.predict(s.test), s.test_y);
    } else if (model_kind == "svm") {
      rs::SvmParams sp = config.baselines.svm;
      sp.seed = rs::Rng::derive(config.seed, rs::kSeedBaselines);
      rs::SvmClassifier svm(sp, config.baselines.svm_max_train,
                            rs::Rng::derive(config.seed, rs::kSeedSvmSubsample));
      svm.fit(s.train, s.train_y);
      metrics = rs::compute_metrics(svm.predict(s.test), s.test_y);
    } else {
      throw rs::ConfigError("unknown --model '" + model_kind +
                            "'; expected gbdt, rf, logreg or svm");
    }
    json summary = {{"cmd", "train"},
                    {"model", model_kind},
                    {"train_rows", s.train.n_rows},
                    {"test_rows", s.test.n_rows},
                    {"metrics", metrics_json(metrics)}};
    if (!output.empty()) summary["out"] = output;
    print_summary(summary);
    return 0;
  }

  if (c_eval->parsed()) {
    rs::LabeledDataset d = load_dataset(input, labels_path);
    SplitData s = make_split(d, config);

    rs::GbdtParams gp = config.gbdt;
    gp.seed = rs::Rng::derive(config.seed, rs::kSeedGbdt);
    rs::GbdtClassifier gbdt("lightgbm_style_gbdt", gp, threads);
    rs::ForestParams fp = config.baselines.rf;
    fp.seed = rs::Rng::derive(config.seed, rs::kSeedBaselines);
    rs::ForestClassifier rf(fp, threads);
    rs::LogRegClassifier lr(config.baselines.logreg);
    rs::SvmParams sp = config.baselines.svm;
    sp.seed = rs::Rng::derive(config.seed, rs::kSeedBaselines);
    rs::SvmClassifier svm(sp, config.baselines.svm_max_train,
                          rs::Rng::derive(config.seed, rs::kSeedSvmSubsample));

    std::vector<rs::Classifier*> models = {&gbdt, &rf, &lr, &svm};
    auto rows = rs::compare_models(models, s.train, s.train_y, s.test,
                                   s.test_y, true, config.evaluation.latency);
    auto outf = open_out(output);
    rs::write_report_csv(outf, rows);
    std::cout << rs::format_report_table(rows);
    print_summary({{"cmd", "eval"},
                   {"models", rows.size()},
                   {"test_rows", s.test.n_rows},
                   {"out", output}});
    return 0;
  }

  if (c_tune->parsed()) {
    rs::LabeledDataset d = load_dataset(input, labels_path);
    SplitData s = make_split(d, config);

    rs::SplitConfig val_cfg;
    val_cfg.test_fraction = config.tuning.validation_fraction;
    val_cfg.seed = rs::Rng::derive(config.seed, rs::kSeedValidationSplit);
    rs::SplitIndices val_split = rs::split_train_test(s.train_y, val_cfg);
    rs::FeatureMatrix tr = s.train.select_rows(val_split.train);
    rs::FeatureMatrix val = s.train.select_rows(val_split.test);
    std::vector<std::uint8_t> tr_y(val_split.train.size()),
        val_y(val_split.test.size());
    for (std::size_t i = 0; i < val_split.train.size(); ++i)
      tr_y[i] = s.train_y[val_split.train[i]];
    for (std::size_t i = 0; i < val_split.test.size(); ++i)
      val_y[i] = s.train_y[val_split.test[i]];

    std::size_t trials = trials_flag > 0 ? trials_flag : config.tuning.trials;
    auto search = rs::random_search(
        config.search_space, trials, tr, tr_y, val, val_y, config.gbdt,
        rs::Rng::derive(config.seed, rs::kSeedTuning), threads);

    std::filesystem::create_directories(out_dir);
    auto tf = open_out(out_dir + "/trials.csv");
    rs::write_trials_csv(tf, search.trials);
    json jb = {{"n_estimators", search.best.n_estimators},
               {"max_depth", search.best.max_depth},
               {"num_leaves", search.best.num_leaves}};
    auto bf = open_out(out_dir + "/best_params.json");
    bf << jb.dump(2) << '\n';
    print_summary({{"cmd", "tune"},
                   {"trials", search.trials.size()},
                   {"best", jb},
                   {"out_dir", out_dir}});
    return 0;
  }

  if (c_compact->parsed()) {
    rs::LabeledDataset d = load_dataset(input, labels_path);
    rs::GbdtParams best = config.gbdt;
    if (!best_path.empty()) {
      auto in = open_in(best_path);
      json jb;
      in >> jb;
      best.n_estimators = jb.value("n_estimators", best.n_estimators);
      best.max_depth = jb.value("max_depth", best.max_depth);
      best.num_leaves = jb.value("num_leaves", best.num_leaves);
    }
    best.seed = rs::Rng::derive(config.seed, rs::kSeedGbdt);
    double threshold = threshold_flag > 0.0 ? threshold_flag
                                            : config.tuning.feature_threshold;
    SplitData s = make_split(d, config);
    auto full = rs::gbdt_fit(s.train, s.train_y, best, nullptr, threads);
    auto selection = rs::select_features(full.feature_importances(), threshold);
    auto compact =
        rs::retrain_compact(s.train, s.train_y, selection, best, threads);
    rs::save_model(output, compact);
    rs::MetricsReport metrics =
        rs::compute_metrics(compact.predict_labels(s.test, 1), s.test_y);
    print_summary({{"cmd", "compact"},
                   {"retained", selection.retained.size()},
                   {"total_features", d.matrix.n_cols},
                   {"cumulative_importance", selection.cumulative_importance},
                   {"metrics", metrics_json(metrics)},
                   {"out", output}});
    return 0;
  }

  if (c_bench->parsed()) {
    auto model = rs::load_model(model_path);
    rs::FeatureMatrix matrix = rs::load_matrix(input);
    std::vector<std::uint8_t> sink;
    double us = rs::bench_latency(
        [&]() { sink = model.predict_labels(matrix, 1); }, matrix.n_rows,
        config.evaluation.latency);
    print_summary({{"cmd", "bench"},
                   {"rows", matrix.n_rows},
                   {"trees", model.trees.size()},
                   {"pred_time_us", us}});
    return 0;
  }

  if (c_predict->parsed()) {
    auto model = rs::load_model(model_path);
    rs::FeatureMatrix matrix = rs::load_matrix(input);
    std::vector<double> proba = model.predict_proba(matrix, threads);
    for (double p : proba)
      std::cout << (p >= 0.5 ? 1 : 0) << ',' << rs::format_double(p) << '\n';
    return 0;
  }

  if (c_pipe->parsed()) {
    if (!input.empty()) config.input_path = input;
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (config.input_path.empty())
      throw rs::ConfigError("pipeline: no input (use --input or paths.input)");
    if (config.output_dir.empty())
      throw rs::ConfigError(
          "pipeline: no output directory (use --out-dir or paths.out_dir)");
    rs::PipelineResult result = rs::run_pipeline(
        config, config.input_path, config.output_dir, !no_baselines);
    print_summary(
        {{"cmd", "pipeline"},
         {"rows_kept", result.ingest.rows_kept},
         {"cluster_k", result.cluster_k},
         {"cluster_criterion_met", result.cluster_criterion_met},
         {"anomaly_rows", result.n_anomaly_rows},
         {"synthetic_rows", result.n_synthetic},
         {"dataset_rows", result.n_dataset_rows},
         {"best",
          {{"n_estimators", result.best_params.n_estimators},
           {"max_depth", result.best_params.max_depth},
           {"num_leaves", result.best_params.num_leaves}}},
         {"retained_features", result.selection.retained.size()},
         {"untuned", metrics_json(result.untuned_test)},
         {"tuned", metrics_json(result.tuned_test)},
         {"compact", metrics_json(result.compact_test)},
         {"out_dir", config.output_dir}});
    return 0;
  }

  return 2;  // unreachable with require_subcommand(1)
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rs::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
