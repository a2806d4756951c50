#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "radsentry/baselines.hpp"
#include "radsentry/cluster_synth.hpp"
#include "radsentry/evaluation.hpp"
#include "radsentry/gbdt.hpp"
#include "radsentry/ingest.hpp"
#include "radsentry/tuning.hpp"

namespace radsentry {

// Fixed per-stage seed streams derived from the root seed, so partial
// re-runs reproduce the full run's randomness.
enum SeedStream : std::uint64_t {
  kSeedClusterSearch = 1,
  kSeedCluster = 2,
  kSeedSmote = 3,
  kSeedNoise = 4,
  kSeedShuffle = 5,
  kSeedSplit = 6,
  kSeedValidationSplit = 7,
  kSeedTuning = 8,
  kSeedGbdt = 9,
  kSeedBaselines = 10,
  kSeedSvmSubsample = 11,
};

struct ClusterStageConfig {
  int k = 0;  // 0 -> random search over [k_min, k_max]
  std::size_t k_min = 5;
  std::size_t k_max = 100;
  std::size_t search_trials = 12;
  std::size_t max_iters = 100;
  double tol = 1e-4;
  int restarts = 1;
  AnomalyRules rules;
};

struct SmoteStageConfig {
  std::int64_t n_synthetic = -1;  // -1 -> ratio * original rows
  double ratio = 40000.0 / 130000.0;
  std::size_t k_neighbors = 5;
};

struct NoiseStageConfig {
  double eta = 0.01;
  std::string scope = "all";  // "all" | "synthetic"
};

struct TuningStageConfig {
  std::size_t trials = 20;
  double validation_fraction = 0.25;
  double feature_threshold = 0.90;
};

struct BaselineStageConfig {
  ForestParams rf;
  LogRegParams logreg;
  SvmParams svm;
  // Kernel-SVM training cost is quadratic; cap the rows it trains on
  // (deterministic subsample of the train split). 0 disables the cap.
  std::size_t svm_max_train = 12000;
};

struct EvalStageConfig {
  // Wall-clock latency measurements are inherently non-reproducible, so the
  // pipeline leaves them off by default to keep report.csv byte-stable;
  // `radsentry eval` and `radsentry bench` turn them on.
  bool measure_latency = false;
  LatencyOptions latency;
};

struct PipelineConfig {
  std::uint64_t seed = 7;
  int threads = 0;  // 0 -> RADSENTRY_THREADS env, else hardware
  std::string input_path;   // raw export CSV (flag --input overrides)
  std::string output_dir;   // artifact directory (flag --out-dir overrides)
  IngestConfig ingest;
  ClusterStageConfig cluster;
  SmoteStageConfig smote;
  NoiseStageConfig noise;
  GbdtParams gbdt;  // untuned reference configuration
  SearchSpace search_space;
  TuningStageConfig tuning;
  SplitConfig split;
  BaselineStageConfig baselines;
  EvalStageConfig evaluation;

  void validate() const;
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& config);
PipelineConfig load_config_file(const std::string& path);

}  // namespace radsentry
