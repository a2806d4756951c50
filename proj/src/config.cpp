#include "radsentry/config.hpp"

#include <fstream>

#include "radsentry/error.hpp"

namespace radsentry {

using nlohmann::json;

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void get_range(const json& j, const char* key, std::pair<int, int>& out) {
  if (!j.contains(key)) return;
  const json& r = j.at(key);
  if (!r.is_array() || r.size() != 2)
    throw ConfigError(std::string("config: ") + key +
                      " must be a [lo, hi] pair");
  out = {r[0].get<int>(), r[1].get<int>()};
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(split.test_fraction > 0.0 && split.test_fraction < 1.0))
    throw ConfigError("config: split.test_fraction must be in (0, 1)");
  if (noise.scope != "all" && noise.scope != "synthetic")
    throw ConfigError("config: noise.scope must be \"all\" or \"synthetic\"");
  if (noise.eta < 0.0) throw ConfigError("config: noise.eta must be >= 0");
  if (cluster.k < 0) throw ConfigError("config: cluster.k must be >= 0");
  if (cluster.k == 0 && cluster.k_min > cluster.k_max)
    throw ConfigError("config: cluster.k_min > cluster.k_max");
  if (!(cluster.rules.near_zero_ratio > 0.0 &&
        cluster.rules.near_zero_ratio < 1.0))
    throw ConfigError("config: rules.near_zero_ratio must be in (0, 1)");
  if (!(cluster.rules.high_outlier_ratio > 1.0))
    throw ConfigError("config: rules.high_outlier_ratio must be > 1");
  if (!(tuning.validation_fraction > 0.0 && tuning.validation_fraction < 1.0))
    throw ConfigError("config: tuning.validation_fraction must be in (0, 1)");
  if (!(tuning.feature_threshold > 0.0 && tuning.feature_threshold <= 1.0))
    throw ConfigError("config: tuning.feature_threshold must be in (0, 1]");
  gbdt.validate();
  search_space.validate();
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  get_if(j, "seed", c.seed);
  get_if(j, "threads", c.threads);
  if (j.contains("paths")) {
    const json& jp = j.at("paths");
    get_if(jp, "input", c.input_path);
    get_if(jp, "out_dir", c.output_dir);
  }

  if (j.contains("ingest")) {
    const json& ji = j.at("ingest");
    if (ji.contains("columns")) {
      const json& jc = ji.at("columns");
      get_if(jc, "captured_time", c.ingest.col_captured_time);
      get_if(jc, "latitude", c.ingest.col_latitude);
      get_if(jc, "longitude", c.ingest.col_longitude);
      get_if(jc, "value", c.ingest.col_value);
      get_if(jc, "unit", c.ingest.col_unit);
      get_if(jc, "device_id", c.ingest.col_device_id);
      get_if(jc, "uploaded_time", c.ingest.col_uploaded_time);
    }
    get_if(ji, "units", c.ingest.unit_tokens);
  }

  if (j.contains("cluster")) {
    const json& jc = j.at("cluster");
    get_if(jc, "k", c.cluster.k);
    get_if(jc, "k_min", c.cluster.k_min);
    get_if(jc, "k_max", c.cluster.k_max);
    get_if(jc, "search_trials", c.cluster.search_trials);
    get_if(jc, "max_iters", c.cluster.max_iters);
    get_if(jc, "tol", c.cluster.tol);
    get_if(jc, "restarts", c.cluster.restarts);
    if (jc.contains("rules")) {
      const json& jr = jc.at("rules");
      get_if(jr, "near_zero_absolute", c.cluster.rules.near_zero_absolute);
      get_if(jr, "near_zero_ratio", c.cluster.rules.near_zero_ratio);
      get_if(jr, "high_outlier_ratio", c.cluster.rules.high_outlier_ratio);
      get_if(jr, "low_quantile", c.cluster.rules.low_quantile);
      get_if(jr, "high_quantile", c.cluster.rules.high_quantile);
      get_if(jr, "purity", c.cluster.rules.purity);
    }
  }

  if (j.contains("smote")) {
    const json& js = j.at("smote");
    get_if(js, "n_synthetic", c.smote.n_synthetic);
    get_if(js, "ratio", c.smote.ratio);
    get_if(js, "k_neighbors", c.smote.k_neighbors);
  }

  if (j.contains("noise")) {
    const json& jn = j.at("noise");
    get_if(jn, "eta", c.noise.eta);
    get_if(jn, "scope", c.noise.scope);
  }

  if (j.contains("gbdt")) {
    const json& jg = j.at("gbdt");
    get_if(jg, "n_estimators", c.gbdt.n_estimators);
    get_if(jg, "max_depth", c.gbdt.max_depth);
    get_if(jg, "num_leaves", c.gbdt.num_leaves);
    get_if(jg, "learning_rate", c.gbdt.learning_rate);
    get_if(jg, "n_bins", c.gbdt.n_bins);
    get_if(jg, "min_samples_leaf", c.gbdt.min_samples_leaf);
    get_if(jg, "l2_reg", c.gbdt.l2_reg);
  }

  if (j.contains("search_space")) {
    const json& js = j.at("search_space");
    get_range(js, "n_estimators", c.search_space.n_estimators);
    get_range(js, "max_depth", c.search_space.max_depth);
    get_range(js, "num_leaves", c.search_space.num_leaves);
  }

  if (j.contains("tuning")) {
    const json& jt = j.at("tuning");
    get_if(jt, "trials", c.tuning.trials);
    get_if(jt, "validation_fraction", c.tuning.validation_fraction);
    get_if(jt, "feature_threshold", c.tuning.feature_threshold);
  }

  if (j.contains("split")) {
    const json& js = j.at("split");
    get_if(js, "test_fraction", c.split.test_fraction);
    get_if(js, "stratified", c.split.stratified);
  }

  if (j.contains("baselines")) {
    const json& jb = j.at("baselines");
    if (jb.contains("rf")) {
      const json& jr = jb.at("rf");
      get_if(jr, "n_trees", c.baselines.rf.n_trees);
      get_if(jr, "max_depth", c.baselines.rf.max_depth);
      get_if(jr, "max_features", c.baselines.rf.max_features);
      get_if(jr, "bootstrap", c.baselines.rf.bootstrap);
    }
    if (jb.contains("logreg")) {
      const json& jl = jb.at("logreg");
      get_if(jl, "learning_rate", c.baselines.logreg.learning_rate);
      get_if(jl, "epochs", c.baselines.logreg.epochs);
      get_if(jl, "l2_reg", c.baselines.logreg.l2_reg);
      get_if(jl, "tolerance", c.baselines.logreg.tolerance);
    }
    if (jb.contains("svm")) {
      const json& js = jb.at("svm");
      get_if(js, "C", c.baselines.svm.C);
      std::string kernel = "rbf";
      get_if(js, "kernel", kernel);
      if (kernel == "linear")
        c.baselines.svm.kernel = SvmKernel::linear;
      else if (kernel == "rbf")
        c.baselines.svm.kernel = SvmKernel::rbf;
      else
        throw ConfigError("config: svm.kernel must be \"linear\" or \"rbf\"");
      get_if(js, "gamma", c.baselines.svm.gamma);
      get_if(js, "epochs", c.baselines.svm.epochs);
      get_if(js, "tol", c.baselines.svm.tol);
    }
    get_if(jb, "svm_max_train", c.baselines.svm_max_train);
  }

  if (j.contains("evaluation")) {
    const json& je = j.at("evaluation");
    get_if(je, "measure_latency", c.evaluation.measure_latency);
    get_if(je, "warmup_passes", c.evaluation.latency.warmup_passes);
    get_if(je, "measured_passes", c.evaluation.latency.measured_passes);
  }

  c.validate();
  return c;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["paths"] = {{"input", c.input_path}, {"out_dir", c.output_dir}};
  j["ingest"] = {{"columns",
                  {{"captured_time", c.ingest.col_captured_time},
                   {"latitude", c.ingest.col_latitude},
                   {"longitude", c.ingest.col_longitude},
                   {"value", c.ingest.col_value},
                   {"unit", c.ingest.col_unit},
                   {"device_id", c.ingest.col_device_id},
                   {"uploaded_time", c.ingest.col_uploaded_time}}},
                 {"units", c.ingest.unit_tokens}};
  j["cluster"] = {{"k", c.cluster.k},
                  {"k_min", c.cluster.k_min},
                  {"k_max", c.cluster.k_max},
                  {"search_trials", c.cluster.search_trials},
                  {"max_iters", c.cluster.max_iters},
                  {"tol", c.cluster.tol},
                  {"restarts", c.cluster.restarts},
                  {"rules",
                   {{"near_zero_absolute", c.cluster.rules.near_zero_absolute},
                    {"near_zero_ratio", c.cluster.rules.near_zero_ratio},
                    {"high_outlier_ratio", c.cluster.rules.high_outlier_ratio},
                    {"low_quantile", c.cluster.rules.low_quantile},
                    {"high_quantile", c.cluster.rules.high_quantile},
                    {"purity", c.cluster.rules.purity}}}};
  j["smote"] = {{"n_synthetic", c.smote.n_synthetic},
                {"ratio", c.smote.ratio},
                {"k_neighbors", c.smote.k_neighbors}};
  j["noise"] = {{"eta", c.noise.eta}, {"scope", c.noise.scope}};
  j["gbdt"] = {{"n_estimators", c.gbdt.n_estimators},
               {"max_depth", c.gbdt.max_depth},
               {"num_leaves", c.gbdt.num_leaves},
               {"learning_rate", c.gbdt.learning_rate},
               {"n_bins", c.gbdt.n_bins},
               {"min_samples_leaf", c.gbdt.min_samples_leaf},
               {"l2_reg", c.gbdt.l2_reg}};
  j["search_space"] = {
      {"n_estimators",
       {c.search_space.n_estimators.first, c.search_space.n_estimators.second}},
      {"max_depth",
       {c.search_space.max_depth.first, c.search_space.max_depth.second}},
      {"num_leaves",
       {c.search_space.num_leaves.first, c.search_space.num_leaves.second}}};
  j["tuning"] = {{"trials", c.tuning.trials},
                 {"validation_fraction", c.tuning.validation_fraction},
                 {"feature_threshold", c.tuning.feature_threshold}};
  j["split"] = {{"test_fraction", c.split.test_fraction},
                {"stratified", c.split.stratified}};
  j["baselines"] = {
      {"rf",
       {{"n_trees", c.baselines.rf.n_trees},
        {"max_depth", c.baselines.rf.max_depth},
        {"max_features", c.baselines.rf.max_features},
        {"bootstrap", c.baselines.rf.bootstrap}}},
      {"logreg",
       {{"learning_rate", c.baselines.logreg.learning_rate},
        {"epochs", c.baselines.logreg.epochs},
        {"l2_reg", c.baselines.logreg.l2_reg},
        {"tolerance", c.baselines.logreg.tolerance}}},
      {"svm",
       {{"C", c.baselines.svm.C},
        {"kernel",
         c.baselines.svm.kernel == SvmKernel::rbf ? "rbf" : "linear"},
        {"gamma", c.baselines.svm.gamma},
        {"epochs", c.baselines.svm.epochs},
        {"tol", c.baselines.svm.tol}}},
      {"svm_max_train", c.baselines.svm_max_train}};
  j["evaluation"] = {{"measure_latency", c.evaluation.measure_latency},
                     {"warmup_passes", c.evaluation.latency.warmup_passes},
                     {"measured_passes", c.evaluation.latency.measured_passes}};
  return j;
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError("config error in " + path + ": " + e.what());
  }
}

}  // namespace radsentry
