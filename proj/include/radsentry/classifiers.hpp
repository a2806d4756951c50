#pragma once

#include <string>

#include "radsentry/baselines.hpp"
#include "radsentry/evaluation.hpp"
#include "radsentry/gbdt.hpp"

namespace radsentry {

// Classifier adapters over the four model families for the comparison
// harness. Prediction is single-threaded (it feeds the latency benchmark);
// the threads argument caps training parallelism only.

class GbdtClassifier : public Classifier {
 public:
  GbdtClassifier(std::string name, GbdtParams params, int threads = 1)
      : name_(std::move(name)), params_(params), threads_(threads) {}

  std::string name() const override { return name_; }
  void fit(const FeatureMatrix& m, std::span<const std::uint8_t> y) override {
    model_ = gbdt_fit(m, y, params_, nullptr, threads_);
  }
  std::vector<std::uint8_t> predict(const FeatureMatrix& m) const override {
    return model_.predict_labels(m, 1);
  }
  const GradientBoostedEnsemble& model() const { return model_; }

 private:
  std::string name_;
  GbdtParams params_;
  int threads_;
  GradientBoostedEnsemble model_;
};

class ForestClassifier : public Classifier {
 public:
  explicit ForestClassifier(ForestParams params, int threads = 1)
      : params_(params), threads_(threads) {}
  std::string name() const override { return "random_forest"; }
  void fit(const FeatureMatrix& m, std::span<const std::uint8_t> y) override {
    model_ = rf_fit(m, y, params_, threads_);
  }
  std::vector<std::uint8_t> predict(const FeatureMatrix& m) const override {
    return model_.predict(m, 1);
  }

 private:
  ForestParams params_;
  int threads_;
  ForestModel model_;
};

class LogRegClassifier : public Classifier {
 public:
  explicit LogRegClassifier(LogRegParams params) : params_(params) {}
  std::string name() const override { return "logistic_regression"; }
  void fit(const FeatureMatrix& m, std::span<const std::uint8_t> y) override {
    model_ = logreg_fit(m, y, params_);
  }
  std::vector<std::uint8_t> predict(const FeatureMatrix& m) const override {
    return model_.predict(m);
  }
  const LinearModel& model() const { return model_; }

 private:
  LogRegParams params_;
  LinearModel model_;
};

// Kernel-SVM training cost is quadratic in rows; max_train > 0 trains on a
// deterministic seeded subsample of the train split (rbf mode only).
class SvmClassifier : public Classifier {
 public:
  SvmClassifier(SvmParams params, std::size_t max_train = 0,
                std::uint64_t subsample_seed = 0)
      : params_(params), max_train_(max_train), seed_(subsample_seed) {}

  std::string name() const override {
    return params_.kernel == SvmKernel::rbf ? "svm_rbf" : "svm_linear";
  }
  void fit(const FeatureMatrix& m, std::span<const std::uint8_t> y) override;
  std::vector<std::uint8_t> predict(const FeatureMatrix& m) const override {
    return model_.predict(m);
  }
  const SvmModel& model() const { return model_; }

 private:
  SvmParams params_;
  std::size_t max_train_;
  std::uint64_t seed_;
  SvmModel model_;
};

}  // namespace radsentry
