#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "radsentry/matrix.hpp"

namespace radsentry {

// ---------------------------------------------------------------- random forest

struct ForestParams {
  int n_trees = 100;
  int max_depth = 12;
  // 0 -> ceil(sqrt(n_cols)) features per split, -1 -> all features.
  int max_features = 0;
  bool bootstrap = true;
  int min_samples_split = 2;
  std::uint64_t seed = 0;
};

struct RfNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::uint8_t label = 0;  // majority class at leaves

  bool is_leaf() const { return left < 0; }
};

struct RfTree {
  std::vector<RfNode> nodes;
};

class ForestModel {
 public:
  std::vector<RfTree> trees;
  ForestParams params;
  std::size_t n_features = 0;

  // Majority vote across trees; ties go to class 0.
  std::vector<std::uint8_t> predict(const FeatureMatrix& matrix,
                                    int threads = 1) const;
  // Fraction of trees voting 1.
  std::vector<double> predict_proba(const FeatureMatrix& matrix,
                                    int threads = 1) const;
};

// Gini-impurity trees on bootstrap samples with a random feature subset per
// node. Per-tree seeds derive from (seed, tree_index), so training is
// deterministic and thread-count independent.
ForestModel rf_fit(const FeatureMatrix& matrix,
                   std::span<const std::uint8_t> labels,
                   const ForestParams& params, int threads = 1);

// ---------------------------------------------------------- logistic regression

struct LogRegParams {
  double learning_rate = 0.1;
  int epochs = 1000;
  double l2_reg = 1e-4;  // applied to weights, not the intercept
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
};

class LinearModel {
 public:
  std::vector<double> weights;
  double bias = 0.0;

  std::vector<double> decision(const FeatureMatrix& matrix) const;
  std::vector<double> predict_proba(const FeatureMatrix& matrix) const;
  std::vector<std::uint8_t> predict(const FeatureMatrix& matrix) const;
};

// Full-batch gradient descent on L2-regularized logistic loss from a zero
// init; stops when the gradient norm drops below tolerance.
LinearModel logreg_fit(const FeatureMatrix& matrix,
                       std::span<const std::uint8_t> labels,
                       const LogRegParams& params);

// Mean logistic loss plus L2 term, and its gradient (weights..., bias).
// Exposed for finite-difference verification.
double logreg_objective(const FeatureMatrix& matrix,
                        std::span<const std::uint8_t> labels,
                        std::span<const double> weights, double bias,
                        double l2_reg, std::vector<double>* gradient);

// ------------------------------------------------------------------------- svm

enum class SvmKernel { linear, rbf };

struct SvmParams {
  double C = 1.0;
  SvmKernel kernel = SvmKernel::rbf;
  double gamma = 0.0;  // 0 -> 1 / (n_cols * var(X))
  int epochs = 20;     // linear mode: Pegasos passes over the data
  double tol = 1e-3;   // rbf mode: KKT tolerance
  std::uint64_t seed = 0;
  std::size_t max_rows_rbf = 20000;
};

class SvmModel {
 public:
  SvmKernel kernel = SvmKernel::linear;
  // linear
  std::vector<double> weights;
  double bias = 0.0;
  // rbf
  FeatureMatrix support_vectors;
  std::vector<double> sv_coeff;  // alpha_i * y_i
  double gamma = 0.0;

  std::size_t n_support() const { return support_vectors.n_rows; }

  std::vector<double> decision(const FeatureMatrix& matrix) const;
  std::vector<std::uint8_t> predict(const FeatureMatrix& matrix) const;
};

// linear: primal sub-gradient descent on hinge loss + L2 (Pegasos-style
// 1/(lambda t) schedule). rbf: SMO-style dual optimization retaining the
// support vectors. rbf mode refuses more than max_rows_rbf rows.
SvmModel svm_fit(const FeatureMatrix& matrix,
                 std::span<const std::uint8_t> labels,
                 const SvmParams& params);

// Full-batch hinge objective 1/(2 C n) |w|^2 + mean hinge, with its
// sub-gradient. Exposed for finite-difference verification.
double hinge_objective(const FeatureMatrix& matrix,
                       std::span<const std::uint8_t> labels,
                       std::span<const double> weights, double bias, double C,
                       std::vector<double>* gradient);

}  // namespace radsentry
