#include <cmath>

#include "radsentry/baselines.hpp"
#include "radsentry/error.hpp"
#include "radsentry/gbdt.hpp"  // sigmoid

namespace radsentry {

double logreg_objective(const FeatureMatrix& matrix,
                        std::span<const std::uint8_t> labels,
                        std::span<const double> weights, double bias,
                        double l2_reg, std::vector<double>* gradient) {
  const std::size_t n = matrix.n_rows, d = matrix.n_cols;
  if (gradient) gradient->assign(d + 1, 0.0);

  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = matrix.values.data() + r * d;
    double z = bias;
    for (std::size_t c = 0; c < d; ++c) z += weights[c] * row[c];
    const double y = static_cast<double>(labels[r]);
    loss += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - z * y;
    if (gradient) {
      const double residual = sigmoid(z) - y;
      for (std::size_t c = 0; c < d; ++c) (*gradient)[c] += residual * row[c];
      (*gradient)[d] += residual;
    }
  }
  loss /= static_cast<double>(n);
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  loss += 0.5 * l2_reg * reg;
  if (gradient) {
    for (std::size_t c = 0; c < d; ++c) {
      (*gradient)[c] /= static_cast<double>(n);
      (*gradient)[c] += l2_reg * weights[c];
    }
    (*gradient)[d] /= static_cast<double>(n);
  }
  return loss;
}

LinearModel logreg_fit(const FeatureMatrix& matrix,
                       std::span<const std::uint8_t> labels,
                       const LogRegParams& params) {
  if (!(params.learning_rate > 0.0))
    throw InvalidArgument("logreg: learning_rate must be > 0");
  if (labels.size() != matrix.n_rows)
    throw InvalidArgument("logreg: label count mismatch");
  if (matrix.n_rows == 0) throw InvalidArgument("logreg: empty matrix");

  LinearModel model;
  model.weights.assign(matrix.n_cols, 0.0);
  model.bias = 0.0;

  std::vector<double> grad;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    logreg_objective(matrix, labels, model.weights, model.bias, params.l2_reg,
                     &grad);
    double norm2 = 0.0;
    for (double g : grad) norm2 += g * g;
    if (std::sqrt(norm2) < params.tolerance) break;
    for (std::size_t c = 0; c < matrix.n_cols; ++c)
      model.weights[c] -= params.learning_rate * grad[c];
    model.bias -= params.learning_rate * grad[matrix.n_cols];
  }
  return model;
}

std::vector<double> LinearModel::decision(const FeatureMatrix& matrix) const {
  std::vector<double> out(matrix.n_rows, 0.0);
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    const double* row = matrix.values.data() + r * matrix.n_cols;
    double z = bias;
    for (std::size_t c = 0; c < matrix.n_cols; ++c) z += weights[c] * row[c];
    out[r] = z;
  }
  return out;
}

std::vector<double> LinearModel::predict_proba(
    const FeatureMatrix& matrix) const {
  std::vector<double> z = decision(matrix);
  for (double& v : z) v = sigmoid(v);
  return z;
}

std::vector<std::uint8_t> LinearModel::predict(
    const FeatureMatrix& matrix) const {
  std::vector<double> z = decision(matrix);
  std::vector<std::uint8_t> labels(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) labels[i] = z[i] >= 0.0;
  return labels;
}

}  // namespace radsentry
