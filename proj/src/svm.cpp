#include <algorithm>
#include <cmath>
#include <numeric>

#include "radsentry/baselines.hpp"
#include "radsentry/error.hpp"
#include "radsentry/rng.hpp"

namespace radsentry {

namespace {

double rbf_kernel(const FeatureMatrix& a, std::size_t ra,
                  const FeatureMatrix& b, std::size_t rb, double gamma) {
  const double* x = a.values.data() + ra * a.n_cols;
  const double* y = b.values.data() + rb * b.n_cols;
  double s = 0.0;
  for (std::size_t c = 0; c < a.n_cols; ++c) {
    double d = x[c] - y[c];
    s += d * d;
  }
  return std::exp(-gamma * s);
}

double scale_gamma(const FeatureMatrix& m) {
  if (m.n_rows == 0 || m.n_cols == 0) return 1.0;
  double mean = 0.0;
  for (double v : m.values) mean += v;
  mean /= static_cast<double>(m.values.size());
  double var = 0.0;
  for (double v : m.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m.values.size());
  if (var <= 0.0) return 1.0;
  return 1.0 / (static_cast<double>(m.n_cols) * var);
}

SvmModel fit_linear(const FeatureMatrix& matrix,
                    std::span<const std::uint8_t> labels,
                    const SvmParams& params) {
  const std::size_t n = matrix.n_rows, d = matrix.n_cols;
  const double lambda = 1.0 / (params.C * static_cast<double>(n));

  std::vector<double> w(d, 0.0), w_avg(d, 0.0);
  double b = 0.0, b_avg = 0.0;
  std::size_t avg_count = 0;

  Rng rng(params.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  // Tail-averaged iterate: the first half of the schedule is burn-in.
  const std::size_t total_steps =
      static_cast<std::size_t>(params.epochs) * n;
  const std::size_t burn_in = total_steps / 2;

  std::size_t t = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = labels[idx] ? 1.0 : -1.0;
      const double* row = matrix.values.data() + idx * d;
      double margin = b;
      for (std::size_t c = 0; c < d; ++c) margin += w[c] * row[c];
      margin *= y;

      const double shrink = 1.0 - eta * lambda;
      for (std::size_t c = 0; c < d; ++c) w[c] *= shrink;
      if (margin < 1.0) {
        for (std::size_t c = 0; c < d; ++c) w[c] += eta * y * row[c];
        b += eta * y;
      }
      if (t > burn_in) {
        ++avg_count;
        const double f = 1.0 / static_cast<double>(avg_count);
        for (std::size_t c = 0; c < d; ++c) w_avg[c] += f * (w[c] - w_avg[c]);
        b_avg += f * (b - b_avg);
      }
    }
  }
  if (avg_count == 0) {
    w_avg = w;
    b_avg = b;
  }

  SvmModel model;
  model.kernel = SvmKernel::linear;
  model.weights = std::move(w_avg);
  model.bias = b_avg;
  return model;
}

// Platt-style SMO with a full error cache. Second-choice heuristics follow
// the classic pseudocode; the scan start offsets come from the seeded RNG so
// training stays deterministic.
class SmoSolver {
 public:
  SmoSolver(const FeatureMatrix& matrix, std::span<const std::uint8_t> labels,
            const SvmParams& params, double gamma)
      : m_(matrix),
        params_(params),
        gamma_(gamma),
        n_(matrix.n_rows),
        rng_(params.seed) {
    y_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) y_[i] = labels[i] ? 1.0 : -1.0;
    alpha_.assign(n_, 0.0);
    // f(x_i) = 0 initially, so E_i = -y_i.
    error_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) error_[i] = -y_[i];
  }

  void solve() {
    const std::size_t max_steps = 60 * n_ + 10000;
    bool examine_all = true;
    std::size_t changed = 0;
    while ((changed > 0 || examine_all) && steps_ < max_steps) {
      changed = 0;
      if (examine_all) {
        for (std::size_t i = 0; i < n_ && steps_ < max_steps; ++i)
          changed += examine(i);
      } else {
        for (std::size_t i = 0; i < n_ && steps_ < max_steps; ++i)
          if (alpha_[i] > 0.0 && alpha_[i] < params_.C) changed += examine(i);
      }
      if (examine_all)
        examine_all = false;
      else if (changed == 0)
        examine_all = true;
    }
  }

  SvmModel build_model() const {
    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n_; ++i)
      if (alpha_[i] > 0.0) sv.push_back(i);
    SvmModel model;
    model.kernel = SvmKernel::rbf;
    model.gamma = gamma_;
    model.bias = b_;
    model.support_vectors = m_.select_rows(sv);
    model.sv_coeff.resize(sv.size());
    for (std::size_t i = 0; i < sv.size(); ++i)
      model.sv_coeff[i] = alpha_[sv[i]] * y_[sv[i]];
    return model;
  }

 private:
  double kernel(std::size_t i, std::size_t j) const {
    return rbf_kernel(m_, i, m_, j, gamma_);
  }

  std::size_t examine(std::size_t i2) {
    const double y2 = y_[i2], a2 = alpha_[i2], e2 = error_[i2];
    const double r2 = e2 * y2;
    const bool violates = (r2 < -params_.tol && a2 < params_.C) ||
                          (r2 > params_.tol && a2 > 0.0);
    if (!violates) return 0;

    // 1) best |E1 - E2| among non-bound points
    std::size_t best = n_;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (alpha_[i] <= 0.0 || alpha_[i] >= params_.C) continue;
      double gap = std::abs(error_[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < n_ && take_step(best, i2)) return 1;

    // 2) non-bound points from a seeded start
    std::size_t start = static_cast<std::size_t>(rng_.uniform_index(n_));
    for (std::size_t k = 0; k < n_; ++k) {
      std::size_t i = (start + k) % n_;
      if (alpha_[i] <= 0.0 || alpha_[i] >= params_.C) continue;
      if (take_step(i, i2)) return 1;
    }
    // 3) the whole training set from a seeded start
    start = static_cast<std::size_t>(rng_.uniform_index(n_));
    for (std::size_t k = 0; k < n_; ++k) {
      std::size_t i = (start + k) % n_;
      if (take_step(i, i2)) return 1;
    }
    return 0;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double a1 = alpha_[i1], a2 = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double e1 = error_[i1], e2 = error_[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (s < 0.0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(params_.C, params_.C + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - params_.C);
      hi = std::min(params_.C, a1 + a2);
    }
    if (lo >= hi) return false;

    const double k11 = kernel(i1, i1), k12 = kernel(i1, i2),
                 k22 = kernel(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;
    if (eta <= 0.0) return false;  // degenerate direction, skip

    double a2_new = a2 + y2 * (e1 - e2) / eta;
    a2_new = std::clamp(a2_new, lo, hi);
    if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;
    const double a1_new = a1 + s * (a2 - a2_new);

    // Threshold update (Platt's b1/b2 rules).
    const double d1 = y1 * (a1_new - a1), d2 = y2 * (a2_new - a2);
    const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
    const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
    double b_new;
    if (a1_new > 0.0 && a1_new < params_.C)
      b_new = b1;
    else if (a2_new > 0.0 && a2_new < params_.C)
      b_new = b2;
    else
      b_new = 0.5 * (b1 + b2);
    const double db = b_new - b_;

    alpha_[i1] = a1_new;
    alpha_[i2] = a2_new;
    b_ = b_new;
    for (std::size_t i = 0; i < n_; ++i)
      error_[i] += d1 * kernel(i1, i) + d2 * kernel(i2, i) + db;
    ++steps_;
    return true;
  }

  const FeatureMatrix& m_;
  const SvmParams& params_;
  double gamma_;
  std::size_t n_;
  Rng rng_;
  std::vector<double> y_, alpha_, error_;
  double b_ = 0.0;
  std::size_t steps_ = 0;
};

}  // namespace

double hinge_objective(const FeatureMatrix& matrix,
                       std::span<const std::uint8_t> labels,
                       std::span<const double> weights, double bias, double C,
                       std::vector<double>* gradient) {
  const std::size_t n = matrix.n_rows, d = matrix.n_cols;
  const double lambda = 1.0 / (C * static_cast<double>(n));
  if (gradient) {
    gradient->assign(d + 1, 0.0);
    for (std::size_t c = 0; c < d; ++c) (*gradient)[c] = lambda * weights[c];
  }
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = matrix.values.data() + r * d;
    const double y = labels[r] ? 1.0 : -1.0;
    double z = bias;
    for (std::size_t c = 0; c < d; ++c) z += weights[c] * row[c];
    const double margin = y * z;
    if (margin < 1.0) {
      loss += 1.0 - margin;
      if (gradient) {
        const double f = -y / static_cast<double>(n);
        for (std::size_t c = 0; c < d; ++c) (*gradient)[c] += f * row[c];
        (*gradient)[d] += f;
      }
    }
  }
  loss /= static_cast<double>(n);
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  return 0.5 * lambda * reg + loss;
}

SvmModel svm_fit(const FeatureMatrix& matrix,
                 std::span<const std::uint8_t> labels,
                 const SvmParams& params) {
  if (!(params.C > 0.0)) throw InvalidArgument("svm: C must be > 0");
  if (labels.size() != matrix.n_rows)
    throw InvalidArgument("svm: label count mismatch");
  if (matrix.n_rows == 0) throw InvalidArgument("svm: empty matrix");

  if (params.kernel == SvmKernel::linear)
    return fit_linear(matrix, labels, params);

  if (matrix.n_rows > params.max_rows_rbf)
    throw InvalidArgument(
        "svm: rbf mode on " + std::to_string(matrix.n_rows) +
        " rows exceeds the " + std::to_string(params.max_rows_rbf) +
        " row limit (quadratic memory/time); use the linear kernel");

  const double gamma = params.gamma > 0.0 ? params.gamma : scale_gamma(matrix);
  SmoSolver solver(matrix, labels, params, gamma);
  solver.solve();
  return solver.build_model();
}

std::vector<double> SvmModel::decision(const FeatureMatrix& matrix) const {
  std::vector<double> out(matrix.n_rows, 0.0);
  if (kernel == SvmKernel::linear) {
    for (std::size_t r = 0; r < matrix.n_rows; ++r) {
      const double* row = matrix.values.data() + r * matrix.n_cols;
      double z = bias;
      for (std::size_t c = 0; c < matrix.n_cols; ++c) z += weights[c] * row[c];
      out[r] = z;
    }
    return out;
  }
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    double z = bias;
    for (std::size_t s = 0; s < support_vectors.n_rows; ++s)
      z += sv_coeff[s] * rbf_kernel(matrix, r, support_vectors, s, gamma);
    out[r] = z;
  }
  return out;
}

std::vector<std::uint8_t> SvmModel::predict(const FeatureMatrix& matrix) const {
  std::vector<double> z = decision(matrix);
  std::vector<std::uint8_t> labels(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) labels[i] = z[i] >= 0.0;
  return labels;
}

}  // namespace radsentry
