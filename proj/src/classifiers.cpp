#include "radsentry/classifiers.hpp"

#include <algorithm>
#include <numeric>

#include "radsentry/rng.hpp"

namespace radsentry {

void SvmClassifier::fit(const FeatureMatrix& m,
                        std::span<const std::uint8_t> y) {
  if (max_train_ > 0 && m.n_rows > max_train_ &&
      params_.kernel == SvmKernel::rbf) {
    std::vector<std::size_t> rows(m.n_rows);
    std::iota(rows.begin(), rows.end(), 0);
    Rng rng(seed_);
    rng.shuffle(rows);
    rows.resize(max_train_);
    std::sort(rows.begin(), rows.end());
    FeatureMatrix sub = m.select_rows(rows);
    std::vector<std::uint8_t> sub_y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) sub_y[i] = y[rows[i]];
    model_ = svm_fit(sub, sub_y, params_);
    return;
  }
  model_ = svm_fit(m, y, params_);
}

}  // namespace radsentry
