#include <algorithm>
#include <cmath>
#include <numeric>

#include "radsentry/baselines.hpp"
#include "radsentry/error.hpp"
#include "radsentry/rng.hpp"
#include "radsentry/threads.hpp"

namespace radsentry {

namespace {

double gini(std::size_t pos, std::size_t total) {
  if (total == 0) return 0.0;
  double p = static_cast<double>(pos) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

struct TreeBuilder {
  const FeatureMatrix& matrix;
  std::span<const std::uint8_t> labels;
  const ForestParams& params;
  Rng& rng;
  RfTree tree;

  std::size_t feature_count() const {
    if (params.max_features > 0)
      return std::min<std::size_t>(params.max_features, matrix.n_cols);
    if (params.max_features < 0) return matrix.n_cols;
    return static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(matrix.n_cols))));
  }

  // Draws m distinct feature indices (ascending) via partial Fisher-Yates.
  std::vector<std::size_t> sample_features(std::size_t m) {
    std::vector<std::size_t> all(matrix.n_cols);
    std::iota(all.begin(), all.end(), 0);
    if (m >= all.size()) return all;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t j =
          i + static_cast<std::size_t>(rng.uniform_index(all.size() - i));
      std::swap(all[i], all[j]);
    }
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
  }

  std::uint8_t majority(const std::vector<std::size_t>& rows) const {
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += labels[r];
    return pos * 2 > rows.size() ? 1 : 0;  // ties -> class 0
  }

  int build(std::vector<std::size_t>& rows, int depth) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    std::size_t pos = 0;
    for (std::size_t r : rows) pos += labels[r];
    const bool pure = pos == 0 || pos == rows.size();
    if (pure || depth >= params.max_depth ||
        rows.size() < static_cast<std::size_t>(params.min_samples_split)) {
      tree.nodes[node_id].label = majority(rows);
      return node_id;
    }

    // Best Gini split over a random feature subset; candidate thresholds
    // are midpoints between consecutive distinct values.
    const double parent = gini(pos, rows.size());
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, std::uint8_t>> sorted(rows.size());
    for (std::size_t f : sample_features(feature_count())) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        sorted[i] = {matrix.at(rows[i], f), labels[rows[i]]};
      std::sort(sorted.begin(), sorted.end());

      std::size_t left_pos = 0;
      for (std::size_t i = 1; i < sorted.size(); ++i) {
        left_pos += sorted[i - 1].second;
        if (sorted[i].first == sorted[i - 1].first) continue;
        const std::size_t nl = i, nr = sorted.size() - i;
        const double weighted =
            (static_cast<double>(nl) * gini(left_pos, nl) +
             static_cast<double>(nr) * gini(pos - left_pos, nr)) /
            static_cast<double>(sorted.size());
        const double gain = parent - weighted;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (sorted[i - 1].first + sorted[i].first);
        }
      }
    }

    if (best_feature < 0) {
      tree.nodes[node_id].label = majority(rows);
      return node_id;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      if (matrix.at(r, static_cast<std::size_t>(best_feature)) <=
          best_threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    if (left_rows.empty() || right_rows.empty()) {
      tree.nodes[node_id].label = majority(rows);
      return node_id;
    }
    rows.clear();
    rows.shrink_to_fit();

    const int left_id = build(left_rows, depth + 1);
    const int right_id = build(right_rows, depth + 1);
    tree.nodes[node_id].feature = best_feature;
    tree.nodes[node_id].threshold = best_threshold;
    tree.nodes[node_id].left = left_id;
    tree.nodes[node_id].right = right_id;
    return node_id;
  }
};

std::uint8_t tree_predict(const RfTree& tree, const double* row) {
  int node = 0;
  while (!tree.nodes[node].is_leaf()) {
    const RfNode& nd = tree.nodes[node];
    node = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return tree.nodes[node].label;
}

}  // namespace

ForestModel rf_fit(const FeatureMatrix& matrix,
                   std::span<const std::uint8_t> labels,
                   const ForestParams& params, int threads) {
  if (params.n_trees < 1) throw InvalidArgument("rf: n_trees must be >= 1");
  if (labels.size() != matrix.n_rows)
    throw InvalidArgument("rf: label count mismatch");
  if (matrix.n_rows == 0) throw InvalidArgument("rf: empty matrix");

  ForestModel model;
  model.params = params;
  model.n_features = matrix.n_cols;
  model.trees.resize(params.n_trees);

  parallel_chunks(params.n_trees, 1, threads, [&](std::size_t, std::size_t tb,
                                                  std::size_t te) {
    for (std::size_t t = tb; t < te; ++t) {
      Rng rng(Rng::derive(params.seed, t));
      std::vector<std::size_t> rows(matrix.n_rows);
      if (params.bootstrap) {
        for (std::size_t i = 0; i < rows.size(); ++i)
          rows[i] = static_cast<std::size_t>(rng.uniform_index(matrix.n_rows));
      } else {
        std::iota(rows.begin(), rows.end(), 0);
      }
      TreeBuilder builder{matrix, labels, params, rng, {}};
      builder.build(rows, 0);
      model.trees[t] = std::move(builder.tree);
    }
  });
  return model;
}

std::vector<double> ForestModel::predict_proba(const FeatureMatrix& matrix,
                                               int threads) const {
  std::vector<double> out(matrix.n_rows, 0.0);
  parallel_chunks(matrix.n_rows, 4096, threads, [&](std::size_t,
                                                    std::size_t begin,
                                                    std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const double* row = matrix.values.data() + r * matrix.n_cols;
      std::size_t votes = 0;
      for (const RfTree& tree : trees) votes += tree_predict(tree, row);
      out[r] = static_cast<double>(votes) / static_cast<double>(trees.size());
    }
  });
  return out;
}

std::vector<std::uint8_t> ForestModel::predict(const FeatureMatrix& matrix,
                                               int threads) const {
  std::vector<double> proba = predict_proba(matrix, threads);
  std::vector<std::uint8_t> labels(proba.size());
  for (std::size_t i = 0; i < proba.size(); ++i)
    labels[i] = proba[i] > 0.5;  // exact half -> class 0
  return labels;
}

}  // namespace radsentry
