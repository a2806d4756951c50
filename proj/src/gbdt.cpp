#include "radsentry/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "radsentry/error.hpp"
#include "radsentry/threads.hpp"

namespace radsentry {

void GbdtParams::validate() const {
  if (n_estimators < 1)
    throw InvalidArgument("gbdt: n_estimators must be >= 1");
  if (max_depth < 1) throw InvalidArgument("gbdt: max_depth must be >= 1");
  if (num_leaves < 2) throw InvalidArgument("gbdt: num_leaves must be >= 2");
  if (n_bins < 2 || n_bins > 255)
    throw InvalidArgument("gbdt: n_bins must be in [2, 255]");
  if (min_samples_leaf < 1)
    throw InvalidArgument("gbdt: min_samples_leaf must be >= 1");
  if (l2_reg < 0.0) throw InvalidArgument("gbdt: l2_reg must be >= 0");
  if (!(learning_rate > 0.0))
    throw InvalidArgument("gbdt: learning_rate must be > 0");
}

namespace {

// Equal-frequency bin edges per feature. Edges are upper-inclusive bin
// bounds, f32-cast so training-time bin routing and serve-time threshold
// comparison agree exactly.
struct FeatureBins {
  std::vector<std::vector<double>> edges;  // per feature, strictly increasing

  std::size_t bin_count(std::size_t f) const { return edges[f].size() + 1; }

  std::size_t bin_of(std::size_t f, double x) const {
    const auto& e = edges[f];
    return static_cast<std::size_t>(
        std::lower_bound(e.begin(), e.end(), x) - e.begin());
  }
};

FeatureBins build_bins(const FeatureMatrix& m, int n_bins, int threads) {
  FeatureBins bins;
  bins.edges.resize(m.n_cols);
  parallel_chunks(m.n_cols, 1, threads, [&](std::size_t, std::size_t begin,
                                            std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      std::vector<double> sorted = m.column(f);
      std::sort(sorted.begin(), sorted.end());
      std::vector<double>& edges = bins.edges[f];
      const std::size_t n = sorted.size();
      for (int b = 1; b < n_bins; ++b) {
        std::size_t r = static_cast<std::size_t>(
            (static_cast<std::uint64_t>(b) * n) / n_bins);
        if (r >= n) r = n - 1;
        double edge = static_cast<double>(static_cast<float>(sorted[r]));
        if (edges.empty() || edge > edges.back()) edges.push_back(edge);
      }
      // An edge at the column max leaves the top bin empty; such a split
      // candidate always fails the min-samples constraint, so it is inert.
    }
  });
  return bins;
}

struct BinStat {
  double g = 0.0;
  double h = 0.0;
  std::uint32_t count = 0;
};

struct SplitInfo {
  int feature = -1;
  int bin = -1;
  double gain = -std::numeric_limits<double>::infinity();
  double threshold = 0.0;
  std::size_t left_count = 0;
  double left_g = 0.0, left_h = 0.0;

  bool valid() const { return feature >= 0; }
};

double leaf_objective(double g, double h, double lambda) {
  return g * g / (h + lambda);
}

// Active leaf during growth: a node id plus its row range, stats and
// histogram.
struct LeafState {
  int node_id = -1;
  int depth = 0;
  std::size_t row_begin = 0, row_end = 0;
  double sum_g = 0.0, sum_h = 0.0;
  std::vector<BinStat> hist;  // flat: feature_offsets indexes into it
  SplitInfo best;
};

class TreeGrower {
 public:
  TreeGrower(const FeatureBins& bins, const std::vector<std::uint16_t>& binned,
             std::size_t n_rows, std::size_t n_features,
             const GbdtParams& params, int threads)
      : bins_(bins),
        binned_(binned),
        n_rows_(n_rows),
        n_features_(n_features),
        params_(params),
        threads_(threads) {
    feature_offsets_.resize(n_features + 1, 0);
    for (std::size_t f = 0; f < n_features; ++f)
      feature_offsets_[f + 1] = feature_offsets_[f] + bins_.bin_count(f);
    total_bins_ = feature_offsets_[n_features];
  }

  GbdtTree grow(std::span<const double> grad, std::span<const double> hess,
                std::vector<std::size_t>& row_order, int round,
                GbdtFitDiagnostics* diag,
                std::vector<std::pair<std::size_t, std::size_t>>& leaf_rows,
                std::vector<double>& leaf_values) {
    GbdtTree tree;
    tree.nodes.emplace_back();
    leaf_rows.clear();
    leaf_values.clear();

    std::vector<LeafState> active;
    {
      LeafState root;
      root.node_id = 0;
      root.depth = 0;
      root.row_begin = 0;
      root.row_end = n_rows_;
      root.hist.assign(total_bins_, BinStat{});
      build_histogram(row_order, 0, n_rows_, grad, hess, root.hist);
      root.sum_g = 0.0;
      root.sum_h = 0.0;
      for (std::size_t r = 0; r < n_rows_; ++r) {
        root.sum_g += grad[row_order[r]];
        root.sum_h += hess[row_order[r]];
      }
      root.best = find_best_split(root);
      active.push_back(std::move(root));
    }

    int n_leaves = 1;
    while (n_leaves < params_.num_leaves) {
      // Split the active leaf with the highest gain; ties go to the lowest
      // node id (active is in creation order).
      int pick = -1;
      for (std::size_t i = 0; i < active.size(); ++i) {
        if (!active[i].best.valid()) continue;
        if (pick < 0 || active[i].best.gain > active[pick].best.gain)
          pick = static_cast<int>(i);
      }
      if (pick < 0) break;

      if (diag && diag->record_candidates) {
        GbdtFitDiagnostics::GrowthStep step;
        for (const LeafState& leaf : active)
          enumerate_candidates(leaf, round, step.candidates);
        const LeafState& chosen = active[pick];
        step.chosen = {round, chosen.node_id, chosen.best.feature,
                       chosen.best.bin, chosen.best.gain};
        diag->steps.push_back(std::move(step));
      }

      LeafState leaf = std::move(active[pick]);
      active.erase(active.begin() + pick);
      split_leaf(tree, leaf, grad, hess, row_order, active);
      ++n_leaves;
    }

    // Finalize leaf values; f32-cast keeps serve == train.
    for (LeafState& leaf : active) {
      double value = -leaf.sum_g / (leaf.sum_h + params_.l2_reg) *
                     params_.learning_rate;
      value = static_cast<double>(static_cast<float>(value));
      tree.nodes[leaf.node_id].leaf_value = value;
      leaf_rows.emplace_back(leaf.row_begin, leaf.row_end);
      leaf_values.push_back(value);
    }
    return tree;
  }

 private:
  void build_histogram(const std::vector<std::size_t>& row_order,
                       std::size_t begin, std::size_t end,
                       std::span<const double> grad,
                       std::span<const double> hess,
                       std::vector<BinStat>& hist) const {
    parallel_chunks(n_features_, 1, threads_, [&](std::size_t, std::size_t fb,
                                                  std::size_t fe) {
      for (std::size_t f = fb; f < fe; ++f) {
        BinStat* base = hist.data() + feature_offsets_[f];
        const std::uint16_t* fbin = binned_.data() + f * n_rows_;
        for (std::size_t i = begin; i < end; ++i) {
          std::size_t r = row_order[i];
          BinStat& s = base[fbin[r]];
          s.g += grad[r];
          s.h += hess[r];
          ++s.count;
        }
      }
    });
  }

  SplitInfo find_best_split(const LeafState& leaf) const {
    SplitInfo best;
    if (leaf.depth >= params_.max_depth) return best;
    const std::size_t total =
        static_cast<std::size_t>(leaf.row_end - leaf.row_begin);
    if (total < 2 * static_cast<std::size_t>(params_.min_samples_leaf))
      return best;

    const double parent_obj =
        leaf_objective(leaf.sum_g, leaf.sum_h, params_.l2_reg);
    for (std::size_t f = 0; f < n_features_; ++f) {
      const auto& edges = bins_.edges[f];
      if (edges.empty()) continue;
      const BinStat* base = leaf.hist.data() + feature_offsets_[f];
      double gl = 0.0, hl = 0.0;
      std::size_t cl = 0;
      for (std::size_t b = 0; b < edges.size(); ++b) {
        gl += base[b].g;
        hl += base[b].h;
        cl += base[b].count;
        const std::size_t cr = total - cl;
        if (cl < static_cast<std::size_t>(params_.min_samples_leaf)) continue;
        if (cr < static_cast<std::size_t>(params_.min_samples_leaf)) break;
        const double gr = leaf.sum_g - gl;
        const double hr = leaf.sum_h - hl;
        const double gain = 0.5 * (leaf_objective(gl, hl, params_.l2_reg) +
                                   leaf_objective(gr, hr, params_.l2_reg) -
                                   parent_obj);
        if (gain > best.gain &&
            gain > 1e-12) {  // strict >: lowest feature, then lowest bin
          best.feature = static_cast<int>(f);
          best.bin = static_cast<int>(b);
          best.gain = gain;
          best.threshold = edges[b];
          best.left_count = cl;
          best.left_g = gl;
          best.left_h = hl;
        }
      }
    }
    return best;
  }

  void enumerate_candidates(const LeafState& leaf, int round,
                            std::vector<SplitCandidate>& out) const {
    if (leaf.depth >= params_.max_depth) return;
    const std::size_t total = leaf.row_end - leaf.row_begin;
    if (total < 2 * static_cast<std::size_t>(params_.min_samples_leaf)) return;
    const double parent_obj =
        leaf_objective(leaf.sum_g, leaf.sum_h, params_.l2_reg);
    for (std::size_t f = 0; f < n_features_; ++f) {
      const auto& edges = bins_.edges[f];
      const BinStat* base = leaf.hist.data() + feature_offsets_[f];
      double gl = 0.0, hl = 0.0;
      std::size_t cl = 0;
      for (std::size_t b = 0; b < edges.size(); ++b) {
        gl += base[b].g;
        hl += base[b].h;
        cl += base[b].count;
        const std::size_t cr = total - cl;
        if (cl < static_cast<std::size_t>(params_.min_samples_leaf)) continue;
        if (cr < static_cast<std::size_t>(params_.min_samples_leaf)) break;
        const double gr = leaf.sum_g - gl;
        const double hr = leaf.sum_h - hl;
        const double gain = 0.5 * (leaf_objective(gl, hl, params_.l2_reg) +
                                   leaf_objective(gr, hr, params_.l2_reg) -
                                   parent_obj);
        out.push_back({round, leaf.node_id, static_cast<int>(f),
                       static_cast<int>(b), gain});
      }
    }
  }

  void split_leaf(GbdtTree& tree, LeafState& leaf,
                  std::span<const double> grad, std::span<const double> hess,
                  std::vector<std::size_t>& row_order,
                  std::vector<LeafState>& active) {
    const SplitInfo& split = leaf.best;
    const std::size_t f = static_cast<std::size_t>(split.feature);
    const std::uint16_t* fbin = binned_.data() + f * n_rows_;

    // Stable partition: left rows (bin <= split.bin) first, order preserved.
    std::vector<std::size_t> buffer(leaf.row_end - leaf.row_begin);
    std::size_t nl = 0, nr = 0;
    const std::size_t count = leaf.row_end - leaf.row_begin;
    for (std::size_t i = leaf.row_begin; i < leaf.row_end; ++i) {
      std::size_t r = row_order[i];
      if (fbin[r] <= static_cast<std::size_t>(split.bin))
        row_order[leaf.row_begin + nl++] = r;
      else
        buffer[nr++] = r;
    }
    std::copy(buffer.begin(), buffer.begin() + nr,
              row_order.begin() + leaf.row_begin + nl);
    (void)count;

    const int left_id = static_cast<int>(tree.nodes.size());
    const int right_id = left_id + 1;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    GbdtNode& node = tree.nodes[leaf.node_id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.gain = split.gain;
    node.left = left_id;
    node.right = right_id;

    LeafState left, right;
    left.node_id = left_id;
    right.node_id = right_id;
    left.depth = right.depth = leaf.depth + 1;
    left.row_begin = leaf.row_begin;
    left.row_end = leaf.row_begin + nl;
    right.row_begin = left.row_end;
    right.row_end = leaf.row_end;
    left.sum_g = split.left_g;
    left.sum_h = split.left_h;
    right.sum_g = leaf.sum_g - split.left_g;
    right.sum_h = leaf.sum_h - split.left_h;

    // Scan the smaller child; derive the sibling by subtraction.
    const bool left_smaller = nl <= nr;
    LeafState& scan = left_smaller ? left : right;
    LeafState& derive = left_smaller ? right : left;
    scan.hist.assign(total_bins_, BinStat{});
    build_histogram(row_order, scan.row_begin, scan.row_end, grad, hess,
                    scan.hist);
    derive.hist = std::move(leaf.hist);
    for (std::size_t i = 0; i < total_bins_; ++i) {
      derive.hist[i].g -= scan.hist[i].g;
      derive.hist[i].h -= scan.hist[i].h;
      derive.hist[i].count -= scan.hist[i].count;
    }

    left.best = find_best_split(left);
    right.best = find_best_split(right);
    active.push_back(std::move(left));
    active.push_back(std::move(right));
  }

  const FeatureBins& bins_;
  const std::vector<std::uint16_t>& binned_;
  std::size_t n_rows_;
  std::size_t n_features_;
  GbdtParams params_;
  int threads_;
  std::vector<std::size_t> feature_offsets_;
  std::size_t total_bins_ = 0;
};

double mean_logistic_loss(std::span<const double> scores,
                          std::span<const std::uint8_t> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double z = scores[i];
    total += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) -
             z * static_cast<double>(labels[i]);
  }
  return total / static_cast<double>(scores.size());
}

}  // namespace

GradientBoostedEnsemble gbdt_fit(const FeatureMatrix& matrix,
                                 std::span<const std::uint8_t> labels,
                                 const GbdtParams& params,
                                 GbdtFitDiagnostics* diagnostics,
                                 int threads) {
  params.validate();
  if (labels.size() != matrix.n_rows)
    throw InvalidArgument("gbdt_fit: label count mismatch");
  if (matrix.n_rows < 2 * static_cast<std::size_t>(params.min_samples_leaf))
    throw InvalidArgument("gbdt_fit: need at least 2*min_samples_leaf rows");
  for (std::uint8_t y : labels)
    if (y > 1) throw InvalidArgument("gbdt_fit: labels must be binary");

  GradientBoostedEnsemble model;
  model.params = params;
  model.n_original_features = matrix.n_cols;
  model.retained_columns.resize(matrix.n_cols);
  std::iota(model.retained_columns.begin(), model.retained_columns.end(), 0);

  const std::size_t n = matrix.n_rows;
  double positive = 0.0;
  for (std::uint8_t y : labels) positive += y;
  double p = positive / static_cast<double>(n);
  const bool single_class = p <= 0.0 || p >= 1.0;
  p = std::clamp(p, 1e-12, 1.0 - 1e-12);
  model.base_score =
      static_cast<double>(static_cast<float>(std::log(p / (1.0 - p))));
  if (diagnostics) diagnostics->single_class = single_class;
  if (single_class) return model;  // constant model

  // Bin features once (feature-major layout for histogram locality).
  FeatureBins bins = build_bins(matrix, params.n_bins, threads);
  std::vector<std::uint16_t> binned(matrix.n_cols * n);
  parallel_chunks(matrix.n_cols, 1, threads, [&](std::size_t, std::size_t fb,
                                                 std::size_t fe) {
    for (std::size_t f = fb; f < fe; ++f)
      for (std::size_t r = 0; r < n; ++r)
        binned[f * n + r] =
            static_cast<std::uint16_t>(bins.bin_of(f, matrix.at(r, f)));
  });

  std::vector<double> scores(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<std::size_t> row_order(n);
  TreeGrower grower(bins, binned, n, matrix.n_cols, params, threads);

  std::vector<std::pair<std::size_t, std::size_t>> leaf_rows;
  std::vector<double> leaf_values;
  for (int round = 0; round < params.n_estimators; ++round) {
    for (std::size_t r = 0; r < n; ++r) {
      const double prob = sigmoid(scores[r]);
      grad[r] = prob - static_cast<double>(labels[r]);
      hess[r] = prob * (1.0 - prob);
    }
    std::iota(row_order.begin(), row_order.end(), 0);
    GbdtTree tree = grower.grow(grad, hess, row_order, round, diagnostics,
                                leaf_rows, leaf_values);
    for (std::size_t li = 0; li < leaf_rows.size(); ++li)
      for (std::size_t i = leaf_rows[li].first; i < leaf_rows[li].second; ++i)
        scores[row_order[i]] += leaf_values[li];
    model.trees.push_back(std::move(tree));
    if (diagnostics)
      diagnostics->train_loss.push_back(mean_logistic_loss(scores, labels));
  }
  return model;
}

std::vector<double> GradientBoostedEnsemble::predict_raw(
    const FeatureMatrix& matrix, int threads) const {
  // Full-width matrices go through the retained-column projection;
  // already-projected matrices (n_retained columns) are read directly.
  const std::size_t n_ret = n_retained();
  bool projected;
  if (matrix.n_cols == n_original_features) {
    projected = false;
  } else if (matrix.n_cols == n_ret) {
    projected = true;
  } else {
    std::size_t max_col = 0;
    for (std::size_t c : retained_columns) max_col = std::max(max_col, c);
    if (matrix.n_cols > max_col)
      projected = false;
    else
      throw InvalidArgument(
          "predict: matrix has " + std::to_string(matrix.n_cols) +
          " columns, model expects " + std::to_string(n_ret) +
          " (projected) or at least " + std::to_string(max_col + 1) +
          " (full)");
  }

  // Flattened traversal: 16-byte nodes with feature indices resolved to the
  // input column space, leaves turned into self-loops with a +inf threshold
  // and their values in a side array. Every cursor then advances
  // unconditionally for exactly max-depth steps, which keeps several tree
  // walks in flight per row. Thresholds and leaf values are f32-cast at fit
  // time, so this is bit-identical to a direct node-struct walk.
  struct FlatNode {
    std::int32_t feature;
    float threshold;
    std::int32_t left;
    std::int32_t right;
  };
  std::vector<FlatNode> flat;
  std::vector<float> leaf_value;
  std::vector<std::uint32_t> roots;
  roots.reserve(trees.size());
  int max_depth = 0;
  {
    std::vector<std::pair<int, int>> stack;  // node id, depth
    for (const GbdtTree& tree : trees) {
      const std::int32_t base = static_cast<std::int32_t>(flat.size());
      roots.push_back(static_cast<std::uint32_t>(base));
      for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const GbdtNode& nd = tree.nodes[i];
        FlatNode fn;
        if (nd.is_leaf()) {
          fn.feature = 0;
          fn.threshold = std::numeric_limits<float>::infinity();
          fn.left = fn.right = base + static_cast<std::int32_t>(i);
        } else {
          fn.feature = static_cast<std::int32_t>(
              projected ? static_cast<std::size_t>(nd.feature)
                        : retained_columns[nd.feature]);
          fn.threshold = static_cast<float>(nd.threshold);
          fn.left = base + nd.left;
          fn.right = base + nd.right;
        }
        flat.push_back(fn);
        leaf_value.push_back(static_cast<float>(nd.leaf_value));
      }
      stack.assign(1, {0, 0});
      while (!stack.empty()) {
        auto [id, depth] = stack.back();
        stack.pop_back();
        const GbdtNode& nd = tree.nodes[id];
        if (nd.is_leaf()) {
          max_depth = std::max(max_depth, depth);
        } else {
          stack.push_back({nd.left, depth + 1});
          stack.push_back({nd.right, depth + 1});
        }
      }
    }
  }

  std::vector<double> out(matrix.n_rows, 0.0);
  const FlatNode* nodes = flat.data();
  const float* leaves = leaf_value.data();
  const std::size_t n_trees = roots.size();
  parallel_chunks(matrix.n_rows, 4096, threads, [&](std::size_t,
                                                    std::size_t begin,
                                                    std::size_t end) {
    std::uint32_t cursor[8];
    for (std::size_t r = begin; r < end; ++r) {
      const double* row = matrix.values.data() + r * matrix.n_cols;
      double score = base_score;
      std::size_t t = 0;
      for (; t + 8 <= n_trees; t += 8) {
        for (int i = 0; i < 8; ++i) cursor[i] = roots[t + i];
        for (int step = 0; step < max_depth; ++step) {
          for (int i = 0; i < 8; ++i) {
            const FlatNode& nd = nodes[cursor[i]];
            cursor[i] = row[nd.feature] <=
                                static_cast<double>(nd.threshold)
                            ? nd.left
                            : nd.right;
          }
        }
        for (int i = 0; i < 8; ++i)
          score += static_cast<double>(leaves[cursor[i]]);
      }
      for (; t < n_trees; ++t) {
        std::uint32_t node = roots[t];
        for (int step = 0; step < max_depth; ++step) {
          const FlatNode& nd = nodes[node];
          node = row[nd.feature] <= static_cast<double>(nd.threshold)
                     ? nd.left
                     : nd.right;
        }
        score += static_cast<double>(leaves[node]);
      }
      out[r] = score;
    }
  });
  return out;
}

std::vector<double> GradientBoostedEnsemble::predict_proba(
    const FeatureMatrix& matrix, int threads) const {
  std::vector<double> raw = predict_raw(matrix, threads);
  for (double& v : raw) v = sigmoid(v);
  return raw;
}

std::vector<std::uint8_t> GradientBoostedEnsemble::predict_labels(
    const FeatureMatrix& matrix, int threads) const {
  std::vector<double> proba = predict_proba(matrix, threads);
  std::vector<std::uint8_t> labels(proba.size());
  for (std::size_t i = 0; i < proba.size(); ++i) labels[i] = proba[i] >= 0.5;
  return labels;
}

std::vector<double> GradientBoostedEnsemble::feature_importances() const {
  std::vector<double> imp(n_original_features, 0.0);
  for (const GbdtTree& tree : trees)
    for (const GbdtNode& node : tree.nodes)
      if (!node.is_leaf()) imp[retained_columns[node.feature]] += node.gain;
  return imp;
}

std::vector<double> gbdt_importances(const GradientBoostedEnsemble& model) {
  return model.feature_importances();
}

std::vector<double> normalize_importances(std::span<const double> raw) {
  double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<double> out(raw.begin(), raw.end());
  if (total > 0.0)
    for (double& v : out) v /= total;
  return out;
}

}  // namespace radsentry
