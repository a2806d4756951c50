#pragma once

#include <cstdint>
#include <vector>

#include "radsentry/matrix.hpp"

namespace radsentry {

struct ClusterModel {
  std::size_t k = 0;
  FeatureMatrix centroids;  // k x n_cols
  std::vector<std::uint32_t> assignments;
  double inertia = 0.0;
  std::uint64_t seed = 0;
  // Inertia after each Lloyd iteration of the winning restart; non-increasing.
  std::vector<double> inertia_history;
};

struct KMeansOptions {
  std::size_t max_iters = 300;
  double tol = 1e-4;  // stop when the max centroid shift drops below this
  int restarts = 1;
  int threads = 1;
};

// Lloyd's algorithm with k-means++ initialization. Ties in the nearest
// centroid go to the lowest index. An empty cluster is reseeded to the point
// farthest from its assigned centroid. Deterministic for a fixed seed and
// any thread count.
ClusterModel kmeans_fit(const FeatureMatrix& matrix, std::size_t k,
                        std::uint64_t seed, const KMeansOptions& options = {});

// Squared Euclidean distance between a matrix row and a centroid row.
double squared_distance(const FeatureMatrix& a, std::size_t row_a,
                        const FeatureMatrix& b, std::size_t row_b);

}  // namespace radsentry
