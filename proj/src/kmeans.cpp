#include "radsentry/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "radsentry/error.hpp"
#include "radsentry/rng.hpp"
#include "radsentry/threads.hpp"

namespace radsentry {

namespace {

constexpr std::size_t kChunk = 2048;

double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

// k-means++ seeding: sequential RNG draws, D^2-weighted by prefix walk.
FeatureMatrix kmeanspp_init(const FeatureMatrix& m, std::size_t k, Rng& rng) {
  const std::size_t n = m.n_rows, d = m.n_cols;
  FeatureMatrix centroids(k, d);
  centroids.column_names = m.column_names;

  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  std::size_t first = static_cast<std::size_t>(rng.uniform_index(n));
  for (std::size_t c = 0; c < d; ++c) centroids.at(0, c) = m.at(first, c);

  for (std::size_t centre = 1; centre < k; ++centre) {
    const double* prev = centroids.values.data() + (centre - 1) * d;
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      dist2[r] = std::min(dist2[r], sq_dist(m.values.data() + r * d, prev, d));
      total += dist2[r];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t r = 0; r < n; ++r) {
        acc += dist2[r];
        if (acc > target) {
          pick = r;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.uniform_index(n));
    }
    for (std::size_t c = 0; c < d; ++c) centroids.at(centre, c) = m.at(pick, c);
  }
  return centroids;
}

struct LloydResult {
  FeatureMatrix centroids;
  std::vector<std::uint32_t> assignments;
  double inertia = 0.0;
  std::vector<double> history;
};

// One full Lloyd run from the given initial centroids.
LloydResult lloyd(const FeatureMatrix& m, FeatureMatrix centroids,
                  const KMeansOptions& opt) {
  const std::size_t n = m.n_rows, d = m.n_cols, k = centroids.n_rows;
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;

  std::vector<std::uint32_t> assign(n, 0);
  std::vector<double> chunk_inertia(n_chunks);
  // Per-chunk accumulators merged in chunk order so results are identical
  // for any thread count.
  std::vector<std::vector<double>> chunk_sums(n_chunks);
  std::vector<std::vector<std::size_t>> chunk_counts(n_chunks);

  auto assign_pass = [&](bool accumulate) {
    parallel_chunks(n, kChunk, opt.threads, [&](std::size_t ci,
                                                std::size_t begin,
                                                std::size_t end) {
      double local_inertia = 0.0;
      std::vector<double>* sums = nullptr;
      std::vector<std::size_t>* counts = nullptr;
      if (accumulate) {
        chunk_sums[ci].assign(k * d, 0.0);
        chunk_counts[ci].assign(k, 0);
        sums = &chunk_sums[ci];
        counts = &chunk_counts[ci];
      }
      for (std::size_t r = begin; r < end; ++r) {
        const double* row = m.values.data() + r * d;
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_c = 0;
        for (std::size_t c = 0; c < k; ++c) {
          double dd = sq_dist(row, centroids.values.data() + c * d, d);
          if (dd < best) {
            best = dd;
            best_c = static_cast<std::uint32_t>(c);
          }
        }
        assign[r] = best_c;
        local_inertia += best;
        if (accumulate) {
          double* s = sums->data() + best_c * d;
          for (std::size_t c = 0; c < d; ++c) s[c] += row[c];
          ++(*counts)[best_c];
        }
      }
      chunk_inertia[ci] = local_inertia;
    });
    double inertia = 0.0;
    for (std::size_t ci = 0; ci < n_chunks; ++ci) inertia += chunk_inertia[ci];
    return inertia;
  };

  LloydResult result;
  double prev_inertia = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < opt.max_iters; ++iter) {
    assign_pass(true);

    // Merge per-chunk sums in chunk order.
    std::vector<double> sums(k * d, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t ci = 0; ci < n_chunks; ++ci) {
      for (std::size_t i = 0; i < k * d; ++i) sums[i] += chunk_sums[ci][i];
      for (std::size_t c = 0; c < k; ++c) counts[c] += chunk_counts[ci][c];
    }

    double max_shift2 = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      double shift2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        double nv = sums[c * d + j] / static_cast<double>(counts[c]);
        double diff = nv - centroids.at(c, j);
        shift2 += diff * diff;
        centroids.at(c, j) = nv;
      }
      max_shift2 = std::max(max_shift2, shift2);
    }

    // Reseed empty clusters to the point farthest from its own centroid.
    std::vector<bool> used(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      double far_d = -1.0;
      std::size_t far_r = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (used[r]) continue;
        double dd = sq_dist(m.values.data() + r * d,
                            centroids.values.data() + assign[r] * d, d);
        if (dd > far_d) {
          far_d = dd;
          far_r = r;
        }
      }
      for (std::size_t j = 0; j < d; ++j)
        centroids.at(c, j) = m.at(far_r, j);
      assign[far_r] = static_cast<std::uint32_t>(c);
      used[far_r] = true;
      max_shift2 = std::numeric_limits<double>::infinity();
    }

    // Inertia under the updated centroids and a fresh assignment; this is
    // the non-increasing Lloyd objective.
    double inertia = assign_pass(false);
    result.history.push_back(inertia);
    bool converged = max_shift2 < opt.tol * opt.tol ||
                     (std::isfinite(prev_inertia) && inertia == prev_inertia);
    prev_inertia = inertia;
    if (converged) break;
  }

  result.inertia = assign_pass(false);
  result.centroids = std::move(centroids);
  result.assignments = std::move(assign);
  return result;
}

}  // namespace

double squared_distance(const FeatureMatrix& a, std::size_t row_a,
                        const FeatureMatrix& b, std::size_t row_b) {
  return sq_dist(a.values.data() + row_a * a.n_cols,
                 b.values.data() + row_b * b.n_cols, a.n_cols);
}

ClusterModel kmeans_fit(const FeatureMatrix& matrix, std::size_t k,
                        std::uint64_t seed, const KMeansOptions& options) {
  if (k == 0) throw InvalidArgument("kmeans_fit: k must be >= 1");
  if (k > matrix.n_rows)
    throw InvalidArgument("kmeans_fit: k exceeds row count (" +
                          std::to_string(k) + " > " +
                          std::to_string(matrix.n_rows) + ")");

  LloydResult best;
  bool have = false;
  const int restarts = std::max(1, options.restarts);
  for (int restart = 0; restart < restarts; ++restart) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(restart)));
    LloydResult run = lloyd(matrix, kmeanspp_init(matrix, k, rng), options);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }

  ClusterModel model;
  model.k = k;
  model.centroids = std::move(best.centroids);
  model.assignments = std::move(best.assignments);
  model.inertia = best.inertia;
  model.seed = seed;
  model.inertia_history = std::move(best.history);
  return model;
}

}  // namespace radsentry
