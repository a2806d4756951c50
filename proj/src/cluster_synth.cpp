#include "radsentry/cluster_synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "radsentry/csv.hpp"
#include "radsentry/error.hpp"
#include "radsentry/rng.hpp"
#include "radsentry/threads.hpp"

namespace radsentry {

namespace {

// Quantile by linear interpolation on the sorted copy.
double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

std::vector<std::uint8_t> flag_clusters(const std::vector<double>& means,
                                        const AnomalyRules& rules) {
  const std::size_t k = means.size();
  std::vector<std::uint8_t> flag(k, 0);

  // Order cluster ids by mean, ascending.
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (means[a] != means[b]) return means[a] < means[b];
    return a < b;
  });

  // Flat-zero clusters.
  std::size_t pos = 0;
  while (pos < k && means[order[pos]] <= rules.near_zero_absolute) {
    flag[order[pos]] = 1;
    ++pos;
  }
  // Near-zero: smallest remaining mean below ratio x the next smallest.
  while (pos + 1 < k &&
         means[order[pos]] < rules.near_zero_ratio * means[order[pos + 1]]) {
    flag[order[pos]] = 1;
    ++pos;
  }

  // High outliers among the remaining clusters: walk down from the top and
  // flag everything above the first gap of high_outlier_ratio.
  std::vector<std::size_t> rest(order.begin() + pos, order.end());
  std::reverse(rest.begin(), rest.end());  // descending means
  for (std::size_t p = 1; p < rest.size(); ++p) {
    if (means[rest[p - 1]] > rules.high_outlier_ratio * means[rest[p]]) {
      for (std::size_t i = 0; i < p; ++i) flag[rest[i]] = 1;
      break;
    }
  }
  return flag;
}

}  // namespace

LabeledDataset label_anomalies(const FeatureMatrix& matrix,
                               std::span<const double> raw_values,
                               const ClusterModel& clusters,
                               const AnomalyRules& rules,
                               AnomalyLabelReport* report) {
  if (clusters.assignments.size() != matrix.n_rows)
    throw InvalidArgument("label_anomalies: cluster model does not match matrix");
  if (raw_values.size() != matrix.n_rows)
    throw InvalidArgument("label_anomalies: raw value count mismatch");

  const std::size_t k = clusters.k;
  std::vector<double> sums(k, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    sums[clusters.assignments[r]] += raw_values[r];
    ++counts[clusters.assignments[r]];
  }
  std::vector<double> means(k, 0.0);
  for (std::size_t c = 0; c < k; ++c)
    means[c] = counts[c] ? sums[c] / static_cast<double>(counts[c]) : 0.0;

  std::vector<std::uint8_t> flag = flag_clusters(means, rules);
  if (std::all_of(flag.begin(), flag.end(),
                  [](std::uint8_t f) { return f != 0; }))
    throw InvalidArgument(
        "label_anomalies: rules flag every cluster; thresholds degenerate");

  LabeledDataset out;
  out.matrix = matrix;
  out.labels.resize(matrix.n_rows, 0);
  out.provenance.assign(matrix.n_rows, 0);
  std::size_t flagged_rows = 0;
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    if (flag[clusters.assignments[r]]) {
      out.labels[r] = 1;
      ++flagged_rows;
    }
  }
  if (report) {
    report->cluster_means = std::move(means);
    report->cluster_flag = std::move(flag);
    report->n_flagged_rows = flagged_rows;
  }
  return out;
}

ClusterSearchResult search_cluster_count(const FeatureMatrix& scaled,
                                         std::span<const double> raw_values,
                                         const AnomalyRules& rules,
                                         const ClusterSearchOptions& options) {
  if (options.k_min > options.k_max)
    throw InvalidArgument("search_cluster_count: k_min > k_max");
  if (scaled.n_rows == 0)
    throw InvalidArgument("search_cluster_count: empty matrix");

  // Row-wise suspicion from raw-value thresholds. The low threshold hangs
  // off a low quantile of the strictly positive values, the high threshold
  // off a high quantile of all values.
  std::vector<double> positives;
  for (double v : raw_values)
    if (v > rules.near_zero_absolute) positives.push_back(v);
  const double low_ref = quantile(positives, rules.low_quantile);
  const double high_ref = quantile(
      std::vector<double>(raw_values.begin(), raw_values.end()),
      rules.high_quantile);
  const double low_thr = rules.near_zero_ratio * low_ref;
  const double high_thr = rules.high_outlier_ratio * high_ref;

  std::vector<std::uint8_t> suspicious(scaled.n_rows, 0);
  for (std::size_t r = 0; r < scaled.n_rows; ++r)
    suspicious[r] = raw_values[r] <= rules.near_zero_absolute ||
                    raw_values[r] < low_thr || raw_values[r] > high_thr;

  // Candidate cluster counts, uniform without replacement.
  const std::size_t k_cap = std::min(options.k_max, scaled.n_rows);
  const std::size_t k_lo = std::min(options.k_min, k_cap);
  std::vector<std::size_t> candidates(k_cap - k_lo + 1);
  std::iota(candidates.begin(), candidates.end(), k_lo);
  Rng rng(options.seed);
  rng.shuffle(candidates);
  if (options.n_trials < candidates.size())
    candidates.resize(std::max<std::size_t>(1, options.n_trials));
  std::sort(candidates.begin(), candidates.end());

  // Ascending k: the first candidate meeting the purity criterion is the
  // smallest, so the search can stop there. Otherwise keep the best score.
  ClusterSearchResult result;
  for (std::size_t k : candidates) {
    ClusterModel model =
        kmeans_fit(scaled, k, Rng::derive(options.seed, k), options.kmeans);

    std::vector<std::size_t> cluster_total(k, 0), cluster_susp(k, 0);
    for (std::size_t r = 0; r < scaled.n_rows; ++r) {
      ++cluster_total[model.assignments[r]];
      if (suspicious[r]) ++cluster_susp[model.assignments[r]];
    }
    std::size_t touched_rows = 0, suspicious_rows = 0;
    bool all_pure = true;
    for (std::size_t c = 0; c < k; ++c) {
      if (cluster_susp[c] == 0) continue;
      touched_rows += cluster_total[c];
      suspicious_rows += cluster_susp[c];
      double purity = static_cast<double>(cluster_susp[c]) /
                      static_cast<double>(cluster_total[c]);
      if (purity < rules.purity) all_pure = false;
    }
    double score = 0.0;
    if (suspicious_rows > 0)
      score = all_pure ? 1.0
                       : static_cast<double>(suspicious_rows) /
                             static_cast<double>(touched_rows);
    result.trials.push_back({k, score});

    if (result.trials.size() == 1 || score > result.score) {
      result.k = k;
      result.score = score;
      result.model = std::move(model);
    }
    if (score >= 1.0) {
      result.criterion_met = true;
      break;
    }
  }
  return result;
}

FeatureMatrix smote_oversample(const FeatureMatrix& minority_rows,
                               const SmoteConfig& config,
                               SmoteReport* report) {
  const std::size_t m = minority_rows.n_rows, d = minority_rows.n_cols;
  if (config.n_synthetic > 0 && m < 2)
    throw InvalidArgument(
        "smote_oversample: need at least 2 minority rows, have " +
        std::to_string(m));
  if (config.k_neighbors < 1)
    throw InvalidArgument("smote_oversample: k_neighbors must be >= 1");

  FeatureMatrix out(config.n_synthetic, d);
  out.column_names = minority_rows.column_names;
  if (config.n_synthetic == 0) {
    if (report) *report = {0, false};
    return out;
  }

  std::size_t k = config.k_neighbors;
  bool clamped = false;
  if (k >= m) {
    k = m - 1;
    clamped = true;
  }
  if (report) *report = {k, clamped};

  // Brute-force k nearest minority neighbours per row (ties by index).
  std::vector<std::size_t> neighbors(m * k);
  parallel_chunks(m, 256, config.threads, [&](std::size_t, std::size_t begin,
                                              std::size_t end) {
    std::vector<std::pair<double, std::size_t>> dists(m - 1);
    for (std::size_t i = begin; i < end; ++i) {
      std::size_t w = 0;
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        dists[w++] = {squared_distance(minority_rows, i, minority_rows, j), j};
      }
      std::partial_sort(dists.begin(), dists.begin() + k, dists.end());
      for (std::size_t t = 0; t < k; ++t) neighbors[i * k + t] = dists[t].second;
    }
  });

  Rng rng(config.seed);
  for (std::size_t s = 0; s < config.n_synthetic; ++s) {
    std::size_t base = static_cast<std::size_t>(rng.uniform_index(m));
    std::size_t nn = neighbors[base * k +
                               static_cast<std::size_t>(rng.uniform_index(k))];
    double lambda = rng.uniform();
    for (std::size_t c = 0; c < d; ++c) {
      double a = minority_rows.at(base, c);
      double b = minority_rows.at(nn, c);
      out.at(s, c) = a + lambda * (b - a);
    }
  }
  return out;
}

LabeledDataset build_attack_dataset(const LabeledDataset& labeled,
                                    const SmoteConfig& smote,
                                    const NoiseConfig& noise,
                                    std::uint64_t shuffle_seed,
                                    bool noise_synthetic_only) {
  // Gather minority (label 1) rows.
  std::vector<std::size_t> minority_idx;
  for (std::size_t r = 0; r < labeled.matrix.n_rows; ++r)
    if (labeled.labels[r]) minority_idx.push_back(r);

  FeatureMatrix synthetic;
  if (smote.n_synthetic > 0) {
    if (minority_idx.size() < 2)
      throw InvalidArgument(
          "build_attack_dataset: need at least 2 anomaly rows for SMOTE");
    FeatureMatrix minority = labeled.matrix.select_rows(minority_idx);
    synthetic = smote_oversample(minority, smote);
  } else {
    synthetic = FeatureMatrix(0, labeled.matrix.n_cols);
    synthetic.column_names = labeled.matrix.column_names;
  }

  LabeledDataset out;
  out.matrix = labeled.matrix;
  out.matrix.append_rows(synthetic);
  out.labels = labeled.labels;
  out.labels.insert(out.labels.end(), synthetic.n_rows, 1);
  out.provenance = labeled.provenance;
  out.provenance.resize(labeled.matrix.n_rows, 0);
  out.provenance.insert(out.provenance.end(), synthetic.n_rows, 1);

  if (noise_synthetic_only) {
    out.matrix = inject_noise(out.matrix, noise, &out.provenance);
  } else {
    out.matrix = inject_noise(out.matrix, noise);
  }

  // Seeded shuffle applied consistently to rows, labels and provenance.
  std::vector<std::size_t> perm(out.matrix.n_rows);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(shuffle_seed);
  rng.shuffle(perm);
  FeatureMatrix shuffled = out.matrix.select_rows(perm);
  std::vector<std::uint8_t> labels(perm.size()), prov(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    labels[i] = out.labels[perm[i]];
    prov[i] = out.provenance[perm[i]];
  }
  out.matrix = std::move(shuffled);
  out.labels = std::move(labels);
  out.provenance = std::move(prov);
  return out;
}

void write_labels_csv(std::ostream& out, const LabeledDataset& dataset) {
  out << "label,provenance\n";
  for (std::size_t r = 0; r < dataset.labels.size(); ++r)
    out << int(dataset.labels[r]) << ','
        << (dataset.provenance[r] ? "synthetic" : "original") << '\n';
}

void read_labels_csv(std::istream& in, LabeledDataset& dataset) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields) || fields.size() != 2)
    throw SchemaError("labels CSV: expected header label,provenance");
  dataset.labels.clear();
  dataset.provenance.clear();
  while (reader.next(fields)) {
    if (fields.size() != 2)
      throw ParseError("labels CSV: wrong field count");
    if (fields[0] != "0" && fields[0] != "1")
      throw ParseError("labels CSV: label must be 0 or 1, got '" + fields[0] +
                       "'");
    dataset.labels.push_back(fields[0] == "1");
    dataset.provenance.push_back(fields[1] == "synthetic");
  }
}

}  // namespace radsentry
