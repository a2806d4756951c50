#include "radsentry/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "radsentry/csv.hpp"
#include "radsentry/error.hpp"
#include "radsentry/rng.hpp"

namespace radsentry {

SplitIndices split_train_test(std::span<const std::uint8_t> labels,
                              const SplitConfig& config) {
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0))
    throw InvalidArgument("split: test_fraction must be in (0, 1)");
  const std::size_t n = labels.size();
  if (n < 2) throw InvalidArgument("split: need at least 2 rows");

  SplitIndices out;
  if (!config.stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed);
    rng.shuffle(order);
    std::size_t n_test = static_cast<std::size_t>(
        std::llround(config.test_fraction * static_cast<double>(n)));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
    out.test.assign(order.begin(), order.begin() + n_test);
    out.train.assign(order.begin() + n_test, order.end());
  } else {
    for (int cls = 0; cls <= 1; ++cls) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i)
        if (labels[i] == cls) members.push_back(i);
      if (members.empty()) continue;
      if (members.size() < 2)
        throw InvalidArgument(
            "split: a class has fewer than 2 rows; stratification impossible");
      Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(cls)));
      rng.shuffle(members);
      std::size_t n_test = static_cast<std::size_t>(std::llround(
          config.test_fraction * static_cast<double>(members.size())));
      n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
      out.test.insert(out.test.end(), members.begin(),
                      members.begin() + n_test);
      out.train.insert(out.train.end(), members.begin() + n_test,
                       members.end());
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

MetricsReport compute_metrics(std::span<const std::uint8_t> predicted,
                              std::span<const std::uint8_t> truth) {
  if (predicted.size() != truth.size())
    throw InvalidArgument("compute_metrics: length mismatch (" +
                          std::to_string(predicted.size()) + " vs " +
                          std::to_string(truth.size()) + ")");
  MetricsReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      if (predicted[i])
        ++r.counts.tp;
      else
        ++r.counts.fn;
    } else {
      if (predicted[i])
        ++r.counts.fp;
      else
        ++r.counts.tn;
    }
  }
  const auto& c = r.counts;
  const std::size_t total = c.tp + c.fp + c.fn + c.tn;
  r.accuracy = total ? static_cast<double>(c.tp + c.tn) /
                           static_cast<double>(total)
                     : 0.0;
  if (c.tp + c.fp > 0)
    r.precision =
        static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  else
    r.degenerate = true;
  if (c.tp + c.fn > 0)
    r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  else
    r.degenerate = true;
  if (r.precision + r.recall > 0.0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  else
    r.degenerate = true;
  if (total == 0) r.degenerate = true;
  return r;
}

double bench_latency(const std::function<void()>& predict_pass,
                     std::size_t n_rows, const LatencyOptions& options) {
  if (n_rows == 0) throw InvalidArgument("bench_latency: empty matrix");
  using clock = std::chrono::steady_clock;
  for (int i = 0; i < options.warmup_passes; ++i) predict_pass();
  std::vector<double> passes;
  passes.reserve(options.measured_passes);
  for (int i = 0; i < std::max(1, options.measured_passes); ++i) {
    auto t0 = clock::now();
    predict_pass();
    auto t1 = clock::now();
    passes.push_back(
        std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  std::sort(passes.begin(), passes.end());
  const std::size_t m = passes.size();
  const double median = m % 2 ? passes[m / 2]
                              : 0.5 * (passes[m / 2 - 1] + passes[m / 2]);
  return median / static_cast<double>(n_rows);
}

std::vector<ModelReportRow> compare_models(
    std::span<Classifier* const> models, const FeatureMatrix& train,
    std::span<const std::uint8_t> train_labels, const FeatureMatrix& test,
    std::span<const std::uint8_t> test_labels, bool measure_latency,
    const LatencyOptions& latency) {
  std::vector<ModelReportRow> rows;
  rows.reserve(models.size());
  for (Classifier* model : models) {
    model->fit(train, train_labels);
    std::vector<std::uint8_t> predicted = model->predict(test);
    ModelReportRow row;
    row.model = model->name();
    row.metrics = compute_metrics(predicted, test_labels);
    if (measure_latency) {
      std::vector<std::uint8_t> sink;
      row.metrics.prediction_time_per_sample_us = bench_latency(
          [&]() { sink = model->predict(test); }, test.n_rows, latency);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

static std::string metric_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_report_csv(std::ostream& out,
                      std::span<const ModelReportRow> rows) {
  out << "model,accuracy,precision,recall,f1,pred_time_us\n";
  for (const ModelReportRow& row : rows) {
    const MetricsReport& m = row.metrics;
    out << row.model << ',' << metric_str(m.accuracy) << ','
        << metric_str(m.precision) << ',' << metric_str(m.recall) << ','
        << metric_str(m.f1) << ',';
    if (m.prediction_time_per_sample_us >= 0.0)
      out << metric_str(m.prediction_time_per_sample_us);
    out << '\n';
  }
}

std::string format_report_table(std::span<const ModelReportRow> rows) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-24s %10s %10s %10s %10s %14s\n",
                "Model", "Acc(%)", "Prec(%)", "Recall(%)", "F1(%)",
                "Pred(us/row)");
  out += buf;
  for (const ModelReportRow& row : rows) {
    const MetricsReport& m = row.metrics;
    std::string lat = m.prediction_time_per_sample_us >= 0.0
                          ? metric_str(m.prediction_time_per_sample_us)
                          : std::string("-");
    std::snprintf(buf, sizeof(buf), "%-24s %10.3f %10.3f %10.3f %10.3f %14s\n",
                  row.model.c_str(), 100.0 * m.accuracy, 100.0 * m.precision,
                  100.0 * m.recall, 100.0 * m.f1, lat.c_str());
    out += buf;
  }
  return out;
}

}  // namespace radsentry
