#include "radsentry/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "radsentry/error.hpp"
#include "radsentry/rng.hpp"

namespace radsentry {

EncoderMap EncoderMap::fit(std::span<const RadiationReading> readings) {
  EncoderMap map;
  for (const auto& r : readings) map.devices.push_back(r.device_id);
  std::sort(map.devices.begin(), map.devices.end());
  map.devices.erase(std::unique(map.devices.begin(), map.devices.end()),
                    map.devices.end());
  return map;
}

std::optional<std::size_t> EncoderMap::index_of(
    const std::string& device) const {
  auto it = std::lower_bound(devices.begin(), devices.end(), device);
  if (it != devices.end() && *it == device)
    return static_cast<std::size_t>(it - devices.begin());
  return std::nullopt;
}

FeatureMatrix readings_to_matrix(std::span<const RadiationReading> readings) {
  FeatureMatrix m(readings.size(), 5);
  m.column_names = {"captured_unix", "latitude", "longitude", "value_usv_h",
                    "uploaded_unix"};
  for (std::size_t r = 0; r < readings.size(); ++r) {
    m.at(r, 0) = readings[r].captured_unix;
    m.at(r, 1) = readings[r].latitude;
    m.at(r, 2) = readings[r].longitude;
    m.at(r, 3) = readings[r].value_usv_h;
    m.at(r, 4) = readings[r].uploaded_unix;
  }
  return m;
}

FeatureMatrix one_hot_encode(std::span<const RadiationReading> readings,
                             const EncoderMap& encoder) {
  FeatureMatrix block(readings.size(), encoder.devices.size());
  for (std::size_t c = 0; c < encoder.devices.size(); ++c)
    block.column_names[c] = "device:" + encoder.devices[c];
  for (std::size_t r = 0; r < readings.size(); ++r) {
    if (auto idx = encoder.index_of(readings[r].device_id))
      block.at(r, *idx) = 1.0;
  }
  return block;
}

FeatureMatrix readings_to_matrix_with_devices(
    std::span<const RadiationReading> readings, const EncoderMap& encoder) {
  FeatureMatrix m = readings_to_matrix(readings);
  m.append_columns(one_hot_encode(readings, encoder));
  return m;
}

ScalerParams fit_minmax(const FeatureMatrix& matrix) {
  if (matrix.n_rows == 0)
    throw InvalidArgument("fit_minmax: empty matrix");
  ScalerParams p;
  p.col_min.resize(matrix.n_cols);
  p.col_max.resize(matrix.n_cols);
  for (std::size_t c = 0; c < matrix.n_cols; ++c) {
    double lo = matrix.at(0, c), hi = matrix.at(0, c);
    for (std::size_t r = 1; r < matrix.n_rows; ++r) {
      lo = std::min(lo, matrix.at(r, c));
      hi = std::max(hi, matrix.at(r, c));
    }
    p.col_min[c] = lo;
    p.col_max[c] = hi;
  }
  return p;
}

FeatureMatrix apply_minmax(const FeatureMatrix& matrix,
                           const ScalerParams& params) {
  if (params.col_min.size() != matrix.n_cols)
    throw InvalidArgument("apply_minmax: column count mismatch");
  FeatureMatrix out = matrix;
  for (std::size_t c = 0; c < matrix.n_cols; ++c) {
    const double lo = params.col_min[c];
    const double range = params.col_max[c] - lo;
    for (std::size_t r = 0; r < matrix.n_rows; ++r) {
      double v = range > 0.0 ? (matrix.at(r, c) - lo) / range : 0.0;
      out.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

double column_stddev(const FeatureMatrix& matrix, std::size_t col) {
  if (matrix.n_rows == 0) return 0.0;
  double mean = 0.0;
  for (std::size_t r = 0; r < matrix.n_rows; ++r) mean += matrix.at(r, col);
  mean /= static_cast<double>(matrix.n_rows);
  double ss = 0.0;
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    double d = matrix.at(r, col) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(matrix.n_rows));
}

FeatureMatrix inject_noise(const FeatureMatrix& matrix,
                           const NoiseConfig& config,
                           const std::vector<std::uint8_t>* row_mask) {
  if (config.eta < 0.0)
    throw InvalidArgument("inject_noise: eta must be >= 0");
  if (row_mask && row_mask->size() != matrix.n_rows)
    throw InvalidArgument("inject_noise: row mask size mismatch");
  FeatureMatrix out = matrix;
  if (config.eta == 0.0) return out;

  Rng rng(config.seed);
  for (std::size_t c : config.continuous_columns) {
    if (c >= matrix.n_cols)
      throw InvalidArgument("inject_noise: column index out of range");
    const double sigma = config.eta * column_stddev(matrix, c);
    if (sigma == 0.0) continue;
    // Clip back to the scaled domain only when the column lives in it.
    double lo = matrix.at(0, c), hi = lo;
    for (std::size_t r = 1; r < matrix.n_rows; ++r) {
      lo = std::min(lo, matrix.at(r, c));
      hi = std::max(hi, matrix.at(r, c));
    }
    const bool scaled = lo >= 0.0 && hi <= 1.0;
    for (std::size_t r = 0; r < matrix.n_rows; ++r) {
      if (row_mask && !(*row_mask)[r]) continue;
      double v = out.at(r, c) + rng.normal(0.0, sigma);
      out.at(r, c) = scaled ? std::clamp(v, 0.0, 1.0) : v;
    }
  }
  return out;
}

}  // namespace radsentry
