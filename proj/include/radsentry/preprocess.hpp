#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radsentry/ingest.hpp"
#include "radsentry/matrix.hpp"

namespace radsentry {

// Per-column extrema captured by fit_minmax.
struct ScalerParams {
  std::vector<double> col_min;
  std::vector<double> col_max;
};

// Distinct device ids in lexicographic order; column i of the one-hot block
// corresponds to devices[i].
struct EncoderMap {
  std::vector<std::string> devices;

  static EncoderMap fit(std::span<const RadiationReading> readings);
  std::optional<std::size_t> index_of(const std::string& device) const;
};

struct NoiseConfig {
  double eta = 0.01;  // noise stddev as a fraction of the column stddev
  std::uint64_t seed = 0;
  // Columns to perturb. One-hot columns must not be listed.
  std::vector<std::size_t> continuous_columns;
};

// Base feature columns in pipeline order: captured_unix, latitude,
// longitude, value_usv_h, uploaded_unix.
FeatureMatrix readings_to_matrix(std::span<const RadiationReading> readings);

// One column per known device; a row is all-zero when its device is unknown.
FeatureMatrix one_hot_encode(std::span<const RadiationReading> readings,
                             const EncoderMap& encoder);

// readings_to_matrix plus the one-hot block on the right.
FeatureMatrix readings_to_matrix_with_devices(
    std::span<const RadiationReading> readings, const EncoderMap& encoder);

ScalerParams fit_minmax(const FeatureMatrix& matrix);

// (x - min) / (max - min) clipped to [0, 1]; constant columns map to 0.
FeatureMatrix apply_minmax(const FeatureMatrix& matrix,
                           const ScalerParams& params);

// Adds N(0, (eta * std_col)^2) to each listed column. Columns whose input
// range already sits inside [0, 1] are re-clipped after the perturbation.
// row_mask, when given, limits noise to rows with a nonzero mask entry.
FeatureMatrix inject_noise(const FeatureMatrix& matrix,
                           const NoiseConfig& config,
                           const std::vector<std::uint8_t>* row_mask = nullptr);

// Population standard deviation of one column.
double column_stddev(const FeatureMatrix& matrix, std::size_t col);

}  // namespace radsentry
