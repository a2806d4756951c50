#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace radsentry {

// Dense row-major numeric matrix with named columns. This is the working
// representation for every model in the pipeline; disk formats are CSV
// (lossless text) or the "RDM1" binary layout (f32 entries).
struct FeatureMatrix {
  std::vector<double> values;  // n_rows * n_cols, row-major
  std::vector<std::string> column_names;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols)
      : values(rows * cols, 0.0), n_rows(rows), n_cols(cols) {
    column_names.resize(cols);
  }

  double& at(std::size_t r, std::size_t c) { return values[r * n_cols + c]; }
  double at(std::size_t r, std::size_t c) const {
    return values[r * n_cols + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * n_cols, n_cols};
  }
  std::span<double> row(std::size_t r) {
    return {values.data() + r * n_cols, n_cols};
  }

  // Copies column c into a vector.
  std::vector<double> column(std::size_t c) const;

  // Appends the columns of other to the right of this matrix. Row counts
  // must match.
  void append_columns(const FeatureMatrix& other);

  // Appends the rows of other below this matrix. Column counts must match.
  void append_rows(const FeatureMatrix& other);

  // New matrix keeping only the given columns, in the given order.
  FeatureMatrix select_columns(std::span<const std::size_t> cols) const;

  // New matrix keeping only the given rows, in the given order.
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
};

// CSV with header row; entries written with full double precision.
void write_matrix_csv(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_matrix_csv(std::istream& in);

// Binary layout: magic "RDM1", little-endian u32 n_rows, u32 n_cols, then
// n_rows*n_cols f32 entries row-major. Column names are not stored.
void write_matrix_rdm(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_matrix_rdm(std::istream& in);

// Dispatch by file extension: ".rdm" binary, everything else CSV.
void save_matrix(const std::string& path, const FeatureMatrix& m);
FeatureMatrix load_matrix(const std::string& path);

}  // namespace radsentry
