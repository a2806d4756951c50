#include "radsentry/matrix.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "radsentry/csv.hpp"
#include "radsentry/error.hpp"

namespace radsentry {

std::vector<double> FeatureMatrix::column(std::size_t c) const {
  std::vector<double> out(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = at(r, c);
  return out;
}

void FeatureMatrix::append_columns(const FeatureMatrix& other) {
  if (n_rows != other.n_rows)
    throw InvalidArgument("append_columns: row count mismatch");
  FeatureMatrix merged(n_rows, n_cols + other.n_cols);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) merged.at(r, c) = at(r, c);
    for (std::size_t c = 0; c < other.n_cols; ++c)
      merged.at(r, n_cols + c) = other.at(r, c);
  }
  merged.column_names = column_names;
  merged.column_names.insert(merged.column_names.end(),
                             other.column_names.begin(),
                             other.column_names.end());
  *this = std::move(merged);
}

void FeatureMatrix::append_rows(const FeatureMatrix& other) {
  if (n_cols != other.n_cols)
    throw InvalidArgument("append_rows: column count mismatch");
  values.insert(values.end(), other.values.begin(), other.values.end());
  n_rows += other.n_rows;
}

FeatureMatrix FeatureMatrix::select_columns(
    std::span<const std::size_t> cols) const {
  FeatureMatrix out(n_rows, cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] >= n_cols)
      throw InvalidArgument("select_columns: column index out of range");
    out.column_names[i] = column_names[cols[i]];
  }
  for (std::size_t r = 0; r < n_rows; ++r)
    for (std::size_t i = 0; i < cols.size(); ++i)
      out.at(r, i) = at(r, cols[i]);
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(
    std::span<const std::size_t> rows) const {
  FeatureMatrix out(rows.size(), n_cols);
  out.column_names = column_names;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n_rows)
      throw InvalidArgument("select_rows: row index out of range");
    for (std::size_t c = 0; c < n_cols; ++c) out.at(i, c) = at(rows[i], c);
  }
  return out;
}

void write_matrix_csv(std::ostream& out, const FeatureMatrix& m) {
  write_csv_row(out, m.column_names);
  std::vector<std::string> fields(m.n_cols);
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    for (std::size_t c = 0; c < m.n_cols; ++c)
      fields[c] = format_double(m.at(r, c));
    write_csv_row(out, fields);
  }
}

FeatureMatrix read_matrix_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw SchemaError("matrix CSV: missing header");
  FeatureMatrix m;
  m.column_names = fields;
  m.n_cols = fields.size();
  std::size_t line = 1;
  while (reader.next(fields)) {
    ++line;
    if (fields.size() != m.n_cols)
      throw ParseError("matrix CSV: row " + std::to_string(line) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(m.n_cols));
    for (std::size_t c = 0; c < m.n_cols; ++c) {
      double v;
      if (!parse_double(fields[c], v))
        throw ParseError("matrix CSV: bad numeric '" + fields[c] +
                         "' at row " + std::to_string(line));
      m.values.push_back(v);
    }
    ++m.n_rows;
  }
  return m;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DecodeError("RDM1: truncated header");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_matrix_rdm(std::ostream& out, const FeatureMatrix& m) {
  out.write("RDM1", 4);
  put_u32(out, static_cast<std::uint32_t>(m.n_rows));
  put_u32(out, static_cast<std::uint32_t>(m.n_cols));
  for (double v : m.values) {
    float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
  }
}

FeatureMatrix read_matrix_rdm(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RDM1", 4) != 0)
    throw DecodeError("RDM1: bad magic, expected \"RDM1\"");
  std::uint32_t rows = get_u32(in);
  std::uint32_t cols = get_u32(in);
  FeatureMatrix m(rows, cols);
  for (std::size_t c = 0; c < cols; ++c)
    m.column_names[c] = "col" + std::to_string(c);
  for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * cols; ++i) {
    std::uint32_t bits = get_u32(in);
    float f;
    std::memcpy(&f, &bits, 4);
    m.values[i] = f;
  }
  return m;
}

static bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() &&
         s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

void save_matrix(const std::string& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  if (has_suffix(path, ".rdm"))
    write_matrix_rdm(out, m);
  else
    write_matrix_csv(out, m);
  if (!out) throw Error("write failed: " + path);
}

FeatureMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  if (has_suffix(path, ".rdm")) return read_matrix_rdm(in);
  return read_matrix_csv(in);
}

}  // namespace radsentry
