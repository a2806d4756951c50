#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace radsentry {

// Minimal RFC-4180-style CSV reader: comma delimited, optional double-quoted
// fields with "" escapes, quoted fields may span lines. CRLF and LF both
// accepted. Empty lines are skipped.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Reads one record into fields. Returns false at end of input.
  bool next(std::vector<std::string>& fields);

 private:
  std::istream& in_;
};

// Writes one CSV record, quoting fields that contain commas, quotes or
// newlines.
void write_csv_row(std::ostream& out, std::span<const std::string> fields);

std::string trim(const std::string& s);
std::string to_lower(const std::string& s);

// Strict full-string numeric parse; returns false on trailing garbage,
// empty input or non-finite values.
bool parse_double(const std::string& text, double& out);

// Shortest round-trippable representation of a double (max_digits10).
std::string format_double(double v);

}  // namespace radsentry
