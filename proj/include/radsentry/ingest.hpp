#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace radsentry {

// One row of the raw daily-export CSV after basic validation. Timestamps are
// kept as text until unit filtering decides the row is a radiation reading.
struct RawRecord {
  std::string captured_time;
  double latitude = 0.0;
  double longitude = 0.0;
  double value = 0.0;  // unit-dependent until filtered
  std::string unit;
  std::string device_id;
  std::string uploaded_time;
};

// A filtered radiation reading in microsieverts per hour.
struct RadiationReading {
  double captured_unix = 0.0;
  double latitude = 0.0;
  double longitude = 0.0;
  double value_usv_h = 0.0;
  std::string device_id;
  double uploaded_unix = 0.0;
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t rows_dropped_malformed = 0;
  std::size_t rows_dropped_unit = 0;
};

// Column-name mapping and unit filter, overridable from the config file.
struct IngestConfig {
  std::string col_captured_time = "Captured Time";
  std::string col_latitude = "Latitude";
  std::string col_longitude = "Longitude";
  std::string col_value = "Value";
  std::string col_unit = "Unit";
  std::string col_device_id = "Device ID";
  std::string col_uploaded_time = "Uploaded Time";
  // Compared case-insensitively against the trimmed unit token.
  std::vector<std::string> unit_tokens = {"usv", "µsv/h", "usv/h",
                                          "µsv"};
};

// Parses "yyyy-mm-dd hh:mm:ss.ms" (UTC, fraction optional) to seconds since
// the Unix epoch. Throws ParseError naming the offending text.
double to_unix_timestamp(std::string_view text);

// Formats seconds since epoch back to "yyyy-mm-dd hh:mm:ss.mmm" with
// millisecond precision.
std::string format_timestamp(double unix_seconds);

// Streams the export CSV. Malformed data rows (wrong field count,
// unparseable numerics, out-of-range coordinates, empty unit or device) are
// counted, never fatal. A missing required header column throws SchemaError.
std::pair<std::vector<RawRecord>, IngestReport> parse_export(
    std::istream& in, const IngestConfig& config = {});

// Keeps records whose unit normalizes to a configured radiation token,
// converting timestamps. Unit mismatches increment rows_dropped_unit;
// negative values and bad timestamps increment rows_dropped_malformed. Both
// also decrement rows_kept so the report stays reconciled.
std::vector<RadiationReading> filter_radiation(
    std::span<const RawRecord> records, const IngestConfig& config,
    IngestReport& report);

// parse_export followed by filter_radiation.
std::pair<std::vector<RadiationReading>, IngestReport> ingest_stream(
    std::istream& in, const IngestConfig& config = {});

// Fixed column order: captured_unix, latitude, longitude, value_usv_h,
// device_id, uploaded_unix.
void write_readings_csv(std::ostream& out,
                        std::span<const RadiationReading> readings);
std::vector<RadiationReading> read_readings_csv(std::istream& in);

}  // namespace radsentry
