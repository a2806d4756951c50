#include "radsentry/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>

#include "radsentry/csv.hpp"
#include "radsentry/error.hpp"

namespace radsentry {

namespace {

// Days from 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m,
                     unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

bool is_leap(std::int64_t y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
  static const unsigned lengths[12] = {31, 28, 31, 30, 31, 30,
                                       31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[m - 1];
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c));
  });
}

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw ParseError("timestamp does not match yyyy-mm-dd hh:mm:ss.ms: '" +
                   std::string(text) + "'");
}

}  // namespace

double to_unix_timestamp(std::string_view text) {
  // yyyy-mm-dd hh:mm:ss[.fraction]
  if (text.size() < 19) bad_timestamp(text);
  if (text[4] != '-' || text[7] != '-' || text[10] != ' ' ||
      text[13] != ':' || text[16] != ':')
    bad_timestamp(text);
  std::string_view ys = text.substr(0, 4), mos = text.substr(5, 2),
                   ds = text.substr(8, 2), hs = text.substr(11, 2),
                   mis = text.substr(14, 2), ss = text.substr(17, 2);
  if (!all_digits(ys) || !all_digits(mos) || !all_digits(ds) ||
      !all_digits(hs) || !all_digits(mis) || !all_digits(ss))
    bad_timestamp(text);

  double frac = 0.0;
  if (text.size() > 19) {
    if (text[19] != '.' || text.size() == 20) bad_timestamp(text);
    std::string_view fs = text.substr(20);
    if (!all_digits(fs)) bad_timestamp(text);
    double scale = 1.0;
    for (char c : fs) {
      scale *= 10.0;
      frac = frac * 10.0 + (c - '0');
    }
    frac /= scale;
  }

  auto to_int = [](std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
  };
  int year = to_int(ys), month = to_int(mos), day = to_int(ds);
  int hour = to_int(hs), minute = to_int(mis), second = to_int(ss);
  if (month < 1 || month > 12) bad_timestamp(text);
  if (day < 1 ||
      day > static_cast<int>(days_in_month(year, static_cast<unsigned>(month))))
    bad_timestamp(text);
  if (hour > 23 || minute > 59 || second > 59) bad_timestamp(text);

  std::int64_t days =
      days_from_civil(year, static_cast<unsigned>(month),
                      static_cast<unsigned>(day));
  return static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 +
         second + frac;
}

std::string format_timestamp(double unix_seconds) {
  std::int64_t total_ms = std::llround(unix_seconds * 1000.0);
  std::int64_t day_ms = 86400000;
  std::int64_t days = total_ms >= 0 ? total_ms / day_ms
                                    : (total_ms - (day_ms - 1)) / day_ms;
  std::int64_t rem = total_ms - days * day_ms;
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  int hour = static_cast<int>(rem / 3600000);
  rem %= 3600000;
  int minute = static_cast<int>(rem / 60000);
  rem %= 60000;
  int second = static_cast<int>(rem / 1000);
  int ms = static_cast<int>(rem % 1000);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u %02d:%02d:%02d.%03d",
                static_cast<long long>(y), m, d, hour, minute, second, ms);
  return buf;
}

namespace {

std::size_t require_column(const std::vector<std::string>& header,
                           const std::string& name) {
  std::string want = to_lower(trim(name));
  for (std::size_t i = 0; i < header.size(); ++i)
    if (to_lower(trim(header[i])) == want) return i;
  throw SchemaError("missing required header column: '" + name + "'");
}

}  // namespace

std::pair<std::vector<RawRecord>, IngestReport> parse_export(
    std::istream& in, const IngestConfig& config) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields))
    throw SchemaError("empty input: no header row");

  const std::size_t i_cap = require_column(fields, config.col_captured_time);
  const std::size_t i_lat = require_column(fields, config.col_latitude);
  const std::size_t i_lon = require_column(fields, config.col_longitude);
  const std::size_t i_val = require_column(fields, config.col_value);
  const std::size_t i_unit = require_column(fields, config.col_unit);
  const std::size_t i_dev = require_column(fields, config.col_device_id);
  const std::size_t i_up = require_column(fields, config.col_uploaded_time);
  const std::size_t width = fields.size();

  std::vector<RawRecord> records;
  IngestReport report;
  while (reader.next(fields)) {
    ++report.rows_read;
    if (fields.size() != width) {
      ++report.rows_dropped_malformed;
      continue;
    }
    RawRecord rec;
    rec.captured_time = trim(fields[i_cap]);
    rec.uploaded_time = trim(fields[i_up]);
    rec.unit = trim(fields[i_unit]);
    rec.device_id = trim(fields[i_dev]);
    bool ok = parse_double(fields[i_lat], rec.latitude) &&
              parse_double(fields[i_lon], rec.longitude) &&
              parse_double(fields[i_val], rec.value);
    ok = ok && rec.latitude >= -90.0 && rec.latitude <= 90.0 &&
         rec.longitude >= -180.0 && rec.longitude <= 180.0;
    ok = ok && !rec.unit.empty() && !rec.device_id.empty();
    if (!ok) {
      ++report.rows_dropped_malformed;
      continue;
    }
    ++report.rows_kept;
    records.push_back(std::move(rec));
  }
  return {std::move(records), report};
}

std::vector<RadiationReading> filter_radiation(
    std::span<const RawRecord> records, const IngestConfig& config,
    IngestReport& report) {
  std::vector<std::string> tokens;
  tokens.reserve(config.unit_tokens.size());
  for (const auto& t : config.unit_tokens) tokens.push_back(to_lower(t));

  std::vector<RadiationReading> readings;
  readings.reserve(records.size());
  std::size_t dropped_unit = 0, dropped_malformed = 0;
  for (const RawRecord& rec : records) {
    std::string unit = to_lower(rec.unit);
    if (std::find(tokens.begin(), tokens.end(), unit) == tokens.end()) {
      ++dropped_unit;
      continue;
    }
    RadiationReading r;
    try {
      r.captured_unix = to_unix_timestamp(rec.captured_time);
      r.uploaded_unix = to_unix_timestamp(rec.uploaded_time);
    } catch (const ParseError&) {
      ++dropped_malformed;
      continue;
    }
    if (rec.value < 0.0) {
      ++dropped_malformed;
      continue;
    }
    r.latitude = rec.latitude;
    r.longitude = rec.longitude;
    r.value_usv_h = rec.value;
    r.device_id = rec.device_id;
    readings.push_back(std::move(r));
  }
  report.rows_dropped_unit += dropped_unit;
  report.rows_dropped_malformed += dropped_malformed;
  const std::size_t dropped = dropped_unit + dropped_malformed;
  report.rows_kept = report.rows_kept >= dropped ? report.rows_kept - dropped
                                                 : readings.size();
  return readings;
}

std::pair<std::vector<RadiationReading>, IngestReport> ingest_stream(
    std::istream& in, const IngestConfig& config) {
  auto [records, report] = parse_export(in, config);
  auto readings = filter_radiation(records, config, report);
  return {std::move(readings), report};
}

void write_readings_csv(std::ostream& out,
                        std::span<const RadiationReading> readings) {
  static const std::vector<std::string> header = {
      "captured_unix", "latitude",  "longitude",
      "value_usv_h",   "device_id", "uploaded_unix"};
  write_csv_row(out, header);
  std::vector<std::string> fields(6);
  for (const RadiationReading& r : readings) {
    fields[0] = format_double(r.captured_unix);
    fields[1] = format_double(r.latitude);
    fields[2] = format_double(r.longitude);
    fields[3] = format_double(r.value_usv_h);
    fields[4] = r.device_id;
    fields[5] = format_double(r.uploaded_unix);
    write_csv_row(out, fields);
  }
}

std::vector<RadiationReading> read_readings_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields) || fields.size() != 6)
    throw SchemaError("readings CSV: expected 6-column header");
  std::vector<RadiationReading> readings;
  while (reader.next(fields)) {
    if (fields.size() != 6)
      throw ParseError("readings CSV: wrong field count in data row");
    RadiationReading r;
    bool ok = parse_double(fields[0], r.captured_unix) &&
              parse_double(fields[1], r.latitude) &&
              parse_double(fields[2], r.longitude) &&
              parse_double(fields[3], r.value_usv_h) &&
              parse_double(fields[5], r.uploaded_unix);
    if (!ok) throw ParseError("readings CSV: bad numeric field");
    r.device_id = fields[4];
    readings.push_back(std::move(r));
  }
  return readings;
}

}  // namespace radsentry
