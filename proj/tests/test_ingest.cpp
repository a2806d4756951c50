#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "radsentry/error.hpp"
#include "radsentry/ingest.hpp"
#include "radsentry/rng.hpp"

using namespace radsentry;

namespace {

const char* kHeader =
    "Captured Time,Latitude,Longitude,Value,Unit,Device ID,Uploaded Time\n";

std::string row(const std::string& captured, const std::string& lat,
                const std::string& lon, const std::string& value,
                const std::string& unit, const std::string& device,
                const std::string& uploaded) {
  return captured + "," + lat + "," + lon + "," + value + "," + unit + "," +
         device + "," + uploaded + "\n";
}

}  // namespace

TEST_CASE("timestamp: epoch and simple offsets") {
  CHECK(to_unix_timestamp("1970-01-01 00:00:00.0") == 0.0);
  CHECK(to_unix_timestamp("1970-01-02 00:00:00.5") == 86400.5);
  // Verified against an independent calendar conversion.
  CHECK(to_unix_timestamp("2017-03-15 09:30:00.0") == 1489570200.0);
}

TEST_CASE("timestamp: rejects malformed text") {
  CHECK_THROWS_AS(to_unix_timestamp("2017/03/15 09:30:00"), ParseError);
  CHECK_THROWS_AS(to_unix_timestamp("2017-13-01 00:00:00"), ParseError);
  CHECK_THROWS_AS(to_unix_timestamp("2017-02-29 00:00:00"), ParseError);
  CHECK_THROWS_AS(to_unix_timestamp("2017-03-15 24:00:00"), ParseError);
  CHECK_THROWS_AS(to_unix_timestamp("2017-03-15 09:30:00."), ParseError);
  CHECK_THROWS_AS(to_unix_timestamp("not a time"), ParseError);
  // Leap day of a leap year parses.
  CHECK(to_unix_timestamp("2016-02-29 00:00:00.0") ==
        doctest::Approx(1456704000.0));
}

TEST_CASE("timestamp: format/parse round trip at millisecond precision") {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    // Random times over ~80 years with millisecond resolution.
    double t = std::floor(rng.uniform(0.0, 2.5e9) * 1000.0) / 1000.0;
    std::string text = format_timestamp(t);
    double back = to_unix_timestamp(text);
    CHECK(back == doctest::Approx(t).epsilon(1e-12));
    CHECK(format_timestamp(back) == text);
  }
}

TEST_CASE("parse_export: single valid row") {
  std::istringstream in(
      std::string(kHeader) +
      row("2017-03-15 09:30:00.0", "35.67", "139.65", "0.08", "usv",
          "dev-1", "2017-03-15 09:31:00.0"));
  auto [records, report] = parse_export(in);
  CHECK(records.size() == 1);
  CHECK(report.rows_read == 1);
  CHECK(report.rows_kept == 1);
  CHECK(records[0].device_id == "dev-1");
  CHECK(records[0].value == doctest::Approx(0.08));
}

TEST_CASE("parse_export: malformed rows are counted, not fatal") {
  std::istringstream in(
      std::string(kHeader) +
      row("2017-03-15 09:30:00.0", "abc", "139.65", "0.08", "usv", "dev-1",
          "2017-03-15 09:31:00.0") +
      row("2017-03-15 09:30:00.0", "35.67", "139.65", "0.08", "usv", "dev-1",
          "2017-03-15 09:31:00.0"));
  auto [records, report] = parse_export(in);
  CHECK(records.size() == 1);
  CHECK(report.rows_read == 2);
  CHECK(report.rows_dropped_malformed == 1);
  CHECK(report.rows_kept == 1);
}

TEST_CASE("parse_export: out-of-range coordinates are malformed") {
  std::istringstream in(
      std::string(kHeader) +
      row("2017-03-15 09:30:00.0", "95.0", "139.65", "0.08", "usv", "dev-1",
          "2017-03-15 09:31:00.0") +
      row("2017-03-15 09:30:00.0", "35.0", "181.0", "0.08", "usv", "dev-1",
          "2017-03-15 09:31:00.0"));
  auto [records, report] = parse_export(in);
  CHECK(records.empty());
  CHECK(report.rows_dropped_malformed == 2);
}

TEST_CASE("parse_export: missing header column is a fatal schema error") {
  std::istringstream in("Captured Time,Latitude,Longitude,Value,Unit,"
                        "Uploaded Time\n");
  try {
    parse_export(in);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("Device ID") != std::string::npos);
  }
}

TEST_CASE("filter_radiation: unit matching and counting") {
  std::string csv = std::string(kHeader);
  // 3 usv rows in various spellings, 2 cpm rows.
  csv += row("2017-03-15 09:30:00.0", "35", "139", "0.08", "usv", "d1",
             "2017-03-15 09:31:00.0");
  csv += row("2017-03-15 09:30:00.0", "35", "139", "0.09", "uSv/h", "d1",
             "2017-03-15 09:31:00.0");
  csv += row("2017-03-15 09:30:00.0", "35", "139", "0.10", "µSv/h", "d1",
             "2017-03-15 09:31:00.0");
  csv += row("2017-03-15 09:30:00.0", "35", "139", "42", "cpm", "d1",
             "2017-03-15 09:31:00.0");
  csv += row("2017-03-15 09:30:00.0", "35", "139", "55", "cpm", "d1",
             "2017-03-15 09:31:00.0");
  std::istringstream in(csv);
  auto [readings, report] = ingest_stream(in);
  CHECK(readings.size() == 3);
  CHECK(report.rows_read == 5);
  CHECK(report.rows_kept == 3);
  CHECK(report.rows_dropped_unit == 2);
  CHECK(report.rows_read == report.rows_kept + report.rows_dropped_malformed +
                                report.rows_dropped_unit);
}

TEST_CASE("filter_radiation: negative value and bad timestamp -> malformed") {
  std::string csv = std::string(kHeader);
  csv += row("2017-03-15 09:30:00.0", "35", "139", "-0.5", "usv", "d1",
             "2017-03-15 09:31:00.0");
  csv += row("bogus", "35", "139", "0.5", "usv", "d1",
             "2017-03-15 09:31:00.0");
  std::istringstream in(csv);
  auto [readings, report] = ingest_stream(in);
  CHECK(readings.empty());
  CHECK(report.rows_dropped_malformed == 2);
  CHECK(report.rows_kept == 0);
}

TEST_CASE("filter_radiation: empty input") {
  std::istringstream in(kHeader);
  auto [readings, report] = ingest_stream(in);
  CHECK(readings.empty());
  CHECK(report.rows_read == 0);
}

TEST_CASE("ingest: quoted fields and pipeline-order readings csv") {
  std::string csv = std::string(kHeader);
  csv += "\"2017-03-15 09:30:00.0\",35.5,139.5,0.08,usv,\"dev, one\","
         "\"2017-03-15 09:31:00.0\"\n";
  std::istringstream in(csv);
  auto [readings, report] = ingest_stream(in);
  REQUIRE(readings.size() == 1);
  CHECK(readings[0].device_id == "dev, one");

  std::ostringstream out;
  write_readings_csv(out, readings);
  std::istringstream back(out.str());
  auto loaded = read_readings_csv(back);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].captured_unix == readings[0].captured_unix);
  CHECK(loaded[0].device_id == readings[0].device_id);
  CHECK(loaded[0].value_usv_h == readings[0].value_usv_h);
}

TEST_CASE("ingest: report always reconciles on mixed fixtures") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::string csv = std::string(kHeader);
    std::size_t n = 30;
    for (std::size_t i = 0; i < n; ++i) {
      switch (rng.uniform_index(4)) {
        case 0:
          csv += row("2017-03-15 09:30:00.0", "35", "139", "0.08", "usv",
                     "d1", "2017-03-15 09:31:00.0");
          break;
        case 1:
          csv += row("2017-03-15 09:30:00.0", "35", "139", "42", "cpm", "d1",
                     "2017-03-15 09:31:00.0");
          break;
        case 2:
          csv += row("2017-03-15 09:30:00.0", "oops", "139", "0.08", "usv",
                     "d1", "2017-03-15 09:31:00.0");
          break;
        default:
          csv += "just,one,field,short,of,valid\n";
          break;
      }
    }
    std::istringstream in(csv);
    auto [readings, report] = ingest_stream(in);
    CHECK(report.rows_read == n);
    CHECK(report.rows_kept == readings.size());
    CHECK(report.rows_read == report.rows_kept +
                                  report.rows_dropped_malformed +
                                  report.rows_dropped_unit);
    for (const auto& r : readings) CHECK(r.value_usv_h >= 0.0);
  }
}
