#include "radsentry/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "radsentry/ingest.hpp"
#include "radsentry/rng.hpp"

namespace radsentry {

namespace {

struct Site {
  const char* name;
  double lat;
  double lon;
};

// Fixed monitoring sites for the normal traffic; each hosts several bGeigie
// devices, like the regional fleets in real exports.
constexpr Site kSites[] = {
    {"tokyo", 35.6762, 139.6503},
    {"fukushima", 37.4000, 141.0300},
    {"munich", 48.1374, 11.5755},
    {"kyiv", 50.4501, 30.5234},
    {"denver", 39.7392, -104.9903},
    {"osaka", 34.6937, 135.5023},
    {"london", 51.5072, -0.1276},
    {"ottawa", 45.4215, -75.6972},
};
constexpr std::size_t kDevicesPerSite = 6;

// Attack origins: the flood claims legitimate device ids (spoofed) but the
// reported coordinates sit away from any monitor, each type from its own
// region, inside a narrow burst window.
constexpr Site kZeroSource = {"", 24.0, 121.0};
constexpr Site kNearZeroSource = {"", 26.5, -12.0};
constexpr Site kHighSource = {"", 55.75, 37.62};

const double kWindowStart = 1488326400.0;  // 2017-03-01 00:00:00 UTC
const double kWindowEnd = 1490918400.0;    // 2017-03-31 00:00:00 UTC
const double kBurstStart = 1489795200.0;   // 2017-03-18 00:00:00 UTC
const double kBurstEnd = 1490140800.0;     // 2017-03-22 00:00:00 UTC

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct RowMaker {
  Rng& rng;
  std::vector<std::string>& rows;

  void push(double captured, double lat, double lon, const std::string& value,
            const std::string& unit, const std::string& device) {
    double uploaded = captured + rng.uniform(5.0, 600.0);
    std::string row = format_timestamp(captured) + "," + fmt(lat, "%.5f") +
                      "," + fmt(lon, "%.5f") + "," + value + "," + unit +
                      "," + device + "," + format_timestamp(uploaded);
    rows.push_back(std::move(row));
  }

  double site_jitter() { return rng.normal(0.0, 0.05); }

  double normal_value() {
    // Log-normal background around ~0.08 uSv/h.
    double v = std::exp(rng.normal(std::log(0.08), 0.45));
    return std::clamp(v, 0.02, 0.6);
  }
};

}  // namespace

void write_safecast_fixture(std::ostream& out, const DatasetSpec& spec) {
  Rng rng(spec.seed);
  std::vector<std::string> rows;
  rows.reserve(spec.n_normal + spec.n_zero + spec.n_near_zero + spec.n_high +
               spec.n_cpm + spec.n_malformed);
  RowMaker make{rng, rows};

  const std::size_t n_sites = std::size(kSites);
  auto device_name = [](std::size_t site, std::size_t unit) {
    return "bgeigie-" + std::string(kSites[site].name) + "-" +
           std::to_string(unit + 1);
  };
  auto spoofed_device = [&]() {
    return device_name(rng.uniform_index(n_sites),
                       rng.uniform_index(kDevicesPerSite));
  };

  for (std::size_t i = 0; i < spec.n_normal; ++i) {
    const std::size_t site_idx = i % n_sites;
    const Site& site = kSites[site_idx];
    double captured = rng.uniform(kWindowStart, kWindowEnd);
    make.push(captured, site.lat + make.site_jitter(),
              site.lon + make.site_jitter(), fmt(make.normal_value(), "%.4f"),
              "usv",
              device_name(site_idx, rng.uniform_index(kDevicesPerSite)));
  }

  for (std::size_t i = 0; i < spec.n_zero; ++i) {
    double captured = rng.uniform(kBurstStart, kBurstEnd);
    make.push(captured, kZeroSource.lat + make.site_jitter(),
              kZeroSource.lon + make.site_jitter(), "0.0", "usv",
              spoofed_device());
  }

  for (std::size_t i = 0; i < spec.n_near_zero; ++i) {
    double captured = rng.uniform(kBurstStart, kBurstEnd);
    make.push(captured, kNearZeroSource.lat + make.site_jitter(),
              kNearZeroSource.lon + make.site_jitter(),
              fmt(rng.uniform(0.004, 0.009), "%.4f"), "usv",
              spoofed_device());
  }

  // Extreme spikes of a false-alarm flood; the first two mirror the
  // tens-of-uSv readings such an attack injects.
  const double spikes[] = {44.0, 66.0, 31.5, 52.3, 38.8, 47.1, 60.2, 35.6};
  for (std::size_t i = 0; i < spec.n_high; ++i) {
    double captured = rng.uniform(kBurstStart, kBurstEnd);
    double value = i < std::size(spikes) ? spikes[i]
                                         : rng.uniform(30.0, 70.0);
    make.push(captured, kHighSource.lat + make.site_jitter(),
              kHighSource.lon + make.site_jitter(), fmt(value, "%.4f"), "usv",
              spoofed_device());
  }

  for (std::size_t i = 0; i < spec.n_cpm; ++i) {
    const std::size_t site_idx = i % n_sites;
    const Site& site = kSites[site_idx];
    double captured = rng.uniform(kWindowStart, kWindowEnd);
    make.push(captured, site.lat + make.site_jitter(),
              site.lon + make.site_jitter(),
              fmt(rng.uniform(5.0, 120.0), "%.1f"), "cpm",
              device_name(site_idx, rng.uniform_index(kDevicesPerSite)));
  }

  for (std::size_t i = 0; i < spec.n_malformed; ++i) {
    switch (i % 3) {
      case 0:
        rows.push_back(
            "2017-03-10 12:00:00.000,abc,139.65,0.08,usv,bgeigie-1001,"
            "2017-03-10 12:01:00.000");
        break;
      case 1:  // wrong field count
        rows.push_back("2017-03-10 12:00:00.000,35.67,139.65,0.08,usv");
        break;
      default:  // longitude out of range
        rows.push_back(
            "2017-03-10 12:00:00.000,35.67,999.0,0.08,usv,bgeigie-1002,"
            "2017-03-10 12:01:00.000");
        break;
    }
  }

  rng.shuffle(rows);
  out << "Captured Time,Latitude,Longitude,Value,Unit,Device ID,"
         "Uploaded Time\n";
  for (const std::string& row : rows) out << row << '\n';
}

}  // namespace radsentry
