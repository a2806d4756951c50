#pragma once

#include <cstdint>
#include <iosfwd>

namespace radsentry {

// Desk-scale synthetic Safecast-style daily export. Normal traffic comes
// from fixed bGeigie monitors; the attack traffic is a burst of flat-zero,
// near-zero and extreme-high readings from a few distinct devices and
// locations, which is what a flooding DoS against an RDS looks like in the
// data. A slice of cpm rows and a handful of malformed rows exercise the
// ingest filters.
struct DatasetSpec {
  std::size_t n_normal = 10000;
  std::size_t n_zero = 150;       // flat 0.0 readings
  std::size_t n_near_zero = 90;   // far below the background floor
  std::size_t n_high = 40;        // tens of uSv/h spikes
  std::size_t n_cpm = 500;        // wrong unit, filtered out
  std::size_t n_malformed = 6;    // unparseable rows
  std::uint64_t seed = 20170315;
};

void write_safecast_fixture(std::ostream& out, const DatasetSpec& spec);

}  // namespace radsentry
