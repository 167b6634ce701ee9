// hogfda/ingest.hpp
//
// Long-format CSV reading/writing and missing-value handling.
//
// CSV schema (UTF-8, LF or CRLF line endings):
//   day_id,date,quarter,row,col,value
// with zero-based quarter/row/col. A cell that has no row is missing.
#pragma once

#include "hogfda/core.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace hogfda {

struct MissingPolicy {
  int max_gap_quarters = 4;
  double drop_fraction = 0.10;
};

struct IngestReport {
  int days_read = 0;
  int days_kept = 0;
  int days_dropped = 0;
  long long interpolated_cells = 0;
  std::vector<std::string> dropped_day_ids;
};

DayCollection parse_long_csv(std::istream& source, const GridSpec& spec);
DayCollection read_long_csv(const std::string& path, const GridSpec& spec);

// Writes observed cells only, values in shortest round-trip form, so that
// parse_long_csv(write_long_csv(x)) reproduces x bit for bit.
void write_long_csv(std::ostream& out, const DayCollection& data);
void write_long_csv(const std::string& path, const DayCollection& data);

struct MissingResult {
  DayCollection data;
  IngestReport report;
};

// Per cell, interior gaps of at most max_gap_quarters are filled by linear
// interpolation and edge gaps of at most max_gap_quarters by the nearest
// observed value. Days whose remaining missing fraction exceeds
// drop_fraction, or with no observed value at all, are dropped.
MissingResult handle_missing(const DayCollection& data, const MissingPolicy& policy);

}  // namespace hogfda
