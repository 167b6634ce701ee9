// hogfda/core.hpp
//
// Shared domain types: the grid geometry, per-quarter snapshots, day records
// and collections of days.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace hogfda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct GridSpec {
  int n_rows = 39;
  int n_cols = 39;
  double cell_size_m = 150.0;  // metadata only
  int quarters_per_day = 96;

  bool operator==(const GridSpec&) const = default;
};

// Source region of the default grid, kept as text; nothing computes on it.
inline constexpr const char* kDefaultRegionNote =
    "latitude 45.516 N - 46.564 N, longitude 10.18 N - 10.245 N (Municipality of Brescia)";

// Throws ArgumentError when the grid cannot support gradient features.
void check_grid(const GridSpec& spec);

enum class Weekday { Mon = 0, Tue, Wed, Thu, Fri, Sat, Sun };

const char* weekday_name(Weekday w);

// Proleptic Gregorian calendar date.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  // Days since 1970-01-01.
  std::int64_t serial() const;
  static Date from_serial(std::int64_t days);
  // Parses YYYY-MM-DD; throws DataError on malformed input.
  static Date parse(std::string_view text);
  std::string iso() const;
  Weekday weekday() const;
};

struct GridSnapshot {
  Matrix values;  // n_rows x n_cols, average connected phones
  Mask mask;      // true where the cell was observed
  std::string day_id;
  int quarter = 0;

  static GridSnapshot unobserved(const GridSpec& spec, std::string day_id, int quarter);
  bool fully_observed() const { return mask.all(); }
  bool empty() const { return !mask.any(); }
};

struct DayRecord {
  std::string day_id;
  Date date;
  std::vector<GridSnapshot> snapshots;  // exactly Q, ordered by quarter

  Weekday weekday() const { return date.weekday(); }
  int month() const { return date.month; }
  bool fully_observed() const;
};

struct RegionOfInterest {
  int row_min = 0;
  int row_max = 38;  // inclusive
  int col_min = 0;
  int col_max = 38;  // inclusive

  static RegionOfInterest full(const GridSpec& spec) {
    return {0, spec.n_rows - 1, 0, spec.n_cols - 1};
  }
  bool contained_in(const GridSpec& spec) const;
  bool operator==(const RegionOfInterest&) const = default;
};

struct DayCollection {
  GridSpec spec;
  std::vector<DayRecord> days;
  std::string provenance;

  std::size_t size() const { return days.size(); }
  // Returns the index of `day_id`, or -1.
  std::ptrdiff_t find(std::string_view day_id) const;
};

// Structural checks: snapshot dimensions, quarter bijection, unique day ids
// and finite observed values. Throws DataError naming the first violation.
void validate_collection(const DayCollection& data);

}  // namespace hogfda
