#include "hogfda/core.hpp"

#include "hogfda/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_set>

namespace hogfda {

void check_grid(const GridSpec& spec) {
  if (spec.n_rows < 3 || spec.n_cols < 3)
    throw ArgumentError("grid must be at least 3x3");
  if (spec.quarters_per_day < 2)
    throw ArgumentError("quarters_per_day must be >= 2");
  if (!(spec.cell_size_m > 0.0))
    throw ArgumentError("cell_size_m must be positive");
}

const char* weekday_name(Weekday w) {
  static constexpr const char* names[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
  return names[static_cast<int>(w)];
}

// Howard Hinnant's days_from_civil / civil_from_days.
std::int64_t Date::serial() const {
  const std::int64_t y = year - (month <= 2 ? 1 : 0);
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const std::int64_t yoe = y - era * 400;
  const std::int64_t mp = (month + 9) % 12;
  const std::int64_t doy = (153 * mp + 2) / 5 + day - 1;
  const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

Date Date::from_serial(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  Date d;
  d.day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  d.month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  d.year = static_cast<int>(yoe + era * 400 + (d.month <= 2 ? 1 : 0));
  return d;
}

Date Date::parse(std::string_view text) {
  auto fail = [&] { throw DataError("malformed date '" + std::string(text) + "' (expected YYYY-MM-DD)"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') fail();
  Date d;
  auto field = [&](std::size_t pos, std::size_t len, int& out) {
    auto [p, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    if (ec != std::errc{} || p != text.data() + pos + len) fail();
  };
  field(0, 4, d.year);
  field(5, 2, d.month);
  field(8, 2, d.day);
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) fail();
  if (from_serial(d.serial()) != d) fail();
  return d;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

Weekday Date::weekday() const {
  // 1970-01-01 was a Thursday.
  std::int64_t w = (serial() + 3) % 7;
  if (w < 0) w += 7;
  return static_cast<Weekday>(w);
}

GridSnapshot GridSnapshot::unobserved(const GridSpec& spec, std::string day_id, int quarter) {
  GridSnapshot s;
  s.values = Matrix::Zero(spec.n_rows, spec.n_cols);
  s.mask = Mask::Constant(spec.n_rows, spec.n_cols, false);
  s.day_id = std::move(day_id);
  s.quarter = quarter;
  return s;
}

bool DayRecord::fully_observed() const {
  for (const auto& s : snapshots)
    if (!s.fully_observed()) return false;
  return true;
}

bool RegionOfInterest::contained_in(const GridSpec& spec) const {
  return row_min >= 0 && row_min <= row_max && row_max < spec.n_rows && col_min >= 0 &&
         col_min <= col_max && col_max < spec.n_cols;
}

std::ptrdiff_t DayCollection::find(std::string_view day_id) const {
  for (std::size_t i = 0; i < days.size(); ++i)
    if (days[i].day_id == day_id) return static_cast<std::ptrdiff_t>(i);
  return -1;
}

void validate_collection(const DayCollection& data) {
  check_grid(data.spec);
  const int q = data.spec.quarters_per_day;
  std::unordered_set<std::string> seen;
  for (const auto& day : data.days) {
    if (!seen.insert(day.day_id).second) throw DataError("duplicate day_id '" + day.day_id + "'");
    if (static_cast<int>(day.snapshots.size()) != q)
      throw DataError("day '" + day.day_id + "' has " + std::to_string(day.snapshots.size()) +
                      " snapshots, expected " + std::to_string(q));
    for (int t = 0; t < q; ++t) {
      const auto& s = day.snapshots[t];
      if (s.quarter != t)
        throw DataError("day '" + day.day_id + "': snapshot " + std::to_string(t) + " carries quarter " +
                        std::to_string(s.quarter));
      if (s.values.rows() != data.spec.n_rows || s.values.cols() != data.spec.n_cols ||
          s.mask.rows() != data.spec.n_rows || s.mask.cols() != data.spec.n_cols)
        throw DataError("day '" + day.day_id + "': snapshot " + std::to_string(t) + " has wrong dimensions");
      for (Eigen::Index c = 0; c < s.values.cols(); ++c)
        for (Eigen::Index r = 0; r < s.values.rows(); ++r)
          if (s.mask(r, c) && !(std::isfinite(s.values(r, c)) && s.values(r, c) >= 0.0))
            throw DataError("day '" + day.day_id + "': non-finite or negative value at quarter " +
                            std::to_string(t));
    }
  }
}

}  // namespace hogfda
