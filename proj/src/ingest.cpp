#include "hogfda/ingest.hpp"

#include "hogfda/errors.hpp"
#include "hogfda/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <string_view>

namespace hogfda {

namespace {

constexpr std::string_view kHeader = "day_id,date,quarter,row,col,value";

struct PendingDay {
  Date date;
  std::vector<GridSnapshot> snapshots;
};

[[noreturn]] void line_error(long long line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

template <class T>
T parse_number(std::string_view field, long long line, const char* name) {
  T value{};
  auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || p != field.data() + field.size())
    line_error(line, std::string("malformed ") + name + " '" + std::string(field) + "'");
  return value;
}

}  // namespace

DayCollection parse_long_csv(std::istream& source, const GridSpec& spec) {
  check_grid(spec);
  std::string line;
  long long line_no = 0;
  if (!std::getline(source, line)) throw DataError("empty input: missing CSV header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != kHeader) line_error(1, "expected header '" + std::string(kHeader) + "'");

  std::map<std::string, PendingDay> days;
  std::string_view fields[6];
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest(line);
    for (int f = 0; f < 6; ++f) {
      const auto comma = rest.find(',');
      if (f < 5) {
        if (comma == std::string_view::npos) line_error(line_no, "expected 6 fields");
        fields[f] = rest.substr(0, comma);
        rest.remove_prefix(comma + 1);
      } else {
        if (comma != std::string_view::npos) line_error(line_no, "expected 6 fields");
        fields[f] = rest;
      }
    }
    if (fields[0].empty()) line_error(line_no, "empty day_id");
    const int quarter = parse_number<int>(fields[2], line_no, "quarter");
    const int row = parse_number<int>(fields[3], line_no, "row");
    const int col = parse_number<int>(fields[4], line_no, "col");
    const double value = parse_number<double>(fields[5], line_no, "value");
    if (quarter < 0 || quarter >= spec.quarters_per_day)
      line_error(line_no, "quarter " + std::to_string(quarter) + " out of range");
    if (row < 0 || row >= spec.n_rows) line_error(line_no, "row " + std::to_string(row) + " out of range");
    if (col < 0 || col >= spec.n_cols) line_error(line_no, "col " + std::to_string(col) + " out of range");
    if (!std::isfinite(value) || value < 0.0) line_error(line_no, "value must be finite and non-negative");

    std::string day_id(fields[0]);
    auto it = days.find(day_id);
    if (it == days.end()) {
      Date date;
      try {
        date = Date::parse(fields[1]);
      } catch (const DataError& e) {
        line_error(line_no, e.what());
      }
      PendingDay pending{date, {}};
      pending.snapshots.reserve(spec.quarters_per_day);
      for (int t = 0; t < spec.quarters_per_day; ++t)
        pending.snapshots.push_back(GridSnapshot::unobserved(spec, day_id, t));
      it = days.emplace(day_id, std::move(pending)).first;
    } else if (fields[1] != std::string_view(it->second.date.iso())) {
      line_error(line_no, "day '" + day_id + "' has inconsistent dates");
    }
    auto& snap = it->second.snapshots[quarter];
    if (snap.mask(row, col))
      line_error(line_no, "duplicate cell (" + day_id + ", " + std::to_string(quarter) + ", " +
                              std::to_string(row) + ", " + std::to_string(col) + ")");
    snap.mask(row, col) = true;
    snap.values(row, col) = value;
  }

  DayCollection out;
  out.spec = spec;
  out.days.reserve(days.size());
  for (auto& [id, pending] : days)
    out.days.push_back(DayRecord{id, pending.date, std::move(pending.snapshots)});
  return out;
}

DayCollection read_long_csv(const std::string& path, const GridSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input '" + path + "'");
  auto data = parse_long_csv(in, spec);
  data.provenance = "csv:" + path;
  return data;
}

void write_long_csv(std::ostream& out, const DayCollection& data) {
  out << kHeader << '\n';
  char buf[64];
  std::string line;
  for (const auto& day : data.days) {
    const std::string prefix = day.day_id + ',' + day.date.iso() + ',';
    for (const auto& s : day.snapshots) {
      for (int r = 0; r < s.values.rows(); ++r)
        for (int c = 0; c < s.values.cols(); ++c) {
          if (!s.mask(r, c)) continue;
          line.assign(prefix);
          line += std::to_string(s.quarter);
          line += ',';
          line += std::to_string(r);
          line += ',';
          line += std::to_string(c);
          line += ',';
          auto res = std::to_chars(buf, buf + sizeof buf, s.values(r, c));
          line.append(buf, res.ptr);
          line += '\n';
          out << line;
        }
    }
  }
}

void write_long_csv(const std::string& path, const DayCollection& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_long_csv(out, data);
  if (!out) throw DataError("write failed for '" + path + "'");
}

namespace {

struct DayFill {
  DayRecord day;
  long long interpolated = 0;
  long long remaining_missing = 0;
  bool any_observed = false;
};

DayFill fill_day(const DayRecord& in, const GridSpec& spec, int max_gap) {
  DayFill out{in, 0, 0, false};
  const int q = spec.quarters_per_day;
  auto& snaps = out.day.snapshots;
  for (int r = 0; r < spec.n_rows; ++r) {
    for (int c = 0; c < spec.n_cols; ++c) {
      int t = 0;
      while (t < q) {
        if (snaps[t].mask(r, c)) {
          out.any_observed = true;
          ++t;
          continue;
        }
        const int start = t;
        while (t < q && !snaps[t].mask(r, c)) ++t;
        const int len = t - start;
        const bool has_left = start > 0;
        const bool has_right = t < q;
        if (len > max_gap || (!has_left && !has_right)) {
          out.remaining_missing += len;
          continue;
        }
        const double left = has_left ? snaps[start - 1].values(r, c) : 0.0;
        const double right = has_right ? snaps[t].values(r, c) : 0.0;
        for (int g = start; g < t; ++g) {
          double v;
          if (has_left && has_right) {
            const double w = static_cast<double>(g - start + 1) / static_cast<double>(len + 1);
            v = left + w * (right - left);
          } else {
            v = has_left ? left : right;
          }
          snaps[g].values(r, c) = v;
          snaps[g].mask(r, c) = true;
        }
        out.interpolated += len;
      }
    }
  }
  return out;
}

}  // namespace

MissingResult handle_missing(const DayCollection& data, const MissingPolicy& policy) {
  if (policy.max_gap_quarters < 0) throw ArgumentError("max_gap_quarters must be >= 0");
  if (!(policy.drop_fraction >= 0.0 && policy.drop_fraction <= 1.0))
    throw ArgumentError("drop_fraction must lie in [0, 1]");
  validate_collection(data);

  std::vector<DayFill> filled(data.days.size());
  parallel_for(data.days.size(), [&](std::size_t i) {
    filled[i] = fill_day(data.days[i], data.spec, policy.max_gap_quarters);
  });

  MissingResult result;
  result.data.spec = data.spec;
  result.data.provenance = data.provenance;
  const double total = static_cast<double>(data.spec.n_rows) * data.spec.n_cols * data.spec.quarters_per_day;
  auto& rep = result.report;
  rep.days_read = static_cast<int>(data.days.size());
  for (auto& f : filled) {
    const double frac = static_cast<double>(f.remaining_missing) / total;
    if (!f.any_observed || frac > policy.drop_fraction) {
      rep.dropped_day_ids.push_back(f.day.day_id);
      ++rep.days_dropped;
      continue;
    }
    rep.interpolated_cells += f.interpolated;
    ++rep.days_kept;
    result.data.days.push_back(std::move(f.day));
  }
  std::sort(result.data.days.begin(), result.data.days.end(),
            [](const DayRecord& a, const DayRecord& b) { return a.day_id < b.day_id; });
  return result;
}

}  // namespace hogfda
