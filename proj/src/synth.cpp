#include "hogfda/synth.hpp"

#include "hogfda/errors.hpp"
#include "hogfda/parallel.hpp"
#include "hogfda/seeds.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace hogfda {

namespace {

const std::vector<Weekday> kWorkdays = {Weekday::Mon, Weekday::Tue, Weekday::Wed, Weekday::Thu, Weekday::Fri};

std::vector<ProfilePeak> workday_peaks() { return {{0.4375, 0.07, 1.0}, {0.6875, 0.08, 0.75}}; }
std::vector<ProfilePeak> saturday_peaks() { return {{0.50, 0.11, 1.0}, {0.75, 0.06, 0.5}}; }
std::vector<ProfilePeak> sunday_peaks() { return {{0.52, 0.13, 1.0}}; }

}  // namespace

SynthConfig SynthConfig::defaults() {
  SynthConfig cfg;
  // centre, NW, SE, NE, SW
  cfg.blobs = {{19, 19, 4.0}, {8, 9, 4.5}, {30, 29, 4.5}, {9, 30, 4.0}, {30, 9, 4.5}};
  const std::vector<int> winter = {10, 11, 12, 1, 2, 3};
  const std::vector<int> mid = {4, 5, 9};
  const std::vector<int> summer = {6, 7, 8};
  const std::vector<int> non_summer = {1, 2, 3, 4, 5, 9, 10, 11, 12};

  DayTypeSpec t;
  t = {"winter_weekday", kWorkdays, winter, 0.66, workday_peaks(), 0.15, {1.0, 0.2, 0.9, 0.2, 0.2}, 58000, {}};
  cfg.day_types.push_back(t);
  t = {"midseason_weekday", kWorkdays, mid, 0.66, workday_peaks(), 0.15, {1.0, 0.2, 0.2, 0.9, 0.2}, 55000, {}};
  cfg.day_types.push_back(t);
  t = {"summer_weekday", kWorkdays, summer, 0.66, workday_peaks(), 0.15, {0.5, 0.2, 0.2, 0.2, 0.9}, 0,
       {{"june", {6}, 55000}, {"july", {7}, 49000}, {"august", {8}, 43500}}};
  cfg.day_types.push_back(t);
  t = {"saturday", {Weekday::Sat}, non_summer, 0.70, saturday_peaks(), 0.15, {1.0, 0.9, 0.2, 0.2, 0.2}, 50000, {}};
  cfg.day_types.push_back(t);
  t = {"sunday", {Weekday::Sun}, non_summer, 0.72, sunday_peaks(), 0.15, {0.3, 0.9, 0.2, 0.9, 0.2}, 45000, {}};
  cfg.day_types.push_back(t);
  t = {"summer_weekend", {Weekday::Sat, Weekday::Sun}, summer, 0.72, sunday_peaks(), 0.15,
       {0.3, 0.2, 0.9, 0.2, 0.9}, 42000, {}};
  cfg.day_types.push_back(t);
  return cfg;
}

void validate_synth_config(const SynthConfig& cfg) {
  auto fail = [](const std::string& key, const std::string& msg) { throw ConfigError("synthetic." + key, msg); };
  try {
    check_grid(cfg.grid);
  } catch (const ArgumentError& e) {
    fail("grid", e.what());
  }
  if (cfg.last_date < cfg.first_date) fail("last_date", "precedes first_date");
  const auto span = cfg.last_date.serial() - cfg.first_date.serial() + 1;
  if (cfg.n_days < 1 || cfg.n_days > span)
    fail("n_days", "must lie in [1, " + std::to_string(span) + "] for the configured calendar");
  if (cfg.blobs.empty()) fail("blobs", "at least one blob required");
  for (const auto& b : cfg.blobs)
    if (!(b.width > 0.0)) fail("blobs", "blob widths must be positive");
  if (cfg.day_types.empty()) fail("day_types", "at least one day type required");
  std::set<std::pair<int, int>> covered;
  std::set<std::string> labels;
  for (const auto& t : cfg.day_types) {
    if (!labels.insert(t.label).second) fail("day_types", "duplicate label '" + t.label + "'");
    if (t.blob_weights.size() != cfg.blobs.size()) fail("day_types", t.label + ": one blob weight per blob required");
    if (!(t.base_weight >= 0.0)) fail("day_types", t.label + ": base weight must be non-negative");
    for (double w : t.blob_weights)
      if (!(w >= 0.0)) fail("day_types", t.label + ": blob weights must be non-negative");
    if (!(t.night_level > 0.0 && t.night_level <= 1.0)) fail("day_types", t.label + ": night level must lie in (0, 1]");
    for (auto wd : t.weekdays)
      for (int m : t.months) {
        if (m < 1 || m > 12) fail("day_types", t.label + ": month out of range");
        if (!covered.insert({static_cast<int>(wd), m}).second)
          fail("day_types", "(weekday, month) pair covered twice, by '" + t.label + "'");
      }
    if (t.tiers.empty()) {
      if (!(t.amplitude > 0.0)) fail("day_types", t.label + ": amplitude must be positive");
    } else {
      std::set<int> tier_months;
      for (const auto& tier : t.tiers) {
        if (!(tier.amplitude > 0.0)) fail("day_types", t.label + ": tier amplitude must be positive");
        for (int m : tier.months)
          if (!tier_months.insert(m).second) fail("day_types", t.label + ": tier months overlap");
      }
      if (tier_months != std::set<int>(t.months.begin(), t.months.end()))
        fail("day_types", t.label + ": tiers must cover the type's months exactly");
    }
  }
  if (covered.size() != 84) fail("day_types", "every (weekday, month) pair must be covered exactly once");
  if (!(cfg.noise_sigma >= 0.0)) fail("noise_sigma", "must be non-negative");
  if (!(cfg.quarter_noise_sigma >= 0.0)) fail("quarter_noise_sigma", "must be non-negative");
  if (!(cfg.missing_prob >= 0.0 && cfg.missing_prob < 1.0)) fail("missing_prob", "must lie in [0, 1)");
  if (cfg.n_outliers < 0) fail("n_outliers", "must be non-negative");
  if (!(cfg.shock_magnitude > 1.0)) fail("shock_magnitude", "must exceed 1");
  if (cfg.n_outliers > 0 && !labels.count(cfg.outlier_type))
    fail("outlier_type", "unknown day type '" + cfg.outlier_type + "'");
  if (cfg.n_heavy_missing_days < 0) fail("n_heavy_missing_days", "must be non-negative");
  if (!(cfg.heavy_missing_fraction > 0.0 && cfg.heavy_missing_fraction <= 1.0))
    fail("heavy_missing_fraction", "must lie in (0, 1]");
}

Vector type_profile(const DayTypeSpec& type, int quarters) {
  Vector bump = Vector::Zero(quarters);
  for (int j = 0; j < quarters; ++j) {
    const double t = (j + 0.5) / quarters;
    for (const auto& p : type.peaks) bump[j] += p.height * std::exp(-0.5 * std::pow((t - p.center) / p.width, 2));
  }
  const double mx = bump.maxCoeff();
  const double mn = bump.minCoeff();
  if (!(mx > mn)) return Vector::Ones(quarters);
  return (type.night_level + (1.0 - type.night_level) * ((bump.array() - mn) / (mx - mn))).matrix();
}

Matrix type_field(const DayTypeSpec& type, const std::vector<BlobSpec>& blobs, const GridSpec& grid) {
  Matrix f = Matrix::Constant(grid.n_rows, grid.n_cols, type.base_weight / (grid.n_rows * grid.n_cols));
  for (std::size_t b = 0; b < blobs.size(); ++b) {
    const auto& blob = blobs[b];
    Matrix g(grid.n_rows, grid.n_cols);
    for (int c = 0; c < grid.n_cols; ++c)
      for (int r = 0; r < grid.n_rows; ++r) {
        const double dr = (r - blob.row) / blob.width;
        const double dc = (c - blob.col) / blob.width;
        g(r, c) = std::exp(-0.5 * (dr * dr + dc * dc));
      }
    f += type.blob_weights[b] * g / g.sum();
  }
  return f / f.sum();
}

double type_amplitude(const DayTypeSpec& type, int month, int* tier) {
  if (tier) *tier = 0;
  for (std::size_t i = 0; i < type.tiers.size(); ++i) {
    const auto& m = type.tiers[i].months;
    if (std::find(m.begin(), m.end(), month) != m.end()) {
      if (tier) *tier = static_cast<int>(i);
      return type.tiers[i].amplitude;
    }
  }
  return type.amplitude;
}

int GroundTruth::type_of(std::string_view id) const {
  for (std::size_t i = 0; i < day_ids.size(); ++i)
    if (day_ids[i] == id) return type_labels[i];
  return -1;
}

int GroundTruth::subgroup_of(std::string_view id) const {
  for (std::size_t i = 0; i < day_ids.size(); ++i)
    if (day_ids[i] == id) return subgroup_labels[i];
  return -1;
}

bool GroundTruth::is_outlier(std::string_view id) const {
  return std::find(outlier_ids.begin(), outlier_ids.end(), id) != outlier_ids.end();
}

namespace {

// `count` indices spread evenly over [0, n).
std::vector<std::size_t> spread(std::size_t count, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < count; ++j)
    out.push_back(static_cast<std::size_t>((static_cast<double>(j) + 0.5) * static_cast<double>(n) /
                                           static_cast<double>(count)));
  return out;
}

int type_index(const SynthConfig& cfg, const Date& d) {
  const Weekday wd = d.weekday();
  for (std::size_t i = 0; i < cfg.day_types.size(); ++i) {
    const auto& t = cfg.day_types[i];
    if (std::find(t.weekdays.begin(), t.weekdays.end(), wd) != t.weekdays.end() &&
        std::find(t.months.begin(), t.months.end(), d.month) != t.months.end())
      return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

SynthOutput generate(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  const GridSpec& grid = cfg.grid;
  const int q = grid.quarters_per_day;

  // Calendar, thinned evenly to n_days. Independent of the seed.
  std::vector<Date> dates;
  for (auto s = cfg.first_date.serial(); s <= cfg.last_date.serial(); ++s) dates.push_back(Date::from_serial(s));
  if (static_cast<int>(dates.size()) > cfg.n_days) {
    const auto skip = spread(dates.size() - static_cast<std::size_t>(cfg.n_days), dates.size());
    std::vector<Date> kept;
    std::size_t next = 0;
    for (std::size_t i = 0; i < dates.size(); ++i) {
      if (next < skip.size() && skip[next] == i) {
        ++next;
        continue;
      }
      kept.push_back(dates[i]);
    }
    dates = std::move(kept);
  }
  const std::size_t n = dates.size();

  SynthOutput out;
  auto& truth = out.truth;
  for (const auto& t : cfg.day_types) truth.type_names.push_back(t.label);
  truth.day_ids.resize(n);
  truth.type_labels.resize(n);
  truth.subgroup_labels.resize(n);
  std::vector<double> amplitude(n);
  for (std::size_t i = 0; i < n; ++i) {
    truth.day_ids[i] = dates[i].iso();
    truth.type_labels[i] = type_index(cfg, dates[i]);
    amplitude[i] = type_amplitude(cfg.day_types[static_cast<std::size_t>(truth.type_labels[i])], dates[i].month,
                                  &truth.subgroup_labels[i]);
  }

  std::vector<double> shock(n, 1.0);
  if (cfg.n_outliers > 0) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (cfg.day_types[static_cast<std::size_t>(truth.type_labels[i])].label == cfg.outlier_type) members.push_back(i);
    if (members.size() < static_cast<std::size_t>(cfg.n_outliers))
      throw ConfigError("synthetic.n_outliers", "more outliers than days of type '" + cfg.outlier_type + "'");
    const auto picks = spread(static_cast<std::size_t>(cfg.n_outliers), members.size());
    for (std::size_t j = 0; j < picks.size(); ++j) {
      const std::size_t i = members[picks[j]];
      shock[i] = j % 2 == 0 ? cfg.shock_magnitude : 1.0 / cfg.shock_magnitude;
      truth.outlier_ids.push_back(truth.day_ids[i]);
    }
  }

  std::vector<bool> heavy(n, false);
  if (cfg.n_heavy_missing_days > 0) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i)
      if (shock[i] == 1.0) candidates.push_back(i);
    if (candidates.size() < static_cast<std::size_t>(cfg.n_heavy_missing_days))
      throw ConfigError("synthetic.n_heavy_missing_days", "exceeds the number of available days");
    for (std::size_t j : spread(static_cast<std::size_t>(cfg.n_heavy_missing_days), candidates.size())) {
      heavy[candidates[j]] = true;
      truth.heavy_missing_ids.push_back(truth.day_ids[candidates[j]]);
    }
  }

  std::vector<Vector> profiles;
  std::vector<Matrix> fields;
  for (const auto& t : cfg.day_types) {
    profiles.push_back(type_profile(t, q));
    fields.push_back(type_field(t, cfg.blobs, grid));
  }
  const int heavy_len = std::max(1, static_cast<int>(std::lround(cfg.heavy_missing_fraction * q)));
  const int heavy_start = std::min(q / 4, q - heavy_len);

  out.data.spec = grid;
  out.data.provenance = "synthetic seed=" + std::to_string(cfg.seed);
  if (grid == GridSpec{}) out.data.provenance += "; region: " + std::string(kDefaultRegionNote);
  out.data.days.resize(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = make_rng(cfg.seed, "synth", {static_cast<std::uint64_t>(dates[i].serial())});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto type = static_cast<std::size_t>(truth.type_labels[i]);
    const Matrix base = amplitude[i] * shock[i] * fields[type];
    const double cell_bias = -0.5 * cfg.noise_sigma * cfg.noise_sigma;
    DayRecord day{truth.day_ids[i], dates[i], {}};
    day.snapshots.reserve(static_cast<std::size_t>(q));
    for (int t = 0; t < q; ++t) {
      GridSnapshot s;
      s.day_id = day.day_id;
      s.quarter = t;
      double level = profiles[type][t];
      if (cfg.quarter_noise_sigma > 0.0)
        level = std::max(1e-3, level + cfg.quarter_noise_sigma * normal(rng));
      s.values = base * level;
      if (cfg.noise_sigma > 0.0)
        for (Eigen::Index c = 0; c < s.values.cols(); ++c)
          for (Eigen::Index r = 0; r < s.values.rows(); ++r)
            s.values(r, c) *= std::exp(cfg.noise_sigma * normal(rng) + cell_bias);
      const bool drop_quarter = unif(rng) < cfg.missing_prob;
      const bool heavy_gap = heavy[i] && t >= heavy_start && t < heavy_start + heavy_len;
      const bool observed = !(drop_quarter || heavy_gap);
      s.mask = Mask::Constant(grid.n_rows, grid.n_cols, observed);
      if (!observed) s.values.setZero();
      day.snapshots.push_back(std::move(s));
    }
    out.data.days[i] = std::move(day);
  });
  return out;
}

void write_ground_truth_json(const std::string& path, const GroundTruth& truth) {
  nlohmann::json j;
  j["day_types"] = truth.type_names;
  auto& days = j["days"] = nlohmann::json::array();
  for (std::size_t i = 0; i < truth.day_ids.size(); ++i)
    days.push_back({{"day_id", truth.day_ids[i]},
                    {"type", truth.type_labels[i]},
                    {"subgroup", truth.subgroup_labels[i]},
                    {"outlier", truth.is_outlier(truth.day_ids[i])}});
  j["outlier_ids"] = truth.outlier_ids;
  j["heavy_missing_ids"] = truth.heavy_missing_ids;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

GroundTruth read_ground_truth_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  GroundTruth t;
  try {
    const auto j = nlohmann::json::parse(in);
    t.type_names = j.at("day_types").get<std::vector<std::string>>();
    for (const auto& d : j.at("days")) {
      t.day_ids.push_back(d.at("day_id").get<std::string>());
      t.type_labels.push_back(d.at("type").get<int>());
      t.subgroup_labels.push_back(d.at("subgroup").get<int>());
    }
    t.outlier_ids = j.at("outlier_ids").get<std::vector<std::string>>();
    t.heavy_missing_ids = j.at("heavy_missing_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return t;
}

}  // namespace hogfda
