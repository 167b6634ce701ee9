#include "hogfda/config.hpp"

#include "hogfda/errors.hpp"

#include <fstream>
#include <set>

namespace hogfda {

using nlohmann::json;

bool ValidationReport::has(std::string_view key) const {
  for (const auto& f : findings)
    if (f.key == key) return true;
  return false;
}

ValidationReport validate_config(const PipelineConfig& c) {
  ValidationReport rep;
  auto check = [&](bool ok, const char* key, const char* msg) {
    if (!ok) rep.findings.push_back({key, msg});
  };
  check(c.grid.n_rows >= 3, "grid.n_rows", "must be >= 3");
  check(c.grid.n_cols >= 3, "grid.n_cols", "must be >= 3");
  check(c.grid.cell_size_m > 0.0, "grid.cell_size_m", "must be positive");
  check(c.grid.quarters_per_day >= 2, "grid.quarters_per_day", "must be >= 2");
  check(c.roi.contained_in(c.grid), "roi", "must be a non-empty rectangle inside the grid");

  const auto& h = c.hog;
  check(h.cell_rows >= 1, "hog.cell_rows", "must be positive");
  check(h.cell_cols >= 1, "hog.cell_cols", "must be positive");
  check(h.n_bins >= 1, "hog.n_bins", "must be positive");
  check(h.block_cells >= 1, "hog.block_cells", "must be positive");
  check(h.block_stride_cells >= 1, "hog.block_stride_cells", "must be positive");
  check(h.norm_epsilon >= 0.0, "hog.norm_epsilon", "must be non-negative");
  if (h.cell_rows >= 1 && h.cell_cols >= 1 && h.block_cells >= 1 && c.grid.n_rows >= 1 && c.grid.n_cols >= 1) {
    check(c.grid.n_rows % h.cell_rows == 0, "hog.cell_rows", "must divide grid.n_rows");
    check(c.grid.n_cols % h.cell_cols == 0, "hog.cell_cols", "must divide grid.n_cols");
    check(c.grid.n_rows / h.cell_rows >= h.block_cells && c.grid.n_cols / h.cell_cols >= h.block_cells,
          "hog.block_cells", "HOG cell grid must hold at least one block");
  }

  const auto& k = c.kmeans;
  check(k.k_min >= 1 && k.k_min <= k.k_max, "kmeans.k_range", "must be a non-empty interval with min >= 1");
  check(k.restarts >= 1, "kmeans.restarts", "must be >= 1");
  check(k.tol >= 0.0, "kmeans.tol", "must be non-negative");
  check(k.max_iter >= 1, "kmeans.max_iter", "must be >= 1");
  check(k.elbow_tau > 0.0, "kmeans.tau", "must be positive");

  check(c.missing.max_gap_quarters >= 0, "missing.max_gap", "must be >= 0");
  check(c.missing.drop_fraction >= 0.0 && c.missing.drop_fraction <= 1.0, "missing.drop_fraction",
        "must lie in [0, 1]");

  check(c.n_basis >= 1 && c.n_basis % 2 == 1, "fda.n_basis", "must be a positive odd integer");
  check(c.n_basis < c.grid.quarters_per_day, "fda.n_basis", "must be smaller than grid.quarters_per_day");
  const auto& d = c.dfm;
  check(d.k_min >= 2 && d.k_min <= d.k_max, "fda.k_range", "must be a non-empty interval with min >= 2");
  check(d.k_max - 1 < c.n_basis, "fda.k_range", "max K - 1 must be smaller than fda.n_basis");
  check(d.em_tol > 0.0, "fda.em_tol", "must be positive");
  check(d.max_iter >= 1, "fda.max_iter", "must be >= 1");
  check(d.restarts >= 1, "fda.restarts", "must be >= 1");
  check(d.ridge > 0.0, "fda.ridge", "must be positive");
  check(d.beta_floor > 0.0, "fda.beta_floor", "must be positive");

  const auto& o = c.outliers;
  check(o.trim_alpha > 0.0 && o.trim_alpha < 0.5, "outliers.trim_alpha", "must lie in (0, 0.5)");
  check(o.smoothing_h > 0.0, "outliers.smoothing_h", "must be positive");
  check(o.n_boot >= 1, "outliers.n_boot", "must be >= 1");
  check(o.cutoff_percentile > 0.0 && o.cutoff_percentile <= 10.0, "outliers.cutoff_percentile",
        "must lie in (0, 10]");
  check(o.max_passes >= 1, "outliers.max_passes", "must be >= 1");

  check(c.boxplot.central_proportion > 0.0 && c.boxplot.central_proportion <= 1.0, "boxplot.central_proportion",
        "must lie in (0, 1]");
  check(c.boxplot.fence_factor >= 0.0, "boxplot.fence_factor", "must be non-negative");

  const auto& s = c.synthetic;
  check(s.n_days >= 1, "synthetic.n_days", "must be >= 1");
  check(s.noise_sigma >= 0.0, "synthetic.noise_sigma", "must be non-negative");
  check(s.quarter_noise_sigma >= 0.0, "synthetic.quarter_noise_sigma", "must be non-negative");
  check(s.missing_prob >= 0.0 && s.missing_prob < 1.0, "synthetic.missing_prob", "must lie in [0, 1)");
  check(s.n_outliers >= 0, "synthetic.n_outliers", "must be >= 0");
  check(s.shock_magnitude > 1.0, "synthetic.shock_magnitude", "must exceed 1");
  check(s.n_heavy_missing_days >= 0, "synthetic.n_heavy_missing_days", "must be >= 0");
  return rep;
}

namespace {

// Walks one section, rejecting unknown keys and type mismatches.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(path_, "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    const std::string full = path_.empty() ? key : path_ + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(full, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(full, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_integer() && !it->is_number_unsigned())
          throw ConfigError(full, "expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(full, "expected a number");
    }
    out = it->get<T>();
  }

  void range(const char* key, int& lo, int& hi) {
    seen_.insert(key);
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    const std::string full = path_ + "." + key;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() || !(*it)[1].is_number_integer())
      throw ConfigError(full, "expected [min, max] integers");
    lo = (*it)[0].get<int>();
    hi = (*it)[1].get<int>();
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError(path_.empty() ? it.key() : path_ + "." + it.key(), "unknown key");
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

PipelineConfig config_from_json(const json& doc) {
  PipelineConfig c;
  Section root(doc, "");
  if (auto* g = root.sub("grid")) {
    Section s(*g, "grid");
    s.get("n_rows", c.grid.n_rows);
    s.get("n_cols", c.grid.n_cols);
    s.get("cell_size_m", c.grid.cell_size_m);
    s.get("quarters_per_day", c.grid.quarters_per_day);
    s.finish();
  }
  // The ROI defaults to the whole grid, whatever its size.
  c.roi = RegionOfInterest::full(c.grid);
  if (auto* r = root.sub("roi")) {
    Section s(*r, "roi");
    s.range("rows", c.roi.row_min, c.roi.row_max);
    s.range("cols", c.roi.col_min, c.roi.col_max);
    s.finish();
  }
  if (auto* h = root.sub("hog")) {
    Section s(*h, "hog");
    s.get("cell_rows", c.hog.cell_rows);
    s.get("cell_cols", c.hog.cell_cols);
    s.get("n_bins", c.hog.n_bins);
    s.get("block_cells", c.hog.block_cells);
    s.get("block_stride_cells", c.hog.block_stride_cells);
    s.get("norm_epsilon", c.hog.norm_epsilon);
    s.finish();
  }
  if (auto* k = root.sub("kmeans")) {
    Section s(*k, "kmeans");
    s.range("k_range", c.kmeans.k_min, c.kmeans.k_max);
    s.get("restarts", c.kmeans.restarts);
    s.get("tol", c.kmeans.tol);
    s.get("max_iter", c.kmeans.max_iter);
    s.get("tau", c.kmeans.elbow_tau);
    s.finish();
  }
  if (auto* m = root.sub("missing")) {
    Section s(*m, "missing");
    s.get("max_gap", c.missing.max_gap_quarters);
    s.get("drop_fraction", c.missing.drop_fraction);
    s.finish();
  }
  if (auto* f = root.sub("fda")) {
    Section s(*f, "fda");
    s.get("n_basis", c.n_basis);
    s.range("k_range", c.dfm.k_min, c.dfm.k_max);
    s.get("em_tol", c.dfm.em_tol);
    s.get("max_iter", c.dfm.max_iter);
    s.get("restarts", c.dfm.restarts);
    s.get("ridge", c.dfm.ridge);
    s.get("beta_floor", c.dfm.beta_floor);
    s.finish();
  }
  if (auto* o = root.sub("outliers")) {
    Section s(*o, "outliers");
    s.get("trim_alpha", c.outliers.trim_alpha);
    s.get("smoothing_h", c.outliers.smoothing_h);
    s.get("n_boot", c.outliers.n_boot);
    s.get("cutoff_percentile", c.outliers.cutoff_percentile);
    s.get("max_passes", c.outliers.max_passes);
    s.finish();
  }
  if (auto* b = root.sub("boxplot")) {
    Section s(*b, "boxplot");
    s.get("central_proportion", c.boxplot.central_proportion);
    s.get("fence_factor", c.boxplot.fence_factor);
    s.finish();
  }
  if (auto* y = root.sub("synthetic")) {
    Section s(*y, "synthetic");
    s.get("n_days", c.synthetic.n_days);
    s.get("noise_sigma", c.synthetic.noise_sigma);
    s.get("quarter_noise_sigma", c.synthetic.quarter_noise_sigma);
    s.get("missing_prob", c.synthetic.missing_prob);
    s.get("n_outliers", c.synthetic.n_outliers);
    s.get("shock_magnitude", c.synthetic.shock_magnitude);
    s.get("n_heavy_missing_days", c.synthetic.n_heavy_missing_days);
    s.finish();
  }
  root.get("seed", c.seed);
  root.finish();
  return c;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["grid"] = {{"n_rows", c.grid.n_rows},
               {"n_cols", c.grid.n_cols},
               {"cell_size_m", c.grid.cell_size_m},
               {"quarters_per_day", c.grid.quarters_per_day}};
  j["roi"] = {{"rows", {c.roi.row_min, c.roi.row_max}}, {"cols", {c.roi.col_min, c.roi.col_max}}};
  j["hog"] = {{"cell_rows", c.hog.cell_rows},
              {"cell_cols", c.hog.cell_cols},
              {"n_bins", c.hog.n_bins},
              {"block_cells", c.hog.block_cells},
              {"block_stride_cells", c.hog.block_stride_cells},
              {"norm_epsilon", c.hog.norm_epsilon}};
  j["kmeans"] = {{"k_range", {c.kmeans.k_min, c.kmeans.k_max}},
                 {"restarts", c.kmeans.restarts},
                 {"tol", c.kmeans.tol},
                 {"max_iter", c.kmeans.max_iter},
                 {"tau", c.kmeans.elbow_tau}};
  j["missing"] = {{"max_gap", c.missing.max_gap_quarters}, {"drop_fraction", c.missing.drop_fraction}};
  j["fda"] = {{"n_basis", c.n_basis},
              {"k_range", {c.dfm.k_min, c.dfm.k_max}},
              {"em_tol", c.dfm.em_tol},
              {"max_iter", c.dfm.max_iter},
              {"restarts", c.dfm.restarts},
              {"ridge", c.dfm.ridge},
              {"beta_floor", c.dfm.beta_floor}};
  j["outliers"] = {{"trim_alpha", c.outliers.trim_alpha},
                   {"smoothing_h", c.outliers.smoothing_h},
                   {"n_boot", c.outliers.n_boot},
                   {"cutoff_percentile", c.outliers.cutoff_percentile},
                   {"max_passes", c.outliers.max_passes}};
  j["boxplot"] = {{"central_proportion", c.boxplot.central_proportion},
                  {"fence_factor", c.boxplot.fence_factor}};
  j["synthetic"] = {{"n_days", c.synthetic.n_days},
                    {"noise_sigma", c.synthetic.noise_sigma},
                    {"quarter_noise_sigma", c.synthetic.quarter_noise_sigma},
                    {"missing_prob", c.synthetic.missing_prob},
                    {"n_outliers", c.synthetic.n_outliers},
                    {"shock_magnitude", c.synthetic.shock_magnitude},
                    {"n_heavy_missing_days", c.synthetic.n_heavy_missing_days}};
  j["seed"] = c.seed;
  return j;
}

void require_valid(const PipelineConfig& cfg) {
  const auto rep = validate_config(cfg);
  if (!rep.ok()) throw ConfigError(rep.findings.front().key, rep.findings.front().message);
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "config file '" + path + "' is not valid JSON: " + e.what());
  }
  auto cfg = config_from_json(doc);
  require_valid(cfg);
  return cfg;
}

}  // namespace hogfda
