#include "hogfda/pipeline.hpp"

#include "hogfda/errors.hpp"
#include "hogfda/parallel.hpp"
#include "hogfda/seeds.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace hogfda {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kMinOutlierCurves = 10;

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::string_view cstr(const std::string& s) { return s; }

}  // namespace

std::vector<std::string> ClusterAnalysis::member_ids() const {
  std::vector<std::string> ids;
  ids.reserve(curves.size());
  for (const auto& c : curves) ids.push_back(c.day_id);
  return ids;
}

std::vector<std::string> ClusterAnalysis::kept_ids() const {
  std::vector<std::string> ids;
  ids.reserve(smoothed.size());
  for (const auto& s : smoothed) ids.push_back(s.day_id);
  return ids;
}

DayClustering cluster_days(const FeatureMatrix& features, const KmeansParams& params, std::uint64_t seed,
                           std::optional<int> forced_k) {
  const int n = static_cast<int>(features.n_days());
  if (n == 0) throw DataError("no days to cluster");
  DayClustering out;
  out.day_ids = features.day_ids;
  KmeansResult fit;
  if (forced_k) {
    if (*forced_k < 1 || *forced_k > n)
      throw ArgumentError("forced k = " + std::to_string(*forced_k) + " outside [1, " + std::to_string(n) + "]");
    out.forced = true;
    out.k = *forced_k;
    fit = kmeans_fit(features.columns, out.k, params.restarts, seed, params.tol, params.max_iter);
  } else {
    if (params.k_min > n)
      throw ArgumentError("kmeans k_min = " + std::to_string(params.k_min) + " exceeds the " + std::to_string(n) +
                          " available days");
    const int k_max = std::min(params.k_max, n);
    auto curve = deviance_ratio_curve(features.columns, params.k_min, k_max, params.restarts, seed, params.tol,
                                      params.max_iter);
    out.curve = curve.points;
    out.elbow = select_k_elbow(curve.points, params.elbow_tau);
    out.k = out.elbow.k;
    fit = std::move(curve.fits[static_cast<std::size_t>(out.k - params.k_min)]);
  }
  out.labels = fit.assignments;
  out.within_deviance = fit.within_deviance;
  out.total_deviance = fit.total_deviance;
  return out;
}

std::vector<ClusterAnalysis> split_curves(const CurveSet& curves, const DayClustering& days) {
  std::unordered_map<std::string_view, const Curve*> by_id;
  for (const auto& c : curves) by_id.emplace(cstr(c.day_id), &c);
  std::vector<ClusterAnalysis> out(static_cast<std::size_t>(days.k));
  for (int c = 0; c < days.k; ++c) out[static_cast<std::size_t>(c)].cluster = c;
  for (std::size_t i = 0; i < days.day_ids.size(); ++i) {
    const int label = days.labels.at(i);
    if (label < 0 || label >= days.k) throw DataError("day " + days.day_ids[i] + " has cluster label out of range");
    auto it = by_id.find(days.day_ids[i]);
    if (it == by_id.end()) throw DataError("no DDP for clustered day " + days.day_ids[i]);
    out[static_cast<std::size_t>(label)].curves.push_back(*it->second);
  }
  return out;
}

std::vector<ClusterAnalysis> split_clusters(const DayCollection& data, const RegionOfInterest& roi,
                                            const DayClustering& days) {
  CurveSet curves(data.days.size());
  parallel_for(data.days.size(), [&](std::size_t i) { curves[i] = extract_ddp(data.days[i], roi); });
  return split_curves(curves, days);
}

void analyse_outliers(ClusterAnalysis& cluster, const OutlierParams& params, std::uint64_t seed) {
  cluster.outliers.clear();
  cluster.outlier_history.clear();
  if (static_cast<int>(cluster.curves.size()) < kMinOutlierCurves) {
    cluster.outliers_checked = false;
    cluster.outlier_notes.push_back("outlier detection skipped: " + std::to_string(cluster.curves.size()) +
                            " curves, at least " + std::to_string(kMinOutlierCurves) + " needed");
    return;
  }
  auto res = detect_outliers(cluster.curves, params, seed);
  cluster.outliers_checked = true;
  cluster.outliers = std::move(res.flagged);
  cluster.outlier_history = std::move(res.history);
}

void smooth_cluster(ClusterAnalysis& cluster, const FourierBasis& basis) {
  const std::set<std::string> flagged(cluster.outliers.begin(), cluster.outliers.end());
  CurveSet kept;
  for (const auto& c : cluster.curves)
    if (!flagged.count(c.day_id)) kept.push_back(c);
  cluster.smoothed = smooth_curves(kept, basis);
}

void analyse_fda(ClusterAnalysis& cluster, const DfmConfig& cfg, std::uint64_t seed) {
  const int n = static_cast<int>(cluster.smoothed.size());
  cluster.bic.clear();
  const auto single_group = [&](const std::string& why) {
    cluster.fda_clustered = false;
    cluster.K = n > 0 ? 1 : 0;
    cluster.labels.assign(static_cast<std::size_t>(n), 0);
    cluster.posterior = Matrix::Ones(n, cluster.K);
    cluster.fda_notes.push_back(why);
  };
  if (n == 0) {
    single_group("no curves left for FDA clustering");
    return;
  }
  const int d = static_cast<int>(cluster.smoothed.front().coefficients.size());
  const int k_max = std::min({cfg.k_max, n - 1, d});
  if (k_max < cfg.k_min) {
    single_group("FDA clustering skipped: " + std::to_string(n) + " curves cannot support K >= " +
                 std::to_string(cfg.k_min));
    return;
  }
  DfmConfig local = cfg;
  local.k_max = k_max;
  if (k_max < cfg.k_max)
    cluster.fda_notes.push_back("FDA K range clamped to [" + std::to_string(cfg.k_min) + ", " + std::to_string(k_max) +
                            "]");
  const auto sel = dfm_select(coefficient_matrix(cluster.smoothed), local, seed);
  cluster.fda_clustered = true;
  cluster.bic = sel.table;
  const auto hard = sel.best.hard_labels();
  // Groups without hard members are dropped and the rest renumbered.
  std::vector<int> remap(static_cast<std::size_t>(sel.best.K), -1);
  for (int l : hard) remap[static_cast<std::size_t>(l)] = 0;
  std::vector<Eigen::Index> cols;
  int next = 0;
  for (int k = 0; k < sel.best.K; ++k)
    if (remap[static_cast<std::size_t>(k)] == 0) {
      remap[static_cast<std::size_t>(k)] = next++;
      cols.push_back(k);
    }
  if (next < sel.best.K)
    cluster.fda_notes.push_back(std::to_string(sel.best.K - next) + " of " + std::to_string(sel.best.K) +
                            " FDA groups had no members and were dropped");
  cluster.K = next;
  cluster.labels.resize(hard.size());
  for (std::size_t i = 0; i < hard.size(); ++i) cluster.labels[i] = remap[static_cast<std::size_t>(hard[i])];
  cluster.posterior = sel.best.responsibilities(Eigen::all, cols);
}

void analyse_boxplots(ClusterAnalysis& cluster, const BoxplotParams& params, const FourierBasis& basis) {
  std::unordered_map<std::string_view, const Curve*> by_id;
  for (const auto& c : cluster.curves) by_id.emplace(cstr(c.day_id), &c);
  cluster.groups.clear();
  for (int g = 0; g < cluster.K; ++g) {
    SubCluster sub;
    sub.group = g;
    CurveSet members;
    for (std::size_t i = 0; i < cluster.smoothed.size(); ++i) {
      if (cluster.labels.at(i) != g) continue;
      auto it = by_id.find(cluster.smoothed[i].day_id);
      if (it == by_id.end()) throw DataError("no DDP for day " + cluster.smoothed[i].day_id);
      members.push_back(*it->second);
      sub.day_ids.push_back(cluster.smoothed[i].day_id);
    }
    if (members.empty()) throw NumericError("empty FDA group " + std::to_string(g));
    Vector mean = Vector::Zero(members.front().values.size());
    for (const auto& m : members) mean += m.values;
    mean /= static_cast<double>(members.size());
    sub.centroid = smooth_curve(Curve{"", mean}, basis).fitted;
    sub.boxplot = functional_boxplot(members, params.central_proportion, params.fence_factor);
    cluster.groups.push_back(std::move(sub));
  }
}

SynthConfig synth_config_for(const PipelineConfig& cfg) {
  SynthConfig s = SynthConfig::defaults();
  const GridSpec base = s.grid;
  if (!(cfg.grid == base)) {
    const double sr = static_cast<double>(cfg.grid.n_rows) / base.n_rows;
    const double sc = static_cast<double>(cfg.grid.n_cols) / base.n_cols;
    for (auto& b : s.blobs) {
      b.row *= sr;
      b.col *= sc;
      b.width *= std::min(sr, sc);
    }
  }
  s.grid = cfg.grid;
  s.seed = cfg.seed;
  s.n_days = cfg.synthetic.n_days;
  s.noise_sigma = cfg.synthetic.noise_sigma;
  s.quarter_noise_sigma = cfg.synthetic.quarter_noise_sigma;
  s.missing_prob = cfg.synthetic.missing_prob;
  s.n_outliers = cfg.synthetic.n_outliers;
  s.shock_magnitude = cfg.synthetic.shock_magnitude;
  s.n_heavy_missing_days = cfg.synthetic.n_heavy_missing_days;
  validate_synth_config(s);
  return s;
}

PipelineReport run_pipeline(const PipelineConfig& cfg, const PipelineInput& input, const PipelineOptions& options) {
  require_valid(cfg);
  PipelineReport report;
  report.config = cfg;

  using clock = std::chrono::steady_clock;
  std::string current;
  auto started = clock::now();
  const auto close_stage = [&] {
    if (current.empty()) return;
    report.timings.push_back({current, std::chrono::duration<double>(clock::now() - started).count()});
    current.clear();
  };
  const auto stage = [&](std::string name) {
    close_stage();
    current = std::move(name);
    started = clock::now();
    if (options.on_stage) options.on_stage(current);
  };

  DayCollection raw;
  if (input.synthetic) {
    stage("simulate");
    auto synth = generate(synth_config_for(cfg));
    raw = std::move(synth.data);
    report.truth = std::move(synth.truth);
    report.input = "synthetic";
  } else {
    stage("ingest");
    raw = read_long_csv(input.csv_path, cfg.grid);
    report.input = input.csv_path;
  }
  report.provenance = raw.provenance;
  for (const auto& d : raw.days) report.input_day_ids.push_back(d.day_id);

  stage("missing");
  auto cleaned = handle_missing(raw, cfg.missing);
  raw = {};
  report.ingest = cleaned.report;
  const DayCollection& data = cleaned.data;
  if (data.days.empty()) throw DataError("no day left after missing-value handling");

  stage("features");
  report.features = build_feature_matrix(data, cfg.hog);

  stage("cluster-days");
  report.days = cluster_days(report.features, cfg.kmeans, derive_seed(cfg.seed, "day-clusters"), options.forced_k);

  stage("ddp");
  report.clusters = split_clusters(data, cfg.roi, report.days);

  stage("outliers");
  for (auto& c : report.clusters)
    analyse_outliers(c, cfg.outliers, derive_seed(cfg.seed, "outlier-stage", {static_cast<std::uint64_t>(c.cluster)}));

  stage("smooth");
  const FourierBasis basis(cfg.n_basis, cfg.grid.quarters_per_day);
  for (auto& c : report.clusters) smooth_cluster(c, basis);

  stage("fda-cluster");
  for (auto& c : report.clusters)
    analyse_fda(c, cfg.dfm, derive_seed(cfg.seed, "fda-stage", {static_cast<std::uint64_t>(c.cluster)}));

  stage("fboxplot");
  for (auto& c : report.clusters) analyse_boxplots(c, cfg.boxplot, basis);
  close_stage();

  check_day_conservation(report);
  return report;
}

void check_day_conservation(const PipelineReport& report) {
  std::map<std::string, int> seen;
  for (const auto& id : report.ingest.dropped_day_ids) ++seen[id];
  for (const auto& c : report.clusters) {
    for (const auto& id : c.outliers) ++seen[id];
    for (const auto& g : c.groups)
      for (const auto& id : g.day_ids) ++seen[id];
  }
  std::set<std::string> input(report.input_day_ids.begin(), report.input_day_ids.end());
  for (const auto& id : input) {
    auto it = seen.find(id);
    const int count = it == seen.end() ? 0 : it->second;
    if (count != 1)
      throw NumericError("day conservation violated: day " + id + " accounted " + std::to_string(count) + " times");
  }
  for (const auto& [id, count] : seen)
    if (!input.count(id)) throw NumericError("day conservation violated: unknown day " + id);
}

json ingest_to_json(const IngestReport& r) {
  return {{"days_read", r.days_read},
          {"days_kept", r.days_kept},
          {"days_dropped", r.days_dropped},
          {"interpolated_cells", r.interpolated_cells},
          {"dropped_day_ids", r.dropped_day_ids}};
}

json day_clusters_to_json(const DayClustering& days) {
  json curve = json::array();
  for (const auto& p : days.curve) curve.push_back({{"k", p.k}, {"ratio", p.ratio}});
  json assignments = json::array();
  for (std::size_t i = 0; i < days.day_ids.size(); ++i)
    assignments.push_back({{"day_id", days.day_ids[i]}, {"label", days.labels[i]}});
  return {{"ratio_curve", curve},
          {"elbow_k", days.forced ? json(nullptr) : json(days.elbow.k)},
          {"warning", days.elbow.warning},
          {"forced", days.forced},
          {"k", days.k},
          {"within_deviance", days.within_deviance},
          {"total_deviance", days.total_deviance},
          {"assignments", assignments}};
}

DayClustering day_clusters_from_json(const json& doc) {
  try {
    DayClustering d;
    for (const auto& p : doc.at("ratio_curve")) d.curve.push_back({p.at("k").get<int>(), p.at("ratio").get<double>()});
    d.forced = doc.at("forced").get<bool>();
    d.k = doc.at("k").get<int>();
    d.elbow.k = d.forced ? 0 : doc.at("elbow_k").get<int>();
    d.elbow.warning = doc.at("warning").get<bool>();
    d.within_deviance = doc.at("within_deviance").get<double>();
    d.total_deviance = doc.at("total_deviance").get<double>();
    for (const auto& a : doc.at("assignments")) {
      d.day_ids.push_back(a.at("day_id").get<std::string>());
      d.labels.push_back(a.at("label").get<int>());
    }
    return d;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed day cluster file: ") + e.what());
  }
}

json outliers_to_json(const std::vector<ClusterAnalysis>& clusters) {
  json arr = json::array();
  for (const auto& c : clusters) {
    json passes = json::array();
    for (const auto& p : c.outlier_history)
      passes.push_back({{"pass", p.pass}, {"n_curves", p.n_curves}, {"cutoff", p.cutoff}, {"flagged", p.flagged}});
    arr.push_back({{"cluster", c.cluster},
                   {"n_curves", c.curves.size()},
                   {"checked", c.outliers_checked},
                   {"flagged", c.outliers},
                   {"passes", passes},
                   {"notes", c.outlier_notes}});
  }
  return {{"clusters", arr}};
}

std::vector<std::string> flagged_from_json(const json& doc) {
  try {
    std::vector<std::string> out;
    for (const auto& c : doc.at("clusters"))
      for (const auto& id : c.at("flagged")) out.push_back(id.get<std::string>());
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed outlier file: ") + e.what());
  }
}

namespace {

json bic_to_json(const std::vector<BicEntry>& table) {
  json arr = json::array();
  for (const auto& e : table) {
    json row = {{"K", e.K}, {"ok", e.ok}, {"n_parameters", e.n_parameters}};
    if (e.ok) {
      row["loglik"] = e.loglik;
      row["bic"] = e.bic;
    } else {
      row["message"] = e.message;
    }
    arr.push_back(row);
  }
  return arr;
}

json boxplot_to_json(const FunctionalBoxplot& b) {
  return {{"median_day_id", b.median_day_id},
          {"median", to_std(b.median)},
          {"central_lower", to_std(b.central_lower)},
          {"central_upper", to_std(b.central_upper)},
          {"fence_lower", to_std(b.fence_lower)},
          {"fence_upper", to_std(b.fence_upper)},
          {"whisker_lower", to_std(b.whisker_lower)},
          {"whisker_upper", to_std(b.whisker_upper)},
          {"outlier_day_ids", b.outlier_day_ids},
          {"depths", b.depths}};
}

}  // namespace

json fda_clusters_to_json(const std::vector<ClusterAnalysis>& clusters) {
  json arr = json::array();
  for (const auto& c : clusters) {
    json assignments = json::array();
    for (std::size_t i = 0; i < c.smoothed.size(); ++i) {
      std::vector<double> post;
      if (c.posterior.rows() == static_cast<Eigen::Index>(c.smoothed.size()))
        for (Eigen::Index k = 0; k < c.posterior.cols(); ++k) post.push_back(c.posterior(static_cast<Eigen::Index>(i), k));
      assignments.push_back({{"day_id", c.smoothed[i].day_id}, {"group", c.labels.at(i)}, {"posterior", post}});
    }
    arr.push_back({{"cluster", c.cluster},
                   {"clustered", c.fda_clustered},
                   {"K", c.K},
                   {"bic", bic_to_json(c.bic)},
                   {"assignments", assignments},
                   {"notes", c.fda_notes}});
  }
  return {{"clusters", arr}};
}

void apply_fda_json(std::vector<ClusterAnalysis>& clusters, const json& doc) {
  try {
    for (const auto& entry : doc.at("clusters")) {
      const int id = entry.at("cluster").get<int>();
      auto it = std::find_if(clusters.begin(), clusters.end(), [&](const ClusterAnalysis& c) { return c.cluster == id; });
      if (it == clusters.end()) throw DataError("FDA file names unknown cluster " + std::to_string(id));
      it->fda_clustered = entry.at("clustered").get<bool>();
      it->K = entry.at("K").get<int>();
      it->smoothed.clear();
      it->labels.clear();
      for (const auto& a : entry.at("assignments")) {
        SmoothedCurve s;
        s.day_id = a.at("day_id").get<std::string>();
        it->smoothed.push_back(std::move(s));
        const int g = a.at("group").get<int>();
        if (g < 0 || g >= it->K) throw DataError("FDA group out of range for day " + it->smoothed.back().day_id);
        it->labels.push_back(g);
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed FDA cluster file: ") + e.what());
  }
}

json fboxplot_to_json(const std::vector<ClusterAnalysis>& clusters) {
  json arr = json::array();
  for (const auto& c : clusters) {
    json groups = json::array();
    for (const auto& g : c.groups)
      groups.push_back({{"group", g.group},
                        {"day_ids", g.day_ids},
                        {"centroid", to_std(g.centroid)},
                        {"boxplot", boxplot_to_json(g.boxplot)}});
    arr.push_back({{"cluster", c.cluster}, {"groups", groups}});
  }
  return {{"clusters", arr}};
}

json report_to_json(const PipelineReport& r) {
  json clusters = json::array();
  std::size_t n_outliers = 0, n_kept = 0;
  for (const auto& c : r.clusters) {
    json passes = json::array();
    for (const auto& p : c.outlier_history)
      passes.push_back({{"pass", p.pass}, {"n_curves", p.n_curves}, {"cutoff", p.cutoff}, {"flagged", p.flagged}});
    json groups = json::array();
    for (const auto& g : c.groups) {
      groups.push_back({{"group", g.group},
                        {"day_ids", g.day_ids},
                        {"centroid", to_std(g.centroid)},
                        {"boxplot", boxplot_to_json(g.boxplot)}});
      n_kept += g.day_ids.size();
    }
    n_outliers += c.outliers.size();
    clusters.push_back({{"cluster", c.cluster},
                        {"members", c.member_ids()},
                        {"outliers_checked", c.outliers_checked},
                        {"outliers", c.outliers},
                        {"outlier_passes", passes},
                        {"fda_clustered", c.fda_clustered},
                        {"K", c.K},
                        {"bic", bic_to_json(c.bic)},
                        {"groups", groups},
                        {"outlier_notes", c.outlier_notes},
                        {"fda_notes", c.fda_notes}});
  }
  return {{"config", config_to_json(r.config)},
          {"input", r.input},
          {"provenance", r.provenance},
          {"ingest", ingest_to_json(r.ingest)},
          {"feature_dimension", r.features.dimension()},
          {"day_clustering", day_clusters_to_json(r.days)},
          {"clusters", clusters},
          {"conservation",
           {{"input_days", r.input_day_ids.size()},
            {"dropped", r.ingest.dropped_day_ids.size()},
            {"outliers", n_outliers},
            {"kept", n_kept}}}};
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory '" + dir + "'");
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

std::vector<std::string> emit_plot_data(const std::vector<ClusterAnalysis>& clusters, const std::string& out_dir) {
  ensure_directory((fs::path(out_dir) / "plots").string());
  std::vector<std::string> written;
  char buf[64];
  const auto num = [&](std::string& line, double v) {
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    line += ',';
    line.append(buf, res.ptr);
  };
  for (const auto& c : clusters) {
    std::unordered_map<std::string_view, const Curve*> by_id;
    for (const auto& curve : c.curves) by_id.emplace(cstr(curve.day_id), &curve);
    for (const auto& g : c.groups) {
      const std::string rel = "plots/cluster" + std::to_string(c.cluster) + "_group" + std::to_string(g.group) + ".csv";
      const std::string path = (fs::path(out_dir) / rel).string();
      std::ofstream out(path, std::ios::binary);
      if (!out) throw DataError("cannot write '" + path + "'");
      std::string line =
          "quarter,centroid,median,central_lower,central_upper,whisker_lower,whisker_upper,fence_lower,fence_upper";
      std::vector<const Vector*> members;
      for (const auto& id : g.day_ids) {
        line += ',' + id;
        members.push_back(&by_id.at(id)->values);
      }
      out << line << '\n';
      const auto& b = g.boxplot;
      for (Eigen::Index t = 0; t < g.centroid.size(); ++t) {
        line = std::to_string(t);
        for (const Vector* v : {&g.centroid, &b.median, &b.central_lower, &b.central_upper, &b.whisker_lower,
                                &b.whisker_upper, &b.fence_lower, &b.fence_upper})
          num(line, (*v)[t]);
        for (const Vector* m : members) num(line, (*m)[t]);
        out << line << '\n';
      }
      if (!out) throw DataError("write failed for '" + path + "'");
      written.push_back(rel);
    }
  }
  return written;
}

std::vector<ManifestEntry> write_manifest(const std::string& out_dir, std::vector<std::string> files) {
  std::sort(files.begin(), files.end());
  std::vector<ManifestEntry> entries;
  json arr = json::array();
  for (const auto& rel : files) {
    const std::string path = (fs::path(out_dir) / rel).string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path + "' for the manifest");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    entries.push_back({rel, bytes.size(), hex});
    arr.push_back({{"path", rel}, {"bytes", bytes.size()}, {"fnv1a64", hex}});
  }
  write_json_file((fs::path(out_dir) / "manifest.json").string(), {{"files", arr}});
  return entries;
}

std::vector<ManifestEntry> write_pipeline_outputs(const PipelineReport& report, const std::string& out_dir) {
  ensure_directory(out_dir);
  const auto at = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };
  std::vector<std::string> files;

  write_json_file(at("report.json"), report_to_json(report));
  files.push_back("report.json");
  write_json_file(at("ingest.json"), ingest_to_json(report.ingest));
  files.push_back("ingest.json");
  write_features_csv(at("features.csv"), report.features);
  files.push_back("features.csv");
  write_json_file(at("day_clusters.json"), day_clusters_to_json(report.days));
  files.push_back("day_clusters.json");

  // DDPs and smoothed curves in day order, across clusters.
  std::unordered_map<std::string_view, const Curve*> curve_of;
  std::unordered_map<std::string_view, const SmoothedCurve*> smooth_of;
  for (const auto& c : report.clusters) {
    for (const auto& curve : c.curves) curve_of.emplace(cstr(curve.day_id), &curve);
    for (const auto& s : c.smoothed) smooth_of.emplace(cstr(s.day_id), &s);
  }
  CurveSet ddps;
  std::vector<SmoothedCurve> smoothed;
  for (const auto& id : report.features.day_ids) {
    if (auto it = curve_of.find(id); it != curve_of.end()) ddps.push_back(*it->second);
    if (auto it = smooth_of.find(id); it != smooth_of.end()) smoothed.push_back(*it->second);
  }
  write_curves_csv(at("ddp.csv"), ddps);
  files.push_back("ddp.csv");
  write_json_file(at("outliers.json"), outliers_to_json(report.clusters));
  files.push_back("outliers.json");
  write_coefficients_csv(at("smoothed.csv"), smoothed);
  files.push_back("smoothed.csv");
  write_json_file(at("fda_clusters.json"), fda_clusters_to_json(report.clusters));
  files.push_back("fda_clusters.json");
  write_json_file(at("fboxplot.json"), fboxplot_to_json(report.clusters));
  files.push_back("fboxplot.json");
  if (report.truth) {
    write_ground_truth_json(at("truth.json"), *report.truth);
    files.push_back("truth.json");
  }
  for (auto& rel : emit_plot_data(report.clusters, out_dir)) files.push_back(std::move(rel));

  json timing = json::array();
  for (const auto& t : report.timings) timing.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  write_json_file(at("timing.json"), {{"stages", timing}});

  return write_manifest(out_dir, files);
}

}  // namespace hogfda
