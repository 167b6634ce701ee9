// hogfda command line: the full pipeline, or one stage at a time over the
// files written by the previous stage.

#include "hogfda/config.hpp"
#include "hogfda/errors.hpp"
#include "hogfda/parallel.hpp"
#include "hogfda/pipeline.hpp"
#include "hogfda/seeds.hpp"
#include "hogfda/synth.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>

namespace fs = std::filesystem;
using namespace hogfda;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string in_dir;
  std::string input;
  bool synthetic = false;
  std::optional<int> k;
  bool quiet = false;
  int threads = 0;
  std::optional<int> max_gap;
  std::optional<double> drop_fraction;
};

std::string g_stage = "startup";

void log(const Options& o, const std::string& msg) {
  if (!o.quiet) std::cerr << "hogfda: " << msg << '\n';
}

void enter(const Options& o, std::string_view stage) {
  g_stage = std::string(stage);
  log(o, "stage " + g_stage);
}

PipelineConfig make_config(const Options& o) {
  PipelineConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.max_gap) cfg.missing.max_gap_quarters = *o.max_gap;
  if (o.drop_fraction) cfg.missing.drop_fraction = *o.drop_fraction;
  require_valid(cfg);
  return cfg;
}

std::string in_path(const Options& o, const std::string& name) {
  return (fs::path(o.in_dir.empty() ? o.out_dir : o.in_dir) / name).string();
}

std::string out_path(const Options& o, const std::string& name) { return (fs::path(o.out_dir) / name).string(); }

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": not valid JSON: " + e.what());
  }
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw DataError("input file '" + path + "' does not exist");
}

// Raw days from --input or the synthetic scenario.
DayCollection load_days(const Options& o, const PipelineConfig& cfg) {
  if (o.synthetic) return generate(synth_config_for(cfg)).data;
  if (o.input.empty()) throw ArgumentError("--input PATH or --synthetic is required");
  require_file(o.input);
  return read_long_csv(o.input, cfg.grid);
}

int cmd_simulate(const Options& o, const PipelineConfig& cfg) {
  enter(o, "simulate");
  auto synth = generate(synth_config_for(cfg));
  ensure_directory(o.out_dir);
  write_long_csv(out_path(o, "data.csv"), synth.data);
  write_ground_truth_json(out_path(o, "truth.json"), synth.truth);
  return 0;
}

int cmd_ingest(const Options& o, const PipelineConfig& cfg) {
  enter(o, "ingest");
  const auto raw = load_days(o, cfg);
  enter(o, "missing");
  const auto cleaned = handle_missing(raw, cfg.missing);
  ensure_directory(o.out_dir);
  write_long_csv(out_path(o, "clean.csv"), cleaned.data);
  write_json_file(out_path(o, "ingest.json"), ingest_to_json(cleaned.report));
  log(o, std::to_string(cleaned.report.days_kept) + " days kept, " + std::to_string(cleaned.report.days_dropped) +
             " dropped");
  return 0;
}

DayCollection read_clean(const Options& o, const PipelineConfig& cfg) {
  const auto path = in_path(o, "clean.csv");
  require_file(path);
  return read_long_csv(path, cfg.grid);
}

DayClustering read_day_clusters(const Options& o) {
  const auto path = in_path(o, "day_clusters.json");
  require_file(path);
  return day_clusters_from_json(read_json(path));
}

CurveSet read_ddp(const Options& o) {
  const auto path = in_path(o, "ddp.csv");
  require_file(path);
  return read_curves_csv(path);
}

int cmd_features(const Options& o, const PipelineConfig& cfg) {
  enter(o, "features");
  const auto data = read_clean(o, cfg);
  const auto F = build_feature_matrix(data, cfg.hog);
  ensure_directory(o.out_dir);
  write_features_csv(out_path(o, "features.csv"), F);
  return 0;
}

int cmd_cluster_days(const Options& o, const PipelineConfig& cfg) {
  enter(o, "cluster-days");
  const auto path = in_path(o, "features.csv");
  require_file(path);
  const auto F = read_features_csv(path);
  const auto days = cluster_days(F, cfg.kmeans, derive_seed(cfg.seed, "day-clusters"), o.k);
  if (days.elbow.warning) log(o, "warning: no elbow below tau, using k = " + std::to_string(days.k));
  ensure_directory(o.out_dir);
  write_json_file(out_path(o, "day_clusters.json"), day_clusters_to_json(days));
  log(o, "k = " + std::to_string(days.k));
  return 0;
}

int cmd_ddp(const Options& o, const PipelineConfig& cfg) {
  enter(o, "ddp");
  const auto data = read_clean(o, cfg);
  const auto days = read_day_clusters(o);
  CurveSet all;
  for (const auto& d : data.days) all.push_back(extract_ddp(d, cfg.roi));
  split_curves(all, days);  // every clustered day must have a curve
  ensure_directory(o.out_dir);
  write_curves_csv(out_path(o, "ddp.csv"), all);
  return 0;
}

int cmd_outliers(const Options& o, const PipelineConfig& cfg) {
  enter(o, "outliers");
  auto clusters = split_curves(read_ddp(o), read_day_clusters(o));
  for (auto& c : clusters)
    analyse_outliers(c, cfg.outliers, derive_seed(cfg.seed, "outlier-stage", {static_cast<std::uint64_t>(c.cluster)}));
  ensure_directory(o.out_dir);
  write_json_file(out_path(o, "outliers.json"), outliers_to_json(clusters));
  return 0;
}

std::vector<ClusterAnalysis> smoothed_clusters(const Options& o, const FourierBasis& basis) {
  auto clusters = split_curves(read_ddp(o), read_day_clusters(o));
  std::vector<std::string> flagged;
  const auto outliers_path = in_path(o, "outliers.json");
  if (fs::is_regular_file(outliers_path)) flagged = flagged_from_json(read_json(outliers_path));
  else log(o, "no outliers.json found, smoothing every curve");
  for (auto& c : clusters) {
    for (const auto& curve : c.curves)
      if (std::find(flagged.begin(), flagged.end(), curve.day_id) != flagged.end()) c.outliers.push_back(curve.day_id);
    smooth_cluster(c, basis);
  }
  return clusters;
}

int cmd_smooth(const Options& o, const PipelineConfig& cfg) {
  enter(o, "smooth");
  const FourierBasis basis(cfg.n_basis, cfg.grid.quarters_per_day);
  const auto clusters = smoothed_clusters(o, basis);
  // same row order as ddp.csv
  std::map<std::string, const SmoothedCurve*> by_id;
  for (const auto& c : clusters)
    for (const auto& s : c.smoothed) by_id.emplace(s.day_id, &s);
  std::vector<SmoothedCurve> all;
  for (const auto& curve : read_ddp(o))
    if (auto it = by_id.find(curve.day_id); it != by_id.end()) all.push_back(*it->second);
  ensure_directory(o.out_dir);
  write_coefficients_csv(out_path(o, "smoothed.csv"), all);
  return 0;
}

int cmd_fda_cluster(const Options& o, const PipelineConfig& cfg) {
  enter(o, "fda-cluster");
  const auto path = in_path(o, "smoothed.csv");
  require_file(path);
  const auto smoothed = read_coefficients_csv(path);
  const auto days = read_day_clusters(o);
  std::vector<ClusterAnalysis> clusters(static_cast<std::size_t>(days.k));
  for (int c = 0; c < days.k; ++c) clusters[static_cast<std::size_t>(c)].cluster = c;
  for (const auto& s : smoothed) {
    auto it = std::find(days.day_ids.begin(), days.day_ids.end(), s.day_id);
    if (it == days.day_ids.end()) throw DataError("smoothed day " + s.day_id + " is not in day_clusters.json");
    const int label = days.labels[static_cast<std::size_t>(it - days.day_ids.begin())];
    clusters.at(static_cast<std::size_t>(label)).smoothed.push_back(s);
  }
  for (auto& c : clusters) {
    analyse_fda(c, cfg.dfm, derive_seed(cfg.seed, "fda-stage", {static_cast<std::uint64_t>(c.cluster)}));
    log(o, "cluster " + std::to_string(c.cluster) + ": K = " + std::to_string(c.K));
  }
  ensure_directory(o.out_dir);
  write_json_file(out_path(o, "fda_clusters.json"), fda_clusters_to_json(clusters));
  return 0;
}

int cmd_fboxplot(const Options& o, const PipelineConfig& cfg) {
  enter(o, "fboxplot");
  auto clusters = split_curves(read_ddp(o), read_day_clusters(o));
  const auto fda_path = in_path(o, "fda_clusters.json");
  require_file(fda_path);
  apply_fda_json(clusters, read_json(fda_path));
  const FourierBasis basis(cfg.n_basis, cfg.grid.quarters_per_day);
  for (auto& c : clusters) analyse_boxplots(c, cfg.boxplot, basis);
  ensure_directory(o.out_dir);
  write_json_file(out_path(o, "fboxplot.json"), fboxplot_to_json(clusters));
  auto files = emit_plot_data(clusters, o.out_dir);
  files.push_back("fboxplot.json");
  write_manifest(o.out_dir, files);
  return 0;
}

int cmd_pipeline(const Options& o, const PipelineConfig& cfg) {
  PipelineInput input;
  input.synthetic = o.synthetic;
  input.csv_path = o.input;
  if (!o.synthetic) {
    g_stage = "ingest";
    if (o.input.empty()) throw ArgumentError("--input PATH or --synthetic is required");
    require_file(o.input);
  }
  PipelineOptions popts;
  popts.forced_k = o.k;
  popts.on_stage = [&](std::string_view s) { enter(o, s); };
  const auto report = run_pipeline(cfg, input, popts);
  enter(o, "write");
  write_pipeline_outputs(report, o.out_dir);
  if (!o.quiet) {
    for (const auto& t : report.timings) std::fprintf(stderr, "hogfda: %-12s %8.3f s\n", t.stage.c_str(), t.seconds);
    std::fprintf(stderr, "hogfda: k = %d day clusters\n", report.days.k);
    for (const auto& c : report.clusters)
      std::fprintf(stderr, "hogfda: cluster %d: %zu days, %zu outliers, K = %d\n", c.cluster, c.curves.size(),
                   c.outliers.size(), c.K);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HOG + functional data analysis of gridded presence data"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "JSON config file");
  app.add_option("--seed", o.seed, "master seed (overrides the config)");
  app.add_option("--out", o.out_dir, "output directory")->capture_default_str();
  app.add_option("--in", o.in_dir, "directory holding the previous stage's files (default: --out)");
  app.add_option("--input", o.input, "long-format CSV input");
  app.add_flag("--synthetic", o.synthetic, "use the synthetic scenario instead of --input");
  app.add_option("--k", o.k, "force the number of day clusters (skips the elbow)")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", o.quiet, "no progress output");
  app.add_option("--threads", o.threads, "worker threads (default: hardware concurrency)")->check(CLI::NonNegativeNumber);
  app.add_option("--policy.max-gap", o.max_gap, "longest gap in quarters that is filled");
  app.add_option("--policy.drop-fraction", o.drop_fraction, "drop days with more missing than this");

  using Handler = int (*)(const Options&, const PipelineConfig&);
  const std::vector<std::tuple<const char*, const char*, Handler>> commands = {
      {"simulate", "write a synthetic data.csv and truth.json", cmd_simulate},
      {"ingest", "read --input (or --synthetic), fill gaps, write clean.csv", cmd_ingest},
      {"features", "clean.csv -> features.csv", cmd_features},
      {"cluster-days", "features.csv -> day_clusters.json", cmd_cluster_days},
      {"ddp", "clean.csv + day_clusters.json -> ddp.csv", cmd_ddp},
      {"outliers", "ddp.csv + day_clusters.json -> outliers.json", cmd_outliers},
      {"smooth", "ddp.csv (+ outliers.json) -> smoothed.csv", cmd_smooth},
      {"fda-cluster", "smoothed.csv + day_clusters.json -> fda_clusters.json", cmd_fda_cluster},
      {"fboxplot", "ddp.csv + day_clusters.json + fda_clusters.json -> fboxplot.json, plots", cmd_fboxplot},
      {"pipeline", "run every stage and write all outputs", cmd_pipeline},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    const unsigned hw = std::thread::hardware_concurrency();
    set_worker_count(o.threads > 0 ? o.threads : static_cast<int>(hw == 0 ? 1 : hw));
    g_stage = "config";
    const auto cfg = make_config(o);
    for (const auto& [name, help, fn] : commands)
      if (app.got_subcommand(name)) return fn(o, cfg);
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "hogfda: configuration error in stage " << g_stage << ": " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "hogfda: data error in stage " << g_stage << ": " << e.what() << '\n';
    return 3;
  } catch (const ArgumentError& e) {
    std::cerr << "hogfda: argument error in stage " << g_stage << ": " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "hogfda: numeric failure in stage " << g_stage << ": " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "hogfda: unexpected failure in stage " << g_stage << ": " << e.what() << '\n';
    return 1;
  }
}
