// hogfda/pipeline.hpp
//
// End-to-end orchestration: ingest, missing values, HOG day features, day
// k-means with elbow, then per day cluster DDP extraction, outlier removal,
// Fourier smoothing, DFM sub-clustering and functional boxplots. Every stage
// is also exposed on its own so the CLI can run it from files.
#pragma once

#include "hogfda/config.hpp"
#include "hogfda/core.hpp"
#include "hogfda/depth.hpp"
#include "hogfda/dfm.hpp"
#include "hogfda/fda.hpp"
#include "hogfda/hog.hpp"
#include "hogfda/ingest.hpp"
#include "hogfda/kmeans.hpp"
#include "hogfda/synth.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hogfda {

struct DayClustering {
  std::vector<RatioPoint> curve;  // empty when k was forced
  ElbowChoice elbow;
  bool forced = false;
  int k = 0;
  std::vector<std::string> day_ids;
  std::vector<int> labels;  // aligned with day_ids
  double within_deviance = 0.0;
  double total_deviance = 0.0;
};

DayClustering cluster_days(const FeatureMatrix& features, const KmeansParams& params, std::uint64_t seed,
                           std::optional<int> forced_k = std::nullopt);

// One FDA sub-group of a day cluster.
struct SubCluster {
  int group = 0;
  std::vector<std::string> day_ids;
  Vector centroid;  // smoothed mean DDP of the members
  FunctionalBoxplot boxplot;
};

struct ClusterAnalysis {
  int cluster = 0;
  CurveSet curves;  // DDPs of every member, collection order

  bool outliers_checked = false;
  std::vector<std::string> outliers;
  std::vector<OutlierPass> outlier_history;

  std::vector<SmoothedCurve> smoothed;  // members minus outliers
  bool fda_clustered = false;
  std::vector<BicEntry> bic;
  int K = 1;
  std::vector<int> labels;  // aligned with smoothed, in [0, K)
  Matrix posterior;         // smoothed.size() x K

  std::vector<SubCluster> groups;
  std::vector<std::string> outlier_notes;
  std::vector<std::string> fda_notes;

  std::vector<std::string> member_ids() const;
  std::vector<std::string> kept_ids() const;
};

// Per-cluster DDP sets, clusters in label order, members in collection order.
std::vector<ClusterAnalysis> split_clusters(const DayCollection& data, const RegionOfInterest& roi,
                                            const DayClustering& days);
// Same split for curves already extracted (for example read from ddp.csv).
// Throws DataError when a clustered day has no curve.
std::vector<ClusterAnalysis> split_curves(const CurveSet& curves, const DayClustering& days);

// Skipped (with a note) below the detector's minimum sample size.
void analyse_outliers(ClusterAnalysis& cluster, const OutlierParams& params, std::uint64_t seed);
// Smooths the non-outlier curves.
void smooth_cluster(ClusterAnalysis& cluster, const FourierBasis& basis);
// DFM selection over the configured K range clamped to what the cluster can
// support; a cluster too small for any K stays a single group.
void analyse_fda(ClusterAnalysis& cluster, const DfmConfig& cfg, std::uint64_t seed);
// Groups from labels, centroids, and one functional boxplot per group.
void analyse_boxplots(ClusterAnalysis& cluster, const BoxplotParams& params, const FourierBasis& basis);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineReport {
  PipelineConfig config;
  std::string input;  // "synthetic" or the CSV path
  std::string provenance;
  std::vector<std::string> input_day_ids;
  IngestReport ingest;
  FeatureMatrix features;
  DayClustering days;
  std::vector<ClusterAnalysis> clusters;
  std::vector<StageTiming> timings;
  std::optional<GroundTruth> truth;
};

struct PipelineInput {
  bool synthetic = false;
  std::string csv_path;
};

struct PipelineOptions {
  std::optional<int> forced_k;
  // Called with the stage name when a stage starts.
  std::function<void(std::string_view)> on_stage;
};

// Synthetic scenario built from the config (grid, seed, synthetic section).
SynthConfig synth_config_for(const PipelineConfig& cfg);

// Computes everything in memory; nothing is written.
PipelineReport run_pipeline(const PipelineConfig& cfg, const PipelineInput& input, const PipelineOptions& options = {});

// Throws NumericError unless every input day is exactly one of: dropped by
// ingest, flagged as outlier, or kept in a sub-group.
void check_day_conservation(const PipelineReport& report);

nlohmann::json report_to_json(const PipelineReport& report);
nlohmann::json ingest_to_json(const IngestReport& report);
nlohmann::json day_clusters_to_json(const DayClustering& days);
DayClustering day_clusters_from_json(const nlohmann::json& doc);
nlohmann::json outliers_to_json(const std::vector<ClusterAnalysis>& clusters);
// Every flagged day id in outliers.json.
std::vector<std::string> flagged_from_json(const nlohmann::json& doc);
nlohmann::json fda_clusters_to_json(const std::vector<ClusterAnalysis>& clusters);
nlohmann::json fboxplot_to_json(const std::vector<ClusterAnalysis>& clusters);

// Restores per-cluster labels and K written by fda_clusters_to_json onto
// clusters whose `smoothed` ids are filled in.
void apply_fda_json(std::vector<ClusterAnalysis>& clusters, const nlohmann::json& doc);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::uintmax_t bytes = 0;
  std::string checksum;  // FNV-1a 64, hex
};

// Throws DataError when the directory cannot be created or written.
void ensure_directory(const std::string& dir);
void write_json_file(const std::string& path, const nlohmann::json& doc);

// Per sub-group CSV (quarter, centroid, median, bands, member DDPs) under
// plots/. Returns the relative paths written.
std::vector<std::string> emit_plot_data(const std::vector<ClusterAnalysis>& clusters, const std::string& out_dir);

// Checksums the given relative paths and writes manifest.json.
std::vector<ManifestEntry> write_manifest(const std::string& out_dir, std::vector<std::string> files);

// Writes every pipeline artifact plus the manifest; timings go to
// timing.json, which the manifest does not cover.
std::vector<ManifestEntry> write_pipeline_outputs(const PipelineReport& report, const std::string& out_dir);

}  // namespace hogfda
