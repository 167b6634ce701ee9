// hogfda/config.hpp
//
// Pipeline configuration: one JSON document with a section per stage. Keys
// absent from the document keep their defaults; unknown keys are errors.
#pragma once

#include "hogfda/core.hpp"
#include "hogfda/depth.hpp"
#include "hogfda/dfm.hpp"
#include "hogfda/hog.hpp"
#include "hogfda/ingest.hpp"
#include "hogfda/kmeans.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hogfda {

// Knobs of the synthetic scenario that are exposed through the config file;
// the rest of the scenario comes from SynthConfig::defaults().
struct SyntheticSettings {
  int n_days = 330;
  double noise_sigma = 0.05;
  double quarter_noise_sigma = 0.02;
  double missing_prob = 0.01;
  int n_outliers = 2;
  double shock_magnitude = 1.5;
  int n_heavy_missing_days = 0;
};

struct PipelineConfig {
  GridSpec grid;
  RegionOfInterest roi;
  HogParams hog;
  KmeansParams kmeans;
  MissingPolicy missing;
  int n_basis = 15;
  DfmConfig dfm;
  OutlierParams outliers;
  BoxplotParams boxplot;
  SyntheticSettings synthetic;
  std::uint64_t seed = 7;
};

struct Finding {
  std::string key;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const { return findings.empty(); }
  bool has(std::string_view key) const;
};

ValidationReport validate_config(const PipelineConfig& cfg);

// Structural parse (types and key names). Throws ConfigError.
PipelineConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const PipelineConfig& cfg);

// Reads, parses and validates; throws ConfigError naming the first finding.
PipelineConfig load_config(const std::string& path);
// Throws ConfigError if validation reports findings.
void require_valid(const PipelineConfig& cfg);

}  // namespace hogfda
