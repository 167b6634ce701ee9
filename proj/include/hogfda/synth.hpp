// hogfda/synth.hpp
//
// Deterministic synthetic day collections with planted structure: day types
// keyed by (weekday, month), each with its own spatial blob mixture and
// intra-day profile; optional amplitude tiers within a type; planted
// whole-day amplitude shocks; random missing quarters.
#pragma once

#include "hogfda/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hogfda {

struct BlobSpec {
  double row = 0.0;
  double col = 0.0;
  double width = 1.0;  // Gaussian sd, in cells
};

struct ProfilePeak {
  double center = 0.5;  // fraction of the day
  double width = 0.1;
  double height = 1.0;
};

struct AmplitudeTier {
  std::string label;
  std::vector<int> months;
  double amplitude = 0.0;
};

struct DayTypeSpec {
  std::string label;
  std::vector<Weekday> weekdays;
  std::vector<int> months;
  double night_level = 0.66;  // profile minimum relative to the peak
  std::vector<ProfilePeak> peaks;
  double base_weight = 0.1;
  std::vector<double> blob_weights;  // one per blob
  double amplitude = 0.0;            // people at the profile peak (full grid)
  std::vector<AmplitudeTier> tiers;  // overrides `amplitude` by month when non-empty
};

struct SynthConfig {
  GridSpec grid;
  Date first_date{2015, 9, 1};
  Date last_date{2016, 8, 11};
  int n_days = 330;
  std::vector<BlobSpec> blobs;
  std::vector<DayTypeSpec> day_types;
  double noise_sigma = 0.05;          // per-cell lognormal
  double quarter_noise_sigma = 0.02;  // additive per-quarter noise on the profile (peak = 1), shared by all cells
  double missing_prob = 0.01;         // per (day, quarter): whole snapshot unobserved
  int n_outliers = 2;
  double shock_magnitude = 1.5;
  std::string outlier_type = "summer_weekday";
  int n_heavy_missing_days = 0;
  double heavy_missing_fraction = 0.5;
  std::uint64_t seed = 1;

  // The calibrated six-type scenario on the default 39x39 grid.
  static SynthConfig defaults();
};

// Throws ConfigError naming the first invalid field.
void validate_synth_config(const SynthConfig& cfg);

struct GroundTruth {
  std::vector<std::string> type_names;
  std::vector<std::string> day_ids;
  std::vector<int> type_labels;      // index into type_names
  std::vector<int> subgroup_labels;  // tier index within the type, 0 when untiered
  std::vector<std::string> outlier_ids;
  std::vector<std::string> heavy_missing_ids;

  int type_of(std::string_view day_id) const;
  int subgroup_of(std::string_view day_id) const;
  bool is_outlier(std::string_view day_id) const;
};

struct SynthOutput {
  DayCollection data;
  GroundTruth truth;
};

SynthOutput generate(const SynthConfig& cfg);

// Noise-free intra-day profile of a type at the Q quarter midpoints, peak 1.
Vector type_profile(const DayTypeSpec& type, int quarters);
// Spatial field of a type, normalised to total mass 1.
Matrix type_field(const DayTypeSpec& type, const std::vector<BlobSpec>& blobs, const GridSpec& grid);
// Amplitude for a type in a given month.
double type_amplitude(const DayTypeSpec& type, int month, int* tier = nullptr);

void write_ground_truth_json(const std::string& path, const GroundTruth& truth);
GroundTruth read_ground_truth_json(const std::string& path);

}  // namespace hogfda
