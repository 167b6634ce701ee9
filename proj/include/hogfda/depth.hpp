// hogfda/depth.hpp
//
// Modified band depth (bands of pairs of curves), depth-trimming outlier
// detection with a smoothed-bootstrap cutoff, and functional boxplots.
#pragma once

#include "hogfda/fda.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hogfda {

// One depth per input curve, same order. Band membership is inclusive.
std::vector<double> modified_band_depth(const CurveSet& curves);

// Type-7 (linear interpolation) sample quantile, p in [0, 1].
double sample_quantile(std::vector<double> values, double p);

struct OutlierParams {
  double trim_alpha = 0.10;
  double smoothing_h = 0.05;
  int n_boot = 200;
  double cutoff_percentile = 1.0;  // percent
  int max_passes = 5;
};

struct OutlierPass {
  int pass = 0;
  int n_curves = 0;
  double cutoff = 0.0;
  std::vector<std::string> flagged;
};

struct OutlierResult {
  CurveSet kept;
  std::vector<std::string> flagged;
  std::vector<OutlierPass> history;
};

// Each pass: depths of the current sample; resample the deepest
// (1 - trim_alpha) share with replacement, perturbed by N(0, h * cov);
// cutoff = median over resamples of the cutoff_percentile depth percentile;
// drop curves below the cutoff. Repeats until nothing is flagged.
// Throws ArgumentError for fewer than 10 curves.
OutlierResult detect_outliers(const CurveSet& curves, const OutlierParams& params, std::uint64_t seed);

struct BoxplotParams {
  double central_proportion = 0.5;
  double fence_factor = 1.5;
};

struct FunctionalBoxplot {
  std::string median_day_id;
  Vector median;
  Vector central_lower, central_upper;
  Vector fence_lower, fence_upper;
  Vector whisker_lower, whisker_upper;
  std::vector<std::string> outlier_day_ids;
  std::vector<double> depths;  // aligned with the input curves
};

// Depth ties are broken by input order.
FunctionalBoxplot functional_boxplot(const CurveSet& curves, double central_proportion, double fence_factor);

}  // namespace hogfda
