// hogfda/hog.hpp
//
// Histogram-of-oriented-gradients features for grid snapshots, day vectors
// (one per day, quarters concatenated) and the day feature matrix.
#pragma once

#include "hogfda/core.hpp"

#include <string>
#include <vector>

namespace hogfda {

struct HogParams {
  int cell_rows = 13;
  int cell_cols = 13;
  int n_bins = 9;  // unsigned orientation over [0, 180) degrees
  int block_cells = 2;
  int block_stride_cells = 1;
  double norm_epsilon = 0.0;
};

// Layout derived from (grid, params). Throws ArgumentError if the params do
// not fit the grid.
struct HogLayout {
  int cells_down = 0;
  int cells_across = 0;
  int blocks_down = 0;
  int blocks_across = 0;
  int block_cells = 0;
  int n_bins = 0;

  int block_length() const { return block_cells * block_cells * n_bins; }
  int dimension() const { return blocks_down * blocks_across * block_length(); }
};

HogLayout hog_layout(const GridSpec& spec, const HogParams& params);

// Feature length per snapshot.
inline int hog_dimension(const GridSpec& spec, const HogParams& params) {
  return hog_layout(spec, params).dimension();
}

// Centered-difference gradients with clamp-to-edge, magnitude-weighted hard
// orientation binning, per-block L2 normalisation, blocks row-major.
// Throws DataError if the snapshot has unobserved cells.
Vector compute_snapshot_hog(const GridSnapshot& snap, const HogParams& params);

struct DayFeatureVector {
  std::string day_id;
  Vector values;
};

DayFeatureVector build_day_vector(const DayRecord& day, const HogParams& params);

// Columns are days, in collection order.
struct FeatureMatrix {
  Matrix columns;
  std::vector<std::string> day_ids;

  Eigen::Index n_days() const { return columns.cols(); }
  Eigen::Index dimension() const { return columns.rows(); }
};

FeatureMatrix build_feature_matrix(const DayCollection& data, const HogParams& params);

// features.csv: header `day_id,dim_0..dim_{D-1}`, one row per day.
void write_features_csv(const std::string& path, const FeatureMatrix& features);
FeatureMatrix read_features_csv(const std::string& path);

}  // namespace hogfda
