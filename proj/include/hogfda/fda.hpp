// hogfda/fda.hpp
//
// Daily density profiles (DDPs) over a region of interest and their
// least-squares projection onto an orthonormal Fourier basis.
#pragma once

#include "hogfda/core.hpp"

#include <string>
#include <vector>

namespace hogfda {

struct Curve {
  std::string day_id;
  Vector values;  // one value per quarter
};

using CurveSet = std::vector<Curve>;

// Sum of the snapshot cells inside `roi`, per quarter.
Curve extract_ddp(const DayRecord& day, const RegionOfInterest& roi);

// Sampled at midpoints t_j = (j + 0.5) / Q of [0, 1):
//   phi_0 = 1, phi_{2m-1} = sqrt(2) sin(2 pi m t), phi_{2m} = sqrt(2) cos(2 pi m t).
// With d odd and d < Q the columns are exactly orthogonal: B'B = Q I.
class FourierBasis {
 public:
  FourierBasis(int n_basis, int n_samples);

  int n_basis() const { return static_cast<int>(design_.cols()); }
  int n_samples() const { return static_cast<int>(design_.rows()); }
  const Matrix& design() const { return design_; }
  const Vector& sample_points() const { return points_; }

  // max |(1/Q) B'B - I|
  double orthogonality_residual() const;

 private:
  Matrix design_;
  Vector points_;
};

struct SmoothedCurve {
  std::string day_id;
  Vector coefficients;
  Vector fitted;
  double residual_sse = 0.0;
};

SmoothedCurve smooth_curve(const Curve& curve, const FourierBasis& basis);
std::vector<SmoothedCurve> smooth_curves(const CurveSet& curves, const FourierBasis& basis);

// ddp.csv (`day_id,q0..q{Q-1}`) and smoothed.csv (`day_id,c0..c{d-1}`).
void write_curves_csv(const std::string& path, const CurveSet& curves, char column_prefix = 'q');
CurveSet read_curves_csv(const std::string& path);
void write_coefficients_csv(const std::string& path, const std::vector<SmoothedCurve>& smoothed);
std::vector<SmoothedCurve> read_coefficients_csv(const std::string& path);

}  // namespace hogfda
