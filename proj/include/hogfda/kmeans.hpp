// hogfda/kmeans.hpp
//
// Lloyd k-means over the columns of a matrix, with k-means++ seeding and
// restarts, plus the within/total deviance elbow used to choose k.
#pragma once

#include "hogfda/core.hpp"
#include "hogfda/hog.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace hogfda {

struct KmeansParams {
  int k_min = 1;
  int k_max = 10;
  int restarts = 5;
  double tol = 1e-9;  // relative objective change
  int max_iter = 100;
  double elbow_tau = 0.02;
};

struct KmeansResult {
  int k = 0;
  std::vector<int> assignments;  // one label per column, in [0, k)
  Matrix centroids;              // one column per cluster
  double within_deviance = 0.0;
  double total_deviance = 0.0;
  double ratio = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // within deviance after each iteration
};

// Sum of squared distances of each column of `data` to its centroid.
double within_deviance(const Matrix& data, const std::vector<int>& labels, const Matrix& centroids);
double total_deviance(const Matrix& data);

// Single Lloyd run from explicit initial centroids.
KmeansResult lloyd(const Matrix& data, Matrix init_centroids, double tol, int max_iter);

// Best of `restarts` k-means++ seeded runs (lowest within deviance, then
// lowest restart index). `extra_init`, when given, is run as an additional
// candidate after the seeded restarts.
KmeansResult kmeans_fit(const Matrix& data, int k, int restarts, std::uint64_t seed, double tol, int max_iter,
                        const std::optional<Matrix>& extra_init = std::nullopt);

inline KmeansResult kmeans_fit(const FeatureMatrix& F, int k, int restarts, std::uint64_t seed, double tol,
                               int max_iter) {
  return kmeans_fit(F.columns, k, restarts, seed, tol, max_iter);
}

struct RatioPoint {
  int k = 0;
  double ratio = 0.0;
};

struct DevianceCurve {
  std::vector<RatioPoint> points;
  std::vector<KmeansResult> fits;  // aligned with points
};

// One fit per k in [k_min, k_max]. For k > k_min the previous solution's
// centroids plus the point farthest from its centroid seed an extra run, so
// the ratio is non-increasing in k. Throws DataError when all days coincide.
DevianceCurve deviance_ratio_curve(const Matrix& data, int k_min, int k_max, int restarts, std::uint64_t seed,
                                   double tol, int max_iter);

struct ElbowChoice {
  int k = 0;
  bool warning = false;
};

// Smallest k with ratio(k) - ratio(k+1) < tau; max k with warning otherwise.
ElbowChoice select_k_elbow(const std::vector<RatioPoint>& curve, double tau);

}  // namespace hogfda
