#include "hogfda/kmeans.hpp"

#include "hogfda/errors.hpp"
#include "hogfda/parallel.hpp"
#include "hogfda/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hogfda {

namespace {

// Squared distances (k x n) via the ||x||^2 + ||c||^2 - 2 c.x expansion.
Matrix squared_distances(const Matrix& data, const Vector& data_norms, const Matrix& centroids) {
  Matrix d = -2.0 * (centroids.transpose() * data);
  const Vector cn = centroids.colwise().squaredNorm().transpose();
  d.colwise() += cn;
  d.rowwise() += data_norms.transpose();
  return d.cwiseMax(0.0);
}

Matrix compute_centroids(const Matrix& data, const std::vector<int>& labels, int k, std::vector<int>& counts) {
  Matrix c = Matrix::Zero(data.rows(), k);
  counts.assign(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < data.cols(); ++i) {
    const int a = labels[static_cast<std::size_t>(i)];
    c.col(a) += data.col(i);
    ++counts[static_cast<std::size_t>(a)];
  }
  for (int j = 0; j < k; ++j)
    if (counts[static_cast<std::size_t>(j)] > 0) c.col(j) /= counts[static_cast<std::size_t>(j)];
  return c;
}

// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(const Matrix& data, std::vector<int>& labels, Matrix& centroids, std::vector<int>& counts) {
  const int k = static_cast<int>(centroids.cols());
  for (int j = 0; j < k; ++j) {
    if (counts[static_cast<std::size_t>(j)] > 0) continue;
    double worst = -1.0;
    Eigen::Index worst_i = -1;
    for (Eigen::Index i = 0; i < data.cols(); ++i) {
      const int a = labels[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(a)] <= 1) continue;
      const double dist = (data.col(i) - centroids.col(a)).squaredNorm();
      if (dist > worst) {
        worst = dist;
        worst_i = i;
      }
    }
    if (worst_i < 0) throw NumericError("k-means: cannot repair empty cluster");
    const int from = labels[static_cast<std::size_t>(worst_i)];
    labels[static_cast<std::size_t>(worst_i)] = j;
    --counts[static_cast<std::size_t>(from)];
    counts[static_cast<std::size_t>(j)] = 1;
    centroids = compute_centroids(data, labels, k, counts);
  }
}

Matrix kmeanspp_init(const Matrix& data, const Vector& norms, int k, Rng& rng) {
  const Eigen::Index n = data.cols();
  Matrix c(data.rows(), k);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  c.col(0) = data.col(pick(rng));
  Vector best = squared_distances(data, norms, c.leftCols(1)).row(0).transpose();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int j = 1; j < k; ++j) {
    const double sum = best.sum();
    Eigen::Index chosen = 0;
    if (sum > 0.0) {
      double u = unif(rng) * sum;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= best[i];
        if (u < 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    c.col(j) = data.col(chosen);
    const Vector dj = squared_distances(data, norms, c.col(j)).row(0).transpose();
    best = best.cwiseMin(dj);
  }
  return c;
}

std::vector<int> assign(const Matrix& data, const Vector& norms, const Matrix& centroids) {
  const Matrix d = squared_distances(data, norms, centroids);
  std::vector<int> labels(static_cast<std::size_t>(data.cols()));
  for (Eigen::Index i = 0; i < data.cols(); ++i) {
    Eigen::Index best;
    d.col(i).minCoeff(&best);
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

void check_finite(const Matrix& data) {
  if (!data.allFinite()) throw DataError("k-means: non-finite feature values");
}

}  // namespace

double within_deviance(const Matrix& data, const std::vector<int>& labels, const Matrix& centroids) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < data.cols(); ++i)
    s += (data.col(i) - centroids.col(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return s;
}

double total_deviance(const Matrix& data) {
  const Matrix mean = data.rowwise().mean();
  return within_deviance(data, std::vector<int>(static_cast<std::size_t>(data.cols()), 0), mean);
}

KmeansResult lloyd(const Matrix& data, Matrix centroids, double tol, int max_iter) {
  const int k = static_cast<int>(centroids.cols());
  const Vector norms = data.colwise().squaredNorm().transpose();
  KmeansResult res;
  res.k = k;
  std::vector<int> counts;
  std::vector<int> labels = assign(data, norms, centroids);
  centroids = compute_centroids(data, labels, k, counts);
  repair_empty(data, labels, centroids, counts);
  double obj = within_deviance(data, labels, centroids);
  res.objective_trace.push_back(obj);
  int it = 1;
  bool converged = false;
  for (; it < max_iter; ++it) {
    std::vector<int> next = assign(data, norms, centroids);
    // Keep the current label on exact ties so the objective cannot rise.
    for (Eigen::Index i = 0; i < data.cols(); ++i) {
      auto& nl = next[static_cast<std::size_t>(i)];
      const int cur = labels[static_cast<std::size_t>(i)];
      if (nl != cur && (data.col(i) - centroids.col(cur)).squaredNorm() <=
                           (data.col(i) - centroids.col(nl)).squaredNorm())
        nl = cur;
    }
    const bool changed = next != labels;
    labels = std::move(next);
    centroids = compute_centroids(data, labels, k, counts);
    repair_empty(data, labels, centroids, counts);
    const double new_obj = within_deviance(data, labels, centroids);
    res.objective_trace.push_back(new_obj);
    const double delta = obj - new_obj;
    obj = new_obj;
    if (!changed || delta <= tol * std::max(obj, std::numeric_limits<double>::min())) {
      converged = true;
      ++it;
      break;
    }
  }
  res.assignments = std::move(labels);
  res.centroids = std::move(centroids);
  res.within_deviance = obj;
  res.iterations = it;
  res.converged = converged;
  res.total_deviance = total_deviance(data);
  res.ratio = res.total_deviance > 0.0 ? res.within_deviance / res.total_deviance : 0.0;
  return res;
}

KmeansResult kmeans_fit(const Matrix& data, int k, int restarts, std::uint64_t seed, double tol, int max_iter,
                        const std::optional<Matrix>& extra_init) {
  const Eigen::Index n = data.cols();
  if (k < 1) throw ArgumentError("k-means: k must be >= 1");
  if (k > n) throw ArgumentError("k-means: k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " points");
  if (restarts < 1) throw ArgumentError("k-means: restarts must be >= 1");
  if (max_iter < 1) throw ArgumentError("k-means: max_iter must be >= 1");
  check_finite(data);
  const Vector norms = data.colwise().squaredNorm().transpose();

  const std::size_t runs = static_cast<std::size_t>(restarts) + (extra_init ? 1 : 0);
  std::vector<KmeansResult> fits(runs);
  parallel_for(runs, [&](std::size_t r) {
    Matrix init;
    if (r < static_cast<std::size_t>(restarts)) {
      Rng rng = make_rng(seed, "kmeans", {static_cast<std::uint64_t>(k), r});
      init = kmeanspp_init(data, norms, k, rng);
    } else {
      init = *extra_init;
    }
    fits[r] = lloyd(data, std::move(init), tol, max_iter);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs; ++r)
    if (fits[r].within_deviance < fits[best].within_deviance) best = r;
  return std::move(fits[best]);
}

DevianceCurve deviance_ratio_curve(const Matrix& data, int k_min, int k_max, int restarts, std::uint64_t seed,
                                   double tol, int max_iter) {
  const Eigen::Index n = data.cols();
  if (k_min < 1 || k_min > k_max || k_max > n)
    throw ArgumentError("k range [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                        "] must be non-empty within [1, " + std::to_string(n) + "]");
  check_finite(data);
  if (!(total_deviance(data) > 0.0)) throw DataError("degenerate data: all days have identical features");
  DevianceCurve curve;
  for (int k = k_min; k <= k_max; ++k) {
    std::optional<Matrix> nested;
    if (k > k_min) {
      const auto& prev = curve.fits.back();
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (data.col(i) - prev.centroids.col(prev.assignments[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      Matrix init(data.rows(), k);
      init.leftCols(k - 1) = prev.centroids;
      init.col(k - 1) = data.col(far);
      nested = std::move(init);
    }
    auto fit = kmeans_fit(data, k, restarts, seed, tol, max_iter, nested);
    if (!curve.fits.empty() && fit.within_deviance > curve.fits.back().within_deviance)
      throw NumericError("k-means: within deviance increased from k=" + std::to_string(k - 1) +
                         " to k=" + std::to_string(k));
    curve.points.push_back({k, fit.ratio});
    curve.fits.push_back(std::move(fit));
  }
  return curve;
}

ElbowChoice select_k_elbow(const std::vector<RatioPoint>& curve, double tau) {
  if (curve.size() < 2) throw ArgumentError("elbow: need at least 2 points");
  if (!(tau > 0.0)) throw ArgumentError("elbow: tau must be positive");
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].k <= curve[i - 1].k) throw ArgumentError("elbow: curve must be sorted by k");
  for (std::size_t i = 0; i + 1 < curve.size(); ++i)
    if (curve[i].ratio - curve[i + 1].ratio < tau) return {curve[i].k, false};
  return {curve.back().k, true};
}

}  // namespace hogfda
