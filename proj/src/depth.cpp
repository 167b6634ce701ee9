#include "hogfda/depth.hpp"

#include "hogfda/errors.hpp"
#include "hogfda/parallel.hpp"
#include "hogfda/seeds.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hogfda {

namespace {

void check_lengths(const CurveSet& curves) {
  for (const auto& c : curves)
    if (c.values.size() != curves.front().values.size())
      throw ArgumentError("curves must have equal lengths");
}

std::vector<double> mbd_of(const std::vector<const Vector*>& curves) {
  const std::size_t n = curves.size();
  const Eigen::Index q = curves.front()->size();
  std::vector<double> counts(n, 0.0);
  std::vector<double> column(n), sorted(n);
  for (Eigen::Index t = 0; t < q; ++t) {
    for (std::size_t i = 0; i < n; ++i) column[i] = (*curves[i])[t];
    sorted = column;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
      const auto below = static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), column[i]) - sorted.begin());
      const auto above =
          static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), column[i]));
      // pairs that do not bracket the value lie entirely below or above it
      counts[i] += 0.5 * (static_cast<double>(n) * (n - 1) - below * (below - 1) - above * (above - 1));
    }
  }
  const double norm = static_cast<double>(q) * 0.5 * static_cast<double>(n) * (n - 1);
  for (auto& c : counts) c /= norm;
  return counts;
}

}  // namespace

std::vector<double> modified_band_depth(const CurveSet& curves) {
  if (curves.size() < 2) throw ArgumentError("band depth needs at least 2 curves");
  check_lengths(curves);
  if (curves.front().values.size() == 0) throw ArgumentError("curves are empty");
  std::vector<const Vector*> ptrs;
  ptrs.reserve(curves.size());
  for (const auto& c : curves) ptrs.push_back(&c.values);
  return mbd_of(ptrs);
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ArgumentError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

// Indices sorted by depth descending, ties by index.
std::vector<std::size_t> depth_order(const std::vector<double>& depth) {
  std::vector<std::size_t> order(depth.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return depth[a] > depth[b]; });
  return order;
}

double bootstrap_cutoff(const CurveSet& sample, const std::vector<double>& depth, const OutlierParams& p,
                        std::uint64_t seed, int pass) {
  const std::size_t n = sample.size();
  const auto order = depth_order(depth);
  std::size_t m = n - static_cast<std::size_t>(std::floor(p.trim_alpha * static_cast<double>(n)));
  m = std::max<std::size_t>(m, 2);
  const Eigen::Index q = sample.front().values.size();

  Matrix trimmed(q, static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) trimmed.col(static_cast<Eigen::Index>(j)) = sample[order[j]].values;
  const Vector mean = trimmed.rowwise().mean();
  const Matrix centered = trimmed.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(m - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Matrix factor =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * std::sqrt(p.smoothing_h);

  std::vector<double> cutoffs(static_cast<std::size_t>(p.n_boot));
  parallel_for(cutoffs.size(), [&](std::size_t b) {
    Rng rng = make_rng(seed, "outliers", {static_cast<std::uint64_t>(pass), b});
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vector> resample(n);
    Vector z(q);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t src = pick(rng);
      for (Eigen::Index t = 0; t < q; ++t) z[t] = normal(rng);
      resample[i] = trimmed.col(static_cast<Eigen::Index>(src)) + factor * z;
    }
    std::vector<const Vector*> ptrs;
    for (const auto& v : resample) ptrs.push_back(&v);
    cutoffs[b] = sample_quantile(mbd_of(ptrs), p.cutoff_percentile / 100.0);
  });
  return sample_quantile(std::move(cutoffs), 0.5);
}

}  // namespace

OutlierResult detect_outliers(const CurveSet& curves, const OutlierParams& p, std::uint64_t seed) {
  if (curves.size() < 10)
    throw ArgumentError("outlier detection needs at least 10 curves (got " + std::to_string(curves.size()) +
                        "); inspect small groups manually");
  if (!(p.trim_alpha > 0.0 && p.trim_alpha < 0.5)) throw ArgumentError("trim_alpha must lie in (0, 0.5)");
  if (!(p.smoothing_h > 0.0)) throw ArgumentError("smoothing_h must be positive");
  if (p.n_boot < 1) throw ArgumentError("n_boot must be >= 1");
  if (!(p.cutoff_percentile > 0.0 && p.cutoff_percentile <= 10.0))
    throw ArgumentError("cutoff_percentile must lie in (0, 10]");
  if (p.max_passes < 1) throw ArgumentError("max_passes must be >= 1");
  check_lengths(curves);

  OutlierResult res;
  res.kept = curves;
  for (int pass = 0; pass < p.max_passes && res.kept.size() >= 3; ++pass) {
    const auto depth = modified_band_depth(res.kept);
    OutlierPass record;
    record.pass = pass;
    record.n_curves = static_cast<int>(res.kept.size());
    record.cutoff = bootstrap_cutoff(res.kept, depth, p, seed, pass);
    CurveSet next;
    for (std::size_t i = 0; i < res.kept.size(); ++i) {
      if (depth[i] < record.cutoff)
        record.flagged.push_back(res.kept[i].day_id);
      else
        next.push_back(std::move(res.kept[i]));
    }
    res.kept = std::move(next);
    const bool done = record.flagged.empty();
    res.flagged.insert(res.flagged.end(), record.flagged.begin(), record.flagged.end());
    res.history.push_back(std::move(record));
    if (done) break;
  }
  return res;
}

FunctionalBoxplot functional_boxplot(const CurveSet& curves, double central_proportion, double fence_factor) {
  if (curves.empty()) throw ArgumentError("functional boxplot of an empty set");
  if (!(central_proportion > 0.0 && central_proportion <= 1.0))
    throw ArgumentError("central proportion must lie in (0, 1]");
  if (!(fence_factor >= 0.0)) throw ArgumentError("fence factor must be non-negative");
  check_lengths(curves);
  FunctionalBoxplot box;
  if (curves.size() == 1) {
    const auto& c = curves.front();
    box.median_day_id = c.day_id;
    box.median = box.central_lower = box.central_upper = c.values;
    box.fence_lower = box.fence_upper = box.whisker_lower = box.whisker_upper = c.values;
    box.depths = {1.0};
    return box;
  }
  box.depths = modified_band_depth(curves);
  const auto order = depth_order(box.depths);
  const std::size_t n = curves.size();
  const auto n_central = std::max<std::size_t>(
      1, std::min(n, static_cast<std::size_t>(std::ceil(central_proportion * static_cast<double>(n) - 1e-12))));

  box.median_day_id = curves[order[0]].day_id;
  box.median = curves[order[0]].values;
  box.central_lower = box.central_upper = box.median;
  for (std::size_t j = 1; j < n_central; ++j) {
    box.central_lower = box.central_lower.cwiseMin(curves[order[j]].values);
    box.central_upper = box.central_upper.cwiseMax(curves[order[j]].values);
  }
  const Vector range = box.central_upper - box.central_lower;
  box.fence_lower = box.central_lower - fence_factor * range;
  box.fence_upper = box.central_upper + fence_factor * range;

  box.whisker_lower = box.central_lower;
  box.whisker_upper = box.central_upper;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = curves[i].values;
    const bool outside = (v.array() < box.fence_lower.array()).any() || (v.array() > box.fence_upper.array()).any();
    if (outside) {
      box.outlier_day_ids.push_back(curves[i].day_id);
      continue;
    }
    box.whisker_lower = box.whisker_lower.cwiseMin(v);
    box.whisker_upper = box.whisker_upper.cwiseMax(v);
  }
  return box;
}

}  // namespace hogfda
