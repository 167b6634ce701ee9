// Acceptance suite: synthetic-recovery experiments plus oracle and invariant
// checks. Prints one PASS/FAIL line per criterion; exits non-zero on any FAIL.
//
//   acceptance [criterion ...]   run only the listed criteria (1..9)

#include "hogfda/depth.hpp"
#include "hogfda/dfm.hpp"
#include "hogfda/errors.hpp"
#include "hogfda/fda.hpp"
#include "hogfda/hog.hpp"
#include "hogfda/ingest.hpp"
#include "hogfda/metrics.hpp"
#include "hogfda/parallel.hpp"
#include "hogfda/pipeline.hpp"
#include "hogfda/seeds.hpp"
#include "hogfda/synth.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace hogfda;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Ten full default-scenario runs shared by criteria 1, 2 and 8.
const std::vector<PipelineReport>& default_runs() {
  static const std::vector<PipelineReport> runs = [] {
    std::vector<PipelineReport> out;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      PipelineConfig cfg;
      cfg.seed = seed;
      PipelineInput input;
      input.synthetic = true;
      out.push_back(run_pipeline(cfg, input));
      std::fprintf(stderr, "acceptance: default scenario seed %llu done\n", static_cast<unsigned long long>(seed));
    }
    return out;
  }();
  return runs;
}

int type_index(const GroundTruth& truth, const std::string& name) {
  const auto it = std::find(truth.type_names.begin(), truth.type_names.end(), name);
  return it == truth.type_names.end() ? -1 : static_cast<int>(it - truth.type_names.begin());
}

double stage_seconds(const PipelineReport& r, const std::set<std::string>& stages) {
  double s = 0;
  for (const auto& t : r.timings)
    if (stages.count(t.stage)) s += t.seconds;
  return s;
}

Outcome day_cluster_recovery() {
  int selecting = 0;
  double min_ari = 1.0, max_seconds = 0.0;
  std::string ks;
  for (const auto& r : default_runs()) {
    const auto& truth = *r.truth;
    std::vector<int> want;
    for (const auto& id : r.days.day_ids) want.push_back(truth.type_of(id));
    ks += std::to_string(r.days.k);
    max_seconds = std::max(max_seconds, stage_seconds(r, {"simulate", "missing", "features", "cluster-days"}));
    if (r.days.k != 6) continue;
    ++selecting;
    min_ari = std::min(min_ari, adjusted_rand_index(r.days.labels, want));
  }
  const bool pass = selecting >= 8 && min_ari >= 0.90 && max_seconds <= 60.0;
  return {pass, fmt("k=6 in %d/10 seeds (k per seed: %s), min ARI %.4f, slowest stage run %.1f s", selecting,
                    ks.c_str(), min_ari, max_seconds)};
}

// The day cluster holding most of the planted summer-weekday days.
const ClusterAnalysis* summer_cluster(const PipelineReport& r) {
  const int summer = type_index(*r.truth, "summer_weekday");
  const ClusterAnalysis* best = nullptr;
  int best_count = -1;
  for (const auto& c : r.clusters) {
    int count = 0;
    for (const auto& curve : c.curves) count += r.truth->type_of(curve.day_id) == summer ? 1 : 0;
    if (count > best_count) {
      best_count = count;
      best = &c;
    }
  }
  return best;
}

Outcome subcluster_recovery() {
  int hits = 0;
  double min_ari = 1.0;
  std::string ks;
  for (const auto& r : default_runs()) {
    const auto* c = summer_cluster(r);
    ks += std::to_string(c->K);
    // type and month tier together, so stray days of another type count as errors
    std::vector<int> want;
    for (const auto& s : c->smoothed) want.push_back(10 * r.truth->type_of(s.day_id) + r.truth->subgroup_of(s.day_id));
    if (c->K != 3) continue;
    ++hits;
    min_ari = std::min(min_ari, adjusted_rand_index(c->labels, want));
  }
  return {hits >= 8 && min_ari >= 0.90,
          fmt("K=3 in %d/10 seeds (K per seed: %s), min ARI %.4f", hits, ks.c_str(), min_ari)};
}

Outcome outlier_stage() {
  int positives = 0, caught = 0, negatives = 0, false_flags = 0;
  std::size_t min_n = 1000, max_n = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cfg = SynthConfig::defaults();
    cfg.seed = seed;
    const auto synth = generate(cfg);
    const auto cleaned = handle_missing(synth.data, {});
    const int summer = type_index(synth.truth, "summer_weekday");
    CurveSet curves;
    for (const auto& d : cleaned.data.days)
      if (synth.truth.type_of(d.day_id) == summer) curves.push_back(extract_ddp(d, RegionOfInterest::full(cfg.grid)));
    min_n = std::min(min_n, curves.size());
    max_n = std::max(max_n, curves.size());
    const auto res = detect_outliers(curves, OutlierParams{}, derive_seed(seed, "outlier-stage"));
    const std::set<std::string> flagged(res.flagged.begin(), res.flagged.end());
    for (const auto& c : curves) {
      const bool planted = synth.truth.is_outlier(c.day_id);
      const bool hit = flagged.count(c.day_id) > 0;
      if (planted) {
        ++positives;
        caught += hit;
      } else {
        ++negatives;
        false_flags += hit;
      }
    }
  }
  const double recall = positives ? double(caught) / positives : 0.0;
  const double fpr = negatives ? double(false_flags) / negatives : 1.0;
  return {recall >= 0.90 && fpr <= 0.05,
          fmt("20 seeds, %zu-%zu curves each: recall %d/%d = %.3f, false positives %d/%d = %.4f", min_n, max_n,
              caught, positives, recall, false_flags, negatives, fpr)};
}

Outcome em_correctness() {
  Rng rng(derive_seed(2024, "acceptance-em"));
  std::uniform_int_distribution<int> kdist(2, 4), ndist(15, 40);
  std::uniform_real_distribution<double> sep(0.5, 8.0), scale(0.3, 3.0);
  std::normal_distribution<double> z(0.0, 1.0);
  double worst_drop = 0, worst_orth = 0, worst_rows = 0;
  int runs = 0, errors = 0, violations = 0;
  for (int run = 0; run < 100; ++run) {
    const int k_true = kdist(rng), k_fit = kdist(rng);
    const int d = std::uniform_int_distribution<int>(std::max(3, k_fit), 15)(rng);
    const int per = ndist(rng);
    Matrix x(d, k_true * per);
    const double s = sep(rng);
    for (int g = 0; g < k_true; ++g) {
      Vector mean(d);
      for (int r = 0; r < d; ++r) mean[r] = s * z(rng);
      const double sc = scale(rng);
      for (int i = 0; i < per; ++i)
        for (int r = 0; r < d; ++r) x(r, g * per + i) = mean[r] + sc * z(rng);
    }
    try {
      const auto m = dfm_fit(x, k_fit, DfmConfig{}, derive_seed(run, "fit"));
      ++runs;
      bool bad = false;
      for (std::size_t i = 1; i < m.loglik_trace.size(); ++i) {
        const double drop = (m.loglik_trace[i - 1] - m.loglik_trace[i]) / std::abs(m.loglik_trace[i - 1]);
        worst_drop = std::max(worst_drop, drop);
        bad |= drop > 1e-8;
      }
      worst_orth = std::max(worst_orth, m.max_orthonormality_error);
      worst_rows = std::max(worst_rows, m.max_row_sum_error);
      bad |= m.max_orthonormality_error >= 1e-10 || m.max_row_sum_error >= 1e-12;
      violations += bad;
    } catch (const NumericError&) {
      ++errors;
    }
  }
  return {runs == 100 && violations == 0,
          fmt("%d/100 fits completed (%d numeric failures), %d violating; worst relative loglik drop %.2e, "
              "max |U'U - I| %.2e, max |row sum - 1| %.2e",
              runs, errors, violations, worst_drop, worst_orth, worst_rows)};
}

Outcome smoothing_oracle() {
  Rng rng(derive_seed(2024, "acceptance-smoothing"));
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> half(0, 47);
  double worst_rel = 0, worst_orth = 0;
  for (int t = 0; t < 100; ++t) {
    const int d = t % 4 == 0 ? 15 : 2 * half(rng) + 1;
    const FourierBasis basis(d, 96);
    worst_orth = std::max(worst_orth, basis.orthogonality_residual());
    Curve c{"c", Vector(96)};
    const double level = 3e4 * (1 + std::abs(z(rng)));
    for (int j = 0; j < 96; ++j) c.values[j] = level + 5e3 * z(rng);
    const auto s = smooth_curve(c, basis);
    const Vector ref = oracle::normal_equations(oracle::fourier_design(d, 96), c.values);
    worst_rel = std::max(worst_rel, (s.coefficients - ref).norm() / ref.norm());
  }
  return {worst_rel < 1e-9 && worst_orth < 1e-10,
          fmt("100 curves: max relative coefficient error %.2e, max orthogonality residual %.2e", worst_rel,
              worst_orth)};
}

Outcome depth_oracle() {
  Rng rng(derive_seed(2024, "acceptance-depth"));
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> qdist(1, 24), small(0, 3);
  double worst = 0;
  int sets = 0;
  for (int n = 2; n <= 8; ++n)
    for (int t = 0; t < 60; ++t) {
      const int q = qdist(rng);
      const bool ties = t % 3 == 0;  // small integer values to exercise band edges
      CurveSet cs;
      std::vector<Vector> raw;
      for (int i = 0; i < n; ++i) {
        Vector v(q);
        for (int j = 0; j < q; ++j) v[j] = ties ? small(rng) : z(rng);
        cs.push_back(Curve{"c" + std::to_string(i), v});
        raw.push_back(v);
      }
      const auto d = modified_band_depth(cs);
      const auto ref = oracle::mbd(raw);
      for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(d[i] - ref[i]));
      ++sets;
    }
  CurveSet nested;
  for (double v : {1.0, 2.0, 3.0}) nested.push_back(Curve{"c", Vector::Constant(10, v)});
  const auto d = modified_band_depth(nested);
  const bool exact = d[0] == 2.0 / 3.0 && d[1] == 1.0 && d[2] == 2.0 / 3.0;
  return {worst < 1e-12 && exact, fmt("%d random sets (n <= 8): max deviation %.2e; nested constants %s", sets, worst,
                                      exact ? "(2/3, 1, 2/3) exactly" : "not exact")};
}

Outcome hog_invariants() {
  Rng rng(derive_seed(2024, "acceptance-hog"));
  std::uniform_real_distribution<double> u(0.0, 1000.0), alpha(0.01, 100.0);
  std::uniform_int_distribution<int> small(1, 4), bins(1, 18), extra(0, 4);
  auto snapshot = [](const Matrix& v) {
    GridSnapshot s;
    s.values = v;
    s.mask = Mask::Constant(v.rows(), v.cols(), true);
    return s;
  };
  auto field = [&](int rows, int cols) { return Matrix(Matrix::NullaryExpr(rows, cols, [&] { return u(rng); })); };

  std::vector<std::pair<HogParams, std::pair<int, int>>> cases = {{HogParams{}, {39, 39}}};
  while (cases.size() < 21) {
    HogParams p;
    p.cell_rows = small(rng);
    p.cell_cols = small(rng);
    p.n_bins = bins(rng);
    p.block_cells = small(rng);
    p.block_stride_cells = small(rng);
    // cell counts chosen so blocks tile exactly, which rot180 needs
    const int down = p.block_cells + p.block_stride_cells * extra(rng);
    const int across = p.block_cells + p.block_stride_cells * extra(rng);
    const int rows = p.cell_rows * down, cols = p.cell_cols * across;
    if (rows < 3 || cols < 3) continue;
    cases.push_back({p, {rows, cols}});
  }

  double zero_max = 0, scale_max = 0, rot_max = 0;
  int dim_ok = 0;
  for (const auto& [p, size] : cases) {
    const auto [rows, cols] = size;
    const oracle::HogShape shape{p.cell_rows, p.cell_cols, p.n_bins, p.block_cells, p.block_stride_cells};
    const auto zero = compute_snapshot_hog(snapshot(Matrix::Constant(rows, cols, 5.0)), p);
    zero_max = std::max(zero_max, zero.cwiseAbs().maxCoeff());
    const Matrix v = field(rows, cols);
    const auto f = compute_snapshot_hog(snapshot(v), p);
    const auto g = compute_snapshot_hog(snapshot(alpha(rng) * v), p);
    scale_max = std::max(scale_max, (f - g).cwiseAbs().maxCoeff());
    const auto r = compute_snapshot_hog(snapshot(oracle::rot180(v)), p);
    const auto perm = oracle::rot180_permutation(rows, cols, shape);
    for (std::size_t i = 0; i < perm.size(); ++i)
      rot_max = std::max(rot_max, std::abs(f[static_cast<Eigen::Index>(i)] - r[perm[i]]));
    const GridSpec spec{rows, cols, 150.0, 96};
    dim_ok += f.size() == oracle::hog_length(rows, cols, shape) && hog_dimension(spec, p) == f.size();
  }
  const int n = static_cast<int>(cases.size());
  return {zero_max == 0.0 && scale_max < 1e-9 && rot_max < 1e-12 && dim_ok == n,
          fmt("%d parameterizations (default + %d random): constant max |f| %.1e, scale max diff %.2e, "
              "rot180 max diff %.2e, dimension formula %d/%d",
              n, n - 1, zero_max, scale_max, rot_max, dim_ok, n)};
}

Outcome magnitude_calibration() {
  double lo = 1e300, hi = 0;
  int days = 0, off_band = 0;
  for (const auto& r : default_runs())
    for (const auto& c : r.clusters)
      for (const auto& curve : c.curves) {
        if (r.truth->is_outlier(curve.day_id)) continue;
        ++days;
        lo = std::min(lo, curve.values.minCoeff());
        hi = std::max(hi, curve.values.maxCoeff());
        Eigen::Index peak = 0;
        curve.values.maxCoeff(&peak);
        off_band += peak < oracle::kMiddayFirst || peak > oracle::kMiddayLast;
      }
  return {lo >= 25e3 && hi <= 65e3 && off_band == 0,
          fmt("%d non-outlier days over 10 seeds: range [%.0f, %.0f], peaks outside 09:00-17:00: %d", days, lo, hi,
              off_band)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "hogfda_acceptance_determinism";
  fs::remove_all(root);
  PipelineConfig cfg;
  cfg.seed = 7;
  PipelineInput input;
  input.synthetic = true;
  const int many = 4;
  std::vector<std::pair<int, fs::path>> runs = {{1, root / "t1a"}, {1, root / "t1b"}, {many, root / "tNa"}, {many, root / "tNb"}};
  for (const auto& [workers, dir] : runs) {
    set_worker_count(workers);
    write_pipeline_outputs(run_pipeline(cfg, input), dir.string());
  }
  set_worker_count(1);
  int same = 0;
  for (const char* f : {"report.json", "manifest.json"}) {
    const auto ref = slurp(runs[0].second / f);
    bool all = !ref.empty();
    for (const auto& [workers, dir] : runs) all &= slurp(dir / f) == ref;
    same += all;
  }
  fs::remove_all(root);
  return {same == 2, fmt("seed 7, runs at 1, 1, %d, %d workers: report.json and manifest.json %s", many, many,
                         same == 2 ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"day-cluster recovery", day_cluster_recovery},
      {"FDA sub-cluster recovery", subcluster_recovery},
      {"outlier stage", outlier_stage},
      {"EM correctness", em_correctness},
      {"smoothing oracle", smoothing_oracle},
      {"depth oracle", depth_oracle},
      {"HOG invariants", hog_invariants},
      {"magnitude calibration", magnitude_calibration},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  set_worker_count(1);
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
