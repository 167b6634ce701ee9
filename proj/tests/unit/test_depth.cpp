#include <doctest.h>

#include "hogfda/depth.hpp"
#include "hogfda/errors.hpp"
#include "hogfda/seeds.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <numbers>
#include <random>

using namespace hogfda;

namespace {

CurveSet constants(const std::vector<double>& levels, int q = 4) {
  CurveSet out;
  for (std::size_t i = 0; i < levels.size(); ++i)
    out.push_back(Curve{"c" + std::to_string(i), Vector::Constant(q, levels[i])});
  return out;
}

CurveSet random_curves(int n, int q, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  CurveSet out;
  for (int i = 0; i < n; ++i) {
    Curve c{"c" + std::to_string(i), Vector(q)};
    for (int t = 0; t < q; ++t) c.values[t] = z(rng);
    out.push_back(c);
  }
  return out;
}

// A smooth day shape with a random level and small wiggle, plus `shocks`
// curves scaled up by 1.5.
CurveSet profile_sample(int regular, int shocks, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  CurveSet out;
  for (int i = 0; i < regular + shocks; ++i) {
    Curve c{"day" + std::to_string(100 + i), Vector(96)};
    const double level = 1.0 + 0.03 * z(rng);
    const double phase = 0.01 * z(rng);
    for (int t = 0; t < 96; ++t) {
      const double x = (t + 0.5) / 96;
      c.values[t] = 40e3 * level * (1.0 + 0.3 * std::sin(std::numbers::pi * (x + phase))) + 300 * z(rng);
    }
    if (i >= regular) c.values *= 1.5;
    out.push_back(c);
  }
  return out;
}

std::vector<Vector> values_of(const CurveSet& cs) {
  std::vector<Vector> v;
  for (const auto& c : cs) v.push_back(c.values);
  return v;
}

}  // namespace

TEST_CASE("three constant curves") {
  const auto d = modified_band_depth(constants({1, 2, 3}));
  CHECK(d[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(d[1] == 1.0);
  CHECK(d[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("identical curves and pairs have depth 1") {
  for (double v : modified_band_depth(constants({4, 4, 4, 4, 4}))) CHECK(v == 1.0);
  for (double v : modified_band_depth(constants({1, 7}))) CHECK(v == 1.0);
  CHECK_THROWS_AS(modified_band_depth(constants({1})), ArgumentError);
}

TEST_CASE("band depth matches pair enumeration") {
  Rng rng(31);
  for (int n = 2; n <= 8; ++n)
    for (int t = 0; t < 5; ++t) {
      const auto cs = random_curves(n, 12, rng);
      const auto d = modified_band_depth(cs);
      const auto ref = oracle::mbd(values_of(cs));
      for (int i = 0; i < n; ++i) CHECK(std::abs(d[static_cast<std::size_t>(i)] - ref[static_cast<std::size_t>(i)]) < 1e-12);
    }
  // ties on band edges count as inside
  const auto tied = constants({1, 1, 2});
  const auto ref = oracle::mbd(values_of(tied));
  const auto d = modified_band_depth(tied);
  for (int i = 0; i < 3; ++i) CHECK(d[static_cast<std::size_t>(i)] == doctest::Approx(ref[static_cast<std::size_t>(i)]));
}

TEST_CASE("depth is unchanged by adding a common curve") {
  Rng rng(32);
  auto cs = random_curves(30, 20, rng);
  const auto before = modified_band_depth(cs);
  const Vector shift = random_curves(1, 20, rng).front().values * 100.0;
  for (auto& c : cs) c.values += shift;
  const auto after = modified_band_depth(cs);
  for (std::size_t i = 0; i < cs.size(); ++i) CHECK(std::abs(before[i] - after[i]) < 1e-12);
}

TEST_CASE("sample quantile uses linear interpolation") {
  CHECK(sample_quantile({1, 2, 3, 4}, 0.0) == 1.0);
  CHECK(sample_quantile({1, 2, 3, 4}, 1.0) == 4.0);
  CHECK(sample_quantile({4, 1, 3, 2}, 0.5) == 2.5);
  CHECK(sample_quantile({1, 2, 3, 4, 5}, 0.1) == doctest::Approx(1.4));
}

TEST_CASE("outlier detection on identical curves flags nothing") {
  CurveSet cs;
  for (int i = 0; i < 60; ++i) cs.push_back(Curve{"d" + std::to_string(i), Vector::Constant(96, 3e4)});
  const auto r = detect_outliers(cs, OutlierParams{}, 1);
  CHECK(r.flagged.empty());
  CHECK(r.kept.size() == 60);
}

TEST_CASE("outlier detection needs ten curves") {
  Rng rng(33);
  CHECK_THROWS_AS(detect_outliers(random_curves(5, 10, rng), OutlierParams{}, 1), ArgumentError);
}

TEST_CASE("planted shocks are flagged and the run is deterministic") {
  Rng rng(34);
  const auto cs = profile_sample(58, 2, rng);
  const auto a = detect_outliers(cs, OutlierParams{}, 77);
  const auto b = detect_outliers(cs, OutlierParams{}, 77);
  CHECK(a.flagged == b.flagged);
  CHECK(std::find(a.flagged.begin(), a.flagged.end(), "day158") != a.flagged.end());
  CHECK(std::find(a.flagged.begin(), a.flagged.end(), "day159") != a.flagged.end());
  CHECK(a.kept.size() + a.flagged.size() == cs.size());
  REQUIRE_FALSE(a.history.empty());
  CHECK(a.history.front().n_curves == 60);
  CHECK(static_cast<int>(a.history.size()) <= OutlierParams{}.max_passes);
}

TEST_CASE("boxplot of five nested constants") {
  const auto b = functional_boxplot(constants({1, 2, 3, 4, 5}), 0.5, 1.5);
  CHECK(b.median_day_id == "c2");
  CHECK((b.central_lower.array() == 2.0).all());
  CHECK((b.central_upper.array() == 4.0).all());
  CHECK((b.fence_lower.array() == -1.0).all());
  CHECK((b.fence_upper.array() == 7.0).all());
  CHECK((b.whisker_lower.array() == 1.0).all());
  CHECK((b.whisker_upper.array() == 5.0).all());
  CHECK(b.outlier_day_ids.empty());
}

TEST_CASE("a curve beyond the fence is an outlier and whiskers stay put") {
  const auto b = functional_boxplot(constants({1, 2, 3, 4, 5, 10}), 0.5, 1.5);
  CHECK(b.outlier_day_ids == std::vector<std::string>{"c5"});
  CHECK((b.fence_upper.array() == 7.0).all());
  CHECK((b.whisker_lower.array() == 1.0).all());
  CHECK((b.whisker_upper.array() == 5.0).all());
}

TEST_CASE("single curve boxplot is degenerate") {
  const auto b = functional_boxplot(constants({2.5}), 0.5, 1.5);
  CHECK(b.median_day_id == "c0");
  for (const Vector* v : {&b.median, &b.central_lower, &b.central_upper, &b.fence_lower, &b.fence_upper,
                          &b.whisker_lower, &b.whisker_upper})
    CHECK((v->array() == 2.5).all());
  CHECK_THROWS_AS(functional_boxplot(CurveSet{}, 0.5, 1.5), ArgumentError);
}

TEST_CASE("boxplot bands nest on random inputs") {
  Rng rng(35);
  std::uniform_int_distribution<int> size(1, 40);
  for (int t = 0; t < 50; ++t) {
    const auto cs = random_curves(size(rng), 16, rng);
    const auto b = functional_boxplot(cs, 0.5, 1.5);
    CHECK((b.fence_lower.array() <= b.central_lower.array()).all());
    CHECK((b.central_lower.array() <= b.central_upper.array()).all());
    CHECK((b.central_upper.array() <= b.fence_upper.array()).all());
    CHECK((b.whisker_lower.array() >= b.fence_lower.array()).all());
    CHECK((b.whisker_upper.array() <= b.fence_upper.array()).all());
    CHECK((b.median.array() >= b.central_lower.array()).all());
    CHECK((b.median.array() <= b.central_upper.array()).all());
    CHECK(b.depths.size() == cs.size());
  }
}
