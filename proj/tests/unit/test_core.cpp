#include <doctest.h>

#include "hogfda/core.hpp"
#include "hogfda/errors.hpp"
#include "hogfda/parallel.hpp"
#include "hogfda/seeds.hpp"

#include <atomic>
#include <set>
#include <stdexcept>

using namespace hogfda;

namespace {

DayRecord full_day(const GridSpec& spec, const std::string& id, Date date, double value) {
  DayRecord d{id, date, {}};
  for (int q = 0; q < spec.quarters_per_day; ++q) {
    GridSnapshot s;
    s.day_id = id;
    s.quarter = q;
    s.values = Matrix::Constant(spec.n_rows, spec.n_cols, value);
    s.mask = Mask::Constant(spec.n_rows, spec.n_cols, true);
    d.snapshots.push_back(s);
  }
  return d;
}

}  // namespace

TEST_CASE("dates: serial round trip and weekday") {
  CHECK(Date{1970, 1, 1}.serial() == 0);
  CHECK(Date{2000, 3, 1}.serial() == 11017);
  for (std::int64_t s = -1000; s < 30000; s += 37) CHECK(Date::from_serial(s).serial() == s);
  CHECK(Date{2015, 9, 1}.weekday() == Weekday::Tue);
  CHECK(Date{2016, 8, 11}.weekday() == Weekday::Thu);
  CHECK(Date{2016, 2, 29}.iso() == "2016-02-29");
  CHECK(Date::parse("2016-02-29") == Date{2016, 2, 29});
}

TEST_CASE("dates: the study period holds 346 days") {
  CHECK(Date{2016, 8, 11}.serial() - Date{2015, 9, 1}.serial() + 1 == 346);
}

TEST_CASE("dates: malformed text is a data error") {
  CHECK_THROWS_AS(Date::parse("2016-2-29"), DataError);
  CHECK_THROWS_AS(Date::parse("2015-02-29"), DataError);
  CHECK_THROWS_AS(Date::parse("2015-13-01"), DataError);
  CHECK_THROWS_AS(Date::parse("abcd-ef-gh"), DataError);
  CHECK_THROWS_AS(Date::parse(""), DataError);
}

TEST_CASE("grid spec limits") {
  CHECK_NOTHROW(check_grid(GridSpec{}));
  CHECK_THROWS_AS(check_grid(GridSpec{2, 39, 150.0, 96}), ArgumentError);
  CHECK_THROWS_AS(check_grid(GridSpec{39, 39, 150.0, 1}), ArgumentError);
}

TEST_CASE("region of interest containment") {
  const GridSpec g;
  CHECK(RegionOfInterest::full(g).contained_in(g));
  CHECK(RegionOfInterest{3, 5, 7, 7}.contained_in(g));
  CHECK_FALSE(RegionOfInterest{0, 39, 0, 38}.contained_in(g));
  CHECK_FALSE(RegionOfInterest{5, 4, 0, 1}.contained_in(g));
  CHECK_FALSE(RegionOfInterest{-1, 4, 0, 1}.contained_in(g));
}

TEST_CASE("snapshot helpers") {
  const GridSpec g{4, 5, 150.0, 3};
  const auto s = GridSnapshot::unobserved(g, "d", 2);
  CHECK(s.values.rows() == 4);
  CHECK(s.values.cols() == 5);
  CHECK(s.empty());
  CHECK_FALSE(s.fully_observed());
  CHECK(full_day(g, "d", Date{2016, 1, 1}, 1.0).fully_observed());
}

TEST_CASE("collection validation") {
  const GridSpec g{3, 3, 150.0, 4};
  DayCollection c{g, {full_day(g, "a", Date{2016, 1, 1}, 1.0), full_day(g, "b", Date{2016, 1, 2}, 2.0)}, ""};
  CHECK_NOTHROW(validate_collection(c));
  CHECK(c.find("b") == 1);
  CHECK(c.find("z") == -1);

  SUBCASE("duplicate day id") {
    c.days[1].day_id = "a";
    for (auto& s : c.days[1].snapshots) s.day_id = "a";
    CHECK_THROWS_AS(validate_collection(c), DataError);
  }
  SUBCASE("quarters must be a bijection") {
    c.days[0].snapshots[2].quarter = 1;
    CHECK_THROWS_AS(validate_collection(c), DataError);
  }
  SUBCASE("snapshot count") {
    c.days[0].snapshots.pop_back();
    CHECK_THROWS_AS(validate_collection(c), DataError);
  }
  SUBCASE("snapshot shape") {
    c.days[0].snapshots[0].values = Matrix::Zero(2, 3);
    CHECK_THROWS_AS(validate_collection(c), DataError);
  }
  SUBCASE("non-finite observed value") {
    c.days[0].snapshots[0].values(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate_collection(c), DataError);
  }
  SUBCASE("non-finite unobserved value is fine") {
    c.days[0].snapshots[0].values(1, 1) = std::numeric_limits<double>::quiet_NaN();
    c.days[0].snapshots[0].mask(1, 1) = false;
    CHECK_NOTHROW(validate_collection(c));
  }
}

TEST_CASE("seed derivation is stable and separates streams") {
  CHECK(derive_seed(7, "kmeans", {1, 2}) == derive_seed(7, "kmeans", {1, 2}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m : {0ULL, 1ULL, 7ULL})
    for (const char* stage : {"kmeans", "dfm", "outliers"})
      for (std::uint64_t k = 0; k < 20; ++k) seen.insert(derive_seed(m, stage, {k}));
  CHECK(seen.size() == 3 * 3 * 20);
  CHECK(derive_seed(7, "kmeans", {1, 2}) != derive_seed(7, "kmeans", {2, 1}));
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("parallel_for covers every index once, at any worker count") {
  for (int workers : {1, 2, 5}) {
    set_worker_count(workers);
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
  set_worker_count(1);
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
  set_worker_count(4);
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
  set_worker_count(1);
}
