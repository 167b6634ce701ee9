#include <doctest.h>

#include "hogfda/dfm.hpp"
#include "hogfda/errors.hpp"
#include "hogfda/metrics.hpp"
#include "hogfda/seeds.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace hogfda;

namespace {

// Gaussian groups in R^d with unit noise; group g is offset by `sep` along
// axis g.
Matrix groups(int n_groups, int per, int d, double sep, Rng& rng, std::vector<int>& truth) {
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix x(d, n_groups * per);
  truth.clear();
  for (int g = 0; g < n_groups; ++g)
    for (int i = 0; i < per; ++i) {
      const int j = g * per + i;
      for (int r = 0; r < d; ++r) x(r, j) = z(rng);
      x(g % d, j) += sep * (1 + g / d);
      truth.push_back(g);
    }
  return x;
}

// Full-space mixture log-likelihood evaluated directly from the model.
double direct_loglik(const DfmModel& m, const Matrix& x) {
  const int d = m.dimension();
  const Matrix& U = m.orientation;
  const Matrix P = Matrix::Identity(d, d) - U * U.transpose();
  double ll = 0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    double dens = 0;
    for (int k = 0; k < m.K; ++k) {
      const Matrix cov = U * m.latent_covariances[static_cast<std::size_t>(k)] * U.transpose() + m.noise_variance * P;
      const Eigen::LLT<Matrix> llt(cov);
      const Vector r = x.col(i) - m.center - U * m.latent_means.col(k);
      const double maha = r.dot(llt.solve(r));
      const double logdet = 2 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      dens += m.proportions[k] * std::exp(-0.5 * (maha + logdet + d * std::log(2 * std::numbers::pi)));
    }
    ll += std::log(dens);
  }
  return ll;
}

}  // namespace

TEST_CASE("two separated blobs in R^15 are recovered exactly") {
  Rng rng(41);
  std::vector<int> truth;
  const Matrix x = groups(2, 30, 15, 10.0, rng, truth);
  const auto m = dfm_fit(x, 2, DfmConfig{}, 3);
  CHECK(adjusted_rand_index(m.hard_labels(), truth) == 1.0);
  CHECK(m.latent_dim == 1);
  CHECK(m.orientation.rows() == 15);
  CHECK(m.orientation.cols() == 1);
  CHECK(m.proportions.sum() == doctest::Approx(1.0));
  CHECK(m.noise_variance >= DfmConfig{}.beta_floor);
}

TEST_CASE("EM diagnostics: monotone loglik, orthonormal U, stochastic rows") {
  Rng rng(42);
  std::vector<int> truth;
  for (int K : {2, 3, 4}) {
    const Matrix x = groups(3, 25, 9, 3.0, rng, truth);
    const auto m = dfm_fit(x, K, DfmConfig{}, K);
    REQUIRE_FALSE(m.loglik_trace.empty());
    for (std::size_t i = 1; i < m.loglik_trace.size(); ++i)
      CHECK(m.loglik_trace[i] >= m.loglik_trace[i - 1] - 1e-8 * std::abs(m.loglik_trace[i - 1]));
    CHECK(m.max_orthonormality_error < 1e-10);
    CHECK(m.max_row_sum_error < 1e-12);
    const Vector rows = m.responsibilities.rowwise().sum();
    CHECK((rows.array() - 1.0).abs().maxCoeff() < 1e-12);
    for (const auto& s : m.latent_covariances)
      CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues().minCoeff() >= DfmConfig{}.ridge * (1 - 1e-9));
  }
}

TEST_CASE("reported loglik equals the directly evaluated mixture density") {
  Rng rng(43);
  std::vector<int> truth;
  const Matrix x = groups(3, 20, 7, 4.0, rng, truth);
  const auto m = dfm_fit(x, 3, DfmConfig{}, 1);
  CHECK(m.loglik == doctest::Approx(direct_loglik(m, x)).epsilon(1e-9));
  CHECK(m.bic == doctest::Approx(m.loglik - 0.5 * m.n_parameters() * std::log(60.0)).epsilon(1e-12));
}

TEST_CASE("parameter count") {
  // K=2, d=15: 1 + 2 + 2 + 1 + (15 - 1)
  CHECK(dfm_parameter_count(2, 15) == 20);
  // K=3, d=15, p=2: 2 + 6 + 9 + 1 + (30 - 3)
  CHECK(dfm_parameter_count(3, 15) == 45);
}

TEST_CASE("argument errors") {
  const Matrix x1 = Matrix::Random(1, 20);
  CHECK_THROWS_AS(dfm_fit(x1, 2, DfmConfig{}, 1), ArgumentError);
  DfmConfig empty;
  empty.k_min = 4;
  empty.k_max = 3;
  CHECK_THROWS_AS(dfm_select(Matrix::Random(5, 30), empty, 1), ArgumentError);
}

TEST_CASE("BIC picks two groups for two blobs") {
  Rng rng(44);
  std::vector<int> truth;
  const Matrix x = groups(2, 30, 15, 10.0, rng, truth);
  DfmConfig cfg;
  cfg.k_min = 2;
  cfg.k_max = 5;
  const auto sel = dfm_select(x, cfg, 9);
  CHECK(sel.best.K == 2);
  CHECK(sel.table.size() == 4);
  for (const auto& e : sel.table)
    if (e.ok) CHECK(e.bic <= sel.best.bic);
}

TEST_CASE("same seed fits agree; translation leaves assignments unchanged") {
  Rng rng(45);
  std::vector<int> truth;
  const Matrix x = groups(3, 20, 8, 5.0, rng, truth);
  const auto a = dfm_fit(x, 3, DfmConfig{}, 5);
  const auto b = dfm_fit(x, 3, DfmConfig{}, 5);
  CHECK(adjusted_rand_index(a.hard_labels(), b.hard_labels()) == 1.0);
  const Matrix shifted = x.colwise() + Vector::Constant(8, 250.0);
  const auto c = dfm_fit(shifted, 3, DfmConfig{}, 5);
  CHECK(adjusted_rand_index(a.hard_labels(), c.hard_labels()) == 1.0);
}

TEST_CASE("posterior of a hand-built symmetric model") {
  DfmModel m;
  m.K = 2;
  m.latent_dim = 1;
  m.orientation = Matrix::Zero(3, 1);
  m.orientation(0, 0) = 1.0;
  m.proportions = Vector::Constant(2, 0.5);
  m.latent_means = Matrix(1, 2);
  m.latent_means << -5.0, 5.0;
  m.latent_covariances = {Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  m.noise_variance = 1.0;
  m.center = Vector::Constant(3, 2.0);

  Vector mid = m.center;
  mid[1] += 0.7;
  const auto half = predict_posterior(m, mid);
  CHECK(std::abs(half[0] - 0.5) < 1e-12);
  CHECK(std::abs(half[1] - 0.5) < 1e-12);

  const Vector at_first = m.orientation * m.latent_means.col(0) + m.center;
  const auto p = predict_posterior(m, at_first);
  CHECK(p[0] > 0.99);
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(predict_posterior(m, Vector::Zero(4)), ArgumentError);
}

TEST_CASE("coefficient matrix stacks smoothed curves as columns") {
  std::vector<SmoothedCurve> s(2);
  s[0].coefficients = Vector::Constant(3, 1.0);
  s[1].coefficients = Vector::Constant(3, 2.0);
  const auto c = coefficient_matrix(s);
  CHECK(c.rows() == 3);
  CHECK(c.cols() == 2);
  CHECK(c(2, 1) == 2.0);
}
