#include "hogfda/dfm.hpp"

#include "hogfda/errors.hpp"
#include "hogfda/kmeans.hpp"
#include "hogfda/parallel.hpp"
#include "hogfda/seeds.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace hogfda {

int dfm_parameter_count(int K, int d) {
  const int p = K - 1;
  return (K - 1) + K * p + K * p * (p + 1) / 2 + 1 + (d * p - p * (p + 1) / 2);
}

int DfmModel::n_parameters() const { return dfm_parameter_count(K, dimension()); }

std::vector<int> DfmModel::hard_labels() const {
  std::vector<int> labels(static_cast<std::size_t>(responsibilities.rows()));
  for (Eigen::Index i = 0; i < responsibilities.rows(); ++i) {
    Eigen::Index best;
    responsibilities.row(i).maxCoeff(&best);
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

namespace {

struct Params {
  Matrix U;
  Vector pi;
  Matrix mu;
  std::vector<Matrix> sigma;
  double beta = 0.0;
};

struct Evaluation {
  double loglik = 0.0;
  Matrix t;  // n x K
};

// Ledoit-Wolf shrinkage of the within scatter towards a scaled identity,
// expressed as the equivalent ridge added to its diagonal.
double shrinkage_ridge(const Matrix& x, const Matrix& t, const std::vector<Vector>& centers, const Matrix& sw) {
  const auto d = static_cast<double>(x.rows());
  const auto n = static_cast<double>(x.cols());
  const double mu = sw.trace() / d;
  const double spread = (sw - mu * Matrix::Identity(x.rows(), x.rows())).squaredNorm();
  if (!(spread > 0.0)) return 0.0;
  const double sw_norm2 = sw.squaredNorm();
  double fluct = 0.0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const double w = t(i, static_cast<Eigen::Index>(k));
      if (w == 0.0) continue;
      const Vector r = x.col(i) - centers[k];
      const double r2 = r.squaredNorm();
      fluct += w * (r2 * r2 - 2.0 * r.dot(sw * r) + sw_norm2);
    }
  }
  const double rho = std::min(fluct / (n * n), spread) / spread;
  if (rho >= 1.0) return 1e12 * mu;
  return rho * mu / (1.0 - rho);
}

// Orientation from the Fisher criterion on the soft partition `t`.
Matrix fisher_step(const Matrix& x, const Matrix& t, int p, double ridge) {
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  const Eigen::Index K = t.cols();
  Matrix sw = Matrix::Zero(d, d);
  Matrix sb = Matrix::Zero(d, d);
  std::vector<Vector> centers(static_cast<std::size_t>(K));
  for (Eigen::Index k = 0; k < K; ++k) {
    const double nk = t.col(k).sum();
    const Vector ck = x * t.col(k) / nk;
    const Matrix centered = x.colwise() - ck;
    sw.noalias() += centered * t.col(k).asDiagonal() * centered.transpose();
    sb.noalias() += nk * ck * ck.transpose();
    centers[static_cast<std::size_t>(k)] = ck;
  }
  sw /= static_cast<double>(n);
  sb /= static_cast<double>(n);
  sw.diagonal().array() += std::max(ridge, shrinkage_ridge(x, t, centers, sw));
  // Orthonormal discriminant vectors: each direction maximises the Fisher
  // ratio inside the orthogonal complement of the directions found so far.
  Matrix u(d, p);
  for (int j = 0; j < p; ++j) {
    Matrix basis;  // orthonormal basis of the complement, d x (d - j)
    if (j == 0) {
      basis = Matrix::Identity(d, d);
    } else {
      Eigen::HouseholderQR<Matrix> qr(u.leftCols(j));
      basis = (qr.householderQ() * Matrix::Identity(d, d)).rightCols(d - j);
    }
    const Matrix b = basis.transpose() * sb * basis;
    const Matrix w = basis.transpose() * sw * basis;
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(b, w);
    if (ges.info() != Eigen::Success) throw NumericError("Fisher step: eigen decomposition failed");
    Vector dir = basis * ges.eigenvectors().col(d - j - 1);
    // re-orthogonalise against rounding drift
    if (j > 0) dir -= u.leftCols(j) * (u.leftCols(j).transpose() * dir);
    u.col(j) = dir.normalized();
  }
  for (int j = 0; j < p; ++j) {
    Eigen::Index arg;
    u.col(j).cwiseAbs().maxCoeff(&arg);
    if (u(arg, j) < 0.0) u.col(j) = -u.col(j);
  }
  return u;
}

// Mixture parameters inside the subspace U; nullopt when a cluster's
// effective size drops below p + 1.
std::optional<Params> m_step(const Matrix& x, const Matrix& t, const Matrix& U, const DfmConfig& cfg) {
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  const Eigen::Index K = t.cols();
  const Eigen::Index p = U.cols();
  Params P;
  P.U = U;
  P.pi.resize(K);
  P.mu.resize(p, K);
  P.sigma.resize(static_cast<std::size_t>(K));
  const Matrix y = U.transpose() * x;  // p x n
  for (Eigen::Index k = 0; k < K; ++k) {
    const double nk = t.col(k).sum();
    if (!(nk >= static_cast<double>(p + 1))) return std::nullopt;
    P.pi[k] = nk / static_cast<double>(n);
    P.mu.col(k) = y * t.col(k) / nk;
    const Matrix centered = y.colwise() - P.mu.col(k);
    Matrix s = centered * t.col(k).asDiagonal() * centered.transpose() / nk;
    s.diagonal().array() += cfg.ridge;
    P.sigma[static_cast<std::size_t>(k)] = std::move(s);
  }
  const Matrix resid = x - U * y;
  P.beta = std::max(cfg.beta_floor, resid.squaredNorm() / (static_cast<double>(n) * static_cast<double>(d - p)));
  return P;
}

// Log of pi_k N(x; U mu_k, U Sigma_k U' + beta (I - UU')) for every (i, k).
Matrix log_weighted_density(const Params& P, const Matrix& x) {
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  const Eigen::Index K = P.pi.size();
  const Eigen::Index p = P.U.cols();
  const Matrix y = P.U.transpose() * x;
  const Vector resid2 = (x - P.U * y).colwise().squaredNorm().transpose();
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const double noise_const = static_cast<double>(d - p) * std::log(P.beta);
  Matrix out(n, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    Eigen::LLT<Matrix> llt(P.sigma[static_cast<std::size_t>(k)]);
    if (llt.info() != Eigen::Success) throw NumericError("latent covariance is not positive definite");
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Matrix centered = y.colwise() - P.mu.col(k);
    const Matrix w = llt.matrixL().solve(centered);  // p x n
    const Vector maha = w.colwise().squaredNorm().transpose();
    const double logpi = std::log(P.pi[k]);
    for (Eigen::Index i = 0; i < n; ++i)
      out(i, k) = logpi - 0.5 * (static_cast<double>(d) * log2pi + logdet + maha[i] + resid2[i] / P.beta + noise_const);
  }
  return out;
}

Evaluation evaluate(const Params& P, const Matrix& x) {
  const Matrix lw = log_weighted_density(P, x);
  Evaluation e;
  e.t.resize(lw.rows(), lw.cols());
  for (Eigen::Index i = 0; i < lw.rows(); ++i) {
    const double mx = lw.row(i).maxCoeff();
    const double sum = (lw.row(i).array() - mx).exp().sum();
    const double lse = mx + std::log(sum);
    e.loglik += lse;
    e.t.row(i) = (lw.row(i).array() - lse).exp();
    e.t.row(i) /= e.t.row(i).sum();
  }
  if (!std::isfinite(e.loglik)) throw NumericError("non-finite log-likelihood");
  return e;
}

struct RunResult {
  bool degenerate = true;
  DfmModel model;
};

double orthonormality_error(const Matrix& U) {
  return (U.transpose() * U - Matrix::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
}

double row_sum_error(const Matrix& t) { return (t.rowwise().sum().array() - 1.0).abs().maxCoeff(); }

RunResult run_once(const Matrix& x, int K, const DfmConfig& cfg, std::uint64_t seed) {
  const int p = K - 1;
  const Eigen::Index n = x.cols();
  RunResult out;

  const auto init = kmeans_fit(x, K, 1, seed, 1e-12, 100);
  Matrix t = Matrix::Zero(n, K);
  for (Eigen::Index i = 0; i < n; ++i) t(i, init.assignments[static_cast<std::size_t>(i)]) = 1.0;

  DfmModel& m = out.model;
  std::optional<Params> current;
  Matrix current_t;
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iter; ++it) {
    const Matrix U = fisher_step(x, t, p, cfg.ridge);
    m.max_orthonormality_error = std::max(m.max_orthonormality_error, orthonormality_error(U));
    auto cand = m_step(x, t, U, cfg);
    if (!cand) return out;
    Evaluation ev = evaluate(*cand, x);
    if (current && ev.loglik < prev) {
      // Subspace update lowered the likelihood; fall back to a plain EM
      // step for the mixture parameters with the previous subspace.
      ++m.fisher_steps_rejected;
      auto fallback = m_step(x, t, current->U, cfg);
      if (!fallback) return out;
      Evaluation ev_fb = evaluate(*fallback, x);
      if (ev_fb.loglik < prev) {
        m.converged = true;
        break;
      }
      cand = std::move(fallback);
      ev = std::move(ev_fb);
    }
    m.max_row_sum_error = std::max(m.max_row_sum_error, row_sum_error(ev.t));
    m.loglik_trace.push_back(ev.loglik);
    m.n_iterations = it + 1;
    const bool small_change = current && std::abs(ev.loglik - prev) <= cfg.em_tol * std::abs(prev);
    current = std::move(cand);
    current_t = ev.t;
    prev = ev.loglik;
    t = std::move(ev.t);
    if (small_change) {
      m.converged = true;
      break;
    }
  }
  if (!current) return out;

  for (std::size_t i = 1; i < m.loglik_trace.size(); ++i)
    if (m.loglik_trace[i] < m.loglik_trace[i - 1] - 1e-8 * std::abs(m.loglik_trace[i - 1]))
      throw NumericError("Fisher-EM: log-likelihood decreased");

  m.K = K;
  m.latent_dim = p;
  m.orientation = current->U;
  m.proportions = current->pi;
  m.latent_means = current->mu;
  m.latent_covariances = current->sigma;
  m.noise_variance = current->beta;
  m.loglik = prev;
  m.responsibilities = std::move(current_t);
  out.degenerate = false;
  return out;
}

}  // namespace

DfmModel dfm_fit(const Matrix& coeffs, int K, const DfmConfig& cfg, std::uint64_t seed) {
  const Eigen::Index d = coeffs.rows();
  const Eigen::Index n = coeffs.cols();
  if (K < 2) throw ArgumentError("DFM: K must be >= 2");
  if (d <= K - 1)
    throw ArgumentError("DFM: dimension " + std::to_string(d) + " must exceed latent dimension " +
                        std::to_string(K - 1));
  if (n <= K) throw ArgumentError("DFM: need more than K=" + std::to_string(K) + " observations");
  if (cfg.restarts < 1 || cfg.max_iter < 1) throw ArgumentError("DFM: restarts and max_iter must be >= 1");
  if (!coeffs.allFinite()) throw DataError("DFM: non-finite coefficients");

  const Vector center = coeffs.rowwise().mean();
  const Matrix x = coeffs.colwise() - center;

  std::vector<RunResult> runs(static_cast<std::size_t>(cfg.restarts));
  parallel_for(runs.size(), [&](std::size_t r) {
    runs[r] = run_once(x, K, cfg, derive_seed(seed, "dfm", {static_cast<std::uint64_t>(K), r}));
  });
  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].degenerate) continue;
    if (!best || runs[r].model.loglik > runs[*best].model.loglik) best = r;
  }
  if (!best)
    throw NumericError("DFM: all " + std::to_string(cfg.restarts) + " restarts degenerated for K=" +
                       std::to_string(K));
  DfmModel m = std::move(runs[*best].model);
  m.center = center;
  m.restart_index = static_cast<int>(*best);
  m.bic = m.loglik - 0.5 * m.n_parameters() * std::log(static_cast<double>(n));
  return m;
}

DfmSelection dfm_select(const Matrix& coeffs, const DfmConfig& cfg, std::uint64_t seed) {
  if (cfg.k_min > cfg.k_max) throw ArgumentError("DFM: empty K range");
  if (cfg.k_min < 2) throw ArgumentError("DFM: K range must start at 2 or more");
  DfmSelection sel;
  std::optional<DfmModel> best;
  for (int K = cfg.k_min; K <= cfg.k_max; ++K) {
    BicEntry e;
    e.K = K;
    e.n_parameters = dfm_parameter_count(K, static_cast<int>(coeffs.rows()));
    try {
      auto m = dfm_fit(coeffs, K, cfg, seed);
      e.ok = true;
      e.loglik = m.loglik;
      e.bic = m.bic;
      if (!best || m.bic > best->bic) best = std::move(m);
    } catch (const NumericError& err) {
      e.message = err.what();
    }
    sel.table.push_back(std::move(e));
  }
  if (!best) throw NumericError("DFM: no K in range produced a valid fit");
  sel.best = std::move(*best);
  return sel;
}

Matrix coefficient_matrix(const std::vector<SmoothedCurve>& smoothed) {
  if (smoothed.empty()) return Matrix();
  Matrix m(smoothed.front().coefficients.size(), static_cast<Eigen::Index>(smoothed.size()));
  for (std::size_t i = 0; i < smoothed.size(); ++i) {
    if (smoothed[i].coefficients.size() != m.rows()) throw DataError("coefficient vectors differ in length");
    m.col(static_cast<Eigen::Index>(i)) = smoothed[i].coefficients;
  }
  return m;
}

Vector predict_posterior(const DfmModel& model, const Vector& coeff) {
  if (coeff.size() != model.dimension())
    throw ArgumentError("posterior: coefficient length " + std::to_string(coeff.size()) + " != model dimension " +
                        std::to_string(model.dimension()));
  Params P{model.orientation, model.proportions, model.latent_means, model.latent_covariances,
           model.noise_variance};
  const Matrix x = coeff - model.center;
  return evaluate(P, x).t.row(0).transpose();
}

}  // namespace hogfda
