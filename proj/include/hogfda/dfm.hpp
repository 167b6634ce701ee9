// hogfda/dfm.hpp
//
// Discriminative functional mixture DFM[Sigma_k, beta]: a Gaussian mixture on
// basis coefficients whose clusters live in a (K-1)-dimensional
// discriminative subspace spanned by the orthonormal columns of U, with
// isotropic noise variance beta in the orthogonal complement:
//
//   x - m ~ sum_k pi_k N(U mu_k, U Sigma_k U' + beta (I - U U')).
//
// Fitted by Fisher-EM: the subspace is re-estimated from the Fisher
// criterion on the current soft partition, then mixture parameters by
// maximum likelihood inside that subspace.
#pragma once

#include "hogfda/core.hpp"
#include "hogfda/fda.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hogfda {

struct DfmConfig {
  int k_min = 2;
  int k_max = 6;
  double em_tol = 1e-8;  // relative log-likelihood change
  int max_iter = 200;
  int restarts = 10;
  double ridge = 1e-6;
  double beta_floor = 1e-8;
};

struct DfmModel {
  int K = 0;
  int latent_dim = 0;  // K - 1
  Matrix orientation;  // d x p, orthonormal columns
  Vector proportions;  // K
  Matrix latent_means;  // p x K
  std::vector<Matrix> latent_covariances;  // K matrices, p x p
  double noise_variance = 0.0;
  Vector center;  // d
  double loglik = 0.0;
  double bic = 0.0;
  Matrix responsibilities;  // n x K
  int n_iterations = 0;
  bool converged = false;
  int restart_index = 0;

  // Diagnostics recorded over every iteration of the selected run.
  std::vector<double> loglik_trace;
  double max_orthonormality_error = 0.0;  // max |U'U - I|
  double max_row_sum_error = 0.0;         // max |sum_k t_ik - 1|
  int fisher_steps_rejected = 0;          // iterations that kept the previous U

  int dimension() const { return static_cast<int>(center.size()); }
  int n_parameters() const;
  std::vector<int> hard_labels() const;
};

// Number of free parameters of DFM[Sigma_k, beta] with K clusters, latent
// dimension p = K - 1 and data dimension d.
int dfm_parameter_count(int K, int d);

// coeffs: d x n, one observation per column.
DfmModel dfm_fit(const Matrix& coeffs, int K, const DfmConfig& cfg, std::uint64_t seed);

struct BicEntry {
  int K = 0;
  bool ok = false;
  double loglik = 0.0;
  double bic = 0.0;
  int n_parameters = 0;
  std::string message;
};

struct DfmSelection {
  DfmModel best;
  std::vector<BicEntry> table;
};

// Fits every K in [cfg.k_min, cfg.k_max] and keeps the largest BIC
// (BIC = loglik - nu/2 log n). K values whose restarts all degenerate are
// reported in the table and skipped.
DfmSelection dfm_select(const Matrix& coeffs, const DfmConfig& cfg, std::uint64_t seed);

Matrix coefficient_matrix(const std::vector<SmoothedCurve>& smoothed);

Vector predict_posterior(const DfmModel& model, const Vector& coeff);

}  // namespace hogfda
