// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "chirpident/synth.hpp"

namespace chirpident {

/// Settings for the atomic soft-thresholding solve.
struct ASTConfig {
  double eta = 0.0;      ///< regularization weight (0 = pass-through)
  double rho = 2.0;      ///< splitting penalty
  int max_iters = 5000;
  double tol = 1e-6;     ///< primal/dual residual tolerance
};

/// Solution of the soft-thresholding problem in its semidefinite form:
/// minimize 1/2*||x - y||^2 + (eta/2)*(t + u_1) subject to
/// [[T(u), x], [x*, t]] >= 0, where T(u) is Hermitian Toeplitz with first
/// row u.
struct ASTResult {
  Eigen::VectorXcd denoised;       ///< the x block of the solution
  Eigen::VectorXcd toeplitz_gen;   ///< u, length N
  double t_scalar = 0.0;
  /// Objective value of the best near-feasible iterate seen so far at each
  /// iteration; nonincreasing by construction.
  std::vector<double> objective_trace;
  bool converged = false;
  int iterations = 0;
};

/// Regularization weight sigma*sqrt(N*ln(N)) matched to noise level sigma.
double default_eta(double sigma, int N);

/// Per-sample mean-squared-error ceiling sigma*sqrt(ln(N)/N)*amp_sum for the
/// thresholding estimate at the default weight.
double ast_mse_bound(double sigma, int N, double amp_sum);

/// Nearest positive semidefinite matrix in Frobenius norm: eigendecompose and
/// clip negative eigenvalues. Rejects inputs that are not Hermitian within
/// 1e-10 (relative to the largest entry).
Eigen::MatrixXcd psd_project(const Eigen::Ref<const Eigen::MatrixXcd>& H);

/// Denoises one pulse by operator splitting on the semidefinite form. With
/// eta = 0 the input is returned unchanged. Non-convergence after max_iters
/// returns the best iterate with converged = false.
ASTResult ast_denoise(const PulseSamples& pulse, const ASTConfig& config);

/// Noise-level estimate from the median absolute deviation of the imaginary
/// part of first-difference residuals; returns the complex per-sample
/// standard deviation.
double estimate_sigma_mad(const Eigen::Ref<const Eigen::VectorXcd>& samples);

}  // namespace chirpident
