// SPDX-License-Identifier: Apache-2.0
#include "chirpident/denoise.hpp"

#include <algorithm>
#include <cmath>

namespace chirpident {

namespace {

// Hermitian Toeplitz matrix with first row u.
Eigen::MatrixXcd toeplitz(const Eigen::Ref<const Eigen::VectorXcd>& u) {
  const Eigen::Index N = u.size();
  Eigen::MatrixXcd T(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i; j < N; ++j) {
      T(i, j) = u[j - i];
      T(j, i) = std::conj(u[j - i]);
    }
  }
  return T;
}

Eigen::MatrixXcd block_matrix(const Eigen::Ref<const Eigen::VectorXcd>& u,
                              const Eigen::Ref<const Eigen::VectorXcd>& x, double t) {
  const Eigen::Index N = x.size();
  Eigen::MatrixXcd Q(N + 1, N + 1);
  Q.topLeftCorner(N, N) = toeplitz(u);
  Q.topRightCorner(N, 1) = x;
  Q.bottomLeftCorner(1, N) = x.adjoint();
  Q(N, N) = t;
  return Q;
}

}  // namespace

double default_eta(double sigma, int N) {
  if (sigma < 0.0) throw ValidationError("default_eta: sigma must be nonnegative");
  if (N < 2) throw ValidationError("default_eta: N must be >= 2");
  return sigma * std::sqrt(static_cast<double>(N) * std::log(static_cast<double>(N)));
}

double ast_mse_bound(double sigma, int N, double amp_sum) {
  if (sigma < 0.0 || amp_sum < 0.0 || N < 2)
    throw ValidationError("ast_mse_bound: arguments must be nonnegative, N >= 2");
  return sigma * std::sqrt(std::log(static_cast<double>(N)) / N) * amp_sum;
}

Eigen::MatrixXcd psd_project(const Eigen::Ref<const Eigen::MatrixXcd>& H) {
  if (H.rows() != H.cols()) throw ValidationError("psd_project: matrix must be square");
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ValidationError("psd_project: input is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig((H + H.adjoint()) * 0.5);
  if (eig.info() != Eigen::Success)
    throw NumericalError("psd_project: eigendecomposition failed");
  const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().adjoint();
}

ASTResult ast_denoise(const PulseSamples& pulse, const ASTConfig& config) {
  const Eigen::Index N = pulse.samples.size();
  if (N < 4) throw ValidationError("ast_denoise: need N >= 4 samples");
  if (config.eta < 0.0 || config.rho <= 0.0 || config.tol <= 0.0)
    throw ValidationError("ast_denoise: eta >= 0, rho > 0, tol > 0 required");

  const Eigen::VectorXcd& y = pulse.samples;
  const double ynorm = y.norm();

  ASTResult best;
  // Trivially feasible start: x = y with the scaled-identity certificate.
  best.denoised = y;
  best.toeplitz_gen = Eigen::VectorXcd::Zero(N);
  best.toeplitz_gen[0] = ynorm;
  best.t_scalar = ynorm;
  double best_obj = config.eta * ynorm;

  if (config.eta == 0.0) {
    best.converged = true;
    best.objective_trace.push_back(0.0);
    best.t_scalar = ynorm;
    return best;
  }

  const double gamma = config.eta;
  const double rho = config.rho;
  constexpr double relax = 1.6;  // over-relaxation inside the splitting step

  Eigen::VectorXcd u = best.toeplitz_gen;
  Eigen::VectorXcd x = y;
  double t = ynorm;
  Eigen::MatrixXcd Z = block_matrix(u, x, t);
  Eigen::MatrixXcd Lambda = Eigen::MatrixXcd::Zero(N + 1, N + 1);
  Eigen::MatrixXcd W(N + 1, N + 1), Q(N + 1, N + 1), Qr(N + 1, N + 1),
      Zprev(N + 1, N + 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig;

  best.objective_trace.reserve(std::min(config.max_iters, 4096));

  int iter = 0;
  for (; iter < config.max_iters; ++iter) {
    // (t, u, x) update against W = Z - Lambda/rho, entrywise closed forms.
    W.noalias() = Z - Lambda / rho;
    t = W(N, N).real() - gamma / (2.0 * rho);
    x = (y + 2.0 * rho * W.topRightCorner(N, 1)) / (1.0 + 2.0 * rho);
    for (Eigen::Index d = 0; d < N; ++d) {
      std::complex<double> acc = 0.0;
      for (Eigen::Index i = 0; i + d < N; ++i) acc += W(i, i + d);
      u[d] = acc / static_cast<double>(N - d);
    }
    u[0] = std::complex<double>(u[0].real() - gamma / (2.0 * rho * N), 0.0);

    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index j = i; j < N; ++j) {
        Q(i, j) = u[j - i];
        Q(j, i) = std::conj(u[j - i]);
      }
    }
    Q.topRightCorner(N, 1) = x;
    Q.bottomLeftCorner(1, N) = x.adjoint();
    Q(N, N) = t;

    // PSD projection of the relaxed point, then dual ascent.
    Qr.noalias() = relax * Q + (1.0 - relax) * Z;
    Zprev = Z;
    eig.compute(Qr + Lambda / rho);
    if (eig.info() != Eigen::Success)
      throw NumericalError("ast_denoise: eigendecomposition failed");
    const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
    Z.noalias() = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().adjoint();
    Lambda += rho * (Qr - Z);

    const double r_primal = (Q - Z).norm();
    const double s_dual = rho * (Z - Zprev).norm();
    const double scale = std::max({1.0, Q.norm(), Z.norm()});

    // Track the best iterate whose block matrix is near-feasible; the primal
    // residual bounds how far Q can dip below the cone.
    if (r_primal <= config.tol * scale) {
      const double obj = 0.5 * (x - y).squaredNorm() + 0.5 * gamma * (t + u[0].real());
      if (obj < best_obj) {
        best_obj = obj;
        best.denoised = x;
        best.toeplitz_gen = u;
        best.t_scalar = t;
      }
    }
    best.objective_trace.push_back(best_obj);

    if (r_primal <= config.tol * scale && s_dual <= config.tol * scale) {
      best.converged = true;
      ++iter;
      break;
    }
  }
  best.iterations = iter;
  return best;
}

double estimate_sigma_mad(const Eigen::Ref<const Eigen::VectorXcd>& samples) {
  const Eigen::Index N = samples.size();
  if (N < 3) throw ValidationError("estimate_sigma_mad: need at least 3 samples");
  std::vector<double> dev(N - 1);
  for (Eigen::Index n = 0; n + 1 < N; ++n)
    dev[n] = std::abs(std::imag((samples[n + 1] - samples[n]) / std::sqrt(2.0)));
  const auto mid = dev.begin() + dev.size() / 2;
  std::nth_element(dev.begin(), mid, dev.end());
  // 1.4826*MAD estimates the one-component std; the complex std is sqrt(2) larger.
  return 1.4826 * (*mid) * std::sqrt(2.0);
}

}  // namespace chirpident
