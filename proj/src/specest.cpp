// SPDX-License-Identifier: Apache-2.0
#include "chirpident/specest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chirpident {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Parlett-Reinsch balancing with powers-of-two scaling; eigenvalues are
// invariant under the diagonal similarity.
void balance(Eigen::MatrixXcd& A) {
  const Eigen::Index n = A.rows();
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(A(j, i));
        r += std::abs(A(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c > r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if (c + r < 0.95 * s && f != 1.0) {
        converged = false;
        A.col(i) *= f;
        A.row(i) /= f;
      }
    }
  }
}

std::vector<std::complex<double>> companion_roots(
    const Eigen::Ref<const Eigen::VectorXcd>& h) {
  const Eigen::Index L = h.size();
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(L, L);
  for (Eigen::Index i = 0; i + 1 < L; ++i) C(i + 1, i) = 1.0;
  for (Eigen::Index i = 0; i < L; ++i) C(i, L - 1) = -h[L - 1 - i];
  balance(C);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(C, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("roots_to_frequencies: eigenvalue iteration failed");
  std::vector<std::complex<double>> roots(L);
  for (Eigen::Index i = 0; i < L; ++i) roots[i] = solver.eigenvalues()[i];
  return roots;
}

}  // namespace

int default_predictor_order(int N, int K) {
  const int L = std::clamp(3 * N / 4, K, N - K);
  return L;
}

FbSystem build_fb_system(const Eigen::Ref<const Eigen::VectorXcd>& samples, int L) {
  const int N = static_cast<int>(samples.size());
  if (L < 1) throw ValidationError("build_fb_system: L must be >= 1");
  if (N < L + 1) throw ValidationError("build_fb_system: need N >= L+1 samples");

  FbSystem sys;
  sys.N = N;
  sys.L = L;
  const int rows = N - L;
  sys.Y.resize(2 * rows, L);
  sys.y.resize(2 * rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < L; ++c) {
      sys.Y(r, c) = samples[L - 1 + r - c];
      sys.Y(rows + r, c) = std::conj(samples[r + 1 + c]);
    }
    sys.y[r] = samples[L + r];
    sys.y[rows + r] = std::conj(samples[r]);
  }
  return sys;
}

Eigen::VectorXcd solve_predictor(const FbSystem& system, const PredictorConfig& config) {
  if (system.Y.rows() == 0 || system.Y.cols() == 0)
    throw ValidationError("solve_predictor: empty system");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(system.Y,
                                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s[0] <= 0.0)
    throw NumericalError("solve_predictor: degenerate all-zero system");

  int rank;
  if (config.mode == PredictorMode::svd_truncated) {
    if (config.K < 1 || config.K > s.size())
      throw ValidationError("solve_predictor: K out of range for svd truncation");
    if (s[config.K - 1] <= s[0] * 1e-13)
      throw NumericalError("solve_predictor: system rank below K, cannot truncate");
    rank = config.K;
  } else {
    const double threshold = s[0] * std::max(1e-12, system.Y.rows() *
                                                        std::numeric_limits<double>::epsilon());
    rank = 0;
    while (rank < s.size() && s[rank] > threshold) ++rank;
  }

  const Eigen::VectorXcd proj = svd.matrixU().leftCols(rank).adjoint() * (-system.y);
  return svd.matrixV().leftCols(rank) *
         (proj.array() / s.head(rank).array().cast<std::complex<double>>()).matrix();
}

std::vector<double> roots_to_frequencies(const Eigen::Ref<const Eigen::VectorXcd>& h,
                                         int K, double Ts, PredictorMode /*mode*/,
                                         const Eigen::Ref<const Eigen::VectorXcd>& samples) {
  const int L = static_cast<int>(h.size());
  if (K < 1 || K > L)
    throw ValidationError("roots_to_frequencies: need 1 <= K <= L roots");
  auto roots = companion_roots(h);
  for (const auto& z : roots)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw NumericalError("roots_to_frequencies: fewer than K finite roots");

  // Single-tone correlation amplitude, used only to break circle-distance ties.
  auto corr_amp = [&](const std::complex<double>& z) {
    if (samples.size() == 0) return 0.0;
    std::complex<double> acc = 0.0;
    std::complex<double> w = 1.0;
    const std::complex<double> step = std::polar(1.0, -std::arg(z));
    for (Eigen::Index n = 0; n < samples.size(); ++n) {
      acc += samples[n] * w;
      w *= step;
    }
    return std::abs(acc) / static_cast<double>(samples.size());
  };

  std::vector<int> order(roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i) order[i] = static_cast<int>(i);
  auto circle_dist = [&](int i) { return std::abs(1.0 - std::abs(roots[i])); };
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = circle_dist(a), db = circle_dist(b);
    if (std::abs(da - db) > 1e-12) return da < db;
    const double ca = corr_amp(roots[a]), cb = corr_amp(roots[b]);
    if (ca != cb) return ca > cb;
    if (roots[a].real() != roots[b].real()) return roots[a].real() < roots[b].real();
    return roots[a].imag() < roots[b].imag();
  });

  std::vector<double> nu(K);
  for (int i = 0; i < K; ++i)
    nu[i] = std::arg(roots[order[i]]) / (two_pi * Ts);
  return nu;
}

AmpPhaseFit ls_amplitude_phase(const Eigen::Ref<const Eigen::VectorXcd>& samples,
                               const std::vector<double>& nu, double Ts) {
  const int N = static_cast<int>(samples.size());
  const int K = static_cast<int>(nu.size());
  if (K < 1) throw ValidationError("ls_amplitude_phase: need at least one frequency");
  if (N < K) throw ValidationError("ls_amplitude_phase: fewer samples than frequencies");

  AmpPhaseFit fit;
  fit.components.resize(K);

  // Merge near-duplicate frequencies; closer than 1e-9*fs the Vandermonde
  // columns are numerically identical.
  const double min_sep = 1e-9 / Ts;
  std::vector<int> rep(K);
  std::vector<int> unique_idx;
  for (int i = 0; i < K; ++i) {
    rep[i] = i;
    for (int j : unique_idx) {
      if (std::abs(nu[i] - nu[j]) <= min_sep) {
        rep[i] = j;
        fit.merged.emplace_back(j, i);
        break;
      }
    }
    if (rep[i] == i) unique_idx.push_back(i);
  }

  const int Ku = static_cast<int>(unique_idx.size());
  Eigen::MatrixXcd F(N, Ku);
  for (int c = 0; c < Ku; ++c) {
    const double step = nu[unique_idx[c]] * Ts;
    for (int n = 0; n < N; ++n)
      F(n, c) = std::polar(1.0, two_pi * wrap_centered(step * n));
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  fit.condition = s[Ku - 1] > 0.0 ? s[0] / s[Ku - 1]
                                  : std::numeric_limits<double>::infinity();
  const Eigen::VectorXcd zeta = svd.solve(samples);

  for (int c = 0; c < Ku; ++c) {
    const int i = unique_idx[c];
    fit.components[i].nu_hat = nu[i];
    fit.components[i].amp_hat = std::abs(zeta[c]);
    fit.components[i].psi_hat = wrap_cycles(std::arg(zeta[c]) / two_pi);
  }
  for (const auto& [kept, folded] : fit.merged) {
    fit.components[folded].nu_hat = nu[folded];
    fit.components[folded].amp_hat = 0.0;
    fit.components[folded].psi_hat = fit.components[kept].psi_hat;
  }
  return fit;
}

std::optional<int> estimate_model_order(const Eigen::Ref<const Eigen::VectorXd>& singular_values,
                                        int max_rank) {
  const int n = static_cast<int>(singular_values.size());
  if (n < 2) throw ValidationError("estimate_model_order: need at least 2 singular values");
  if (max_rank <= 0 || max_rank > n) max_rank = n;
  if (singular_values[0] <= 0.0) return std::nullopt;

  // Numerical rank; trailing structural zeros carry no order information.
  const double eps_cut = singular_values[0] * 1e-12;
  int r = 0;
  while (r < n && singular_values[r] > eps_cut) ++r;
  r = std::min(r, max_rank);

  // A gap at the structural rank limit is an artifact of the system shape.
  const int last_gap = (r == max_rank) ? r - 1 : r;
  double best_ratio = 0.0;
  int best_k = 0;
  for (int i = 1; i <= last_gap && i < n; ++i) {
    const double lo = singular_values[i];
    const double ratio = lo > 0.0 ? singular_values[i - 1] / lo
                                  : std::numeric_limits<double>::infinity();
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_k = i;
    }
  }
  if (best_k == 0 || best_ratio < 2.0) return std::nullopt;
  return best_k;
}

double crlb_frequency_var(double snr_linear, int N, double Ts) {
  if (snr_linear <= 0.0) throw ValidationError("crlb_frequency_var: snr must be positive");
  if (N < 2) throw ValidationError("crlb_frequency_var: N must be >= 2");
  const double n3 = static_cast<double>(N) * N * N;
  return 6.0 / (n3 * snr_linear * Ts * Ts);
}

double crlb_amplitude_var(double sigma2, int N) {
  if (N < 1) throw ValidationError("crlb_amplitude_var: N must be >= 1");
  return sigma2 / N;
}

SinusoidEstimateSet estimate_sinusoids(const PulseSamples& pulse,
                                       const PredictorConfig& config) {
  const int N = static_cast<int>(pulse.samples.size());
  const int K = config.K;
  if (K < 1) throw ValidationError("estimate_sinusoids: K must be >= 1");
  if (N < 2 * K)
    throw ValidationError("estimate_sinusoids: forward-backward predictor needs K <= L <= N-K");
  int L = config.L > 0 ? config.L : default_predictor_order(N, K);
  if (L < K || L > N - K)
    throw ValidationError("estimate_sinusoids: L outside [K, N-K]");

  const FbSystem system = build_fb_system(pulse.samples, L);
  const Eigen::VectorXcd h = solve_predictor(system, config);
  const auto nu = roots_to_frequencies(h, K, pulse.Ts, config.mode, pulse.samples);
  const auto fit = ls_amplitude_phase(pulse.samples, nu, pulse.Ts);

  SinusoidEstimateSet set;
  set.m = pulse.m;
  set.components = fit.components;
  set.fit_condition = fit.condition;
  return set;
}

}  // namespace chirpident
