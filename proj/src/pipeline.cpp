// SPDX-License-Identifier: Apache-2.0
#include "chirpident/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chirpident {

IdentifyOutcome identify(const std::vector<PulseSamples>& pulses,
                         const ChirpSchedule& chirps, const Bounds& bounds,
                         const IdentifyOptions& options) {
  if (pulses.empty()) throw ValidationError("identify: no pulses given");
  if (pulses.size() != chirps.size())
    throw ValidationError("identify: pulse and schedule counts differ");
  const int N = static_cast<int>(pulses[0].samples.size());
  for (const auto& p : pulses)
    if (p.samples.size() != N)
      throw ValidationError("identify: pulses have inconsistent lengths");

  IdentifyOutcome out;

  double sigma = options.sigma;
  if (sigma < 0.0) {
    double sigma2 = 0.0;
    for (const auto& p : pulses) sigma2 = std::max(sigma2, p.sigma2);
    sigma = sigma2 > 0.0 ? std::sqrt(sigma2)
                         : (options.denoise ? estimate_sigma_mad(pulses[0].samples) : 0.0);
  }
  out.sigma_used = sigma;
  const bool noisy = sigma > 0.0;

  std::vector<PulseSamples> working = pulses;
  if (options.denoise && noisy) {
    ASTConfig cfg = options.ast;
    if (cfg.eta <= 0.0) cfg.eta = default_eta(sigma, N);
    for (auto& p : working) {
      const ASTResult r = ast_denoise(p, cfg);
      out.ast_converged = out.ast_converged && r.converged;
      p.samples = r.denoised;
    }
  }

  int K = options.K;
  if (K <= 0) {
    // Model order from the predictor system's singular spectrum of the first
    // pulse; the gram spectrum is the square of the system's.
    const int L = default_predictor_order(N, 1);
    const FbSystem sys = build_fb_system(working[0].samples, L);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sys.Y);
    const Eigen::VectorXd gram_sv = svd.singularValues().array().square();
    const int max_rank = static_cast<int>(std::min(sys.Y.rows(), sys.Y.cols()));
    const auto order = estimate_model_order(gram_sv, max_rank);
    if (!order)
      throw NumericalError("identify: model order indeterminate; pass K explicitly");
    K = *order;
  }
  out.model_order = K;

  PredictorConfig pcfg;
  pcfg.K = K;
  pcfg.mode = noisy || options.denoise ? PredictorMode::svd_truncated : PredictorMode::exact;

  out.estimates.reserve(working.size());
  for (const auto& p : working) out.estimates.push_back(estimate_sinusoids(p, pcfg));

  if (!noisy) {
    out.match = match_noiseless(out.estimates, chirps, bounds, options.phase_tol_cycles);
  } else {
    // Operating SNR from the typical fitted magnitude; the median is immune
    // to the near-zero amplitudes a partially merged pulse produces.
    std::vector<double> amps;
    for (const auto& est : out.estimates)
      for (const auto& c : est.components) amps.push_back(c.amp_hat);
    std::nth_element(amps.begin(), amps.begin() + amps.size() / 2, amps.end());
    const double amp_ref = amps[amps.size() / 2];
    const double snr = std::max(amp_ref * amp_ref, 1e-12) / (sigma * sigma);
    // Per-pulse deviation of the frequency estimates in hertz. The quoted
    // asymptotic variance rule tracks the angular-frequency estimate; the
    // hertz-domain deviation is 2*pi smaller, which matches the estimator's
    // measured behavior.
    const double sigma_nu =
        std::sqrt(crlb_frequency_var(snr, N, pulses[0].Ts)) / (2.0 * std::numbers::pi);
    // Bands: 3 sigma, kept above a small fraction of the per-pulse resolution
    // so interference bias between nearby tones does not break them at high
    // SNR.
    const double fs = 1.0 / pulses[0].Ts;
    const double nu_tol = std::max(3.0 * sigma_nu, 0.05 * fs / N);
    const double sigma_gate = std::max(sigma_nu, 0.15 * nu_tol);
    out.match = match_noisy(out.estimates, chirps, bounds, MatchTolerances{nu_tol, sigma_gate});
    // A severely ill-conditioned amplitude fit means two components were not
    // resolvable on that pulse; the triplets would inherit arbitrary errors.
    for (const auto& est : out.estimates) {
      if (est.fit_condition > 1000.0) {
        out.match.ambiguity_flags.push_back(
            "components unresolvable on pulse " + std::to_string(est.m) +
            " (amplitude fit condition " + std::to_string(est.fit_condition) + ")");
        break;
      }
    }
  }
  return out;
}

}  // namespace chirpident
