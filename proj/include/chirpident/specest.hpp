// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "chirpident/synth.hpp"

namespace chirpident {

enum class PredictorMode { exact, svd_truncated };

/// Forward-backward linear predictor settings. L = 0 selects the default
/// order floor(3N/4) clipped into [K, N-K].
struct PredictorConfig {
  int L = 0;
  int K = 1;
  PredictorMode mode = PredictorMode::exact;
};

/// The stacked forward-backward prediction system Y*h = -y.
struct FbSystem {
  Eigen::MatrixXcd Y;  ///< 2(N-L) x L predictor matrix
  Eigen::VectorXcd y;  ///< 2(N-L) predictor vector
  int N = 0;
  int L = 0;
};

/// One recovered sinusoid.
struct SinusoidComponent {
  double nu_hat = 0.0;   ///< frequency, Hz
  double psi_hat = 0.0;  ///< phase, cycles in [0,1)
  double amp_hat = 0.0;  ///< magnitude
};

/// Unordered per-pulse estimates; component order carries no meaning.
struct SinusoidEstimateSet {
  std::vector<SinusoidComponent> components;
  int m = 0;
  bool unordered = true;
  double fit_condition = 1.0;  ///< condition estimate of the amplitude fit
};

/// Amplitude/phase fit result. `merged` lists frequency indices folded into
/// an earlier near-duplicate (they receive zero amplitude).
struct AmpPhaseFit {
  std::vector<SinusoidComponent> components;
  double condition = 0.0;
  std::vector<std::pair<int, int>> merged;  ///< (kept, folded) index pairs
};

int default_predictor_order(int N, int K);

/// Builds the forward block of lagged samples stacked over the backward block
/// of conjugated samples, with the matching right-hand-side vector.
FbSystem build_fb_system(const Eigen::Ref<const Eigen::VectorXcd>& samples, int L);

/// Solves the prediction system for the filter coefficients h[1..L].
/// exact: minimum-norm least squares. svd_truncated: the system is first
/// projected onto its K dominant singular directions; rank below K is an
/// error, not silently padded.
Eigen::VectorXcd solve_predictor(const FbSystem& system, const PredictorConfig& config);

/// Roots z^L + h[1] z^{L-1} + ... + h[L] via balanced companion-matrix
/// eigenvalues, keeps the K roots nearest the unit circle (|1-|z|| ascending,
/// ties broken by larger single-tone correlation amplitude against `samples`
/// when provided), and converts phases to Hz.
std::vector<double> roots_to_frequencies(
    const Eigen::Ref<const Eigen::VectorXcd>& h, int K, double Ts,
    PredictorMode mode = PredictorMode::exact,
    const Eigen::Ref<const Eigen::VectorXcd>& samples = Eigen::VectorXcd());

/// Least-squares amplitudes/phases at the given frequencies. Frequencies
/// closer than 1e-9*fs are merged before solving to keep the Vandermonde
/// system conditioned; the fit reports the condition estimate.
AmpPhaseFit ls_amplitude_phase(const Eigen::Ref<const Eigen::VectorXcd>& samples,
                               const std::vector<double>& nu, double Ts);

/// Model order from the largest gap in a nonincreasing singular-value
/// spectrum: the index maximizing s_i/s_{i+1}. A spectrum whose largest ratio
/// is below 2 is indeterminate (nullopt). `max_rank` bounds the structural
/// rank of the underlying system (0 = use all values); gaps at or beyond it
/// carry no signal information and are ignored.
std::optional<int> estimate_model_order(const Eigen::Ref<const Eigen::VectorXd>& singular_values,
                                        int max_rank = 0);

/// Asymptotic variance floor for a frequency estimate: 6/(N^3 * snr * Ts^2).
double crlb_frequency_var(double snr_linear, int N, double Ts);

/// Asymptotic variance floor for a complex amplitude estimate: sigma2/N.
double crlb_amplitude_var(double sigma2, int N);

/// Full per-pulse estimation: predictor solve, rooting, amplitude fit.
SinusoidEstimateSet estimate_sinusoids(const PulseSamples& pulse,
                                       const PredictorConfig& config);

}  // namespace chirpident
