// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "chirpident/denoise.hpp"
#include "chirpident/matcher.hpp"

namespace chirpident {

/// Knobs for the full identification chain (optional denoising, per-pulse
/// estimation, matching).
struct IdentifyOptions {
  int K = 0;            ///< number of targets; 0 = estimate from singular values
  bool denoise = false;
  double sigma = -1.0;  ///< per-sample noise std; < 0 = take from pulse metadata
                        ///< or estimate when needed
  double phase_tol_cycles = 1e-6;  ///< noiseless phase-match tolerance
  ASTConfig ast;                   ///< eta <= 0 selects the default weight
};

struct IdentifyOutcome {
  MatchResult match;
  std::vector<SinusoidEstimateSet> estimates;
  bool ast_converged = true;
  double sigma_used = 0.0;
  int model_order = 0;
};

/// Runs the chain on a coherent pulse train: denoise (optional), per-pulse
/// sinusoid estimation, then noiseless matching for clean pulses or
/// tolerance-band matching (3x root CRLB) for noisy ones.
IdentifyOutcome identify(const std::vector<PulseSamples>& pulses,
                         const ChirpSchedule& chirps, const Bounds& bounds,
                         const IdentifyOptions& options);

}  // namespace chirpident
