// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "chirpident/model.hpp"

namespace chirpident {

/// Per-sample complex noise description. Draws are fully determined by the
/// seed, so identical specs give identical samples.
struct NoiseSpec {
  double sigma2 = 0.0;    ///< complex variance per sample (0 = clean)
  std::uint64_t seed = 0;
};

/// One dechirped, sampled pulse.
struct PulseSamples {
  int m = 0;                  ///< pulse index
  Eigen::VectorXcd samples;   ///< length N
  double Ts = 0.0;            ///< sampling period, s
  double sigma2 = 0.0;        ///< injected noise variance (0 if clean)
};

// Time convention: sample n = 0 sits at the start of the measurement window,
// and each return's constant phase offset relative to that origin is folded
// into the target phase. A nonzero chirp offset f0 contributes -f0*tau to the
// effective per-target phase on both synthesis paths.

/// Closed-form synthesis of one dechirped pulse:
///   samples[n] = sum_k amp_k * exp(j*2*pi*(psi_k + nu_k*n*Ts)) + noise[n].
PulseSamples synth_dechirped(const Scene& scene, const ChirpProfile& chirp,
                             const TimingPlan& plan, const NoiseSpec& noise = {});

/// Full-rate simulation of the same pulse: renders the received superposition
/// of delayed, frequency-shifted chirps at rate oversample*fs over the
/// measurement window, injects noise, multiplies by the conjugate pure chirp,
/// and decimates to N samples at fs. Serves as an independent oracle for
/// synth_dechirped.
PulseSamples synth_fullrate(const Scene& scene, const ChirpProfile& chirp,
                            const TimingPlan& plan, int oversample = 32,
                            const NoiseSpec& noise = {});

/// Adds i.i.d. circularly symmetric complex Gaussian noise, reproducibly.
PulseSamples add_noise(const PulseSamples& pulse, const NoiseSpec& noise);

/// Synthesizes the whole pulse train. Noise seeds are derived per pulse from
/// noise.seed so pulses can be generated independently in any order.
std::vector<PulseSamples> synth_pulse_train(const Scene& scene,
                                            const ChirpSchedule& schedule,
                                            const TimingPlan& plan,
                                            const NoiseSpec& noise = {},
                                            bool fullrate = false,
                                            int oversample = 32);

}  // namespace chirpident
