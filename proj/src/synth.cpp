// SPDX-License-Identifier: Apache-2.0
#include "chirpident/synth.hpp"

#include <cmath>
#include <numbers>

#include "chirpident/rng.hpp"

namespace chirpident {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::complex<double> cis_cycles(double cycles) {
  return std::polar(1.0, two_pi * wrap_centered(cycles));
}

void check_synth_inputs(const Scene& scene, const ChirpProfile& chirp,
                        const TimingPlan& plan) {
  validate(plan).require();
  if (!scene.targets.empty()) validate(scene).require();
  if (plan.tau_max > 0.0) {
    const auto check = validate_chirp_rate(chirp.fc, plan.tau_max);
    if (check.fault == ChirpRateFault::too_steep)
      throw ValidationError("synth: |fc| exceeds the chirp-rate bound 1/tau_max^2");
  }
  const double fs_min = min_sampling_rate(plan.f_max, chirp.fc, plan.tau_max);
  if (plan.fs < fs_min * (1.0 - 1e-12))
    throw ValidationError("synth: fs below the aliasing bound for this chirp");
}

}  // namespace

std::complex<double> CounterRng::next_complex_gaussian(double sigma2) {
  // Magnitude^2 is exponential with mean sigma2, phase uniform.
  double u1 = next_unit();
  double u2 = next_unit();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double r = std::sqrt(-sigma2 * std::log(u1));
  return std::polar(r, two_pi * u2);
}

std::uint64_t CounterRng::substream(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b, std::uint64_t c) {
  std::uint64_t k = mix(seed + golden);
  k = mix(k ^ (a + golden));
  k = mix(k ^ (b + golden));
  k = mix(k ^ (c + golden));
  return k;
}

PulseSamples synth_dechirped(const Scene& scene, const ChirpProfile& chirp,
                             const TimingPlan& plan, const NoiseSpec& noise) {
  check_synth_inputs(scene, chirp, plan);
  PulseSamples pulse;
  pulse.m = chirp.index;
  pulse.Ts = plan.Ts();
  pulse.samples = Eigen::VectorXcd::Zero(plan.N);
  for (const auto& target : scene.targets) {
    const double nu = beat_frequency(target, chirp);
    const double psi = beat_phase(target, chirp) - chirp.f0 * target.tau;
    for (int n = 0; n < plan.N; ++n) {
      pulse.samples[n] += target.amp * cis_cycles(psi + nu * n * pulse.Ts);
    }
  }
  if (noise.sigma2 > 0.0) pulse = add_noise(pulse, noise);
  return pulse;
}

PulseSamples synth_fullrate(const Scene& scene, const ChirpProfile& chirp,
                            const TimingPlan& plan, int oversample,
                            const NoiseSpec& noise) {
  check_synth_inputs(scene, chirp, plan);
  if (oversample < 8)
    throw ValidationError("synth_fullrate: oversample must be >= 8");
  // The raw chirp sweeps over roughly 2*|fc|*Tp of bandwidth; the full-rate
  // grid must resolve it with margin.
  const double full_bw = 2.0 * std::abs(chirp.fc) * plan.Tp + plan.f_max;
  if (oversample * plan.fs < 2.0 * full_bw)
    throw ValidationError("synth_fullrate: oversample*fs below the raw chirp bandwidth");

  const double Ts = plan.Ts();
  const double h = Ts / oversample;
  const int full_n = (plan.N - 1) * oversample + 1;

  // Received waveform on the oversampled grid, u = 0 at the window start.
  Eigen::VectorXcd rx = Eigen::VectorXcd::Zero(full_n);
  for (const auto& target : scene.targets) {
    const std::complex<double> scale =
        target.amp * cis_cycles(target.phi);
    const double delta = target.tau - plan.tau_max;  // return start in window time
    for (int i = 0; i < full_n; ++i) {
      const double u = i * h;
      const double s = u - delta;  // position inside the transmitted window
      if (s < 0.0 || s > plan.Tp) continue;
      const double d = u - target.tau;
      const double phase = chirp.fc * d * d + chirp.f0 * d + target.f * u;
      rx[i] += scale * cis_cycles(phase);
    }
  }

  if (noise.sigma2 > 0.0) {
    CounterRng rng(noise.seed);
    for (int i = 0; i < full_n; ++i) rx[i] += rng.next_complex_gaussian(noise.sigma2);
  }

  // Dechirp (unit-modulus multiply) and decimate to the measurement rate.
  PulseSamples pulse;
  pulse.m = chirp.index;
  pulse.Ts = Ts;
  pulse.sigma2 = noise.sigma2;
  pulse.samples.resize(plan.N);
  for (int n = 0; n < plan.N; ++n) {
    const double u = n * Ts;
    const std::complex<double> ref = cis_cycles(-(chirp.fc * u * u + chirp.f0 * u));
    pulse.samples[n] = rx[n * oversample] * ref;
  }
  return pulse;
}

PulseSamples add_noise(const PulseSamples& pulse, const NoiseSpec& noise) {
  PulseSamples out = pulse;
  if (noise.sigma2 < 0.0) throw ValidationError("add_noise: sigma2 must be nonnegative");
  if (noise.sigma2 == 0.0) return out;
  CounterRng rng(noise.seed);
  for (Eigen::Index n = 0; n < out.samples.size(); ++n)
    out.samples[n] += rng.next_complex_gaussian(noise.sigma2);
  out.sigma2 += noise.sigma2;
  return out;
}

std::vector<PulseSamples> synth_pulse_train(const Scene& scene,
                                            const ChirpSchedule& schedule,
                                            const TimingPlan& plan,
                                            const NoiseSpec& noise,
                                            bool fullrate, int oversample) {
  std::vector<PulseSamples> pulses;
  pulses.reserve(schedule.size());
  for (std::size_t m = 0; m < schedule.size(); ++m) {
    const NoiseSpec per_pulse{noise.sigma2, CounterRng::substream(noise.seed, m)};
    pulses.push_back(fullrate
                         ? synth_fullrate(scene, schedule[m], plan, oversample, per_pulse)
                         : synth_dechirped(scene, schedule[m], plan, per_pulse));
  }
  return pulses;
}

}  // namespace chirpident
