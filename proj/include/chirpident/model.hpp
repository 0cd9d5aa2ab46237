// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace chirpident {

/// Thrown when a configuration or argument violates a documented precondition.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation degenerates numerically (rank loss, no solution).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Phases are stored in cycles throughout, so e^{j2*pi*phase} is the only
// convention crossing module boundaries.

/// One scatterer: time shift (s), frequency shift (Hz), magnitude and phase.
struct TargetParams {
  double tau = 0.0;  ///< time shift, seconds
  double f = 0.0;    ///< frequency shift, Hz
  double amp = 1.0;  ///< nonnegative magnitude |c|
  double phi = 0.0;  ///< phase, cycles in [0,1)
};

/// Sweep-rate / offset description of one transmitted pulse.
struct ChirpProfile {
  double fc = 0.0;  ///< sweep rate, Hz/s (signed)
  double f0 = 0.0;  ///< frequency offset, Hz
  int index = 0;    ///< pulse number m
};

using ChirpSchedule = std::vector<ChirpProfile>;

/// Pulse-train timing: pulse duration, repetition interval, sampling plan.
/// Derived quantities: measurement interval To = Tp - tau_max and guard
/// interval Tg = T - Tp.
struct TimingPlan {
  double Tp = 0.0;       ///< pulse duration, s
  double T = 0.0;        ///< pulse repetition interval, s
  double tau_max = 0.0;  ///< largest admissible time shift, s
  double f_max = 0.0;    ///< largest admissible |frequency shift|, Hz
  double fs = 0.0;       ///< sampling rate, Hz
  int N = 0;             ///< samples per pulse
  int M = 0;             ///< number of pulses

  double To() const { return Tp - tau_max; }
  double Tg() const { return T - Tp; }
  double Ts() const { return 1.0 / fs; }
};

/// A set of targets together with the parameter bounds they live in.
struct Scene {
  std::vector<TargetParams> targets;
  double tau_max = 0.0;
  double f_max = 0.0;
};

/// Beat parameters of one (target, chirp) pair after dechirping.
struct BeatParams {
  double nu = 0.0;   ///< beat frequency, Hz
  double psi = 0.0;  ///< beat phase, cycles in [0,1)
};

struct TimeFreqShift {
  double tau = 0.0;
  double f = 0.0;
};

struct Violation {
  std::string field;
  std::string message;
};

/// Result of a validity check; `notes` carries non-enforcing observations.
struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> notes;

  bool ok() const { return violations.empty(); }
  std::string str() const;
  void require() const;  ///< throws ValidationError if not ok()
};

enum class ChirpRateFault { none, zero_rate, too_steep };

/// Outcome of the chirp-rate bound check 0 < |fc| <= 1/tau_max^2.
struct ChirpRateCheck {
  ChirpRateFault fault = ChirpRateFault::none;
  double bound = 0.0;  ///< the admissible upper bound 1/tau_max^2
  bool ok() const { return fault == ChirpRateFault::none; }
};

/// Wrap to [0, 1).
double wrap_cycles(double x);
/// Wrap to [-0.5, 0.5).
double wrap_centered(double x);

/// Beat frequency nu = f - 2*fc*tau of a (target, chirp) pair.
double beat_frequency(const TargetParams& target, const ChirpProfile& chirp);

/// Beat phase psi = phi + fc*tau^2, reduced to [0, 1).
double beat_phase(const TargetParams& target, const ChirpProfile& chirp);

BeatParams beat_params(const TargetParams& target, const ChirpProfile& chirp);

/// Minimum sampling rate 2*(f_max + 2*|fc|*tau_max) that keeps every beat
/// frequency unaliased.
double min_sampling_rate(double f_max, double fc, double tau_max);

/// Checks 0 < |fc| <= 1/tau_max^2, the condition that keeps tau -> fc*tau^2
/// injective over [0, tau_max] with range inside a single cycle.
ChirpRateCheck validate_chirp_rate(double fc, double tau_max);

/// Builds the smallest timing plan for K targets: N = K+1, To = N/fs,
/// Tp = To + tau_max, T = Tp + tau_max + guard_slack.
TimingPlan plan_timing(int K, double fs, double tau_max, double guard_slack,
                       double f_max = 0.0, int M = 4);

/// Inverts a sign-paired beat-frequency pair back to (tau, f):
/// tau = (nu1 - nu2)/(-4*fc1), f = (nu1 + nu2)/2.
TimeFreqShift invert_pair(double nu1, double nu2, double fc1);

ValidationReport validate(const TimingPlan& plan);
ValidationReport validate(const Scene& scene);

/// Joint checks that need both the plan and the schedule: Nyquist against the
/// steepest rate, per-pulse chirp-rate bounds, schedule length, and N >= K+1
/// when the intended scene size K is given.
ValidationReport validate(const TimingPlan& plan, const ChirpSchedule& schedule,
                          int K = 0);

/// Expands base rates {r1, r2, ...} into the sign-paired schedule
/// {+r1, -r1, +r2, -r2, ...} with pulse indices assigned in order.
ChirpSchedule sign_paired_schedule(const std::vector<double>& rates);

}  // namespace chirpident
