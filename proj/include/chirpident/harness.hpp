// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "chirpident/pipeline.hpp"

namespace chirpident {

/// Uniform scene distribution: tau in [tau_lo, tau_hi), f in (f_lo, f_hi),
/// phases uniform on the circle, fixed amplitude.
struct SceneSampler {
  int K = 1;
  double tau_lo = 0.0;
  double tau_hi = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
  double amp = 1.0;
};

/// One Monte Carlo trial: scene draw, synthesis, identification, scoring.
/// The denoiser runs on a bounded budget per pulse; sweeps prefer a capped,
/// slightly loose solve over an exact one.
struct TrialConfig {
  SceneSampler sampler;
  TimingPlan timing;
  ChirpSchedule schedule;
  double snr_db = 0.0;  ///< per-sample SNR amp^2/sigma^2; +inf = clean
  bool denoise = false;
  std::uint64_t seed = 0;
  ASTConfig ast{0.0, 2.0, 500, 1e-4};  ///< eta 0 = default weight
};

/// Signed per-target errors (estimate minus truth after min-cost
/// association). A failed trial carries a reason and no errors.
struct TrialResult {
  std::vector<double> err_tau, err_f, err_amp;
  bool failed = false;
  std::string failure;
};

struct SweepRow {
  double snr_db = 0.0;
  double rmse_tau = 0.0;
  double rmse_f = 0.0;
  double rmse_amp = 0.0;
  int trials = 0;
  int failures = 0;
};

/// RMSE rows per SNR point; failures are counted, never averaged in.
struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Draws the trial's scene deterministically from its seed.
Scene sample_scene(const TrialConfig& config);

/// Per-sample noise variance implied by the configured SNR.
double noise_variance(const TrialConfig& config);

/// Runs one seeded trial end to end. Pipeline failures are reported in the
/// result, not thrown.
TrialResult run_trial(const TrialConfig& config);

/// Aggregates run_trial over an SNR grid. Trials are independent jobs keyed
/// by (snr index, trial index); execution order never changes the output.
/// threads = 0 reads CHIRP_IDENT_THREADS, falling back to the hardware count.
SweepResult run_sweep(const TrialConfig& base, const std::vector<double>& snr_grid_db,
                      int trials_per_point, int threads = 0);

/// Same sweep with the sampling ranges shrunk by `divisor` in each dimension.
SweepResult restricted_range_sweep(const TrialConfig& base,
                                   const std::vector<double>& snr_grid_db,
                                   int trials_per_point, double divisor,
                                   int threads = 0);

/// CSV table with header (snr_db, rmse_tau_s, rmse_f_hz, rmse_amp, trials,
/// failures).
std::string to_csv(const SweepResult& result);

/// Minimum-cost assignment between truth and estimates on normalized (tau, f)
/// distance; returns est index per truth index.
std::vector<int> associate_targets(const Scene& truth, const std::vector<Triplet>& est);

int worker_count(int requested);

}  // namespace chirpident
