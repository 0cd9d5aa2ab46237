// SPDX-License-Identifier: Apache-2.0
#include "chirpident/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <thread>

#include "chirpident/rng.hpp"

namespace chirpident {

namespace {

// Stream ids for substream derivation.
constexpr std::uint64_t kSceneStream = 0xA11CE;
constexpr std::uint64_t kNoiseStream = 0xB0B;

void permutations(int n, std::vector<int>& current, std::vector<bool>& used,
                  const std::function<void(const std::vector<int>&)>& visit) {
  if (static_cast<int>(current.size()) == n) {
    visit(current);
    return;
  }
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    used[i] = true;
    current.push_back(i);
    permutations(n, current, used, visit);
    current.pop_back();
    used[i] = false;
  }
}

}  // namespace

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CHIRP_IDENT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

Scene sample_scene(const TrialConfig& config) {
  Scene scene;
  scene.tau_max = config.timing.tau_max;
  scene.f_max = config.timing.f_max;
  CounterRng rng(CounterRng::substream(config.seed, kSceneStream));
  for (int k = 0; k < config.sampler.K; ++k) {
    TargetParams t;
    do {
      t.tau = config.sampler.tau_lo +
              rng.next_unit() * (config.sampler.tau_hi - config.sampler.tau_lo);
    } while (t.tau < 1e-12);
    t.f = config.sampler.f_lo + rng.next_unit() * (config.sampler.f_hi - config.sampler.f_lo);
    t.amp = config.sampler.amp;
    t.phi = rng.next_unit();
    scene.targets.push_back(t);
  }
  return scene;
}

double noise_variance(const TrialConfig& config) {
  if (std::isinf(config.snr_db)) return 0.0;
  const double snr = std::pow(10.0, config.snr_db / 10.0);
  return config.sampler.amp * config.sampler.amp / snr;
}

std::vector<int> associate_targets(const Scene& truth, const std::vector<Triplet>& est) {
  const int K = static_cast<int>(truth.targets.size());
  if (static_cast<int>(est.size()) != K)
    throw ValidationError("associate_targets: estimate count differs from truth");
  const double tau_scale = std::max(truth.tau_max, 1e-12);
  const double f_scale = std::max(truth.f_max, 1e-12);

  auto cost_of = [&](const std::vector<int>& perm) {
    double cost = 0.0;
    for (int k = 0; k < K; ++k) {
      const double dt = (truth.targets[k].tau - est[perm[k]].tau) / tau_scale;
      const double df = (truth.targets[k].f - est[perm[k]].f) / f_scale;
      cost += std::hypot(dt, df);
    }
    return cost;
  };

  std::vector<int> best(K);
  if (K <= 7) {
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<int> current;
    std::vector<bool> used(K, false);
    permutations(K, current, used, [&](const std::vector<int>& perm) {
      const double c = cost_of(perm);
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    });
  } else {
    // Greedy fallback for large scenes.
    std::vector<bool> taken(K, false);
    for (int k = 0; k < K; ++k) {
      double best_d = std::numeric_limits<double>::infinity();
      int pick = -1;
      for (int j = 0; j < K; ++j) {
        if (taken[j]) continue;
        const double d = std::hypot((truth.targets[k].tau - est[j].tau) / tau_scale,
                                    (truth.targets[k].f - est[j].f) / f_scale);
        if (d < best_d) {
          best_d = d;
          pick = j;
        }
      }
      taken[pick] = true;
      best[k] = pick;
    }
  }
  return best;
}

TrialResult run_trial(const TrialConfig& config) {
  TrialResult result;
  try {
    const Scene scene = sample_scene(config);
    const double sigma2 = noise_variance(config);
    const NoiseSpec noise{sigma2, CounterRng::substream(config.seed, kNoiseStream)};
    const auto pulses = synth_pulse_train(scene, config.schedule, config.timing, noise);

    IdentifyOptions opts;
    opts.K = config.sampler.K;
    opts.denoise = config.denoise;
    opts.sigma = std::sqrt(sigma2);
    opts.ast = config.ast;
    const IdentifyOutcome outcome =
        identify(pulses, config.schedule, {scene.tau_max, scene.f_max}, opts);

    if (!outcome.match.complete()) {
      result.failed = true;
      result.failure = outcome.match.ambiguity_flags.front();
      return result;
    }
    if (static_cast<int>(outcome.match.triplets.size()) != config.sampler.K) {
      result.failed = true;
      result.failure = "wrong target count";
      return result;
    }
    const auto perm = associate_targets(scene, outcome.match.triplets);
    for (int k = 0; k < config.sampler.K; ++k) {
      const auto& t = scene.targets[k];
      const auto& e = outcome.match.triplets[perm[k]];
      result.err_tau.push_back(e.tau - t.tau);
      result.err_f.push_back(e.f - t.f);
      result.err_amp.push_back(e.amp - t.amp);
    }
  } catch (const std::exception& ex) {
    result.failed = true;
    result.failure = ex.what();
  }
  return result;
}

SweepResult run_sweep(const TrialConfig& base, const std::vector<double>& snr_grid_db,
                      int trials_per_point, int threads) {
  if (snr_grid_db.empty()) throw ValidationError("run_sweep: empty SNR grid");
  if (trials_per_point < 1) throw ValidationError("run_sweep: need at least one trial");

  const int n_snr = static_cast<int>(snr_grid_db.size());
  const int n_jobs = n_snr * trials_per_point;
  std::vector<TrialResult> slots(n_jobs);

  auto job = [&](int idx) {
    const int s = idx / trials_per_point;
    const int t = idx % trials_per_point;
    TrialConfig cfg = base;
    cfg.snr_db = snr_grid_db[s];
    cfg.seed = CounterRng::substream(base.seed, s, t);
    slots[idx] = run_trial(cfg);
  };

  const int n_threads = std::min(worker_count(threads), n_jobs);
  if (n_threads <= 1) {
    for (int i = 0; i < n_jobs; ++i) job(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < n_jobs; i = next.fetch_add(1)) job(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Aggregation runs in slot order, so results are reproducible regardless of
  // scheduling.
  SweepResult sweep;
  for (int s = 0; s < n_snr; ++s) {
    SweepRow row;
    row.snr_db = snr_grid_db[s];
    row.trials = trials_per_point;
    double sq_tau = 0.0, sq_f = 0.0, sq_amp = 0.0;
    long n_err = 0;
    for (int t = 0; t < trials_per_point; ++t) {
      const TrialResult& r = slots[s * trials_per_point + t];
      if (r.failed) {
        ++row.failures;
        continue;
      }
      for (std::size_t k = 0; k < r.err_tau.size(); ++k) {
        sq_tau += r.err_tau[k] * r.err_tau[k];
        sq_f += r.err_f[k] * r.err_f[k];
        sq_amp += r.err_amp[k] * r.err_amp[k];
        ++n_err;
      }
    }
    if (n_err > 0) {
      row.rmse_tau = std::sqrt(sq_tau / n_err);
      row.rmse_f = std::sqrt(sq_f / n_err);
      row.rmse_amp = std::sqrt(sq_amp / n_err);
    }
    sweep.rows.push_back(row);
  }
  return sweep;
}

SweepResult restricted_range_sweep(const TrialConfig& base,
                                   const std::vector<double>& snr_grid_db,
                                   int trials_per_point, double divisor, int threads) {
  if (divisor < 1.0) throw ValidationError("restricted_range_sweep: divisor must be >= 1");
  TrialConfig cfg = base;
  cfg.sampler.tau_lo /= divisor;
  cfg.sampler.tau_hi /= divisor;
  cfg.sampler.f_lo /= divisor;
  cfg.sampler.f_hi /= divisor;
  return run_sweep(cfg, snr_grid_db, trials_per_point, threads);
}

std::string to_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "snr_db,rmse_tau_s,rmse_f_hz,rmse_amp,trials,failures\n";
  os.precision(17);
  for (const auto& row : result.rows) {
    os << row.snr_db << ',' << row.rmse_tau << ',' << row.rmse_f << ',' << row.rmse_amp
       << ',' << row.trials << ',' << row.failures << '\n';
  }
  return os.str();
}

}  // namespace chirpident
