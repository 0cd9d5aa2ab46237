// SPDX-License-Identifier: Apache-2.0
#include "chirpident/model.hpp"

#include <limits>
#include <sstream>

namespace chirpident {

namespace {
// Absolute slack applied to strict inequalities at interval boundaries.
constexpr double kBoundaryEps = 1e-12;
}  // namespace

std::string ValidationReport::str() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.field << ": " << v.message << "\n";
  for (const auto& n : notes) os << "note: " << n << "\n";
  return os.str();
}

void ValidationReport::require() const {
  if (!ok()) throw ValidationError(str());
}

double wrap_cycles(double x) {
  double r = std::fmod(x, 1.0);
  if (r < 0.0) r += 1.0;
  if (r >= 1.0) r = 0.0;
  return r;
}

double wrap_centered(double x) { return x - std::floor(x + 0.5); }

double beat_frequency(const TargetParams& target, const ChirpProfile& chirp) {
  return target.f - 2.0 * chirp.fc * target.tau;
}

double beat_phase(const TargetParams& target, const ChirpProfile& chirp) {
  return wrap_cycles(target.phi + chirp.fc * target.tau * target.tau);
}

BeatParams beat_params(const TargetParams& target, const ChirpProfile& chirp) {
  return {beat_frequency(target, chirp), beat_phase(target, chirp)};
}

double min_sampling_rate(double f_max, double fc, double tau_max) {
  return 2.0 * (f_max + 2.0 * std::abs(fc) * tau_max);
}

ChirpRateCheck validate_chirp_rate(double fc, double tau_max) {
  if (tau_max <= 0.0) throw ValidationError("validate_chirp_rate: tau_max must be positive");
  ChirpRateCheck check;
  check.bound = 1.0 / (tau_max * tau_max);
  if (fc == 0.0) {
    check.fault = ChirpRateFault::zero_rate;
  } else if (std::abs(fc) > check.bound * (1.0 + 1e-15)) {
    check.fault = ChirpRateFault::too_steep;
  }
  return check;
}

TimingPlan plan_timing(int K, double fs, double tau_max, double guard_slack,
                       double f_max, int M) {
  if (K < 1) throw ValidationError("plan_timing: K must be >= 1");
  if (fs <= 0.0) throw ValidationError("plan_timing: fs must be positive");
  if (tau_max < 0.0) throw ValidationError("plan_timing: tau_max must be nonnegative");
  if (guard_slack < 0.0) throw ValidationError("plan_timing: guard_slack must be nonnegative");
  if (M < 1) throw ValidationError("plan_timing: M must be >= 1");

  TimingPlan plan;
  plan.N = K + 1;
  plan.fs = fs;
  plan.tau_max = tau_max;
  plan.f_max = f_max;
  plan.M = M;
  const double To = static_cast<double>(plan.N) / fs;
  plan.Tp = To + tau_max;
  plan.T = plan.Tp + tau_max + guard_slack;
  return plan;
}

TimeFreqShift invert_pair(double nu1, double nu2, double fc1) {
  if (fc1 == 0.0) throw ValidationError("invert_pair: fc1 must be nonzero");
  return {(nu1 - nu2) / (-4.0 * fc1), 0.5 * (nu1 + nu2)};
}

ValidationReport validate(const TimingPlan& plan) {
  ValidationReport report;
  auto fail = [&](const char* field, const std::string& msg) {
    report.violations.push_back({field, msg});
  };
  if (plan.fs <= 0.0) fail("fs", "must be positive");
  if (plan.N < 1) fail("N", "must be >= 1");
  if (plan.M < 1) fail("M", "must be >= 1");
  if (plan.tau_max < 0.0) fail("tau_max", "must be nonnegative");
  if (plan.f_max < 0.0) fail("f_max", "must be nonnegative");
  if (plan.Tg() < plan.tau_max - kBoundaryEps)
    fail("T", "guard interval T - Tp = " + std::to_string(plan.Tg()) +
                  " is below tau_max = " + std::to_string(plan.tau_max));
  if (plan.To() <= 0.0)
    fail("Tp", "measurement interval Tp - tau_max must be positive");
  if (plan.fs > 0.0 && plan.To() < static_cast<double>(plan.N) / plan.fs - kBoundaryEps)
    fail("N", "measurement interval shorter than N/fs");
  if (plan.f_max > 0.0) {
    std::ostringstream os;
    os << "f_max*Tp = " << plan.f_max * plan.Tp
       << " (parameters must stay fixed over a pulse; no threshold enforced)";
    report.notes.push_back(os.str());
  }
  return report;
}

ValidationReport validate(const Scene& scene) {
  ValidationReport report;
  auto fail = [&](const std::string& field, const std::string& msg) {
    report.violations.push_back({field, msg});
  };
  if (scene.targets.empty()) fail("targets", "scene must contain at least one target");
  if (scene.tau_max <= 0.0) fail("tau_max", "must be positive");
  if (scene.f_max <= 0.0) fail("f_max", "must be positive");
  for (std::size_t k = 0; k < scene.targets.size(); ++k) {
    const auto& t = scene.targets[k];
    const std::string field = "targets[" + std::to_string(k) + "]";
    if (t.tau < kBoundaryEps) fail(field + ".tau", "must be strictly positive");
    if (t.tau > scene.tau_max - kBoundaryEps) fail(field + ".tau", "must be below tau_max");
    if (std::abs(t.f) > scene.f_max - kBoundaryEps) fail(field + ".f", "|f| must be below f_max");
    if (t.amp < 0.0) fail(field + ".amp", "must be nonnegative");
  }
  return report;
}

ValidationReport validate(const TimingPlan& plan, const ChirpSchedule& schedule, int K) {
  ValidationReport report = validate(plan);
  auto fail = [&](const std::string& field, const std::string& msg) {
    report.violations.push_back({field, msg});
  };
  if (static_cast<int>(schedule.size()) != plan.M)
    fail("schedule", "length " + std::to_string(schedule.size()) +
                         " does not match plan M = " + std::to_string(plan.M));
  double max_rate = 0.0;
  for (std::size_t m = 0; m < schedule.size(); ++m) {
    max_rate = std::max(max_rate, std::abs(schedule[m].fc));
    if (plan.tau_max > 0.0) {
      const auto check = validate_chirp_rate(schedule[m].fc, plan.tau_max);
      if (!check.ok()) {
        const std::string field = "schedule[" + std::to_string(m) + "].fc";
        fail(field, check.fault == ChirpRateFault::zero_rate
                        ? "sweep rate must be nonzero"
                        : "|fc| exceeds 1/tau_max^2 = " + std::to_string(check.bound));
      }
    }
  }
  const double fs_min = min_sampling_rate(plan.f_max, max_rate, plan.tau_max);
  if (plan.fs < fs_min * (1.0 - 1e-12))
    fail("fs", "below the aliasing bound " + std::to_string(fs_min));
  if (K >= 1 && plan.N < K + 1)
    fail("N", "must be >= K+1 = " + std::to_string(K + 1));
  return report;
}

ChirpSchedule sign_paired_schedule(const std::vector<double>& rates) {
  ChirpSchedule schedule;
  schedule.reserve(2 * rates.size());
  int index = 0;
  for (double r : rates) {
    schedule.push_back({r, 0.0, index++});
    schedule.push_back({-r, 0.0, index++});
  }
  return schedule;
}

}  // namespace chirpident
