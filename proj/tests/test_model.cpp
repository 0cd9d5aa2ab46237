// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "chirpident/model.hpp"
#include "chirpident/rng.hpp"
#include "chirpident/synth.hpp"

using namespace chirpident;

namespace {

// DFT peak location on a zero-padded grid, the coarse cross-check for beat
// frequencies of synthesized pulses.
double dft_peak_hz(const Eigen::VectorXcd& x, double Ts, int zero_pad = 64) {
  const int N = static_cast<int>(x.size());
  const int Nfft = N * zero_pad;
  double best_mag = -1.0;
  double best_freq = 0.0;
  for (int b = 0; b < Nfft; ++b) {
    const double f = (b <= Nfft / 2 ? b : b - Nfft) / (Nfft * Ts);
    std::complex<double> acc = 0.0;
    for (int n = 0; n < N; ++n)
      acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * f * n * Ts);
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best_freq = f;
    }
  }
  return best_freq;
}

}  // namespace

TEST_CASE("beat_frequency evaluates f - 2*fc*tau") {
  CHECK(beat_frequency({0.0, 0.0, 1.0, 0.0}, {3000.0, 0.0, 0}) == 0.0);
  CHECK(beat_frequency({0.001, -80.0, 1.0, 0.0}, {3000.0, 0.0, 0}) == doctest::Approx(-86.0));
  CHECK(beat_frequency({0.001, -80.0, 1.0, 0.0}, {-3000.0, 0.0, 0}) == doctest::Approx(-74.0));
}

TEST_CASE("beat_frequency matches the DFT peak of a synthesized pulse") {
  Scene scene;
  scene.tau_max = 0.01;
  scene.f_max = 100.0;
  scene.targets = {{0.001, -80.0, 1.0, 0.0}};
  TimingPlan plan;
  plan.tau_max = 0.01;
  plan.f_max = 100.0;
  plan.fs = 320.0;
  plan.N = 64;
  plan.M = 1;
  plan.Tp = plan.N / plan.fs + plan.tau_max;
  plan.T = plan.Tp + plan.tau_max;
  const ChirpProfile chirp{3000.0, 0.0, 0};
  const auto pulse = synth_dechirped(scene, chirp, plan);
  const double peak = dft_peak_hz(pulse.samples, pulse.Ts);
  const double bin = 1.0 / (64.0 * plan.N * pulse.Ts);
  CHECK(std::abs(peak - beat_frequency(scene.targets[0], chirp)) <= bin);
}

TEST_CASE("beat_phase evaluates phi + fc*tau^2 modulo one cycle") {
  CHECK(beat_phase({0.0, 0.0, 1.0, 0.0}, {12345.0, 0.0, 0}) == 0.0);
  CHECK(beat_phase({0.001, 0.0, 1.0, 0.25}, {3000.0, 0.0, 0}) == doctest::Approx(0.253));
  CHECK(beat_phase({0.01, 0.0, 1.0, 0.9}, {3000.0, 0.0, 0}) == doctest::Approx(0.2));
}

TEST_CASE("min_sampling_rate") {
  CHECK(min_sampling_rate(100.0, 3000.0, 0.01) == doctest::Approx(320.0));
  CHECK(min_sampling_rate(0.0, 0.0, 123.0) == 0.0);
  CHECK(min_sampling_rate(100.0, -6000.0, 0.01) == doctest::Approx(440.0));
}

TEST_CASE("validate_chirp_rate enforces 0 < |fc| <= 1/tau_max^2") {
  CHECK(validate_chirp_rate(3000.0, 0.01).ok());
  CHECK(validate_chirp_rate(0.0, 0.01).fault == ChirpRateFault::zero_rate);
  CHECK(validate_chirp_rate(10001.0, 0.01).fault == ChirpRateFault::too_steep);
  CHECK(validate_chirp_rate(-10000.0, 0.01).ok());
  CHECK(validate_chirp_rate(3000.0, 0.01).bound == doctest::Approx(1e4));
}

TEST_CASE("plan_timing composes the minimal plan") {
  SUBCASE("five targets") {
    const auto plan = plan_timing(5, 320.0, 0.01, 0.0);
    CHECK(plan.N == 6);
    CHECK(plan.To() == doctest::Approx(0.01875));
    CHECK(plan.Tp == doctest::Approx(0.02875));
    CHECK(plan.T == doctest::Approx(0.03875));
  }
  SUBCASE("degenerate zero delay bound") {
    const auto plan = plan_timing(1, 1000.0, 0.0, 0.0);
    CHECK(plan.N == 2);
    CHECK(plan.To() == doctest::Approx(0.002));
    CHECK(plan.Tp == doctest::Approx(0.002));
    CHECK(plan.T == doctest::Approx(0.002));
  }
  SUBCASE("guard slack") {
    const auto plan = plan_timing(3, 440.0, 0.01, 0.001);
    CHECK(plan.N == 4);
    CHECK(plan.To() == doctest::Approx(4.0 / 440.0));
    CHECK(plan.Tp == doctest::Approx(4.0 / 440.0 + 0.01));
    CHECK(plan.T == doctest::Approx(4.0 / 440.0 + 0.021));
  }
  SUBCASE("rejects bad inputs") {
    CHECK_THROWS_AS(plan_timing(0, 320.0, 0.01, 0.0), ValidationError);
    CHECK_THROWS_AS(plan_timing(3, 0.0, 0.01, 0.0), ValidationError);
    CHECK_THROWS_AS(plan_timing(3, 320.0, -1.0, 0.0), ValidationError);
  }
}

TEST_CASE("plan_timing output passes the TimingPlan validator") {
  CounterRng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 1 + static_cast<int>(rng.next_unit() * 8);
    const double fs = 50.0 + rng.next_unit() * 2000.0;
    const double tau_max = rng.next_unit() * 0.05;
    const double slack = rng.next_unit() * 0.01;
    const auto plan = plan_timing(K, fs, tau_max, slack);
    CHECK(validate(plan).ok());
  }
}

TEST_CASE("invert_pair recovers (tau, f) from a sign-paired frequency pair") {
  SUBCASE("worked values") {
    const auto s = invert_pair(-86.0, -74.0, 3000.0);
    CHECK(s.tau == doctest::Approx(0.001));
    CHECK(s.f == doctest::Approx(-80.0));
  }
  SUBCASE("zeros") {
    const auto s = invert_pair(0.0, 0.0, 123.0);
    CHECK(s.tau == 0.0);
    CHECK(s.f == 0.0);
  }
  SUBCASE("negative first rate") {
    const auto s = invert_pair(160.0, 40.0, -3000.0);
    CHECK(s.tau == doctest::Approx(0.01));
    CHECK(s.f == doctest::Approx(100.0));
  }
  SUBCASE("guarded division") { CHECK_THROWS_AS(invert_pair(1.0, 2.0, 0.0), ValidationError); }
}

TEST_CASE("round trip: invert_pair undoes beat_frequency for any valid pair") {
  CounterRng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const double tau_max = 0.001 + rng.next_unit() * 0.05;
    const double fc = (rng.next_unit() - 0.5) * 2.0 / (tau_max * tau_max);
    if (fc == 0.0) continue;
    TargetParams t;
    t.tau = rng.next_unit() * tau_max;
    t.f = (rng.next_unit() - 0.5) * 200.0;
    const double nu1 = beat_frequency(t, {fc, 0.0, 0});
    const double nu2 = beat_frequency(t, {-fc, 0.0, 1});
    const auto s = invert_pair(nu1, nu2, fc);
    CHECK(s.tau == doctest::Approx(t.tau).epsilon(1e-12));
    CHECK(s.f == doctest::Approx(t.f).epsilon(1e-12));
  }
}

TEST_CASE("chirp-rate bound keeps tau -> fc*tau^2 monotone within one cycle") {
  CounterRng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const double tau_max = 0.001 + rng.next_unit() * 0.05;
    const double bound = 1.0 / (tau_max * tau_max);
    const double fc = (rng.next_unit() < 0.5 ? -1.0 : 1.0) * (0.05 + 0.95 * rng.next_unit()) * bound;
    REQUIRE(validate_chirp_rate(fc, tau_max).ok());
    const int grid = 512;
    double prev = 0.0;
    for (int g = 1; g <= grid; ++g) {
      const double tau = tau_max * g / grid;
      const double theta = fc * tau * tau;
      if (fc > 0) CHECK(theta > prev);
      else CHECK(theta < prev);
      prev = theta;
    }
    CHECK(std::abs(fc) * tau_max * tau_max <= 1.0 + 1e-12);
  }
}

TEST_CASE("min_sampling_rate is monotone nondecreasing in each argument") {
  CounterRng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const double f_max = rng.next_unit() * 500.0;
    const double fc = (rng.next_unit() - 0.5) * 2e4;
    const double tau_max = rng.next_unit() * 0.05;
    const double df = rng.next_unit() * 100.0;
    const double dfc = rng.next_unit() * 1e3;
    const double dtau = rng.next_unit() * 0.01;
    const double base = min_sampling_rate(f_max, fc, tau_max);
    CHECK(min_sampling_rate(f_max + df, fc, tau_max) >= base);
    CHECK(min_sampling_rate(f_max, fc + (fc >= 0 ? dfc : -dfc), tau_max) >= base);
    CHECK(min_sampling_rate(f_max, fc, tau_max + dtau) >= base);
  }
}

TEST_CASE("scene validation enforces target bounds") {
  Scene scene;
  scene.tau_max = 0.01;
  scene.f_max = 100.0;
  scene.targets = {{0.005, 50.0, 1.0, 0.2}};
  CHECK(validate(scene).ok());

  scene.targets.push_back({0.0, 0.0, 1.0, 0.0});  // tau must be strictly positive
  CHECK_FALSE(validate(scene).ok());
  scene.targets.pop_back();

  scene.targets.push_back({0.005, 100.0, 1.0, 0.0});  // |f| must stay below f_max
  CHECK_FALSE(validate(scene).ok());
  scene.targets.pop_back();

  scene.targets.push_back({0.005, 0.0, -1.0, 0.0});
  CHECK_FALSE(validate(scene).ok());
}

TEST_CASE("joint plan/schedule validation") {
  TimingPlan plan;
  plan.tau_max = 0.01;
  plan.f_max = 100.0;
  plan.fs = 440.0;
  plan.N = 64;
  plan.M = 4;
  plan.Tp = plan.N / plan.fs + plan.tau_max;
  plan.T = plan.Tp + plan.tau_max;
  const auto schedule = sign_paired_schedule({3000.0, 6000.0});
  CHECK(validate(plan, schedule, 5).ok());

  SUBCASE("fs below the aliasing bound fails") {
    plan.fs = 320.0;  // needs 440 for the 6000 Hz/s pair
    plan.Tp = plan.N / plan.fs + plan.tau_max;
    plan.T = plan.Tp + plan.tau_max;
    CHECK_FALSE(validate(plan, schedule, 5).ok());
  }
  SUBCASE("N below K+1 fails") { CHECK_FALSE(validate(plan, schedule, 64).ok()); }
  SUBCASE("too-steep rate fails") {
    auto bad = schedule;
    bad[0].fc = 2e4;
    CHECK_FALSE(validate(plan, bad, 5).ok());
  }
  SUBCASE("f_max*Tp is reported but not enforced") {
    const auto report = validate(plan, schedule, 5);
    REQUIRE(report.ok());
    CHECK_FALSE(report.notes.empty());
  }
}

TEST_CASE("wrap helpers") {
  CHECK(wrap_cycles(1.2) == doctest::Approx(0.2));
  CHECK(wrap_cycles(-0.25) == doctest::Approx(0.75));
  CHECK(wrap_cycles(0.0) == 0.0);
  CHECK(wrap_centered(0.75) == doctest::Approx(-0.25));
  CHECK(wrap_centered(-0.5) == doctest::Approx(-0.5));
}
