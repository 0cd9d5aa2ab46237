// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chirpident/rng.hpp"
#include "chirpident/specest.hpp"

using namespace chirpident;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Eigen::VectorXcd tones(int N, double Ts, const std::vector<double>& nu,
                       const std::vector<double>& amp, const std::vector<double>& psi) {
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(N);
  for (std::size_t k = 0; k < nu.size(); ++k)
    for (int n = 0; n < N; ++n)
      x[n] += amp[k] * std::polar(1.0, two_pi * (psi[k] + nu[k] * n * Ts));
  return x;
}

PulseSamples as_pulse(const Eigen::VectorXcd& samples, double Ts, double sigma2 = 0.0) {
  PulseSamples p;
  p.samples = samples;
  p.Ts = Ts;
  p.sigma2 = sigma2;
  return p;
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("forward-backward system layout, hand-enumerated N=4, L=2") {
  Eigen::VectorXcd x(4);
  x << std::complex<double>(1, 1), std::complex<double>(2, -1), std::complex<double>(-3, 2),
      std::complex<double>(0.5, 4);
  const auto sys = build_fb_system(x, 2);
  REQUIRE(sys.Y.rows() == 4);
  REQUIRE(sys.Y.cols() == 2);
  // forward rows: [x1 x0], [x2 x1]; backward rows: [x1* x2*], [x2* x3*]
  CHECK(sys.Y(0, 0) == x[1]);
  CHECK(sys.Y(0, 1) == x[0]);
  CHECK(sys.Y(1, 0) == x[2]);
  CHECK(sys.Y(1, 1) == x[1]);
  CHECK(sys.Y(2, 0) == std::conj(x[1]));
  CHECK(sys.Y(2, 1) == std::conj(x[2]));
  CHECK(sys.Y(3, 0) == std::conj(x[2]));
  CHECK(sys.Y(3, 1) == std::conj(x[3]));
  CHECK(sys.y(0) == x[2]);
  CHECK(sys.y(1) == x[3]);
  CHECK(sys.y(2) == std::conj(x[0]));
  CHECK(sys.y(3) == std::conj(x[1]));
}

TEST_CASE("forward-backward system of zeros is zero") {
  const auto sys = build_fb_system(Eigen::VectorXcd::Zero(8), 3);
  CHECK(sys.Y.norm() == 0.0);
  CHECK(sys.y.norm() == 0.0);
}

TEST_CASE("single complex exponential gives a rank-1 system") {
  const double Ts = 1.0 / 320.0;
  const auto x = tones(16, Ts, {10.0}, {1.0}, {0.0});
  const auto sys = build_fb_system(x, 8);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sys.Y);
  const auto& s = svd.singularValues();
  CHECK(s[0] > 1.0);
  CHECK(s[1] / s[0] < 1e-12);
}

TEST_CASE("build_fb_system rejects size violations") {
  CHECK_THROWS_AS(build_fb_system(Eigen::VectorXcd::Zero(4), 4), ValidationError);
  CHECK_THROWS_AS(build_fb_system(Eigen::VectorXcd::Zero(4), 0), ValidationError);
}

TEST_CASE("predictor roots land on the unit circle at the tone frequency") {
  const double Ts = 1.0 / 320.0;
  const double nu = 10.0;
  const auto x = tones(16, Ts, {nu}, {1.0}, {0.0});
  PredictorConfig cfg;
  cfg.K = 1;
  cfg.L = 8;
  const auto sys = build_fb_system(x, cfg.L);
  const auto h = solve_predictor(sys, cfg);
  const auto freqs = roots_to_frequencies(h, 1, Ts, cfg.mode, x);
  REQUIRE(freqs.size() == 1);
  CHECK(freqs[0] == doctest::Approx(nu).epsilon(1e-10));
}

TEST_CASE("all-zero samples make the predictor solve fail") {
  PredictorConfig cfg;
  cfg.K = 1;
  const auto sys = build_fb_system(Eigen::VectorXcd::Zero(8), 4);
  CHECK_THROWS_AS(solve_predictor(sys, cfg), NumericalError);
}

TEST_CASE("two well-separated tones recovered from N=16, L=12") {
  const double Ts = 1.0 / 320.0;
  const std::vector<double> nu = {-40.0, 55.0};
  const auto x = tones(16, Ts, nu, {1.0, 0.7}, {0.1, 0.6});
  PredictorConfig cfg;
  cfg.K = 2;
  cfg.L = 12;
  const auto h = solve_predictor(build_fb_system(x, cfg.L), cfg);
  auto freqs = sorted(roots_to_frequencies(h, 2, Ts, cfg.mode, x));
  CHECK(freqs[0] == doctest::Approx(-40.0).epsilon(1e-8));
  CHECK(freqs[1] == doctest::Approx(55.0).epsilon(1e-8));
}

TEST_CASE("svd-truncated mode reports rank deficiency below K") {
  const double Ts = 1.0 / 320.0;
  const auto x = tones(16, Ts, {10.0}, {1.0}, {0.0});
  PredictorConfig cfg;
  cfg.K = 3;
  cfg.mode = PredictorMode::svd_truncated;
  const auto sys = build_fb_system(x, 8);
  CHECK_THROWS_AS(solve_predictor(sys, cfg), NumericalError);
}

TEST_CASE("root at z = 1 maps to zero frequency") {
  // H(z) = z - 1
  Eigen::VectorXcd h(1);
  h << std::complex<double>(-1.0, 0.0);
  const auto freqs = roots_to_frequencies(h, 1, 1.0 / 320.0);
  CHECK(freqs[0] == doctest::Approx(0.0));
}

TEST_CASE("conjugating the samples negates the recovered frequencies") {
  const double Ts = 1.0 / 320.0;
  const std::vector<double> nu = {-35.0, 20.0, 90.0};
  const auto x = tones(32, Ts, nu, {1.0, 0.8, 1.2}, {0.2, 0.5, 0.9});
  PredictorConfig cfg;
  cfg.K = 3;
  cfg.L = 20;
  const auto f1 = sorted(roots_to_frequencies(
      solve_predictor(build_fb_system(x, cfg.L), cfg), 3, Ts, cfg.mode, x));
  const Eigen::VectorXcd xc = x.conjugate();
  auto f2 = roots_to_frequencies(solve_predictor(build_fb_system(xc, cfg.L), cfg), 3, Ts,
                                 cfg.mode, xc);
  for (auto& f : f2) f = -f;
  const auto f2s = sorted(f2);
  for (int k = 0; k < 3; ++k) CHECK(f2s[k] == doctest::Approx(f1[k]).epsilon(1e-9));
}

TEST_CASE("least-squares amplitude and phase") {
  const double Ts = 1.0 / 320.0;
  SUBCASE("exact single tone") {
    const auto x = tones(16, Ts, {25.0}, {2.0}, {0.25});
    const auto fit = ls_amplitude_phase(x, {25.0}, Ts);
    CHECK(fit.components[0].amp_hat == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.components[0].psi_hat == doctest::Approx(0.25).epsilon(1e-10));
  }
  SUBCASE("zero samples give zero amplitude") {
    const auto fit = ls_amplitude_phase(Eigen::VectorXcd::Zero(16), {25.0}, Ts);
    CHECK(fit.components[0].amp_hat == 0.0);
  }
  SUBCASE("two tones, exact recovery") {
    const auto x = tones(16, Ts, {-30.0, 70.0}, {1.5, 0.5}, {0.1, 0.8});
    const auto fit = ls_amplitude_phase(x, {-30.0, 70.0}, Ts);
    CHECK(fit.components[0].amp_hat == doctest::Approx(1.5).epsilon(1e-8));
    CHECK(fit.components[0].psi_hat == doctest::Approx(0.1).epsilon(1e-8));
    CHECK(fit.components[1].amp_hat == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(fit.components[1].psi_hat == doctest::Approx(0.8).epsilon(1e-8));
  }
  SUBCASE("near-duplicate frequencies are merged and reported") {
    const auto x = tones(16, Ts, {25.0}, {2.0}, {0.25});
    const auto fit = ls_amplitude_phase(x, {25.0, 25.0 + 1e-12}, Ts);
    REQUIRE(fit.merged.size() == 1);
    CHECK(fit.merged[0].first == 0);
    CHECK(fit.merged[0].second == 1);
    CHECK(fit.components[1].amp_hat == 0.0);
    CHECK(fit.components[0].amp_hat == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(std::isfinite(fit.condition));
  }
}

TEST_CASE("model order estimation from singular-value gaps") {
  SUBCASE("clean K=3 mixture") {
    const double Ts = 1.0 / 320.0;
    const auto x = tones(32, Ts, {-50.0, 10.0, 80.0}, {1.0, 1.0, 1.0}, {0.0, 0.3, 0.7});
    const auto sys = build_fb_system(x, 24);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sys.Y);
    const Eigen::VectorXd gram = svd.singularValues().array().square();
    const auto k = estimate_model_order(gram, 16);
    REQUIRE(k.has_value());
    CHECK(*k == 3);
  }
  SUBCASE("single tone") {
    Eigen::VectorXd s(4);
    s << 10.0, 1e-14, 1e-15, 0.0;
    const auto k = estimate_model_order(s, 4);
    REQUIRE(k.has_value());
    CHECK(*k == 1);
  }
  SUBCASE("pure noise is indeterminate in most trials") {
    const double Ts = 1.0 / 320.0;
    int indeterminate = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
      CounterRng rng(1000 + t);
      Eigen::VectorXcd x(64);
      for (int n = 0; n < 64; ++n) x[n] = rng.next_complex_gaussian(1.0);
      const auto sys = build_fb_system(x, 48);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sys.Y);
      const Eigen::VectorXd gram = svd.singularValues().array().square();
      if (!estimate_model_order(gram, 32).has_value()) ++indeterminate;
    }
    CHECK(indeterminate > trials / 2);
  }
  SUBCASE("needs at least two values") {
    Eigen::VectorXd s(1);
    s << 1.0;
    CHECK_THROWS_AS(estimate_model_order(s), ValidationError);
  }
}

TEST_CASE("frequency CRLB") {
  CHECK(crlb_frequency_var(100.0, 64, 1.0 / 320.0) == doctest::Approx(6.0 / 256.0));
  CHECK(crlb_frequency_var(1e12, 64, 1.0 / 320.0) < 1e-10);
  const double v1 = crlb_frequency_var(100.0, 64, 1.0 / 320.0);
  const double v2 = crlb_frequency_var(100.0, 128, 1.0 / 320.0);
  CHECK(v1 / v2 == doctest::Approx(8.0));
}

TEST_CASE("amplitude CRLB") {
  CHECK(crlb_amplitude_var(1.0, 100) == doctest::Approx(0.01));
  CHECK(crlb_amplitude_var(0.0, 10) == 0.0);
  CHECK(crlb_amplitude_var(0.25, 25) == doctest::Approx(0.01));
}

TEST_CASE("clean multi-tone estimation is exact") {
  CounterRng rng(77);
  const double fs = 320.0;
  const double Ts = 1.0 / fs;
  for (int trial = 0; trial < 30; ++trial) {
    const int K = 1 + static_cast<int>(rng.next_unit() * 4);
    const int N = std::max(2 * K + 1, 8 + static_cast<int>(rng.next_unit() * 56));
    std::vector<double> nu, amp, psi;
    for (int k = 0; k < K; ++k) {
      double f;
      bool ok;
      do {
        f = (rng.next_unit() - 0.5) * 0.9 * fs;
        ok = true;
        for (double g : nu) ok = ok && std::abs(g - f) > 2.0;
      } while (!ok);
      nu.push_back(f);
      amp.push_back(0.3 + rng.next_unit());
      psi.push_back(rng.next_unit());
    }
    const auto pulse = as_pulse(tones(N, Ts, nu, amp, psi), Ts);
    PredictorConfig cfg;
    cfg.K = K;
    const auto est = estimate_sinusoids(pulse, cfg);
    REQUIRE(static_cast<int>(est.components.size()) == K);
    auto order = est.components;
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.nu_hat < b.nu_hat; });
    std::vector<int> idx(K);
    for (int k = 0; k < K; ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return nu[a] < nu[b]; });
    for (int k = 0; k < K; ++k) {
      CHECK(std::abs(order[k].nu_hat - nu[idx[k]]) < 1e-9 * fs);
      CHECK(std::abs(order[k].amp_hat - amp[idx[k]]) < 1e-9);
      const double dpsi = std::abs(order[k].psi_hat - psi[idx[k]]);
      CHECK(std::min(dpsi, 1.0 - dpsi) < 1e-9);
    }
  }
}

TEST_CASE("estimation rejects configurations with no feasible predictor order") {
  const double Ts = 1.0 / 320.0;
  const auto pulse = as_pulse(tones(6, Ts, {10.0, 20.0, 30.0, 40.0, 50.0},
                                    {1, 1, 1, 1, 1}, {0, 0, 0, 0, 0}),
                              Ts);
  PredictorConfig cfg;
  cfg.K = 5;  // needs N >= 2K = 10
  CHECK_THROWS_AS(estimate_sinusoids(pulse, cfg), ValidationError);
}

TEST_CASE("variance shrinks roughly as N^-3 at moderate noise") {
  const double fs = 320.0;
  const double Ts = 1.0 / fs;
  const double nu_true = 37.0;
  const double sigma2 = 0.01;  // 20 dB
  const int trials = 150;
  std::vector<double> var_by_n;
  for (int N : {32, 64, 128}) {
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
      CounterRng rng(CounterRng::substream(555, N, t));
      Eigen::VectorXcd x = tones(N, Ts, {nu_true}, {1.0}, {0.3});
      for (int n = 0; n < N; ++n) x[n] += rng.next_complex_gaussian(sigma2);
      PredictorConfig cfg;
      cfg.K = 1;
      cfg.mode = PredictorMode::svd_truncated;
      const auto est = estimate_sinusoids(as_pulse(x, Ts, sigma2), cfg);
      const double err = est.components[0].nu_hat - nu_true;
      acc += err * err;
    }
    var_by_n.push_back(acc / trials);
  }
  CHECK(var_by_n[0] / var_by_n[1] > 4.0);
  CHECK(var_by_n[0] / var_by_n[1] < 16.0);
  CHECK(var_by_n[1] / var_by_n[2] > 4.0);
  CHECK(var_by_n[1] / var_by_n[2] < 16.0);
}

TEST_CASE("conjugation equivariance of the full estimate") {
  const double Ts = 1.0 / 320.0;
  const auto x = tones(24, Ts, {-45.0, 30.0}, {1.0, 0.6}, {0.15, 0.7});
  PredictorConfig cfg;
  cfg.K = 2;
  const auto a = estimate_sinusoids(as_pulse(x, Ts), cfg);
  const auto b = estimate_sinusoids(as_pulse(x.conjugate(), Ts), cfg);
  auto key = [](const SinusoidComponent& c) { return c.nu_hat; };
  auto as2 = a.components, bs2 = b.components;
  std::sort(as2.begin(), as2.end(), [&](auto& p, auto& q) { return key(p) < key(q); });
  std::sort(bs2.begin(), bs2.end(), [&](auto& p, auto& q) { return -key(p) < -key(q); });
  for (int k = 0; k < 2; ++k) {
    CHECK(bs2[k].nu_hat == doctest::Approx(-as2[k].nu_hat).epsilon(1e-9));
    CHECK(bs2[k].amp_hat == doctest::Approx(as2[k].amp_hat).epsilon(1e-9));
    const double dpsi = std::abs(wrap_cycles(bs2[k].psi_hat + as2[k].psi_hat));
    CHECK(std::min(dpsi, 1.0 - dpsi) < 1e-9);
  }
}

TEST_CASE("shifting the sample origin rotates each fitted phase by nu*d*Ts") {
  const double Ts = 1.0 / 320.0;
  const int N = 24, d = 5;
  const std::vector<double> nu = {-45.0, 30.0};
  const auto full = tones(N + d, Ts, nu, {1.0, 0.6}, {0.15, 0.7});
  const Eigen::VectorXcd w0 = full.head(N);
  const Eigen::VectorXcd wd = full.tail(N);
  const auto f0 = ls_amplitude_phase(w0, nu, Ts);
  const auto fd = ls_amplitude_phase(wd, nu, Ts);
  for (int k = 0; k < 2; ++k) {
    const double expect = wrap_cycles(f0.components[k].psi_hat + nu[k] * d * Ts);
    const double got = fd.components[k].psi_hat;
    const double diff = std::abs(wrap_centered(got - expect));
    CHECK(diff < 1e-9);
  }
}
