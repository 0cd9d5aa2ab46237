// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "chirpident/harness.hpp"

namespace chirpident {

/// Sweep section of the configuration document.
struct SweepSpec {
  std::vector<double> snr_db;
  int trials = 200;
  int K = 3;
  bool denoise = false;
  double divisor = 1.0;
  std::uint64_t seed = 0;
};

/// One configuration document drives every subcommand. Sections are optional;
/// each command validates the sections it needs.
struct RunConfig {
  std::optional<Scene> scene;
  std::optional<TimingPlan> timing;
  std::optional<ChirpSchedule> schedule;
  std::optional<NoiseSpec> noise;
  std::optional<SweepSpec> sweep;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);
void save_config(const RunConfig& config, const std::string& path);

/// 64-bit FNV-1a over the canonical serialized form; covers every field that
/// affects numerics.
std::uint64_t config_hash(const RunConfig& config);

/// Canonical five-target demonstration scene with the four-rate schedule
/// (+-3000, +-6000 Hz/s), tau_max = 0.01 s, f_max = 100 Hz. Two targets form
/// a constructed matching ambiguity that the second pulse pair resolves.
RunConfig demo_scene_config(int N = 64);

/// Sweep presets: threshold study (denoise off), denoised study, and the
/// restricted-range study.
RunConfig threshold_sweep_config(bool denoise, double divisor = 1.0, int trials = 200);

/// Builds the TrialConfig the sweep section describes.
TrialConfig trial_config_from(const RunConfig& config);

}  // namespace chirpident
