// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "chirpident/config.hpp"
#include "chirpident/denoise.hpp"
#include "chirpident/matcher.hpp"

namespace chirpident {

/// Columnar text form of one pulse: a small '#' header (m, Ts, sigma2, N)
/// followed by one "n re im" row per sample at 17 significant digits, which
/// round-trips doubles exactly.
std::string pulse_to_text(const PulseSamples& pulse);
PulseSamples pulse_from_text(const std::string& text);
void save_pulse(const PulseSamples& pulse, const std::string& path);
PulseSamples load_pulse(const std::string& path);

/// Match result as a structured document with fields
/// (tau, f, phi, amp, residual, flags, pulses_used).
std::string match_result_to_json(const MatchResult& result);
MatchResult match_result_from_json(const std::string& text);

/// Objective trace as columnar text (iter, objective) for diagnostics.
std::string trace_to_text(const std::vector<double>& trace);

/// Everything needed to re-run a computation byte-for-byte.
struct RunManifest {
  std::string config_path;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
};

std::string manifest_to_json(const RunManifest& manifest);
void save_manifest(const RunManifest& manifest, const std::string& path);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace chirpident
