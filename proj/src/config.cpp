// SPDX-License-Identifier: Apache-2.0
#include "chirpident/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

namespace chirpident {

namespace {

using json = nlohmann::ordered_json;

double require_number(const json& j, const char* section, const char* key) {
  if (!j.contains(key))
    throw ValidationError(std::string(section) + ": missing key '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number())
    throw ValidationError(std::string(section) + "." + key + ": expected a number");
  return v.get<double>();
}

double optional_number(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

json scene_to_json(const Scene& scene) {
  json j;
  j["tau_max"] = scene.tau_max;
  j["f_max"] = scene.f_max;
  j["targets"] = json::array();
  for (const auto& t : scene.targets) {
    json jt;
    jt["tau"] = t.tau;
    jt["f"] = t.f;
    jt["amp"] = t.amp;
    jt["phi"] = t.phi;
    j["targets"].push_back(jt);
  }
  return j;
}

Scene scene_from_json(const json& j) {
  Scene scene;
  scene.tau_max = require_number(j, "scene", "tau_max");
  scene.f_max = require_number(j, "scene", "f_max");
  if (!j.contains("targets") || !j.at("targets").is_array())
    throw ValidationError("scene: missing 'targets' array");
  for (const auto& jt : j.at("targets")) {
    TargetParams t;
    t.tau = require_number(jt, "scene.targets[]", "tau");
    t.f = require_number(jt, "scene.targets[]", "f");
    t.amp = optional_number(jt, "amp", 1.0);
    t.phi = optional_number(jt, "phi", 0.0);
    scene.targets.push_back(t);
  }
  return scene;
}

json timing_to_json(const TimingPlan& plan) {
  json j;
  j["Tp"] = plan.Tp;
  j["T"] = plan.T;
  j["tau_max"] = plan.tau_max;
  j["f_max"] = plan.f_max;
  j["fs"] = plan.fs;
  j["N"] = plan.N;
  j["M"] = plan.M;
  return j;
}

TimingPlan timing_from_json(const json& j) {
  TimingPlan plan;
  plan.Tp = require_number(j, "timing", "Tp");
  plan.T = require_number(j, "timing", "T");
  plan.tau_max = require_number(j, "timing", "tau_max");
  plan.f_max = require_number(j, "timing", "f_max");
  plan.fs = require_number(j, "timing", "fs");
  plan.N = static_cast<int>(require_number(j, "timing", "N"));
  plan.M = static_cast<int>(require_number(j, "timing", "M"));
  return plan;
}

json schedule_to_json(const ChirpSchedule& schedule) {
  json j = json::array();
  for (const auto& c : schedule) {
    json jc;
    jc["fc"] = c.fc;
    jc["f0"] = c.f0;
    j.push_back(jc);
  }
  return j;
}

ChirpSchedule schedule_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("schedule: expected an array");
  ChirpSchedule schedule;
  int index = 0;
  for (const auto& jc : j) {
    ChirpProfile c;
    c.fc = require_number(jc, "schedule[]", "fc");
    c.f0 = optional_number(jc, "f0", 0.0);
    c.index = index++;
    schedule.push_back(c);
  }
  return schedule;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig config;
  if (j.contains("scene")) config.scene = scene_from_json(j.at("scene"));
  if (j.contains("timing")) config.timing = timing_from_json(j.at("timing"));
  if (j.contains("schedule")) config.schedule = schedule_from_json(j.at("schedule"));
  if (j.contains("noise")) {
    NoiseSpec noise;
    noise.sigma2 = optional_number(j.at("noise"), "sigma2", 0.0);
    if (noise.sigma2 < 0.0) throw ValidationError("noise.sigma2: must be nonnegative");
    noise.seed = static_cast<std::uint64_t>(optional_number(j.at("noise"), "seed", 0.0));
    config.noise = noise;
  }
  if (j.contains("sweep")) {
    const auto& js = j.at("sweep");
    SweepSpec sweep;
    if (!js.contains("snr_db") || !js.at("snr_db").is_array())
      throw ValidationError("sweep: missing 'snr_db' array");
    for (const auto& v : js.at("snr_db")) sweep.snr_db.push_back(v.get<double>());
    sweep.trials = static_cast<int>(optional_number(js, "trials", 200));
    sweep.K = static_cast<int>(optional_number(js, "K", 3));
    sweep.denoise = js.contains("denoise") && js.at("denoise").get<bool>();
    sweep.divisor = optional_number(js, "divisor", 1.0);
    sweep.seed = static_cast<std::uint64_t>(optional_number(js, "seed", 0.0));
    if (sweep.trials < 1) throw ValidationError("sweep.trials: must be >= 1");
    if (sweep.divisor < 1.0) throw ValidationError("sweep.divisor: must be >= 1");
    config.sweep = sweep;
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string serialize_config(const RunConfig& config) {
  json j;
  if (config.scene) j["scene"] = scene_to_json(*config.scene);
  if (config.timing) j["timing"] = timing_to_json(*config.timing);
  if (config.schedule) j["schedule"] = schedule_to_json(*config.schedule);
  if (config.noise) {
    json jn;
    jn["sigma2"] = config.noise->sigma2;
    jn["seed"] = config.noise->seed;
    j["noise"] = jn;
  }
  if (config.sweep) {
    json js;
    js["snr_db"] = config.sweep->snr_db;
    js["trials"] = config.sweep->trials;
    js["K"] = config.sweep->K;
    js["denoise"] = config.sweep->denoise;
    js["divisor"] = config.sweep->divisor;
    js["seed"] = config.sweep->seed;
    j["sweep"] = js;
  }
  return j.dump(2) + "\n";
}

void save_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("config: cannot write '" + path + "'");
  out << serialize_config(config);
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string text = serialize_config(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig demo_scene_config(int N) {
  RunConfig config;

  Scene scene;
  scene.tau_max = 0.01;
  scene.f_max = 100.0;
  // Five targets: one isolated, one close pair whose swapped pairings are
  // feasible but phase-inconsistent, and one close pair whose phi difference
  // is arranged so a swapped pairing also passes the phase test. The first
  // pulse pair alone admits four complete explanations of this scene.
  scene.targets = {
      {0.001, -80.0, 1.0, 0.30},
      {0.002, 24.0, 1.0, 0.10},
      {0.0026666666666666666, 24.0, 1.0, 0.65},
      {0.0075, 95.0, 1.0, 0.50691666666666666},
      {0.008333333333333333, 96.0, 1.0, 0.50},
  };
  config.scene = scene;

  const std::vector<double> rates = {3000.0, 6000.0};
  config.schedule = sign_paired_schedule(rates);

  TimingPlan plan;
  plan.tau_max = scene.tau_max;
  plan.f_max = scene.f_max;
  plan.fs = 440.0;  // aliasing bound for the steepest rate
  plan.N = N;
  plan.M = static_cast<int>(config.schedule->size());
  plan.Tp = static_cast<double>(N) / plan.fs + plan.tau_max;
  plan.T = plan.Tp + plan.tau_max;
  config.timing = plan;

  config.noise = NoiseSpec{0.0, 0};
  return config;
}

RunConfig threshold_sweep_config(bool denoise, double divisor, int trials) {
  RunConfig config = demo_scene_config(64);
  config.scene.reset();
  SweepSpec sweep;
  for (int snr = 0; snr <= 40; snr += 5) sweep.snr_db.push_back(snr);
  sweep.trials = trials;
  sweep.K = 3;
  sweep.denoise = denoise;
  sweep.divisor = divisor;
  sweep.seed = 20260810;
  config.sweep = sweep;
  return config;
}

TrialConfig trial_config_from(const RunConfig& config) {
  if (!config.timing || !config.schedule || !config.sweep)
    throw ValidationError("config: sweep needs 'timing', 'schedule' and 'sweep' sections");
  TrialConfig trial;
  trial.timing = *config.timing;
  trial.schedule = *config.schedule;
  trial.sampler.K = config.sweep->K;
  // Full parameter ranges; the sweep divisor is applied by
  // restricted_range_sweep so it acts exactly once.
  trial.sampler.tau_lo = 0.0;
  trial.sampler.tau_hi = config.timing->tau_max;
  trial.sampler.f_lo = -config.timing->f_max;
  trial.sampler.f_hi = config.timing->f_max;
  trial.sampler.amp = 1.0;
  trial.denoise = config.sweep->denoise;
  trial.seed = config.sweep->seed;
  return trial;
}

}  // namespace chirpident
