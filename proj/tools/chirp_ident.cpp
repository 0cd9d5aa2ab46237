// SPDX-License-Identifier: Apache-2.0
//
// chirp-ident: simulate pulse-train returns of a time/frequency-shift scene,
// identify the scene back from samples, and run Monte Carlo sweeps.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iostream>

#include "chirpident/io.hpp"

namespace fs = std::filesystem;
using namespace chirpident;

namespace {

constexpr const char* kVersion = "chirp-ident 1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitAmbiguity = 3;
constexpr int kExitNoConvergence = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string denoise = "off";
  int trials = 0;
  std::string reproduce;
};

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig config;
  if (!args.reproduce.empty()) {
    if (args.reproduce == "fig6") {
      config = demo_scene_config();
    } else if (args.reproduce == "fig8") {
      config = threshold_sweep_config(false);
    } else if (args.reproduce == "fig9") {
      config = threshold_sweep_config(true);
    } else if (args.reproduce == "fig10") {
      config = threshold_sweep_config(false, 10.0);
    } else {
      throw ValidationError("unknown --reproduce preset '" + args.reproduce + "'");
    }
  } else if (!args.config_path.empty()) {
    config = load_config(args.config_path);
  } else {
    throw ValidationError("either --config or --reproduce is required");
  }
  if (args.seed_set) {
    if (config.noise) config.noise->seed = args.seed;
    else config.noise = NoiseSpec{0.0, args.seed};
    if (config.sweep) config.sweep->seed = args.seed;
  }
  if (args.trials > 0 && config.sweep) config.sweep->trials = args.trials;
  if (config.sweep && args.denoise == "on") config.sweep->denoise = true;
  if (config.sweep && args.denoise == "off" && !args.reproduce.empty() &&
      args.reproduce != "fig9")
    config.sweep->denoise = config.sweep->denoise;  // presets keep their own default
  return config;
}

RunManifest start_manifest(const CommonArgs& args, const RunConfig& config) {
  RunManifest manifest;
  manifest.config_path = args.config_path.empty() ? ("<preset:" + args.reproduce + ">")
                                                  : args.config_path;
  manifest.config_hash = config_hash(config);
  manifest.seed = config.noise ? config.noise->seed : (config.sweep ? config.sweep->seed : 0);
  manifest.tool_version = kVersion;
  return manifest;
}

void finish_manifest(RunManifest& manifest, const fs::path& out_dir,
                     std::chrono::steady_clock::time_point t0) {
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_manifest(manifest, (out_dir / "manifest.json").string());
}

int cmd_simulate(const CommonArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig config = resolve_config(args);
  if (!config.scene || !config.timing || !config.schedule)
    throw ValidationError("simulate needs 'scene', 'timing' and 'schedule' sections");
  validate(*config.scene).require();
  validate(*config.timing, *config.schedule,
           static_cast<int>(config.scene->targets.size()))
      .require();

  const NoiseSpec noise = config.noise.value_or(NoiseSpec{});
  const auto pulses = synth_pulse_train(*config.scene, *config.schedule, *config.timing, noise);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  RunManifest manifest = start_manifest(args, config);
  for (const auto& pulse : pulses) {
    const std::string name = "pulse_" + std::to_string(pulse.m) + ".txt";
    save_pulse(pulse, (out_dir / name).string());
    manifest.outputs.push_back(name);
  }
  save_config(config, (out_dir / "config.json").string());
  manifest.outputs.push_back("config.json");
  finish_manifest(manifest, out_dir, t0);
  std::cout << "wrote " << pulses.size() << " pulse tables to " << out_dir << "\n";
  return kExitOk;
}

int cmd_identify(const CommonArgs& args, const std::string& samples_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig config = resolve_config(args);
  if (!config.timing || !config.schedule)
    throw ValidationError("identify needs 'timing' and 'schedule' sections");

  std::vector<PulseSamples> pulses;
  if (!samples_dir.empty()) {
    for (std::size_t m = 0; m < config.schedule->size(); ++m) {
      const fs::path p = fs::path(samples_dir) / ("pulse_" + std::to_string(m) + ".txt");
      pulses.push_back(load_pulse(p.string()));
    }
  } else {
    if (!config.scene) throw ValidationError("identify from config needs a 'scene' section");
    validate(*config.scene).require();
    const NoiseSpec noise = config.noise.value_or(NoiseSpec{});
    pulses = synth_pulse_train(*config.scene, *config.schedule, *config.timing, noise);
  }

  IdentifyOptions opts;
  opts.K = config.scene ? static_cast<int>(config.scene->targets.size()) : 0;
  opts.denoise = args.denoise == "on";
  const Bounds bounds{config.timing->tau_max, config.timing->f_max};
  const IdentifyOutcome outcome = identify(pulses, *config.schedule, bounds, opts);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  RunManifest manifest = start_manifest(args, config);
  write_text_file((out_dir / "result.json").string(), match_result_to_json(outcome.match));
  manifest.outputs.push_back("result.json");
  finish_manifest(manifest, out_dir, t0);

  std::cout << match_result_to_json(outcome.match);
  if (!outcome.ast_converged) return kExitNoConvergence;
  return outcome.match.complete() ? kExitOk : kExitAmbiguity;
}

int cmd_sweep(const CommonArgs& args, bool restricted) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig config = resolve_config(args);
  if (!config.sweep) throw ValidationError("sweep needs a 'sweep' section");
  const TrialConfig trial = trial_config_from(config);
  const double divisor = restricted ? std::max(config.sweep->divisor, 10.0)
                                    : config.sweep->divisor;

  const SweepResult result = restricted_range_sweep(trial, config.sweep->snr_db,
                                                    config.sweep->trials, divisor);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  RunManifest manifest = start_manifest(args, config);
  write_text_file((out_dir / "sweep.csv").string(), to_csv(result));
  manifest.outputs.push_back("sweep.csv");
  save_config(config, (out_dir / "config.json").string());
  manifest.outputs.push_back("config.json");
  finish_manifest(manifest, out_dir, t0);
  std::cout << to_csv(result);
  return kExitOk;
}

int cmd_denoise_eval(const CommonArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig config = resolve_config(args);
  if (!config.scene || !config.timing || !config.schedule)
    throw ValidationError("denoise-eval needs 'scene', 'timing' and 'schedule' sections");
  const NoiseSpec noise = config.noise.value_or(NoiseSpec{});
  if (noise.sigma2 <= 0.0)
    throw ValidationError("denoise-eval needs noise.sigma2 > 0");

  const auto clean = synth_pulse_train(*config.scene, *config.schedule, *config.timing, {});
  const auto noisy = synth_pulse_train(*config.scene, *config.schedule, *config.timing, noise);

  const double sigma = std::sqrt(noise.sigma2);
  const int N = config.timing->N;
  double amp_sum = 0.0;
  for (const auto& t : config.scene->targets) amp_sum += t.amp;
  const double bound = ast_mse_bound(sigma, N, amp_sum);

  ASTConfig ast;
  ast.eta = default_eta(sigma, N);
  bool converged = true;
  std::ostringstream report;
  report << "eta " << ast.eta << "\n";
  report << "mse_bound " << bound << "\n";
  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  for (std::size_t m = 0; m < noisy.size(); ++m) {
    const ASTResult r = ast_denoise(noisy[m], ast);
    converged = converged && r.converged;
    const double mse_in = (noisy[m].samples - clean[m].samples).squaredNorm() / N;
    const double mse_out = (r.denoised - clean[m].samples).squaredNorm() / N;
    report << "pulse " << m << " mse_in " << mse_in << " mse_out " << mse_out
           << " within_bound " << (mse_out < bound ? 1 : 0) << "\n";
    write_text_file((out_dir / ("trace_" + std::to_string(m) + ".txt")).string(),
                    trace_to_text(r.objective_trace));
  }
  RunManifest manifest = start_manifest(args, config);
  write_text_file((out_dir / "denoise_report.txt").string(), report.str());
  manifest.outputs.push_back("denoise_report.txt");
  finish_manifest(manifest, out_dir, t0);
  std::cout << report.str();
  return converged ? kExitOk : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LTV operator identification from chirp pulse trains"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs args;
  std::string samples_dir;
  bool restricted = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "configuration document (JSON)");
    cmd->add_option("--seed", args.seed, "override the RNG seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--denoise", args.denoise, "denoising on|off")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--trials", args.trials, "Monte Carlo trials per point");
    cmd->add_option("--reproduce", args.reproduce, "preset: fig6|fig8|fig9|fig10")
        ->check(CLI::IsMember({"fig6", "fig8", "fig9", "fig10"}));
  };

  CLI::App* simulate = app.add_subcommand("simulate", "write per-pulse sample tables");
  add_common(simulate);
  CLI::App* ident = app.add_subcommand("identify", "recover target triplets");
  add_common(ident);
  ident->add_option("--samples", samples_dir, "directory of pulse tables from simulate");
  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo SNR sweep (CSV)");
  add_common(sweep);
  sweep->add_flag("--restricted", restricted, "shrink parameter ranges by the divisor");
  CLI::App* deval = app.add_subcommand("denoise-eval", "denoising error report");
  add_common(deval);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (ident->parsed()) return cmd_identify(args, samples_dir);
    if (sweep->parsed()) return cmd_sweep(args, restricted);
    if (deval->parsed()) return cmd_denoise_eval(args);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
