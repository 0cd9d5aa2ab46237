// SPDX-License-Identifier: Apache-2.0
#include "chirpident/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace chirpident {

namespace {

using json = nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string pulse_to_text(const PulseSamples& pulse) {
  std::ostringstream os;
  os << "# m " << pulse.m << "\n";
  os << "# Ts " << fmt17(pulse.Ts) << "\n";
  os << "# sigma2 " << fmt17(pulse.sigma2) << "\n";
  os << "# N " << pulse.samples.size() << "\n";
  for (Eigen::Index n = 0; n < pulse.samples.size(); ++n) {
    os << n << ' ' << fmt17(pulse.samples[n].real()) << ' '
       << fmt17(pulse.samples[n].imag()) << '\n';
  }
  return os.str();
}

PulseSamples pulse_from_text(const std::string& text) {
  PulseSamples pulse;
  std::istringstream is(text);
  std::string line;
  std::vector<std::complex<double>> samples;
  int declared_n = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "m") ls >> pulse.m;
      else if (key == "Ts") ls >> pulse.Ts;
      else if (key == "sigma2") ls >> pulse.sigma2;
      else if (key == "N") ls >> declared_n;
      continue;
    }
    std::istringstream ls(line);
    long n;
    double re, im;
    if (!(ls >> n >> re >> im))
      throw ValidationError("pulse table: malformed row '" + line + "'");
    if (n != static_cast<long>(samples.size()))
      throw ValidationError("pulse table: non-contiguous sample index");
    samples.emplace_back(re, im);
  }
  if (declared_n >= 0 && declared_n != static_cast<int>(samples.size()))
    throw ValidationError("pulse table: declared N does not match row count");
  pulse.samples = Eigen::Map<const Eigen::VectorXcd>(samples.data(), samples.size());
  return pulse;
}

void save_pulse(const PulseSamples& pulse, const std::string& path) {
  write_text_file(path, pulse_to_text(pulse));
}

PulseSamples load_pulse(const std::string& path) {
  return pulse_from_text(read_text_file(path));
}

std::string match_result_to_json(const MatchResult& result) {
  json j;
  j["triplets"] = json::array();
  for (const auto& t : result.triplets) {
    json jt;
    jt["tau"] = t.tau;
    jt["f"] = t.f;
    jt["phi"] = t.phi;
    jt["amp"] = t.amp;
    j["triplets"].push_back(jt);
  }
  j["residual"] = result.residual;
  j["flags"] = result.ambiguity_flags;
  j["pulses_used"] = result.pulses_used;
  return j.dump(2) + "\n";
}

MatchResult match_result_from_json(const std::string& text) {
  const json j = json::parse(text);
  MatchResult result;
  for (const auto& jt : j.at("triplets")) {
    Triplet t;
    t.tau = jt.at("tau").get<double>();
    t.f = jt.at("f").get<double>();
    t.phi = jt.at("phi").get<double>();
    t.amp = jt.at("amp").get<double>();
    result.triplets.push_back(t);
  }
  result.residual = j.at("residual").get<double>();
  for (const auto& f : j.at("flags")) result.ambiguity_flags.push_back(f.get<std::string>());
  result.pulses_used = j.at("pulses_used").get<int>();
  return result;
}

std::string trace_to_text(const std::vector<double>& trace) {
  std::ostringstream os;
  for (std::size_t i = 0; i < trace.size(); ++i)
    os << i << ' ' << fmt17(trace[i]) << '\n';
  return os.str();
}

std::string manifest_to_json(const RunManifest& manifest) {
  json j;
  j["config_path"] = manifest.config_path;
  j["config_hash"] = manifest.config_hash;
  j["seed"] = manifest.seed;
  j["tool_version"] = manifest.tool_version;
  j["outputs"] = manifest.outputs;
  j["wall_seconds"] = manifest.wall_seconds;
  return j.dump(2) + "\n";
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
  write_text_file(path, manifest_to_json(manifest));
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("io: cannot write '" + path + "'");
  out << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("io: cannot open '" + path + "'");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace chirpident
