#include "ceci/manifest.hpp"

#include "ceci/text.hpp"

namespace ceci {

void RunManifest::set_config(const std::string& key, const std::string& value) {
  config_values.emplace_back(key, value);
}

void RunManifest::add_input(const std::string& path) {
  inputs.emplace_back(fnv1a64_hex(read_file(path)), path);
}

void RunManifest::add_output(const std::string& path) { outputs.push_back(path); }

std::string RunManifest::render() const {
  std::string out = "# ceci manifest v1\n[run]\n";
  out += "tool " + std::string(kToolVersion) + "\n";
  out += "subcommand " + subcommand + "\n";
  if (has_seed) out += "seed " + std::to_string(seed) + "\n";
  out += "[config]\n";
  for (const auto& [k, v] : config_values) out += k + " " + v + "\n";
  out += "[inputs]\n";
  for (const auto& [h, p] : inputs) out += h + " " + p + "\n";
  out += "[outputs]\n";
  for (const auto& p : outputs) out += p + "\n";
  return out;
}

void RunManifest::write(const std::string& primary_output) const {
  write_file(primary_output + ".manifest", render());
}

}  // namespace ceci
