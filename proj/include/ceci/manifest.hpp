#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ceci {

inline constexpr const char* kToolVersion = "ceci 1.0.0";

// Record of one CLI run, written next to its primary output as
// <output>.manifest. Contains no timestamps so reruns are byte-identical.
struct RunManifest {
  std::string subcommand;
  uint64_t seed = 0;
  bool has_seed = false;
  std::vector<std::pair<std::string, std::string>> config_values;
  std::vector<std::pair<std::string, std::string>> inputs;  // (hash, path)
  std::vector<std::string> outputs;

  void set_config(const std::string& key, const std::string& value);
  void add_input(const std::string& path);  // hashes the file's bytes
  void add_output(const std::string& path);

  std::string render() const;
  // Writes render() to `primary_output` + ".manifest" and records itself.
  void write(const std::string& primary_output) const;
};

}  // namespace ceci
