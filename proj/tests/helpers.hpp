#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "ceci/ontology.hpp"
#include "ceci/scene_graph.hpp"
#include "ceci/text.hpp"

namespace th {

inline std::string source_root() { return CECI_SOURCE_ROOT; }

inline std::string data_path(const std::string& name) {
  return std::string(CECI_SOURCE_ROOT) + "/tests/data/" + name;
}

inline std::string config_path(const std::string& name) {
  return std::string(CECI_SOURCE_ROOT) + "/configs/" + name;
}

// Fresh directory under the build tree; wiped on reuse.
inline std::string scratch_dir(const std::string& tag) {
  std::filesystem::path dir = std::filesystem::path(CECI_SCRATCH) / tag;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline ceci::Ontology toy_ontology() {
  return ceci::Ontology::load(data_path("toy_ontology.cfg"));
}

inline std::vector<ceci::SceneGraph> toy_corpus() {
  return ceci::read_corpus(data_path("toy_corpus.txt"));
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the ceci binary with pre-formed arguments, capturing both streams.
inline CliResult run_cli(const std::string& args) {
  static std::atomic<int> counter{0};
  std::filesystem::path dir = std::filesystem::path(CECI_SCRATCH) / "cli_io";
  std::filesystem::create_directories(dir);
  const int id = counter.fetch_add(1);
  const std::string out_file = (dir / ("out" + std::to_string(id))).string();
  const std::string err_file = (dir / ("err" + std::to_string(id))).string();
  const std::string cmd = std::string("'") + CECI_BINARY + "' " + args + " > '" +
                          out_file + "' 2> '" + err_file + "'";
  const int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = ceci::read_file(out_file);
  r.err = ceci::read_file(err_file);
  return r;
}

inline bool same_bytes(const std::string& path_a, const std::string& path_b) {
  return ceci::read_file(path_a) == ceci::read_file(path_b);
}

// Whether `what()` of a thrown ceci::Error contains `needle`.
template <typename Fn>
inline bool throws_with(Fn&& fn, const std::string& needle) {
  try {
    fn();
  } catch (const ceci::Error& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace th
