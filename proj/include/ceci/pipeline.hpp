#pragma once

#include <cstdint>
#include <string>

#include "ceci/datagen.hpp"

namespace ceci {

// Stage entry points shared by the CLI subcommands and the `pipeline`
// command. Each writes its outputs plus a RunManifest next to the primary
// output. All are deterministic in (inputs, seed).

void cmd_gen(const std::string& ontology_path, const std::string& generator_path,
             uint64_t seed, const std::string& out_corpus);

void cmd_split(const std::string& corpus_path, const SplitFractions& fractions,
               uint64_t seed);

void cmd_oracle_fit(const std::string& corpus_path, const std::string& ontology_path,
                    double alpha, const std::string& split, const std::string& out_table);

void cmd_oracle_predict(const std::string& table_path, const std::string& ontology_path,
                        const std::string& corpus_path, const std::string& split,
                        const std::string& out_path);

// Returns true when training stopped early on a non-finite loss (the
// checkpoint then holds the last finite state).
bool cmd_train(const std::string& corpus_path, const std::string& ontology_path,
               const std::string& model_config_path, uint64_t seed,
               const std::string& out_checkpoint);

void cmd_predict(const std::string& checkpoint_path, const std::string& ontology_path,
                 const std::string& corpus_path, const std::string& split,
                 const std::string& out_path);

void cmd_eval(const std::string& checkpoint_path, const std::string& ontology_path,
              const std::string& corpus_path, const std::string& split,
              const std::string& out_report);

void cmd_correlate(const std::string& checkpoint_path, const std::string& ontology_path,
                   const std::string& corpus_path, const std::string& split,
                   const std::string& out_path);

void cmd_export_heatmap(const std::string& report_path, const std::string& out_base);

// Returns the number of violations found (printed to stdout).
int cmd_validate(const std::string& corpus_path, const std::string& ontology_path);

struct PipelineConfig {
  std::string ontology_path;
  std::string generator_path;
  std::string model_path;
  std::string out_dir;
  double alpha = 1.0;
  SplitFractions fractions;
  std::string eval_split = "test";

  static PipelineConfig load(const std::string& path);
};

// gen -> split -> oracle-fit -> train -> eval -> correlate; stage names are
// prefixed onto propagated errors. Returns the train stage's abort flag.
// A non-empty out_dir_override replaces the config's out_dir.
bool run_pipeline(const std::string& config_path, uint64_t seed,
                  const std::string& out_dir_override = "");

std::string sidecar_path(const std::string& corpus_path);

}  // namespace ceci
