#pragma once

#include <map>
#include <string>
#include <vector>

#include "ceci/ontology.hpp"
#include "ceci/rng.hpp"
#include "ceci/scene_graph.hpp"

namespace ceci {

// One object-class slot of a room archetype: with probability presence_prob
// the room holds count_min..count_max instances.
struct ArchetypeItem {
  std::string class_label;
  double presence_prob = 1.0;
  int count_min = 1;
  int count_max = 1;
};

struct Archetype {
  std::string name;
  double weight = 1.0;
  std::vector<ArchetypeItem> items;
  // class -> (subcategory, probability) table, normalized.
  std::map<std::string, std::vector<std::pair<std::string, double>>> subcat_probs;
};

struct GeneratorConfig {
  std::vector<Archetype> archetypes;
  int rooms_min = 1;
  int rooms_max = 1;
  int corpus_size = 0;
  double augment_ratio = 0.2;
  uint64_t seed = 0;  // filled from the CLI, not the file

  static GeneratorConfig load(const std::string& path, const Ontology& ontology);
};

// A single ground-truth building graph: every group-owning object node
// carries a subcategory and its normalized gt vector.
SceneGraph sample_graph(const GeneratorConfig& config, const Ontology& ontology, Rng& rng);

// Cumulative random deletions 1..D of object nodes, D = floor(ratio * N_objects).
// Ids are re-densified; the base graph is not included in the result.
std::vector<SceneGraph> augment(const SceneGraph& g, double ratio, Rng& rng);

enum class Split { Train, Val, Test, Unassigned };

const char* split_name(Split s);
Split split_from_name(const std::string& s, const std::string& context);

// Sidecar row: one per corpus line.
struct CorpusEntry {
  int base_index = 0;
  int variant = 0;  // 0 = ground-truth graph, k = k cumulative deletions
  Split split = Split::Unassigned;
};

struct GeneratedCorpus {
  std::vector<SceneGraph> graphs;
  std::vector<CorpusEntry> entries;
};

// Deterministic in (config, seed); per-graph streams are derived so the
// result does not depend on loop organization.
GeneratedCorpus generate_corpus(const GeneratorConfig& config, const Ontology& ontology);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

// Split at base-graph granularity: a graph and all its augmentations share
// one split.
void assign_splits(std::vector<CorpusEntry>& entries, const SplitFractions& fractions,
                   uint64_t seed);

void write_sidecar(const std::string& path, const std::vector<CorpusEntry>& entries);
std::vector<CorpusEntry> read_sidecar(const std::string& path);

// One training example: gt stripped off the input graph into a target table.
struct Example {
  SceneGraph input;
  std::map<int, std::vector<double>> targets;  // node id -> gt distribution
  int base_index = 0;
  int variant = 0;
  Split split = Split::Unassigned;
};

struct Dataset {
  std::vector<Example> examples;

  std::vector<const Example*> split_view(Split s) const;
};

SceneGraph strip_ground_truth(const SceneGraph& g,
                              std::map<int, std::vector<double>>* targets_out);

Dataset make_dataset(const std::vector<SceneGraph>& gt_graphs,
                     const std::vector<CorpusEntry>& entries, const Ontology& ontology);

}  // namespace ceci
