#pragma once

#include <string>
#include <vector>

#include "ceci/matrix.hpp"
#include "ceci/ontology.hpp"
#include "ceci/scene_graph.hpp"

namespace ceci {

// Smoothed co-occurrence statistics over a corpus of ground-truth graphs.
// Rows of `joint` are affordance slots (ontology slot order), columns are
// context class labels (ontology label order, objects then room then building).
struct FrequencyTable {
  double alpha = 1.0;
  long long room_count = 0;
  std::vector<std::string> labels;   // column labels
  int slots = 0;                     // row count, == ontology.total_slots()
  std::vector<double> p_label;       // P(b_j), per column
  Matrix joint;                      // P(slot_i  and  b_j)
  uint64_t ontology_hash = 0;

  void save(const std::string& path) const;
  static FrequencyTable load(const std::string& path);
};

FrequencyTable fit_frequency_table(const std::vector<SceneGraph>& graphs,
                                   const Ontology& ontology, double alpha = 1.0);

// Distinct class labels of the target's sibling objects plus the room label.
// The target node itself is excluded, so its class appears only when another
// sibling shares it. Sorted, deduplicated.
std::vector<std::string> room_context(const SceneGraph& g, int node_id);

// Expectation of each affordance slot of `class_label` given the context
// labels, normalized so each affordance group sums to 1.
std::vector<double> predict_expectation(const FrequencyTable& table,
                                        const Ontology& ontology,
                                        const std::string& class_label,
                                        const std::vector<std::string>& context);

// Per-node baseline predictions for every group-owning object node.
std::map<int, std::vector<double>> oracle_predict(const FrequencyTable& table,
                                                  const Ontology& ontology,
                                                  const SceneGraph& g);

}  // namespace ceci
