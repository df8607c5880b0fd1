#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ceci/matrix.hpp"
#include "ceci/ontology.hpp"

namespace ceci {

enum class Layer { Building, Rooms, Objects };

char layer_code(Layer l);
Layer layer_from_code(char c, const std::string& context);

struct GraphNode {
  int id = 0;
  Layer layer = Layer::Objects;
  std::string class_label;
  std::string subcategory;          // empty = absent
  std::vector<double> gt_affordance;  // empty = absent
};

struct GraphEdge {
  int parent = 0;
  int child = 0;
  bool operator==(const GraphEdge&) const = default;
};

// Layered containment tree: building -> rooms -> objects. Node ids are dense
// 0..N-1; node order in `nodes` is id order once canonicalized.
struct SceneGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  const GraphNode* find_node(int id) const;
  std::optional<int> parent_of(int id) const;
  std::vector<int> children_of(int id) const;
};

bool graphs_equal(const SceneGraph& a, const SceneGraph& b);

// Every violated invariant, with node/edge ids; empty means ok. Passing an
// ontology adds label, subcategory, and gt-length checks.
std::vector<std::string> validate(const SceneGraph& g, const Ontology* ontology = nullptr);

// One-hot rows over the full label vocabulary, node order preserved.
Matrix encode_features(const SceneGraph& g, const Ontology& ontology);

// One graph per text line; canonical field order, byte-stable.
std::string serialize_graph(const SceneGraph& g);
SceneGraph deserialize_graph(std::string_view line, const std::string& context);

void write_corpus(const std::string& path, const std::vector<SceneGraph>& graphs);
std::vector<SceneGraph> read_corpus(const std::string& path);

}  // namespace ceci
