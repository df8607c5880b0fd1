#pragma once

#include <map>
#include <string>
#include <vector>

#include "ceci/adam.hpp"
#include "ceci/datagen.hpp"
#include "ceci/layers.hpp"
#include "ceci/scene_graph.hpp"

namespace ceci {

struct CeciConfig {
  int layers = 9;
  int hidden = 64;
  double dropout = 0.5;
  int epochs = 5000;
  int batch_size = 50;
  double learning_rate = 0.01;
  double weight_decay = 5e-6;
  uint64_t seed = 0;  // filled from the CLI, not the config file

  static CeciConfig load(const std::string& path);
  void validate() const;
};

// Disjoint union of graphs as one normalized adjacency plus stacked node
// rows. Row r of `features` is node `node_ids[r].second` of graph
// `node_ids[r].first`; rows of a graph are contiguous and id-ordered.
struct Batch {
  NormalizedAdjacency adj;
  Matrix features;                      // N x vocab
  Matrix targets;                       // N x S, zero where unmasked
  Matrix mask;                          // N x S, 1 on supervised slots
  std::vector<SlotRange> node_ranges;   // begin < 0 for group-less nodes
  std::vector<std::pair<int, int>> node_ids;  // (graph index, node id)
  std::vector<int> graph_offsets;       // size graphs+1, row offsets
};

Batch batch_graphs(const std::vector<const SceneGraph*>& graphs,
                   const std::vector<const std::map<int, std::vector<double>>*>& targets,
                   const Ontology& ontology);

// node id -> distribution over the node's affordance group. Only nodes whose
// class owns a group appear.
using Prediction = std::map<int, std::vector<double>>;

struct TrainHistory {
  std::vector<double> train_loss;  // masked MSE per epoch over the train split
  std::vector<double> val_loss;    // eval-mode masked MSE; nan when no val split
  int best_epoch = -1;             // 1-based epoch of the retained checkpoint
  bool aborted_non_finite = false;
};

class Model {
 public:
  Model() = default;
  Model(const CeciConfig& config, const Ontology& ontology, Rng& rng);

  // Returns N x S per-node distributions (zero rows for group-less nodes).
  Matrix forward(const Batch& batch, PassMode mode, Rng& dropout_rng);
  // Gradient wrt parameters, accumulated into the layers' grad buffers.
  void backward(const Batch& batch, const Matrix& grad_probs);
  void zero_grad();
  std::vector<ParamView> params();

  double eval_loss(const Batch& batch);
  Prediction predict(const SceneGraph& g, const Ontology& ontology);

  void save(const std::string& path) const;
  static Model load(const std::string& path);

  const CeciConfig& config() const { return config_; }
  uint64_t ontology_hash() const { return ontology_hash_; }
  int vocab() const { return vocab_; }
  int slots() const { return slots_; }

 private:
  CeciConfig config_;
  uint64_t ontology_hash_ = 0;
  int vocab_ = 0;
  int slots_ = 0;
  std::vector<GcnConv> convs_;
  std::vector<BatchNorm> norms_;
  std::vector<Relu> relus_;
  std::vector<Dropout> drops_;
  Matrix head_w_;                 // hidden x S
  std::vector<double> head_b_;    // S
  Matrix head_w_grad_;
  std::vector<double> head_b_grad_;
  Matrix head_in_;                // cache for backward
  GroupSoftmax softmax_;

  friend TrainHistory train_model(Model& model, const Dataset& dataset,
                                  const Ontology& ontology);
};

// Trains in place per the model's config; returns the loss history. The
// retained parameters are those of the best validation epoch.
TrainHistory train_model(Model& model, const Dataset& dataset, const Ontology& ontology);

}  // namespace ceci
