#pragma once

#include <vector>

#include "ceci/adjacency.hpp"
#include "ceci/matrix.hpp"
#include "ceci/ontology.hpp"
#include "ceci/rng.hpp"

namespace ceci {

// Train draws fresh dropout masks; TrainReuseMask replays the previous masks
// (used by the finite-difference checker); Eval uses running statistics and
// no dropout.
enum class PassMode { Train, TrainReuseMask, Eval };

inline bool is_train(PassMode m) { return m != PassMode::Eval; }

// out = adj * H * W. Layers cache what backward needs; a layer instance is
// single-owner during a forward/backward pair.
struct GcnConv {
  Matrix weight;       // in x out
  Matrix grad_weight;  // accumulated by backward

  Matrix forward(const NormalizedAdjacency& adj, const Matrix& h);
  // Returns grad wrt h; adds grad wrt weight into grad_weight.
  Matrix backward(const NormalizedAdjacency& adj, const Matrix& grad_out);

 private:
  Matrix agg_;  // adj * H
};

struct BatchNorm {
  std::vector<double> gamma, beta;
  std::vector<double> running_mean, running_var;
  std::vector<double> grad_gamma, grad_beta;
  double momentum = 0.1;
  double eps = 1e-5;
  long long batches_seen = 0;

  explicit BatchNorm(int channels = 0);

  Matrix forward(const Matrix& h, PassMode mode);
  Matrix backward(const Matrix& grad_out);

 private:
  Matrix xhat_;
  std::vector<double> inv_std_;
  bool last_train_ = false;
};

struct Relu {
  Matrix forward(const Matrix& h);
  Matrix backward(const Matrix& grad_out) const;

 private:
  Matrix input_;
};

// Inverted dropout: zero with probability p, scale survivors by 1/(1-p).
struct Dropout {
  double p = 0.5;

  Matrix forward(const Matrix& h, PassMode mode, Rng& rng);
  Matrix backward(const Matrix& grad_out) const;
  const Matrix& mask() const { return mask_; }

 private:
  Matrix mask_;  // holds 0 or 1/(1-p); empty in eval
  bool eval_pass_ = true;
};

// Softmax independently within each node's owned slot range; unowned slots
// stay exactly 0. begin < 0 marks a node without a group.
struct GroupSoftmax {
  Matrix forward(const Matrix& z, const std::vector<SlotRange>& node_ranges);
  Matrix backward(const Matrix& grad_out) const;

 private:
  Matrix out_;
  std::vector<SlotRange> ranges_;
};

// Mean squared error over masked slots only; mask entries are 0/1. Returns
// the loss and writes d(loss)/d(pred) into grad if non-null.
double masked_mse(const Matrix& pred, const Matrix& target, const Matrix& mask,
                  Matrix* grad);

}  // namespace ceci
