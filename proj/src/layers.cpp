#include "ceci/layers.hpp"

#include <cmath>

#include "ceci/text.hpp"

namespace ceci {

Matrix GcnConv::forward(const NormalizedAdjacency& adj, const Matrix& h) {
  if (h.cols() != weight.rows()) throw Error("GcnConv: feature width mismatch");
  agg_ = spmm(adj, h);
  return matmul(agg_, weight);
}

Matrix GcnConv::backward(const NormalizedAdjacency& adj, const Matrix& grad_out) {
  // d/dW = (A H)^T G ; d/dH = A^T (G W^T) = A (G W^T) since A is symmetric.
  if (grad_weight.rows() != weight.rows() || grad_weight.cols() != weight.cols())
    grad_weight = Matrix(weight.rows(), weight.cols());
  add_inplace(grad_weight, matmul_at(agg_, grad_out));
  return spmm(adj, matmul_bt(grad_out, weight));
}

BatchNorm::BatchNorm(int channels)
    : gamma(channels, 1.0),
      beta(channels, 0.0),
      running_mean(channels, 0.0),
      running_var(channels, 1.0),
      grad_gamma(channels, 0.0),
      grad_beta(channels, 0.0) {}

Matrix BatchNorm::forward(const Matrix& h, PassMode mode) {
  const int n = h.rows(), c = h.cols();
  if (c != static_cast<int>(gamma.size())) throw Error("BatchNorm: channel mismatch");
  if (n == 0) throw Error("BatchNorm: empty batch");
  Matrix out(n, c);
  last_train_ = is_train(mode);
  if (last_train_) {
    std::vector<double> mean(c, 0.0), var(c, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j) mean[j] += h(i, j);
    for (int j = 0; j < c; ++j) mean[j] /= n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j) {
        double d = h(i, j) - mean[j];
        var[j] += d * d;
      }
    for (int j = 0; j < c; ++j) var[j] /= n;

    if (mode == PassMode::Train) {
      for (int j = 0; j < c; ++j) {
        running_mean[j] = (1.0 - momentum) * running_mean[j] + momentum * mean[j];
        running_var[j] = (1.0 - momentum) * running_var[j] + momentum * var[j];
      }
      ++batches_seen;
    }

    inv_std_.resize(c);
    for (int j = 0; j < c; ++j) inv_std_[j] = 1.0 / std::sqrt(var[j] + eps);
    xhat_ = Matrix(n, c);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j) {
        xhat_(i, j) = (h(i, j) - mean[j]) * inv_std_[j];
        out(i, j) = gamma[j] * xhat_(i, j) + beta[j];
      }
  } else {
    inv_std_.resize(c);
    for (int j = 0; j < c; ++j) inv_std_[j] = 1.0 / std::sqrt(running_var[j] + eps);
    xhat_ = Matrix(n, c);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j) {
        xhat_(i, j) = (h(i, j) - running_mean[j]) * inv_std_[j];
        out(i, j) = gamma[j] * xhat_(i, j) + beta[j];
      }
  }
  return out;
}

Matrix BatchNorm::backward(const Matrix& grad_out) {
  const int n = xhat_.rows(), c = xhat_.cols();
  if (grad_out.rows() != n || grad_out.cols() != c)
    throw Error("BatchNorm backward: shape mismatch");
  Matrix grad_in(n, c);
  if (last_train_) {
    // Through the batch statistics:
    // dx_i = gamma * inv_std * (g_i - mean(g) - xhat_i * mean(g * xhat))
    std::vector<double> mg(c, 0.0), mgx(c, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j) {
        mg[j] += grad_out(i, j);
        mgx[j] += grad_out(i, j) * xhat_(i, j);
      }
    for (int j = 0; j < c; ++j) {
      grad_gamma[j] += mgx[j];
      grad_beta[j] += mg[j];
      mg[j] /= n;
      mgx[j] /= n;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j)
        grad_in(i, j) =
            gamma[j] * inv_std_[j] * (grad_out(i, j) - mg[j] - xhat_(i, j) * mgx[j]);
  } else {
    for (int j = 0; j < c; ++j) {
      double gg = 0.0, gb = 0.0;
      for (int i = 0; i < n; ++i) {
        gg += grad_out(i, j) * xhat_(i, j);
        gb += grad_out(i, j);
        grad_in(i, j) = grad_out(i, j) * gamma[j] * inv_std_[j];
      }
      grad_gamma[j] += gg;
      grad_beta[j] += gb;
    }
  }
  return grad_in;
}

Matrix Relu::forward(const Matrix& h) {
  input_ = h;
  Matrix out(h.rows(), h.cols());
  for (size_t i = 0; i < h.data().size(); ++i)
    out.data()[i] = h.data()[i] > 0 ? h.data()[i] : 0.0;
  return out;
}

Matrix Relu::backward(const Matrix& grad_out) const {
  if (grad_out.rows() != input_.rows() || grad_out.cols() != input_.cols())
    throw Error("Relu backward: shape mismatch");
  Matrix grad_in(grad_out.rows(), grad_out.cols());
  for (size_t i = 0; i < grad_out.data().size(); ++i)
    grad_in.data()[i] = input_.data()[i] > 0 ? grad_out.data()[i] : 0.0;
  return grad_in;
}

Matrix Dropout::forward(const Matrix& h, PassMode mode, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw Error("Dropout: p must be in [0,1)");
  if (mode == PassMode::Eval) {
    eval_pass_ = true;
    return h;
  }
  eval_pass_ = false;
  if (mode == PassMode::Train) {
    mask_ = Matrix(h.rows(), h.cols());
    const double keep = 1.0 - p;
    for (auto& m : mask_.data()) m = (p > 0.0 && rng.uniform() < p) ? 0.0 : 1.0 / keep;
  } else if (mask_.rows() != h.rows() || mask_.cols() != h.cols()) {
    throw Error("Dropout: no mask to reuse for this shape");
  }
  return hadamard(h, mask_);
}

Matrix Dropout::backward(const Matrix& grad_out) const {
  if (eval_pass_) return grad_out;
  return hadamard(grad_out, mask_);
}

Matrix GroupSoftmax::forward(const Matrix& z, const std::vector<SlotRange>& node_ranges) {
  if (static_cast<int>(node_ranges.size()) != z.rows())
    throw Error("GroupSoftmax: range list length mismatch");
  ranges_ = node_ranges;
  out_ = Matrix(z.rows(), z.cols());
  for (int i = 0; i < z.rows(); ++i) {
    const SlotRange& r = ranges_[i];
    if (r.begin < 0) continue;
    if (r.begin >= r.end || r.end > z.cols()) throw Error("GroupSoftmax: bad slot range");
    double mx = z(i, r.begin);
    for (int j = r.begin; j < r.end; ++j) mx = std::max(mx, z(i, j));
    double sum = 0.0;
    for (int j = r.begin; j < r.end; ++j) {
      out_(i, j) = std::exp(z(i, j) - mx);
      sum += out_(i, j);
    }
    for (int j = r.begin; j < r.end; ++j) out_(i, j) /= sum;
  }
  return out_;
}

Matrix GroupSoftmax::backward(const Matrix& grad_out) const {
  if (grad_out.rows() != out_.rows() || grad_out.cols() != out_.cols())
    throw Error("GroupSoftmax backward: shape mismatch");
  Matrix grad_in(out_.rows(), out_.cols());
  for (int i = 0; i < out_.rows(); ++i) {
    const SlotRange& r = ranges_[i];
    if (r.begin < 0) continue;
    double dot = 0.0;
    for (int j = r.begin; j < r.end; ++j) dot += grad_out(i, j) * out_(i, j);
    for (int j = r.begin; j < r.end; ++j)
      grad_in(i, j) = out_(i, j) * (grad_out(i, j) - dot);
  }
  return grad_in;
}

double masked_mse(const Matrix& pred, const Matrix& target, const Matrix& mask,
                  Matrix* grad) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols() ||
      pred.rows() != mask.rows() || pred.cols() != mask.cols())
    throw Error("masked_mse: shape mismatch");
  double count = 0.0;
  for (double m : mask.data()) count += (m != 0.0) ? 1.0 : 0.0;
  if (grad) *grad = Matrix(pred.rows(), pred.cols());
  if (count == 0.0) return 0.0;
  double loss = 0.0;
  for (size_t i = 0; i < pred.data().size(); ++i) {
    if (mask.data()[i] == 0.0) continue;
    double d = pred.data()[i] - target.data()[i];
    loss += d * d;
    if (grad) grad->data()[i] = 2.0 * d / count;
  }
  return loss / count;
}

}  // namespace ceci
