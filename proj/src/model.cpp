#include "ceci/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace ceci {

CeciConfig CeciConfig::load(const std::string& path) {
  if (!file_exists(path)) throw Error(path + ": model config does not exist");
  CeciConfig cfg;
  bool saw_model = false;
  for (const auto& sec : parse_sections(read_file(path), path)) {
    std::string where = path + ":" + std::to_string(sec.header_line);
    if (sec.name != "model") throw Error(where + ": unknown section [" + sec.name + "]");
    saw_model = true;
    for (size_t i = 0; i < sec.lines.size(); ++i) {
      const auto& t = sec.lines[i];
      std::string lw = path + ":" + std::to_string(sec.line_numbers[i]);
      if (t.size() != 2) throw Error(lw + ": expected 'key value'");
      if (t[0] == "layers") cfg.layers = static_cast<int>(parse_int(t[1], lw));
      else if (t[0] == "hidden") cfg.hidden = static_cast<int>(parse_int(t[1], lw));
      else if (t[0] == "dropout") cfg.dropout = parse_double(t[1], lw);
      else if (t[0] == "epochs") cfg.epochs = static_cast<int>(parse_int(t[1], lw));
      else if (t[0] == "batch_size") cfg.batch_size = static_cast<int>(parse_int(t[1], lw));
      else if (t[0] == "learning_rate") cfg.learning_rate = parse_double(t[1], lw);
      else if (t[0] == "weight_decay") cfg.weight_decay = parse_double(t[1], lw);
      else throw Error(lw + ": unknown model key '" + t[0] + "'");
    }
  }
  if (!saw_model) throw Error(path + ": missing [model] section");
  cfg.validate();
  return cfg;
}

void CeciConfig::validate() const {
  if (layers < 1) throw Error("model config: layers must be >= 1");
  if (hidden < 1) throw Error("model config: hidden must be >= 1");
  if (dropout < 0 || dropout >= 1) throw Error("model config: dropout must be in [0,1)");
  if (epochs < 1) throw Error("model config: epochs must be >= 1");
  if (batch_size < 1) throw Error("model config: batch_size must be >= 1");
  if (learning_rate < 0) throw Error("model config: learning_rate must be >= 0");
  if (weight_decay < 0) throw Error("model config: weight_decay must be >= 0");
}

Batch batch_graphs(const std::vector<const SceneGraph*>& graphs,
                   const std::vector<const std::map<int, std::vector<double>>*>& targets,
                   const Ontology& ontology) {
  if (graphs.empty()) throw Error("batch_graphs: empty batch");
  if (!targets.empty() && targets.size() != graphs.size())
    throw Error("batch_graphs: targets list length mismatch");

  Batch batch;
  batch.graph_offsets.push_back(0);
  int total = 0;
  for (const auto* g : graphs) {
    total += static_cast<int>(g->nodes.size());
    batch.graph_offsets.push_back(total);
  }

  const int vocab = ontology.vocab_size();
  const int slots = ontology.total_slots();
  batch.features = Matrix(total, vocab);
  batch.targets = Matrix(total, slots);
  batch.mask = Matrix(total, slots);
  batch.node_ranges.assign(total, SlotRange{-1, -1});

  std::vector<std::pair<int, int>> edges;
  for (size_t gi = 0; gi < graphs.size(); ++gi) {
    const SceneGraph& g = *graphs[gi];
    const int offset = batch.graph_offsets[gi];
    const auto* tmap = targets.empty() ? nullptr : targets[gi];

    std::vector<int> row_of(g.nodes.size(), -1);
    for (size_t k = 0; k < g.nodes.size(); ++k) {
      const GraphNode& n = g.nodes[k];
      if (n.id < 0 || n.id >= static_cast<int>(g.nodes.size()))
        throw Error("batch_graphs: graph " + std::to_string(gi) + " has non-dense ids");
      const int row = offset + static_cast<int>(k);
      row_of[n.id] = row;
      batch.node_ids.emplace_back(static_cast<int>(gi), n.id);
      batch.features(row, ontology.label_index(n.class_label)) = 1.0;

      auto range = ontology.slot_range(n.class_label);
      if (range) batch.node_ranges[row] = *range;

      if (tmap) {
        auto it = tmap->find(n.id);
        if (it != tmap->end()) {
          if (!range)
            throw Error("batch_graphs: target given for group-less node " +
                        std::to_string(n.id));
          if (static_cast<int>(it->second.size()) != range->size())
            throw Error("batch_graphs: target length mismatch for node " +
                        std::to_string(n.id));
          for (int s = range->begin; s < range->end; ++s) {
            batch.targets(row, s) = it->second[s - range->begin];
            batch.mask(row, s) = 1.0;
          }
        }
      }
    }
    for (const auto& e : g.edges)
      edges.emplace_back(row_of[e.parent], row_of[e.child]);
  }
  batch.adj = normalize_adjacency(edges, total);
  return batch;
}

namespace {

Matrix glorot(int rows, int cols, Rng& rng) {
  Matrix w(rows, cols);
  const double limit = std::sqrt(6.0 / (rows + cols));
  for (auto& v : w.data()) v = rng.uniform(-limit, limit);
  return w;
}

}  // namespace

Model::Model(const CeciConfig& config, const Ontology& ontology, Rng& rng)
    : config_(config),
      ontology_hash_(ontology.content_hash()),
      vocab_(ontology.vocab_size()),
      slots_(ontology.total_slots()) {
  config_.validate();
  if (slots_ == 0) throw Error("model: ontology has no affordance slots");
  int in = vocab_;
  for (int l = 0; l < config_.layers; ++l) {
    GcnConv conv;
    conv.weight = glorot(in, config_.hidden, rng);
    conv.grad_weight = Matrix(in, config_.hidden);
    convs_.push_back(std::move(conv));
    norms_.emplace_back(config_.hidden);
    relus_.emplace_back();
    Dropout d;
    d.p = config_.dropout;
    drops_.push_back(d);
    in = config_.hidden;
  }
  head_w_ = glorot(config_.hidden, slots_, rng);
  head_b_.assign(slots_, 0.0);
  head_w_grad_ = Matrix(config_.hidden, slots_);
  head_b_grad_.assign(slots_, 0.0);
}

Matrix Model::forward(const Batch& batch, PassMode mode, Rng& dropout_rng) {
  if (batch.features.cols() != vocab_) throw Error("model forward: vocabulary mismatch");
  Matrix h = batch.features;
  for (int l = 0; l < config_.layers; ++l) {
    h = convs_[l].forward(batch.adj, h);
    h = norms_[l].forward(h, mode);
    h = relus_[l].forward(h);
    h = drops_[l].forward(h, mode, dropout_rng);
  }
  head_in_ = h;
  Matrix logits = matmul(h, head_w_);
  for (int i = 0; i < logits.rows(); ++i)
    for (int j = 0; j < slots_; ++j) logits(i, j) += head_b_[j];
  return softmax_.forward(logits, batch.node_ranges);
}

void Model::backward(const Batch& batch, const Matrix& grad_probs) {
  Matrix g = softmax_.backward(grad_probs);
  add_inplace(head_w_grad_, matmul_at(head_in_, g));
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < slots_; ++j) head_b_grad_[j] += g(i, j);
  g = matmul_bt(g, head_w_);
  for (int l = config_.layers - 1; l >= 0; --l) {
    g = drops_[l].backward(g);
    g = relus_[l].backward(g);
    g = norms_[l].backward(g);
    g = convs_[l].backward(batch.adj, g);
  }
}

void Model::zero_grad() {
  for (auto& c : convs_) c.grad_weight.fill(0.0);
  for (auto& n : norms_) {
    std::fill(n.grad_gamma.begin(), n.grad_gamma.end(), 0.0);
    std::fill(n.grad_beta.begin(), n.grad_beta.end(), 0.0);
  }
  head_w_grad_.fill(0.0);
  std::fill(head_b_grad_.begin(), head_b_grad_.end(), 0.0);
}

std::vector<ParamView> Model::params() {
  std::vector<ParamView> out;
  for (int l = 0; l < config_.layers; ++l) {
    std::string tag = std::to_string(l);
    out.push_back({"conv" + tag + ".weight", convs_[l].weight.data(),
                   convs_[l].grad_weight.data()});
    out.push_back({"norm" + tag + ".gamma", norms_[l].gamma, norms_[l].grad_gamma});
    out.push_back({"norm" + tag + ".beta", norms_[l].beta, norms_[l].grad_beta});
  }
  out.push_back({"head.weight", head_w_.data(), head_w_grad_.data()});
  out.push_back({"head.bias", head_b_, head_b_grad_});
  return out;
}

double Model::eval_loss(const Batch& batch) {
  Rng unused(0);
  Matrix probs = forward(batch, PassMode::Eval, unused);
  return masked_mse(probs, batch.targets, batch.mask, nullptr);
}

Prediction Model::predict(const SceneGraph& g, const Ontology& ontology) {
  if (ontology.content_hash() != ontology_hash_)
    throw Error("predict: ontology does not match the one the model was trained with");
  Batch batch = batch_graphs({&g}, {}, ontology);
  Rng unused(0);
  Matrix probs = forward(batch, PassMode::Eval, unused);
  Prediction out;
  for (int r = 0; r < probs.rows(); ++r) {
    const SlotRange& range = batch.node_ranges[r];
    if (range.begin < 0) continue;
    std::vector<double> dist(probs.row(r) + range.begin, probs.row(r) + range.end);
    out[batch.node_ids[r].second] = std::move(dist);
  }
  return out;
}

namespace {

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }
void put_vec(std::string& out, const std::vector<double>& v) {
  put_u32(out, static_cast<uint32_t>(v.size()));
  for (double x : v) put_f64(out, x);
}
void put_matrix(std::string& out, const Matrix& m) {
  put_u32(out, static_cast<uint32_t>(m.rows()));
  put_u32(out, static_cast<uint32_t>(m.cols()));
  for (double x : m.data()) put_f64(out, x);
}

struct Cursor {
  const std::string& buf;
  size_t pos = 0;
  std::string origin;

  void need(size_t n) {
    if (pos + n > buf.size()) throw Error(origin + ": corrupt checkpoint (truncated)");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> vec() {
    uint32_t n = u32();
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  Matrix matrix() {
    uint32_t r = u32(), c = u32();
    if (r > (1u << 24) || c > (1u << 24)) throw Error(origin + ": corrupt checkpoint (bad shape)");
    Matrix m(static_cast<int>(r), static_cast<int>(c));
    for (auto& x : m.data()) x = f64();
    return m;
  }
};

constexpr char kCheckpointMagic[] = "CECIMDL1";

}  // namespace

void Model::save(const std::string& path) const {
  std::string out(kCheckpointMagic, 8);
  put_u32(out, static_cast<uint32_t>(config_.layers));
  put_u32(out, static_cast<uint32_t>(config_.hidden));
  put_f64(out, config_.dropout);
  put_u32(out, static_cast<uint32_t>(config_.epochs));
  put_u32(out, static_cast<uint32_t>(config_.batch_size));
  put_f64(out, config_.learning_rate);
  put_f64(out, config_.weight_decay);
  put_u64(out, config_.seed);
  put_u64(out, ontology_hash_);
  put_u32(out, static_cast<uint32_t>(vocab_));
  put_u32(out, static_cast<uint32_t>(slots_));
  for (int l = 0; l < config_.layers; ++l) {
    put_matrix(out, convs_[l].weight);
    const BatchNorm& n = norms_[l];
    put_vec(out, n.gamma);
    put_vec(out, n.beta);
    put_vec(out, n.running_mean);
    put_vec(out, n.running_var);
    put_f64(out, n.momentum);
    put_f64(out, n.eps);
    put_u64(out, static_cast<uint64_t>(n.batches_seen));
  }
  put_matrix(out, head_w_);
  put_vec(out, head_b_);
  write_file(path, out);
}

Model Model::load(const std::string& path) {
  if (!file_exists(path)) throw Error(path + ": checkpoint does not exist");
  std::string buf = read_file(path);
  if (buf.size() < 8 || buf.compare(0, 8, kCheckpointMagic, 8) != 0)
    throw Error(path + ": corrupt checkpoint (bad magic)");
  Cursor c{buf, 8, path};

  Model m;
  m.config_.layers = static_cast<int>(c.u32());
  m.config_.hidden = static_cast<int>(c.u32());
  m.config_.dropout = c.f64();
  m.config_.epochs = static_cast<int>(c.u32());
  m.config_.batch_size = static_cast<int>(c.u32());
  m.config_.learning_rate = c.f64();
  m.config_.weight_decay = c.f64();
  m.config_.seed = c.u64();
  m.ontology_hash_ = c.u64();
  m.vocab_ = static_cast<int>(c.u32());
  m.slots_ = static_cast<int>(c.u32());
  m.config_.validate();

  for (int l = 0; l < m.config_.layers; ++l) {
    GcnConv conv;
    conv.weight = c.matrix();
    conv.grad_weight = Matrix(conv.weight.rows(), conv.weight.cols());
    m.convs_.push_back(std::move(conv));
    BatchNorm n(m.config_.hidden);
    n.gamma = c.vec();
    n.beta = c.vec();
    n.running_mean = c.vec();
    n.running_var = c.vec();
    n.momentum = c.f64();
    n.eps = c.f64();
    n.batches_seen = static_cast<long long>(c.u64());
    if (static_cast<int>(n.gamma.size()) != m.config_.hidden)
      throw Error(path + ": corrupt checkpoint (channel mismatch)");
    m.norms_.push_back(std::move(n));
    m.relus_.emplace_back();
    Dropout d;
    d.p = m.config_.dropout;
    m.drops_.push_back(d);
  }
  m.head_w_ = c.matrix();
  m.head_b_ = c.vec();
  m.head_w_grad_ = Matrix(m.head_w_.rows(), m.head_w_.cols());
  m.head_b_grad_.assign(m.head_b_.size(), 0.0);
  if (c.pos != buf.size()) throw Error(path + ": corrupt checkpoint (trailing bytes)");
  if (m.head_w_.rows() != m.config_.hidden || m.head_w_.cols() != m.slots_ ||
      static_cast<int>(m.head_b_.size()) != m.slots_)
    throw Error(path + ": corrupt checkpoint (head shape)");
  return m;
}

namespace {

// Everything adam_step touches plus batchnorm running stats.
struct ModelSnapshot {
  std::vector<std::vector<double>> tensors;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> running;
  std::vector<long long> batches_seen;
};

ModelSnapshot take_snapshot(const std::vector<ParamView>& params,
                            const std::vector<BatchNorm>& norms) {
  ModelSnapshot s;
  for (const auto& p : params) s.tensors.emplace_back(p.value.begin(), p.value.end());
  for (const auto& n : norms) {
    s.running.emplace_back(n.running_mean, n.running_var);
    s.batches_seen.push_back(n.batches_seen);
  }
  return s;
}

void restore_snapshot(const ModelSnapshot& s, std::vector<ParamView>& params,
                      std::vector<BatchNorm>& norms) {
  for (size_t i = 0; i < params.size(); ++i)
    std::copy(s.tensors[i].begin(), s.tensors[i].end(), params[i].value.begin());
  for (size_t i = 0; i < norms.size(); ++i) {
    norms[i].running_mean = s.running[i].first;
    norms[i].running_var = s.running[i].second;
    norms[i].batches_seen = s.batches_seen[i];
  }
}

Batch batch_of_examples(const std::vector<const Example*>& examples,
                        const std::vector<size_t>& order, size_t begin, size_t end,
                        const Ontology& ontology) {
  std::vector<const SceneGraph*> graphs;
  std::vector<const std::map<int, std::vector<double>>*> targets;
  for (size_t i = begin; i < end; ++i) {
    graphs.push_back(&examples[order[i]]->input);
    targets.push_back(&examples[order[i]]->targets);
  }
  return batch_graphs(graphs, targets, ontology);
}

double mask_count(const Batch& b) {
  double c = 0.0;
  for (double m : b.mask.data()) c += (m != 0.0) ? 1.0 : 0.0;
  return c;
}

}  // namespace

TrainHistory train_model(Model& model, const Dataset& dataset, const Ontology& ontology) {
  const CeciConfig& cfg = model.config_;
  if (ontology.content_hash() != model.ontology_hash_)
    throw Error("train: ontology does not match the model");

  auto train_set = dataset.split_view(Split::Train);
  auto val_set = dataset.split_view(Split::Val);
  if (train_set.empty()) throw Error("train: empty split (no training examples)");

  auto params = model.params();
  AdamState opt;
  opt.learning_rate = cfg.learning_rate;
  opt.weight_decay = cfg.weight_decay;
  opt.init(params);

  // Fixed-order validation batches, rebuilt shapes each epoch are identical;
  // build once.
  std::vector<size_t> val_order(val_set.size());
  for (size_t i = 0; i < val_order.size(); ++i) val_order[i] = i;
  std::vector<Batch> val_batches;
  for (size_t b = 0; b < val_set.size(); b += cfg.batch_size)
    val_batches.push_back(batch_of_examples(
        val_set, val_order, b, std::min(val_set.size(), b + cfg.batch_size), ontology));

  TrainHistory history;
  ModelSnapshot best;
  double best_metric = std::numeric_limits<double>::infinity();
  bool have_best = false;

  std::vector<size_t> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, 0x45504f43ull, static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    Rng dropout_rng(derive_seed(cfg.seed, 0x44524f50ull, static_cast<uint64_t>(epoch)));

    double sse = 0.0, count = 0.0;
    bool finite = true;
    for (size_t b = 0; b < train_set.size() && finite; b += cfg.batch_size) {
      Batch batch = batch_of_examples(train_set, order, b,
                                      std::min(train_set.size(), b + cfg.batch_size),
                                      ontology);
      Matrix probs = model.forward(batch, PassMode::Train, dropout_rng);
      Matrix grad;
      double loss = masked_mse(probs, batch.targets, batch.mask, &grad);
      if (!std::isfinite(loss)) {
        finite = false;
        break;
      }
      double c = mask_count(batch);
      sse += loss * c;
      count += c;
      model.zero_grad();
      model.backward(batch, grad);
      try {
        adam_step(params, opt);
      } catch (const Error&) {
        finite = false;
      }
    }

    if (!finite) {
      history.aborted_non_finite = true;
      break;
    }

    history.train_loss.push_back(count > 0 ? sse / count : 0.0);

    double val = std::numeric_limits<double>::quiet_NaN();
    if (!val_batches.empty()) {
      double vsse = 0.0, vcount = 0.0;
      for (const auto& vb : val_batches) {
        double l = model.eval_loss(vb);
        double c = mask_count(vb);
        vsse += l * c;
        vcount += c;
      }
      val = vcount > 0 ? vsse / vcount : 0.0;
    }
    history.val_loss.push_back(val);

    double metric = val_batches.empty() ? history.train_loss.back() : val;
    if (std::isfinite(metric) && metric < best_metric) {
      best_metric = metric;
      best = take_snapshot(params, model.norms_);
      have_best = true;
      history.best_epoch = epoch;
    }
  }

  if (have_best) restore_snapshot(best, params, model.norms_);
  return history;
}

}  // namespace ceci
