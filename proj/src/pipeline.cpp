#include "ceci/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

#include "ceci/manifest.hpp"
#include "ceci/metrics.hpp"
#include "ceci/model.hpp"
#include "ceci/oracle.hpp"

namespace ceci {

std::string sidecar_path(const std::string& corpus_path) { return corpus_path + ".sidecar"; }

namespace {

constexpr uint64_t kInitStream = 0x494e4954ull;

struct LoadedCorpus {
  std::vector<SceneGraph> graphs;
  std::vector<CorpusEntry> entries;
  std::vector<int> selected;  // corpus line indices in the requested split
};

bool split_selects(const std::string& split, Split s) {
  if (split == "all") return true;
  return split_from_name(split, "split filter") == s;
}

LoadedCorpus load_corpus(const std::string& corpus_path, const std::string& split) {
  LoadedCorpus c;
  c.graphs = read_corpus(corpus_path);
  c.entries = read_sidecar(sidecar_path(corpus_path));
  if (c.graphs.size() != c.entries.size())
    throw Error(corpus_path + ": corpus has " + std::to_string(c.graphs.size()) +
                " graphs but its sidecar lists " + std::to_string(c.entries.size()));
  for (size_t i = 0; i < c.entries.size(); ++i)
    if (split_selects(split, c.entries[i].split)) c.selected.push_back(static_cast<int>(i));
  if (c.selected.empty())
    throw Error(corpus_path + ": empty split (no graphs tagged '" + split + "')");
  return c;
}

std::string render_predictions(const std::vector<int>& lines,
                               const std::vector<const SceneGraph*>& graphs,
                               const std::vector<NodeDistributions>& dists) {
  std::string out = "# ceci predictions v1\n";
  for (size_t i = 0; i < graphs.size(); ++i) {
    for (const auto& n : graphs[i]->nodes) {
      auto it = dists[i].find(n.id);
      if (it == dists[i].end()) continue;
      out += "pred " + std::to_string(lines[i]) + " " + std::to_string(n.id) + " " +
             n.class_label;
      for (double v : it->second) out += " " + format_double(v);
      out += "\n";
    }
  }
  return out;
}

struct CorrelationInputs {
  std::vector<const SceneGraph*> graphs;
  std::vector<NodeDistributions> preds;
  std::vector<NodeDistributions> gts;
  std::vector<const NodeDistributions*> pred_ptrs;
  std::vector<const NodeDistributions*> gt_ptrs;
};

CorrelationInputs predict_split(const LoadedCorpus& corpus, Model& model,
                                const Ontology& ontology) {
  CorrelationInputs ci;
  for (int line : corpus.selected) {
    const SceneGraph& g = corpus.graphs[line];
    NodeDistributions targets;
    SceneGraph stripped = strip_ground_truth(g, &targets);
    ci.graphs.push_back(&g);
    ci.preds.push_back(model.predict(stripped, ontology));
    ci.gts.push_back(std::move(targets));
  }
  for (const auto& p : ci.preds) ci.pred_ptrs.push_back(&p);
  for (const auto& t : ci.gts) ci.gt_ptrs.push_back(&t);
  return ci;
}

CorrelationReport build_correlations(const CorrelationInputs& ci, const Ontology& ontology) {
  CorrelationReport report;
  auto targets = ontology.group_classes();
  report.pred = correlation_matrix(ci.graphs, ci.pred_ptrs, targets, ontology);
  report.gt = correlation_matrix(ci.graphs, ci.gt_ptrs, targets, ontology);
  for (const auto& cls : targets)
    report.per_class.emplace_back(cls, frobenius_diff(report.pred, report.gt, cls));
  report.all = frobenius_diff(report.pred, report.gt);
  return report;
}

}  // namespace

void cmd_gen(const std::string& ontology_path, const std::string& generator_path,
             uint64_t seed, const std::string& out_corpus) {
  Ontology ontology = Ontology::load(ontology_path);
  GeneratorConfig config = GeneratorConfig::load(generator_path, ontology);
  config.seed = seed;
  GeneratedCorpus corpus = generate_corpus(config, ontology);
  for (size_t i = 0; i < corpus.graphs.size(); ++i) {
    auto violations = validate(corpus.graphs[i], &ontology);
    if (!violations.empty())
      throw Error("gen: generated graph " + std::to_string(i) +
                  " is invalid: " + violations.front());
  }
  write_corpus(out_corpus, corpus.graphs);
  write_sidecar(sidecar_path(out_corpus), corpus.entries);

  RunManifest m;
  m.subcommand = "gen";
  m.seed = seed;
  m.has_seed = true;
  m.set_config("graphs", std::to_string(config.corpus_size));
  m.set_config("rooms_min", std::to_string(config.rooms_min));
  m.set_config("rooms_max", std::to_string(config.rooms_max));
  m.set_config("augment_ratio", format_double(config.augment_ratio));
  m.set_config("archetypes", std::to_string(config.archetypes.size()));
  m.set_config("corpus_lines", std::to_string(corpus.graphs.size()));
  m.add_input(ontology_path);
  m.add_input(generator_path);
  m.add_output(out_corpus);
  m.add_output(sidecar_path(out_corpus));
  m.write(out_corpus);
}

void cmd_split(const std::string& corpus_path, const SplitFractions& fractions,
               uint64_t seed) {
  const std::string sc = sidecar_path(corpus_path);
  RunManifest m;
  m.subcommand = "split";
  m.seed = seed;
  m.has_seed = true;
  m.add_input(sc);

  auto entries = read_sidecar(sc);
  assign_splits(entries, fractions, seed);
  write_sidecar(sc, entries);

  int counts[3] = {0, 0, 0};
  for (const auto& e : entries) {
    if (e.split == Split::Train) ++counts[0];
    else if (e.split == Split::Val) ++counts[1];
    else if (e.split == Split::Test) ++counts[2];
  }
  m.set_config("train_frac", format_double(fractions.train));
  m.set_config("val_frac", format_double(fractions.val));
  m.set_config("test_frac", format_double(fractions.test));
  m.set_config("train_graphs", std::to_string(counts[0]));
  m.set_config("val_graphs", std::to_string(counts[1]));
  m.set_config("test_graphs", std::to_string(counts[2]));
  m.add_output(sc);
  m.write(sc);
}

void cmd_oracle_fit(const std::string& corpus_path, const std::string& ontology_path,
                    double alpha, const std::string& split, const std::string& out_table) {
  Ontology ontology = Ontology::load(ontology_path);
  LoadedCorpus corpus = load_corpus(corpus_path, split);
  std::vector<SceneGraph> graphs;
  for (int line : corpus.selected) graphs.push_back(corpus.graphs[line]);
  FrequencyTable table = fit_frequency_table(graphs, ontology, alpha);
  table.save(out_table);

  RunManifest m;
  m.subcommand = "oracle-fit";
  m.set_config("alpha", format_double(alpha));
  m.set_config("split", split);
  m.set_config("graphs_used", std::to_string(graphs.size()));
  m.add_input(ontology_path);
  m.add_input(corpus_path);
  m.add_input(sidecar_path(corpus_path));
  m.add_output(out_table);
  m.write(out_table);
}

void cmd_oracle_predict(const std::string& table_path, const std::string& ontology_path,
                        const std::string& corpus_path, const std::string& split,
                        const std::string& out_path) {
  Ontology ontology = Ontology::load(ontology_path);
  FrequencyTable table = FrequencyTable::load(table_path);
  if (table.ontology_hash != ontology.content_hash())
    throw Error("oracle-predict: table was fit against a different ontology");
  LoadedCorpus corpus = load_corpus(corpus_path, split);

  std::vector<const SceneGraph*> graphs;
  std::vector<NodeDistributions> dists;
  for (int line : corpus.selected) {
    const SceneGraph& g = corpus.graphs[line];
    graphs.push_back(&g);
    dists.push_back(oracle_predict(table, ontology, g));
  }
  write_file(out_path, render_predictions(corpus.selected, graphs, dists));

  RunManifest m;
  m.subcommand = "oracle-predict";
  m.set_config("split", split);
  m.set_config("graphs", std::to_string(graphs.size()));
  m.add_input(ontology_path);
  m.add_input(table_path);
  m.add_input(corpus_path);
  m.add_input(sidecar_path(corpus_path));
  m.add_output(out_path);
  m.write(out_path);
}

bool cmd_train(const std::string& corpus_path, const std::string& ontology_path,
               const std::string& model_config_path, uint64_t seed,
               const std::string& out_checkpoint) {
  Ontology ontology = Ontology::load(ontology_path);
  CeciConfig config = CeciConfig::load(model_config_path);
  config.seed = seed;
  LoadedCorpus corpus = load_corpus(corpus_path, "all");
  Dataset dataset = make_dataset(corpus.graphs, corpus.entries, ontology);

  Rng init_rng(derive_seed(seed, kInitStream));
  Model model(config, ontology, init_rng);
  TrainHistory history = train_model(model, dataset, ontology);
  model.save(out_checkpoint);

  std::string hist = "# ceci history v1\n";
  for (size_t e = 0; e < history.train_loss.size(); ++e) {
    hist += "epoch " + std::to_string(e + 1) + " train " +
            format_double(history.train_loss[e]) + " val ";
    hist += std::isnan(history.val_loss[e]) ? "-" : format_double(history.val_loss[e]);
    hist += "\n";
  }
  hist += "best " + std::to_string(history.best_epoch) + "\n";
  hist += "aborted " + std::string(history.aborted_non_finite ? "1" : "0") + "\n";
  write_file(out_checkpoint + ".history", hist);

  RunManifest m;
  m.subcommand = "train";
  m.seed = seed;
  m.has_seed = true;
  m.set_config("layers", std::to_string(config.layers));
  m.set_config("hidden", std::to_string(config.hidden));
  m.set_config("dropout", format_double(config.dropout));
  m.set_config("epochs", std::to_string(config.epochs));
  m.set_config("batch_size", std::to_string(config.batch_size));
  m.set_config("learning_rate", format_double(config.learning_rate));
  m.set_config("weight_decay", format_double(config.weight_decay));
  m.set_config("train_examples",
               std::to_string(dataset.split_view(Split::Train).size()));
  m.set_config("val_examples", std::to_string(dataset.split_view(Split::Val).size()));
  m.set_config("best_epoch", std::to_string(history.best_epoch));
  m.add_input(ontology_path);
  m.add_input(model_config_path);
  m.add_input(corpus_path);
  m.add_input(sidecar_path(corpus_path));
  m.add_output(out_checkpoint);
  m.add_output(out_checkpoint + ".history");
  m.write(out_checkpoint);
  return history.aborted_non_finite;
}

void cmd_predict(const std::string& checkpoint_path, const std::string& ontology_path,
                 const std::string& corpus_path, const std::string& split,
                 const std::string& out_path) {
  Ontology ontology = Ontology::load(ontology_path);
  Model model = Model::load(checkpoint_path);
  LoadedCorpus corpus = load_corpus(corpus_path, split);

  std::vector<const SceneGraph*> graphs;
  std::vector<NodeDistributions> dists;
  for (int line : corpus.selected) {
    const SceneGraph& g = corpus.graphs[line];
    SceneGraph stripped = strip_ground_truth(g, nullptr);
    graphs.push_back(&g);
    dists.push_back(model.predict(stripped, ontology));
  }
  write_file(out_path, render_predictions(corpus.selected, graphs, dists));

  RunManifest m;
  m.subcommand = "predict";
  m.set_config("split", split);
  m.set_config("graphs", std::to_string(graphs.size()));
  m.add_input(ontology_path);
  m.add_input(checkpoint_path);
  m.add_input(corpus_path);
  m.add_input(sidecar_path(corpus_path));
  m.add_output(out_path);
  m.write(out_path);
}

void cmd_eval(const std::string& checkpoint_path, const std::string& ontology_path,
              const std::string& corpus_path, const std::string& split,
              const std::string& out_report) {
  Ontology ontology = Ontology::load(ontology_path);
  Model model = Model::load(checkpoint_path);
  LoadedCorpus corpus = load_corpus(corpus_path, split);
  CorrelationInputs ci = predict_split(corpus, model, ontology);

  EvalReport report;
  report.samples = distance_samples(ci.graphs, ci.pred_ptrs, ci.gt_ptrs, ontology);
  for (auto& s : report.samples) s.graph_index = corpus.selected[s.graph_index];
  std::vector<double> w, e;
  for (const auto& s : report.samples) {
    w.push_back(s.wasserstein);
    e.push_back(s.energy);
  }
  report.wasserstein = moment_stats(w);
  report.energy = moment_stats(e);

  CorrelationReport corr = build_correlations(ci, ontology);
  report.pred_corr = std::move(corr.pred);
  report.gt_corr = std::move(corr.gt);
  report.frobenius_per_class = std::move(corr.per_class);
  report.frobenius_all = corr.all;

  write_file(out_report, render_report(report));

  RunManifest m;
  m.subcommand = "eval";
  m.set_config("split", split);
  m.set_config("graphs", std::to_string(ci.graphs.size()));
  m.set_config("nodes_scored", std::to_string(report.samples.size()));
  m.add_input(ontology_path);
  m.add_input(checkpoint_path);
  m.add_input(corpus_path);
  m.add_input(sidecar_path(corpus_path));
  m.add_output(out_report);
  m.write(out_report);
}

void cmd_correlate(const std::string& checkpoint_path, const std::string& ontology_path,
                   const std::string& corpus_path, const std::string& split,
                   const std::string& out_path) {
  Ontology ontology = Ontology::load(ontology_path);
  Model model = Model::load(checkpoint_path);
  LoadedCorpus corpus = load_corpus(corpus_path, split);
  CorrelationInputs ci = predict_split(corpus, model, ontology);
  CorrelationReport report = build_correlations(ci, ontology);
  write_file(out_path, render_correlations(report));

  RunManifest m;
  m.subcommand = "correlate";
  m.set_config("split", split);
  m.set_config("graphs", std::to_string(ci.graphs.size()));
  m.add_input(ontology_path);
  m.add_input(checkpoint_path);
  m.add_input(corpus_path);
  m.add_input(sidecar_path(corpus_path));
  m.add_output(out_path);
  m.write(out_path);
}

void cmd_export_heatmap(const std::string& report_path, const std::string& out_base) {
  std::string text = read_file(report_path);
  CorrelationMatrix pred, gt;
  if (text.rfind("# ceci report v1", 0) == 0) {
    EvalReport report = parse_report(text, report_path);
    pred = std::move(report.pred_corr);
    gt = std::move(report.gt_corr);
  } else {
    CorrelationReport report = parse_correlations(text, report_path);
    pred = std::move(report.pred);
    gt = std::move(report.gt);
  }
  const std::string pred_path = out_base + ".pred.csv";
  const std::string gt_path = out_base + ".gt.csv";
  write_file(pred_path, correlation_csv(pred));
  write_file(gt_path, correlation_csv(gt));

  RunManifest m;
  m.subcommand = "export-heatmap";
  m.add_input(report_path);
  m.add_output(pred_path);
  m.add_output(gt_path);
  m.write(pred_path);
}

int cmd_validate(const std::string& corpus_path, const std::string& ontology_path) {
  Ontology ontology = Ontology::load(ontology_path);
  auto graphs = read_corpus(corpus_path);
  int total = 0;
  for (size_t i = 0; i < graphs.size(); ++i) {
    for (const auto& v : validate(graphs[i], &ontology)) {
      std::cout << "graph " << i << ": " << v << "\n";
      ++total;
    }
  }
  if (total == 0)
    std::cout << "ok: " << graphs.size() << " graph(s), no violations\n";
  return total;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  if (!file_exists(path)) throw Error(path + ": pipeline config does not exist");
  PipelineConfig cfg;
  bool saw = false;
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };
  for (const auto& sec : parse_sections(read_file(path), path)) {
    std::string where = path + ":" + std::to_string(sec.header_line);
    if (sec.name != "pipeline") throw Error(where + ": unknown section [" + sec.name + "]");
    saw = true;
    for (size_t i = 0; i < sec.lines.size(); ++i) {
      const auto& t = sec.lines[i];
      std::string lw = path + ":" + std::to_string(sec.line_numbers[i]);
      if (t.size() != 2) throw Error(lw + ": expected 'key value'");
      if (t[0] == "ontology") cfg.ontology_path = resolve(t[1]);
      else if (t[0] == "generator") cfg.generator_path = resolve(t[1]);
      else if (t[0] == "model") cfg.model_path = resolve(t[1]);
      else if (t[0] == "out_dir") cfg.out_dir = t[1];
      else if (t[0] == "alpha") cfg.alpha = parse_double(t[1], lw);
      else if (t[0] == "train_frac") cfg.fractions.train = parse_double(t[1], lw);
      else if (t[0] == "val_frac") cfg.fractions.val = parse_double(t[1], lw);
      else if (t[0] == "test_frac") cfg.fractions.test = parse_double(t[1], lw);
      else if (t[0] == "eval_split") cfg.eval_split = t[1];
      else throw Error(lw + ": unknown pipeline key '" + t[0] + "'");
    }
  }
  if (!saw) throw Error(path + ": missing [pipeline] section");
  if (cfg.ontology_path.empty() || cfg.generator_path.empty() || cfg.model_path.empty() ||
      cfg.out_dir.empty())
    throw Error(path + ": pipeline config needs ontology, generator, model, out_dir");
  return cfg;
}

bool run_pipeline(const std::string& config_path, uint64_t seed,
                  const std::string& out_dir_override) {
  PipelineConfig cfg = PipelineConfig::load(config_path);
  if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
  std::filesystem::create_directories(cfg.out_dir);

  const std::string corpus = cfg.out_dir + "/corpus.txt";
  const std::string table = cfg.out_dir + "/oracle_table.txt";
  const std::string ckpt = cfg.out_dir + "/model.ckpt";
  const std::string report = cfg.out_dir + "/report.txt";
  const std::string correlations = cfg.out_dir + "/correlations.txt";

  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw Error(std::string("pipeline stage ") + name + ": " + e.what());
    }
  };

  stage("gen", [&] { cmd_gen(cfg.ontology_path, cfg.generator_path, seed, corpus); });
  stage("split", [&] { cmd_split(corpus, cfg.fractions, seed); });
  stage("oracle-fit",
        [&] { cmd_oracle_fit(corpus, cfg.ontology_path, cfg.alpha, "train", table); });
  bool aborted = stage("train", [&] {
    return cmd_train(corpus, cfg.ontology_path, cfg.model_path, seed, ckpt);
  });
  if (aborted) return true;
  stage("eval", [&] { cmd_eval(ckpt, cfg.ontology_path, corpus, cfg.eval_split, report); });
  stage("correlate", [&] {
    cmd_correlate(ckpt, cfg.ontology_path, corpus, cfg.eval_split, correlations);
  });
  return false;
}

}  // namespace ceci
