#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "ceci/manifest.hpp"
#include "ceci/pipeline.hpp"
#include "ceci/text.hpp"

int main(int argc, char** argv) {
  CLI::App app{"commonsense affordance distributions on layered 3D scene graphs"};
  app.set_version_flag("--version", ceci::kToolVersion);
  app.require_subcommand(1);

  std::string ontology, config, corpus, table, model, report, out;
  std::string split;
  uint64_t seed = 0;
  double alpha = 1.0;
  ceci::SplitFractions fractions;
  std::function<int()> action;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus with augmentation");
  gen->add_option("--ontology", ontology, "ontology config path")->required();
  gen->add_option("--config", config, "generator config path")->required();
  gen->add_option("--seed", seed, "rng seed")->required();
  gen->add_option("--out", out, "corpus output path")->required();
  gen->callback([&] {
    action = [&] {
      ceci::cmd_gen(ontology, config, seed, out);
      return 0;
    };
  });

  auto* split_cmd = app.add_subcommand("split", "Assign train/val/test splits by base graph");
  split_cmd->add_option("--corpus", corpus, "corpus path (sidecar is rewritten)")->required();
  split_cmd->add_option("--seed", seed, "rng seed")->required();
  split_cmd->add_option("--train-frac", fractions.train, "train fraction")
      ->default_val(0.8);
  split_cmd->add_option("--val-frac", fractions.val, "validation fraction")
      ->default_val(0.1);
  split_cmd->add_option("--test-frac", fractions.test, "test fraction")->default_val(0.1);
  split_cmd->callback([&] {
    action = [&] {
      ceci::cmd_split(corpus, fractions, seed);
      return 0;
    };
  });

  auto* ofit = app.add_subcommand("oracle-fit", "Fit the co-occurrence frequency table");
  ofit->add_option("--corpus", corpus, "corpus path")->required();
  ofit->add_option("--ontology", ontology, "ontology config path")->required();
  ofit->add_option("--alpha", alpha, "smoothing constant")->default_val(1.0);
  ofit->add_option("--split", split, "split to fit on (train|val|test|all)")
      ->default_val("train");
  ofit->add_option("--out", out, "table output path")->required();
  ofit->callback([&] {
    action = [&] {
      ceci::cmd_oracle_fit(corpus, ontology, alpha, split, out);
      return 0;
    };
  });

  auto* opred = app.add_subcommand("oracle-predict",
                                   "Expectation-baseline predictions from a fitted table");
  opred->add_option("--table", table, "frequency table path")->required();
  opred->add_option("--ontology", ontology, "ontology config path")->required();
  opred->add_option("--corpus", corpus, "corpus path")->required();
  opred->add_option("--split", split, "split to predict on")->default_val("all");
  opred->add_option("--out", out, "predictions output path")->required();
  opred->callback([&] {
    action = [&] {
      ceci::cmd_oracle_predict(table, ontology, corpus, split, out);
      return 0;
    };
  });

  auto* train = app.add_subcommand("train", "Train the model on a corpus");
  train->add_option("--corpus", corpus, "corpus path")->required();
  train->add_option("--ontology", ontology, "ontology config path")->required();
  train->add_option("--config", config, "model config path")->required();
  train->add_option("--seed", seed, "rng seed")->required();
  train->add_option("--out", out, "checkpoint output path")->required();
  train->callback([&] {
    action = [&] {
      if (ceci::cmd_train(corpus, ontology, config, seed, out)) {
        std::cerr << "error: training aborted on a non-finite loss; checkpoint holds "
                     "the last finite state\n";
        return 1;
      }
      return 0;
    };
  });

  auto* predict = app.add_subcommand("predict", "Model predictions for a corpus");
  predict->add_option("--model", model, "checkpoint path")->required();
  predict->add_option("--ontology", ontology, "ontology config path")->required();
  predict->add_option("--corpus", corpus, "corpus path")->required();
  predict->add_option("--split", split, "split to predict on")->default_val("all");
  predict->add_option("--out", out, "predictions output path")->required();
  predict->callback([&] {
    action = [&] {
      ceci::cmd_predict(model, ontology, corpus, split, out);
      return 0;
    };
  });

  auto* eval = app.add_subcommand("eval", "Distances, moments, correlations vs ground truth");
  eval->add_option("--model", model, "checkpoint path")->required();
  eval->add_option("--ontology", ontology, "ontology config path")->required();
  eval->add_option("--corpus", corpus, "corpus path")->required();
  eval->add_option("--split", split, "split to evaluate")->default_val("test");
  eval->add_option("--out", out, "report output path")->required();
  eval->callback([&] {
    action = [&] {
      ceci::cmd_eval(model, ontology, corpus, split, out);
      return 0;
    };
  });

  auto* correlate = app.add_subcommand("correlate", "Correlation matrices and Frobenius norms");
  correlate->add_option("--model", model, "checkpoint path")->required();
  correlate->add_option("--ontology", ontology, "ontology config path")->required();
  correlate->add_option("--corpus", corpus, "corpus path")->required();
  correlate->add_option("--split", split, "split to correlate")->default_val("test");
  correlate->add_option("--out", out, "correlations output path")->required();
  correlate->callback([&] {
    action = [&] {
      ceci::cmd_correlate(model, ontology, corpus, split, out);
      return 0;
    };
  });

  auto* heatmap = app.add_subcommand("export-heatmap", "CSV matrices for external plotting");
  heatmap->add_option("--report", report, "report or correlations file")->required();
  heatmap->add_option("--out", out, "output basename (writes <out>.pred.csv, <out>.gt.csv)")
      ->required();
  heatmap->callback([&] {
    action = [&] {
      ceci::cmd_export_heatmap(report, out);
      return 0;
    };
  });

  auto* pipeline = app.add_subcommand("pipeline", "gen, split, oracle-fit, train, eval, correlate");
  pipeline->add_option("--config", config, "pipeline config path")->required();
  pipeline->add_option("--seed", seed, "rng seed")->required();
  pipeline->add_option("--out", out, "override the config's out_dir");
  pipeline->callback([&] {
    action = [&] {
      if (ceci::run_pipeline(config, seed, out)) {
        std::cerr << "error: training aborted on a non-finite loss; later stages "
                     "skipped\n";
        return 1;
      }
      return 0;
    };
  });

  auto* validate = app.add_subcommand("validate", "Check corpus invariants against an ontology");
  validate->add_option("--corpus", corpus, "corpus path")->required();
  validate->add_option("--ontology", ontology, "ontology config path")->required();
  validate->callback([&] {
    action = [&] { return ceci::cmd_validate(corpus, ontology) == 0 ? 0 : 1; };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action();
  } catch (const ceci::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
