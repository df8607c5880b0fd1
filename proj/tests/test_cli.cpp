#include "ceci/metrics.hpp"
#include "ceci/model.hpp"
#include "ceci/oracle.hpp"
#include "ceci/text.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ceci;

namespace {

const char* kMiniModelCfg =
    "[model]\n"
    "layers 2\n"
    "hidden 6\n"
    "dropout 0.2\n"
    "epochs 8\n"
    "batch_size 4\n"
    "learning_rate 0.01\n"
    "weight_decay 5e-6\n";

struct Workspace {
  std::string dir;
  std::string ontology = th::data_path("toy_ontology.cfg");
  std::string generator = th::data_path("golden_generator.cfg");
  std::string corpus;
  std::string model_cfg;

  explicit Workspace(const std::string& tag) : dir(th::scratch_dir(tag)) {
    corpus = dir + "/corpus.txt";
    model_cfg = dir + "/model.cfg";
    write_file(model_cfg, kMiniModelCfg);
  }

  th::CliResult gen(uint64_t seed) {
    return th::run_cli("gen --ontology " + ontology + " --config " + generator +
                       " --seed " + std::to_string(seed) + " --out " + corpus);
  }

  th::CliResult split() {
    return th::run_cli("split --corpus " + corpus +
                       " --seed 2 --train-frac 0.6 --val-frac 0.2 --test-frac 0.2");
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("version and usage errors") {
  auto v = th::run_cli("--version");
  CHECK(v.exit_code == 0);
  CHECK(v.out.find("ceci 1.0.0") != std::string::npos);

  CHECK(th::run_cli("").exit_code == 2);
  CHECK(th::run_cli("frobnicate").exit_code == 2);
  CHECK(th::run_cli("gen --bogus-flag 1").exit_code == 2);
  CHECK(th::run_cli("gen").exit_code == 2);  // required options missing

  auto help = th::run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("gen") != std::string::npos);
}

TEST_CASE("missing inputs exit with a diagnostic") {
  Workspace ws("cli_missing");
  auto r = th::run_cli("gen --ontology " + ws.dir + "/nope.cfg --config " +
                       ws.generator + " --seed 1 --out " + ws.corpus);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(r.err.find("nope.cfg") != std::string::npos);
}

TEST_CASE("gen is deterministic and writes a manifest") {
  Workspace a("cli_gen_a"), b("cli_gen_b");
  CHECK(a.gen(9).exit_code == 0);
  CHECK(b.gen(9).exit_code == 0);
  CHECK(th::same_bytes(a.corpus, b.corpus));
  CHECK(th::same_bytes(a.corpus + ".sidecar", b.corpus + ".sidecar"));
  CHECK(th::same_bytes(a.corpus, th::data_path("golden_corpus.txt")));

  std::string manifest = read_file(a.corpus + ".manifest");
  CHECK(manifest.rfind("# ceci manifest v1", 0) == 0);
  CHECK(manifest.find("subcommand gen") != std::string::npos);
  CHECK(manifest.find("seed 9") != std::string::npos);

  // a different seed yields a different corpus
  Workspace c("cli_gen_c");
  CHECK(c.gen(10).exit_code == 0);
  CHECK(!th::same_bytes(a.corpus, c.corpus));
}

TEST_CASE("validate reports violations and exit codes") {
  Workspace ws("cli_validate");
  REQUIRE(ws.gen(9).exit_code == 0);
  auto ok = th::run_cli("validate --corpus " + ws.corpus + " --ontology " + ws.ontology);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("ok: 11 graph(s), no violations") != std::string::npos);

  std::string text = read_file(ws.corpus);
  size_t at = text.find("0.7 0.2 0.1");
  REQUIRE(at != std::string::npos);
  text.replace(at, 11, "0.7 0.2 0.4");
  write_file(ws.corpus, text);
  auto bad = th::run_cli("validate --corpus " + ws.corpus + " --ontology " + ws.ontology);
  CHECK(bad.exit_code == 1);
  CHECK(bad.out.find("does not sum to 1") != std::string::npos);
}

TEST_CASE("stage chain produces parseable artifacts") {
  Workspace ws("cli_chain");
  REQUIRE(ws.gen(9).exit_code == 0);
  REQUIRE(ws.split().exit_code == 0);

  std::string sidecar = read_file(ws.corpus + ".sidecar");
  CHECK(sidecar.find(" train") != std::string::npos);
  CHECK(sidecar.find(" val") != std::string::npos);
  CHECK(sidecar.find(" test") != std::string::npos);

  std::string table = ws.dir + "/table.txt";
  auto fit = th::run_cli("oracle-fit --corpus " + ws.corpus + " --ontology " +
                         ws.ontology + " --split train --out " + table);
  REQUIRE(fit.exit_code == 0);
  FrequencyTable ft = FrequencyTable::load(table);
  CHECK(ft.slots == 5);
  CHECK(ft.room_count > 0);

  std::string opred = ws.dir + "/oracle_preds.txt";
  auto op = th::run_cli("oracle-predict --table " + table + " --ontology " + ws.ontology +
                        " --corpus " + ws.corpus + " --split test --out " + opred);
  REQUIRE(op.exit_code == 0);
  CHECK(read_file(opred).rfind("# ceci predictions v1", 0) == 0);

  std::string ckpt = ws.dir + "/model.ckpt";
  auto tr = th::run_cli("train --corpus " + ws.corpus + " --ontology " + ws.ontology +
                        " --config " + ws.model_cfg + " --seed 3 --out " + ckpt);
  REQUIRE(tr.exit_code == 0);
  CHECK(file_exists(ckpt));
  std::string history = read_file(ckpt + ".history");
  CHECK(history.rfind("# ceci history v1", 0) == 0);
  CHECK(history.find("epoch 1 ") != std::string::npos);
  CHECK(history.find("epoch 8 ") != std::string::npos);
  CHECK(history.find("best ") != std::string::npos);
  CHECK(history.find("aborted 0") != std::string::npos);

  std::string preds = ws.dir + "/preds.txt";
  auto pr = th::run_cli("predict --model " + ckpt + " --ontology " + ws.ontology +
                        " --corpus " + ws.corpus + " --split test --out " + preds);
  REQUIRE(pr.exit_code == 0);
  CHECK(read_file(preds).rfind("# ceci predictions v1", 0) == 0);

  std::string report = ws.dir + "/report.txt";
  auto ev = th::run_cli("eval --model " + ckpt + " --ontology " + ws.ontology +
                        " --corpus " + ws.corpus + " --split test --out " + report);
  REQUIRE(ev.exit_code == 0);
  EvalReport er = parse_report(read_file(report), report);
  CHECK(!er.samples.empty());
  CHECK(er.wasserstein.mean.has_value());

  std::string correlations = ws.dir + "/correlations.txt";
  auto co = th::run_cli("correlate --model " + ckpt + " --ontology " + ws.ontology +
                        " --corpus " + ws.corpus + " --split test --out " + correlations);
  REQUIRE(co.exit_code == 0);
  CorrelationReport cr = parse_correlations(read_file(correlations), correlations);
  CHECK(cr.pred.rows.size() == 5);

  auto hm = th::run_cli("export-heatmap --report " + report + " --out " + ws.dir + "/hm");
  REQUIRE(hm.exit_code == 0);
  CHECK(read_file(ws.dir + "/hm.pred.csv")
            .rfind("class,affordance,mug,plate,lamp,shelf,room,building", 0) == 0);
  CHECK(file_exists(ws.dir + "/hm.gt.csv"));

  auto hm2 = th::run_cli("export-heatmap --report " + correlations + " --out " +
                         ws.dir + "/hm2");
  CHECK(hm2.exit_code == 0);
  CHECK(file_exists(ws.dir + "/hm2.pred.csv"));

  auto junk = th::run_cli("export-heatmap --report " + ws.corpus + " --out " +
                          ws.dir + "/hm3");
  CHECK(junk.exit_code == 1);
}

TEST_CASE("training without a train split fails cleanly") {
  Workspace ws("cli_no_train");
  REQUIRE(ws.gen(9).exit_code == 0);
  auto r = th::run_cli("split --corpus " + ws.corpus +
                       " --seed 2 --train-frac 0 --val-frac 0 --test-frac 1");
  REQUIRE(r.exit_code == 0);
  auto tr = th::run_cli("train --corpus " + ws.corpus + " --ontology " + ws.ontology +
                        " --config " + ws.model_cfg + " --seed 3 --out " + ws.dir +
                        "/m.ckpt");
  CHECK(tr.exit_code == 1);
  CHECK(tr.err.find("empty split") != std::string::npos);
}

TEST_CASE("training aborts on a non-finite loss but keeps a checkpoint") {
  Workspace ws("cli_abort");
  REQUIRE(ws.gen(9).exit_code == 0);
  REQUIRE(ws.split().exit_code == 0);
  write_file(ws.model_cfg,
             "[model]\nlayers 2\nhidden 6\ndropout 0\nepochs 6\nbatch_size 16\n"
             "learning_rate 1e200\nweight_decay 0\n");
  std::string ckpt = ws.dir + "/m.ckpt";
  auto tr = th::run_cli("train --corpus " + ws.corpus + " --ontology " + ws.ontology +
                        " --config " + ws.model_cfg + " --seed 3 --out " + ckpt);
  CHECK(tr.exit_code == 1);
  CHECK(tr.err.find("aborted on a non-finite loss") != std::string::npos);
  CHECK(file_exists(ckpt));
  Model m = Model::load(ckpt);  // the kept state is loadable and finite
  auto graphs = read_corpus(ws.corpus);
  Ontology o = th::toy_ontology();
  for (const auto& [id, dist] : m.predict(graphs[0], o))
    for (double v : dist) CHECK(std::isfinite(v));
  std::string history = read_file(ckpt + ".history");
  CHECK(history.find("aborted 1") != std::string::npos);
}

TEST_CASE("pipeline runs end to end twice with identical bytes") {
  Workspace ws("cli_pipeline");
  std::string pipeline_cfg = ws.dir + "/pipeline.cfg";
  write_file(pipeline_cfg, "[pipeline]\nontology " + ws.ontology + "\ngenerator " +
                               ws.generator + "\nmodel " + ws.model_cfg +
                               "\nout_dir " + ws.dir +
                               "/run_a\nalpha 1\ntrain_frac 0.6\nval_frac 0.2\n"
                               "test_frac 0.2\neval_split test\n");
  auto a = th::run_cli("pipeline --config " + pipeline_cfg + " --seed 4");
  REQUIRE(a.exit_code == 0);
  auto b = th::run_cli("pipeline --config " + pipeline_cfg + " --seed 4 --out " +
                       ws.dir + "/run_b");
  REQUIRE(b.exit_code == 0);

  for (const char* f : {"corpus.txt", "corpus.txt.sidecar", "oracle_table.txt",
                        "model.ckpt", "model.ckpt.history", "report.txt",
                        "correlations.txt"}) {
    CAPTURE(f);
    CHECK(th::same_bytes(ws.dir + "/run_a/" + f, ws.dir + "/run_b/" + f));
  }

  // a different seed changes the corpus
  auto c = th::run_cli("pipeline --config " + pipeline_cfg + " --seed 5 --out " +
                       ws.dir + "/run_c");
  REQUIRE(c.exit_code == 0);
  CHECK(!th::same_bytes(ws.dir + "/run_a/corpus.txt", ws.dir + "/run_c/corpus.txt"));
}

}  // TEST_SUITE
