#include <cmath>

#include "ceci/oracle.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ceci;

namespace {

// committed 4-graph corpus; 6 rooms total, alpha 1 => denominators 6 + 2 = 8
constexpr double kD = 8.0;

bool close(double a, double b) { return std::fabs(a - b) <= 1e-12; }

bool close_vec(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!close(a[i], b[i])) return false;
  return true;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("room context lists distinct sibling labels plus the room") {
  auto graphs = th::toy_corpus();
  // graph 2: room 1 holds {mug, plate}, room 2 holds {shelf, mug}
  CHECK(room_context(graphs[1], 3) == std::vector<std::string>{"plate", "room"});
  CHECK(room_context(graphs[1], 4) == std::vector<std::string>{"mug", "room"});
  CHECK(room_context(graphs[1], 6) == std::vector<std::string>{"room", "shelf"});
  // graph 4 room 1 holds two mugs: the sibling keeps the shared class visible
  CHECK(room_context(graphs[3], 3) == std::vector<std::string>{"mug", "room"});
  // graph 1: a lone-class mug sees only its lamp sibling
  CHECK(room_context(graphs[0], 2) == std::vector<std::string>{"lamp", "room"});

  CHECK_THROWS_AS(room_context(graphs[0], 0), Error);
  CHECK_THROWS_AS(room_context(graphs[0], 1), Error);
  CHECK_THROWS_AS(room_context(graphs[0], 99), Error);
}

TEST_CASE("fitted table matches hand counts") {
  Ontology o = th::toy_ontology();
  FrequencyTable t = fit_frequency_table(th::toy_corpus(), o, 1.0);
  CHECK(t.room_count == 6);
  CHECK(t.alpha == 1.0);
  CHECK(t.slots == 5);
  CHECK(t.labels == o.class_labels());
  CHECK(t.ontology_hash == o.content_hash());

  auto p = [&](const std::string& l) { return t.p_label[o.label_index(l)]; };
  CHECK(close(p("mug"), 5.0 / kD));
  CHECK(close(p("plate"), 4.0 / kD));
  CHECK(close(p("lamp"), 3.0 / kD));
  CHECK(close(p("shelf"), 2.0 / kD));
  CHECK(close(p("room"), 7.0 / kD));
  CHECK(close(p("building"), 1.0 / kD));

  auto j = [&](int slot, const std::string& l) { return t.joint(slot, o.label_index(l)); };
  // mug slots against the mug column: room means 0.7/0.1/0.7/0.4 etc.
  CHECK(close(j(0, "mug"), (1.9 + 1.0) / kD));
  CHECK(close(j(1, "mug"), (0.65 + 1.0) / kD));
  CHECK(close(j(2, "mug"), (1.45 + 1.0) / kD));
  CHECK(close(j(3, "mug"), (0.75 + 1.0) / kD));
  CHECK(close(j(4, "mug"), (0.25 + 1.0) / kD));

  CHECK(close(j(0, "plate"), (0.1 + 1.0) / kD));
  CHECK(close(j(3, "plate"), (1.875 + 1.0) / kD));
  CHECK(close(j(4, "plate"), (1.125 + 1.0) / kD));

  CHECK(close(j(0, "lamp"), (0.7 + 1.0) / kD));
  CHECK(close(j(3, "lamp"), (0.625 + 1.0) / kD));

  CHECK(close(j(0, "room"), (1.9 + 1.0) / kD));
  CHECK(close(j(3, "room"), (1.875 + 1.0) / kD));
  CHECK(close(j(4, "room"), (1.125 + 1.0) / kD));

  for (int slot = 0; slot < 5; ++slot) {
    CHECK(close(j(slot, "building"), 1.0 / kD));
    CHECK(close(j(slot, "shelf"),
                (slot < 3 ? std::vector<double>{0.7, 0.2, 0.1}[slot] + 1.0 : 1.0) / kD));
  }
}

TEST_CASE("expectation prediction matches hand arithmetic") {
  Ontology o = th::toy_ontology();
  FrequencyTable t = fit_frequency_table(th::toy_corpus(), o, 1.0);

  // context of graph 1's mug: {lamp, room}
  auto pred = predict_expectation(t, o, "mug", {"lamp", "room"});
  // summed joints per slot: 0.575, 0.35625, 0.44375 (plus two alphas each)
  std::vector<double> scores{(0.2125 + 0.3625), (0.15 + 0.20625), (0.1375 + 0.30625)};
  double total = scores[0] + scores[1] + scores[2];
  CHECK(close_vec(pred, {scores[0] / total, scores[1] / total, scores[2] / total}));

  double sum = 0;
  for (double v : pred) sum += v;
  CHECK(close(sum, 1.0));

  // single-label context collapses to the normalized joint column
  auto solo = predict_expectation(t, o, "plate", {"room"});
  double a = 2.875 / kD, b = 2.125 / kD;
  CHECK(close_vec(solo, {a / (a + b), b / (a + b)}));
}

TEST_CASE("prediction is invariant to marginal rescaling") {
  Ontology o = th::toy_ontology();
  FrequencyTable t = fit_frequency_table(th::toy_corpus(), o, 1.0);
  auto base = predict_expectation(t, o, "mug", {"lamp", "room"});
  FrequencyTable scaled = t;
  for (double& v : scaled.p_label) v *= 2.0;
  auto again = predict_expectation(scaled, o, "mug", {"lamp", "room"});
  CHECK(close_vec(base, again));
}

TEST_CASE("prediction is monotone in the joint mass") {
  Ontology o = th::toy_ontology();
  FrequencyTable t = fit_frequency_table(th::toy_corpus(), o, 1.0);
  auto before = predict_expectation(t, o, "mug", {"lamp", "room"});
  FrequencyTable bumped = t;
  bumped.joint(0, o.label_index("lamp")) += 0.05;
  auto after = predict_expectation(bumped, o, "mug", {"lamp", "room"});
  CHECK(after[0] > before[0]);
  CHECK(after[1] < before[1]);
  CHECK(after[2] < before[2]);
}

TEST_CASE("per-node predictions cover exactly the group-owning objects") {
  Ontology o = th::toy_ontology();
  auto graphs = th::toy_corpus();
  FrequencyTable t = fit_frequency_table(graphs, o, 1.0);

  auto preds = oracle_predict(t, o, graphs[0]);
  REQUIRE(preds.size() == 1);  // the lamp owns no group
  CHECK(preds.count(2) == 1);
  CHECK(close_vec(preds.at(2), predict_expectation(t, o, "mug", {"lamp", "room"})));

  auto preds2 = oracle_predict(t, o, graphs[1]);
  CHECK(preds2.size() == 3);  // nodes 3, 4, 6; the shelf owns no group
  CHECK(preds2.count(3) == 1);
  CHECK(preds2.count(4) == 1);
  CHECK(preds2.count(6) == 1);
}

TEST_CASE("fit and prediction failure modes") {
  Ontology o = th::toy_ontology();
  auto graphs = th::toy_corpus();
  CHECK(th::throws_with([&] { fit_frequency_table({}, o, 1.0); }, "empty corpus"));
  CHECK(th::throws_with([&] { fit_frequency_table(graphs, o, 0.0); },
                        "alpha must be positive"));

  SceneGraph lone;
  GraphNode b;
  b.id = 0;
  b.layer = Layer::Building;
  b.class_label = kBuildingLabel;
  lone.nodes.push_back(b);
  CHECK(th::throws_with([&] { fit_frequency_table({lone}, o, 1.0); }, "no rooms"));

  FrequencyTable t = fit_frequency_table(graphs, o, 1.0);
  CHECK(th::throws_with([&] { predict_expectation(t, o, "lamp", {"room"}); },
                        "owns no affordance group"));
  CHECK(th::throws_with([&] { predict_expectation(t, o, "mug", {}); }, "empty context"));
  CHECK(th::throws_with([&] { predict_expectation(t, o, "mug", {"sofa"}); },
                        "not in table"));
}

TEST_CASE("table file round trip") {
  Ontology o = th::toy_ontology();
  FrequencyTable t = fit_frequency_table(th::toy_corpus(), o, 1.0);
  std::string dir = th::scratch_dir("oracle_table");
  t.save(dir + "/t.txt");
  FrequencyTable back = FrequencyTable::load(dir + "/t.txt");
  CHECK(back.alpha == t.alpha);
  CHECK(back.room_count == t.room_count);
  CHECK(back.labels == t.labels);
  CHECK(back.slots == t.slots);
  CHECK(back.ontology_hash == t.ontology_hash);
  CHECK(back.p_label == t.p_label);
  CHECK(back.joint == t.joint);

  back.save(dir + "/t2.txt");
  CHECK(th::same_bytes(dir + "/t.txt", dir + "/t2.txt"));

  CHECK_THROWS_AS(FrequencyTable::load(dir + "/missing.txt"), Error);
  write_file(dir + "/junk.txt", "hello\n");
  CHECK(th::throws_with([&] { FrequencyTable::load(dir + "/junk.txt"); },
                        "missing version line"));
  write_file(dir + "/trunc.txt", "# ceci freqtable v1\n[meta]\nalpha 1\n");
  CHECK(th::throws_with([&] { FrequencyTable::load(dir + "/trunc.txt"); },
                        "incomplete"));
}

}  // TEST_SUITE
