#include <algorithm>

#include "ceci/scene_graph.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ceci;

namespace {

GraphNode node(int id, Layer l, const std::string& cls, const std::string& sub = "",
               std::vector<double> gt = {}) {
  GraphNode n;
  n.id = id;
  n.layer = l;
  n.class_label = cls;
  n.subcategory = sub;
  n.gt_affordance = std::move(gt);
  return n;
}

// building 0, room 1, two objects below it
SceneGraph small_valid() {
  SceneGraph g;
  g.nodes = {node(0, Layer::Building, "building"), node(1, Layer::Rooms, "room"),
             node(2, Layer::Objects, "mug", "coffee_mug", {0.7, 0.2, 0.1}),
             node(3, Layer::Objects, "lamp")};
  g.edges = {{0, 1}, {1, 2}, {1, 3}};
  return g;
}

bool has_violation(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) {
    return s.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_SUITE("scene_graph") {

TEST_CASE("layer codes") {
  CHECK(layer_code(Layer::Building) == 'B');
  CHECK(layer_code(Layer::Rooms) == 'R');
  CHECK(layer_code(Layer::Objects) == 'O');
  CHECK(layer_from_code('R', "t") == Layer::Rooms);
  CHECK_THROWS_AS(layer_from_code('X', "t"), Error);
}

TEST_CASE("navigation helpers") {
  SceneGraph g = small_valid();
  REQUIRE(g.find_node(2) != nullptr);
  CHECK(g.find_node(2)->class_label == "mug");
  CHECK(g.find_node(9) == nullptr);
  CHECK(g.parent_of(2) == 1);
  CHECK(g.parent_of(1) == 0);
  CHECK(!g.parent_of(0).has_value());
  CHECK(g.children_of(1) == std::vector<int>{2, 3});
  CHECK(g.children_of(3).empty());
}

TEST_CASE("committed corpus lines are in canonical form") {
  auto graphs = th::toy_corpus();
  REQUIRE(graphs.size() == 4);
  std::string raw = read_file(th::data_path("toy_corpus.txt"));
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos < raw.size()) {
    size_t eol = raw.find('\n', pos);
    if (eol == std::string::npos) {
      lines.push_back(raw.substr(pos));
      break;
    }
    lines.push_back(raw.substr(pos, eol - pos));
    pos = eol + 1;
  }
  REQUIRE(lines.size() == graphs.size());
  Ontology o = th::toy_ontology();
  for (size_t i = 0; i < graphs.size(); ++i) {
    CHECK(serialize_graph(graphs[i]) == lines[i]);
    CHECK(validate(graphs[i], &o).empty());
  }
}

TEST_CASE("serialize round trip preserves every field") {
  SceneGraph g = small_valid();
  std::string line = serialize_graph(g);
  SceneGraph back = deserialize_graph(line, "t");
  CHECK(graphs_equal(g, back));
  CHECK(serialize_graph(back) == line);

  // node order in memory must not matter: canonical form sorts by id
  std::swap(g.nodes[0], g.nodes[3]);
  std::swap(g.edges[0], g.edges[2]);
  CHECK(serialize_graph(g) == line);
}

TEST_CASE("deserialize rejects malformed records") {
  CHECK_THROWS_AS(deserialize_graph("", "t"), Error);
  CHECK_THROWS_AS(deserialize_graph("x 1 ; n 0 B building", "t"), Error);
  CHECK_THROWS_AS(deserialize_graph("g 0", "t"), Error);
  CHECK(th::throws_with([] { deserialize_graph("g 2 ; n 0 B building", "t"); },
                        "declared 2 nodes, found 1"));
  CHECK_THROWS_AS(deserialize_graph("g 1 ; n 0 Q building", "t"), Error);
  CHECK_THROWS_AS(deserialize_graph("g 1 ; n 0 B building ; e 0", "t"), Error);
  CHECK_THROWS_AS(deserialize_graph("g 1 ; n 0 B building extra", "t"), Error);
  CHECK_THROWS_AS(
      deserialize_graph("g 1 ; n 0 O mug t 0", "t"), Error);
}

TEST_CASE("validate accepts the good graph") {
  Ontology o = th::toy_ontology();
  SceneGraph g = small_valid();
  CHECK(validate(g).empty());
  CHECK(validate(g, &o).empty());
}

TEST_CASE("validate reports structural violations") {
  SceneGraph g;
  CHECK(has_violation(validate(g), "graph is empty"));

  g = small_valid();
  g.nodes[3].id = 2;
  CHECK(has_violation(validate(g), "duplicate id"));

  g = small_valid();
  g.nodes[3].id = 7;
  CHECK(has_violation(validate(g), "id outside dense range"));

  g = small_valid();
  g.nodes[3] = node(3, Layer::Building, "building");
  g.edges.pop_back();
  CHECK(has_violation(validate(g), "multiple roots"));

  g = small_valid();
  g.nodes[0].layer = Layer::Rooms;
  auto v = validate(g);
  CHECK(has_violation(v, "no building node"));

  g = small_valid();
  g.edges[1] = {0, 2};  // building -> object
  CHECK(has_violation(validate(g), "layer skip (B->O)"));

  g = small_valid();
  g.edges.pop_back();  // lamp loses its parent
  CHECK(has_violation(validate(g), "node 3: orphan"));

  g = small_valid();
  g.nodes.push_back(node(4, Layer::Rooms, "room"));
  g.edges.push_back({0, 4});
  g.edges.push_back({4, 2});  // mug gains a second parent
  CHECK(has_violation(validate(g), "node 2: multiple parents"));

  g = small_valid();
  g.edges.push_back({1, 2});
  CHECK(has_violation(validate(g), "edge 1->2: duplicate"));

  g = small_valid();
  g.edges.push_back({2, 2});
  CHECK(has_violation(validate(g), "self-loop"));

  g = small_valid();
  g.edges.push_back({1, 9});
  CHECK(has_violation(validate(g), "endpoint does not exist"));
}

TEST_CASE("validate reports annotation violations") {
  Ontology o = th::toy_ontology();

  SceneGraph g = small_valid();
  g.nodes[2].class_label = "room";
  CHECK(has_violation(validate(g), "reserved label"));

  g = small_valid();
  g.nodes[1].class_label = "hall";
  CHECK(has_violation(validate(g), "must carry label 'room'"));

  g = small_valid();
  g.nodes[1].gt_affordance = {1.0};
  CHECK(has_violation(validate(g), "gt affordance on non-object node"));

  g = small_valid();
  g.nodes[2].gt_affordance = {0.7, 0.2, 0.2};
  CHECK(has_violation(validate(g), "does not sum to 1"));

  g = small_valid();
  g.nodes[2].gt_affordance = {1.5, -0.5, 0.0};
  CHECK(has_violation(validate(g), "negative gt affordance"));

  g = small_valid();
  g.nodes[3].class_label = "torch";
  CHECK(has_violation(validate(g, &o), "unknown label 'torch'"));
  CHECK(validate(g).empty());  // structural pass has no vocabulary

  g = small_valid();
  g.nodes[2].subcategory = "thermos";
  CHECK(has_violation(validate(g, &o), "unknown subcategory"));

  g = small_valid();
  g.nodes[2].gt_affordance = {0.5, 0.5};
  CHECK(has_violation(validate(g, &o), "gt affordance length 2 != group size 3"));

  g = small_valid();
  g.nodes[3].gt_affordance = {1.0};
  CHECK(has_violation(validate(g, &o), "owns no group"));
}

TEST_CASE("encode_features is one-hot in label order") {
  Ontology o = th::toy_ontology();
  SceneGraph g = small_valid();
  Matrix f = encode_features(g, o);
  REQUIRE(f.rows() == 4);
  REQUIRE(f.cols() == 6);
  for (int r = 0; r < f.rows(); ++r) {
    double sum = 0;
    for (int c = 0; c < f.cols(); ++c) sum += f(r, c);
    CHECK(sum == 1.0);
  }
  CHECK(f(0, o.label_index("building")) == 1.0);
  CHECK(f(1, o.label_index("room")) == 1.0);
  CHECK(f(2, o.label_index("mug")) == 1.0);
  CHECK(f(3, o.label_index("lamp")) == 1.0);

  g.nodes[3].class_label = "torch";
  CHECK_THROWS_AS(encode_features(g, o), Error);
}

TEST_CASE("corpus file round trip") {
  std::string dir = th::scratch_dir("sg_corpus");
  auto graphs = th::toy_corpus();
  write_corpus(dir + "/c.txt", graphs);
  CHECK(read_file(dir + "/c.txt") == read_file(th::data_path("toy_corpus.txt")));
  auto back = read_corpus(dir + "/c.txt");
  REQUIRE(back.size() == graphs.size());
  for (size_t i = 0; i < graphs.size(); ++i) CHECK(graphs_equal(graphs[i], back[i]));

  CHECK_THROWS_AS(read_corpus(dir + "/missing.txt"), Error);
  write_file(dir + "/bad.txt", "g 1 ; n 0 B building\nnot a graph\n");
  CHECK(th::throws_with([&] { read_corpus(dir + "/bad.txt"); }, "bad.txt:2"));
}

}  // TEST_SUITE
