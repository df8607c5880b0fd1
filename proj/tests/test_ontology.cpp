#include <algorithm>

#include "ceci/ontology.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ceci;

namespace {

Ontology from_text(const std::string& text) {
  return Ontology::from_config_text(text, "inline");
}

const char* kToyText = R"(
[classes]
mug
plate

[group mug]
lift pour
[subcategories mug]
espresso 1 3
)";

}  // namespace

TEST_SUITE("ontology") {

TEST_CASE("toy schema loads with the documented layout") {
  Ontology o = th::toy_ontology();
  CHECK(o.class_labels() ==
        std::vector<std::string>{"mug", "plate", "lamp", "shelf", "room", "building"});
  CHECK(o.vocab_size() == 6);
  CHECK(o.object_class_count() == 4);
  CHECK(o.total_slots() == 5);

  REQUIRE(o.slot_range("mug").has_value());
  CHECK(*o.slot_range("mug") == SlotRange{0, 3});
  CHECK(*o.slot_range("plate") == SlotRange{3, 5});
  CHECK(!o.slot_range("lamp").has_value());
  CHECK(!o.slot_range("shelf").has_value());
  CHECK_THROWS_AS(o.slot_range("spoon"), Error);

  REQUIRE(o.affordance_group("mug") != nullptr);
  CHECK(*o.affordance_group("mug") == std::vector<std::string>{"lift", "pour", "store"});
  CHECK(o.affordance_group("lamp") == nullptr);
  CHECK(o.group_classes() == std::vector<std::string>{"mug", "plate"});

  CHECK(o.gt_vector("mug", "coffee_mug") == std::vector<double>{0.7, 0.2, 0.1});
  CHECK(o.gt_vector("mug", "vase") == std::vector<double>{0.1, 0.1, 0.8});
  CHECK(o.gt_vector("plate", "dinner_plate") == std::vector<double>{0.75, 0.25});
  CHECK_THROWS_AS(o.gt_vector("mug", "nope"), Error);
  CHECK_THROWS_AS(o.gt_vector("lamp", "x"), Error);

  REQUIRE(o.subcategories("mug") != nullptr);
  CHECK(o.subcategories("mug")->size() == 2);
  CHECK(o.subcategories("shelf") == nullptr);
}

TEST_CASE("labels index the vocabulary") {
  Ontology o = th::toy_ontology();
  CHECK(o.has_label("mug"));
  CHECK(o.has_label("room"));
  CHECK(!o.has_label("sofa"));
  CHECK(o.label_index("mug") == 0);
  CHECK(o.label_index("room") == 4);
  CHECK(o.label_index("building") == 5);
  CHECK_THROWS_AS(o.label_index("sofa"), Error);
}

TEST_CASE("save_text round trips exactly") {
  Ontology o = th::toy_ontology();
  std::string text = o.save_text();
  Ontology back = Ontology::from_config_text(text, "roundtrip");
  CHECK(o == back);
  CHECK(back.save_text() == text);
  CHECK(o.content_hash() == back.content_hash());

  Ontology other = from_text(kToyText);
  CHECK(other.content_hash() != o.content_hash());
}

TEST_CASE("ground truth is the normalized annotation") {
  Ontology o = from_text(kToyText);
  CHECK(o.gt_vector("mug", "espresso") == std::vector<double>{0.25, 0.75});
}

TEST_CASE("schema violations are rejected") {
  CHECK_THROWS_AS(from_text("[classes]\nmug\nmug\n"), Error);
  CHECK_THROWS_AS(from_text("[classes]\nroom\n"), Error);
  CHECK_THROWS_AS(from_text("[classes]\nbuilding\n"), Error);
  CHECK_THROWS_AS(from_text("[classes]\nbad name!\n"), Error);
  CHECK_THROWS_AS(from_text("[classes]\n"), Error);
  CHECK_THROWS_AS(from_text("[group mug]\nlift\n"), Error);

  // group for a class not in [classes]
  CHECK_THROWS_AS(from_text("[classes]\nmug\n[group cup]\nlift\n"), Error);
  // subcategories without a group
  CHECK_THROWS_AS(from_text("[classes]\nmug\n[subcategories mug]\na 1\n"), Error);
  // wrong weight arity
  CHECK_THROWS_AS(
      from_text("[classes]\nmug\n[group mug]\nlift pour\n[subcategories mug]\na 1\n"),
      Error);
  // negative weight
  CHECK_THROWS_AS(
      from_text("[classes]\nmug\n[group mug]\nlift pour\n[subcategories mug]\na 1 -1\n"),
      Error);
  CHECK(th::throws_with(
      [] {
        from_text("[classes]\nmug\n[group mug]\nlift pour\n[subcategories mug]\na 0 0\n");
      },
      "unnormalizable all-zero annotation"));
  // duplicate affordance / subcategory names
  CHECK_THROWS_AS(from_text("[classes]\nmug\n[group mug]\nlift lift\n"), Error);
  CHECK_THROWS_AS(
      from_text("[classes]\nmug\n[group mug]\nlift pour\n"
                "[subcategories mug]\na 1 1\na 2 1\n"),
      Error);
  CHECK_THROWS_AS(from_text("[classes]\nmug\n[bogus]\n"), Error);
}

TEST_CASE("full schema matches the published study") {
  Ontology o = Ontology::load(th::config_path("default_ontology.cfg"));
  CHECK(o.object_class_count() == 45);
  CHECK(o.vocab_size() == 47);

  auto groups = o.group_classes();
  CHECK(groups == std::vector<std::string>{"chair", "fabric", "container_solids",
                                           "container_liquids"});
  REQUIRE(o.affordance_group("chair") != nullptr);
  CHECK(*o.affordance_group("chair") ==
        std::vector<std::string>{"carried", "dragged", "stepped"});
  CHECK(o.total_slots() == 12);

  // office_chair annotations put all mass on "dragged".
  auto gt = o.gt_vector("chair", "office_chair");
  REQUIRE(gt.size() == 3);
  CHECK(gt == std::vector<double>{0.0, 1.0, 0.0});
  size_t arg = std::max_element(gt.begin(), gt.end()) - gt.begin();
  CHECK((*o.affordance_group("chair"))[arg] == "dragged");
}

TEST_CASE("desk schema is a strict subset of the full one") {
  Ontology desk = Ontology::load(th::config_path("desk_ontology.cfg"));
  Ontology full = Ontology::load(th::config_path("default_ontology.cfg"));
  CHECK(desk.object_class_count() == 8);
  for (const auto& cls : desk.group_classes()) {
    REQUIRE(full.affordance_group(cls) != nullptr);
    CHECK(*desk.affordance_group(cls) == *full.affordance_group(cls));
  }
}

}  // TEST_SUITE
