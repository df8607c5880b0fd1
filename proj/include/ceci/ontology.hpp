#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ceci/text.hpp"

namespace ceci {

inline constexpr const char* kRoomLabel = "room";
inline constexpr const char* kBuildingLabel = "building";

struct SlotRange {
  int begin = 0;
  int end = 0;  // half-open
  int size() const { return end - begin; }
  bool operator==(const SlotRange&) const = default;
};

struct Subcategory {
  std::string name;
  std::vector<double> weights;  // raw nonnegative annotation
  std::vector<double> gt;       // normalized distribution
};

// Semantic-class vocabulary plus the affordance schema. Immutable after
// load; safe for concurrent reads.
class Ontology {
 public:
  static Ontology load(const std::string& path);
  static Ontology from_config_text(std::string_view text, const std::string& origin);

  // Canonical text form; load(save_text()) reproduces the ontology.
  std::string save_text() const;

  // Object classes in config order, then "room", then "building".
  const std::vector<std::string>& class_labels() const { return labels_; }
  int vocab_size() const { return static_cast<int>(labels_.size()); }
  int object_class_count() const { return vocab_size() - 2; }

  bool has_label(const std::string& label) const;
  int label_index(const std::string& label) const;  // throws on unknown

  // Null when the class owns no affordance group.
  const std::vector<std::string>* affordance_group(const std::string& cls) const;

  // nullopt for classes without a group; throws on unknown class.
  std::optional<SlotRange> slot_range(const std::string& cls) const;

  int total_slots() const { return total_slots_; }

  const std::vector<Subcategory>* subcategories(const std::string& cls) const;
  const std::vector<double>& gt_vector(const std::string& cls,
                                       const std::string& subcat) const;

  // Classes that own an affordance group, in label order.
  std::vector<std::string> group_classes() const;

  uint64_t content_hash() const { return fnv1a64(save_text()); }

  bool operator==(const Ontology& other) const;

 private:
  std::vector<std::string> labels_;
  std::map<std::string, int> label_index_;
  std::map<std::string, std::vector<std::string>> groups_;
  std::map<std::string, std::vector<Subcategory>> subcats_;
  std::map<std::string, SlotRange> slots_;
  int total_slots_ = 0;

  void finalize(const std::string& origin);
};

}  // namespace ceci
