#include "ceci/ontology.hpp"

#include <algorithm>
#include <cmath>

namespace ceci {

namespace {

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

Ontology Ontology::load(const std::string& path) {
  if (!file_exists(path)) throw Error(path + ": ontology file does not exist");
  return from_config_text(read_file(path), path);
}

Ontology Ontology::from_config_text(std::string_view text, const std::string& origin) {
  Ontology o;
  auto sections = parse_sections(text, origin);

  bool saw_classes = false;
  for (const auto& sec : sections) {
    std::string where = origin + ":" + std::to_string(sec.header_line);
    if (sec.name == "classes") {
      if (saw_classes) throw Error(where + ": duplicate [classes] section");
      saw_classes = true;
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        for (const auto& label : sec.lines[i]) {
          if (!valid_name(label))
            throw Error(origin + ":" + std::to_string(sec.line_numbers[i]) +
                        ": invalid class label '" + label + "'");
          if (label == kRoomLabel || label == kBuildingLabel)
            throw Error(origin + ":" + std::to_string(sec.line_numbers[i]) +
                        ": '" + label + "' is reserved and added automatically");
          if (o.label_index_.count(label))
            throw Error(origin + ":" + std::to_string(sec.line_numbers[i]) +
                        ": duplicate class label '" + label + "'");
          o.label_index_[label] = static_cast<int>(o.labels_.size());
          o.labels_.push_back(label);
        }
      }
    } else if (sec.name == "group") {
      if (sec.args.size() != 1)
        throw Error(where + ": [group] takes exactly one class label");
      const std::string& cls = sec.args[0];
      if (!o.label_index_.count(cls))
        throw Error(where + ": group for unknown class '" + cls + "'");
      if (o.groups_.count(cls))
        throw Error(where + ": duplicate group for class '" + cls + "'");
      std::vector<std::string> names;
      for (const auto& line : sec.lines)
        for (const auto& n : line) {
          if (!valid_name(n)) throw Error(where + ": invalid affordance name '" + n + "'");
          if (std::find(names.begin(), names.end(), n) != names.end())
            throw Error(where + ": duplicate affordance '" + n + "' in group '" + cls + "'");
          names.push_back(n);
        }
      if (names.empty()) throw Error(where + ": empty affordance group for '" + cls + "'");
      o.groups_[cls] = std::move(names);
    } else if (sec.name == "subcategories") {
      if (sec.args.size() != 1)
        throw Error(where + ": [subcategories] takes exactly one class label");
      const std::string& cls = sec.args[0];
      if (!o.label_index_.count(cls))
        throw Error(where + ": subcategories for unknown class '" + cls + "'");
      auto git = o.groups_.find(cls);
      if (git == o.groups_.end())
        throw Error(where + ": subcategories for class '" + cls + "' which owns no affordance group");
      size_t n = git->second.size();
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        const auto& toks = sec.lines[i];
        std::string lwhere = origin + ":" + std::to_string(sec.line_numbers[i]);
        if (toks.size() != n + 1)
          throw Error(lwhere + ": subcategory '" + (toks.empty() ? "?" : toks[0]) +
                      "' of class '" + cls + "': expected " + std::to_string(n) +
                      " weights, got " + std::to_string(toks.size() - 1));
        Subcategory sc;
        sc.name = toks[0];
        if (!valid_name(sc.name)) throw Error(lwhere + ": invalid subcategory name '" + sc.name + "'");
        double sum = 0.0;
        for (size_t k = 1; k < toks.size(); ++k) {
          double w = parse_double(toks[k], lwhere + ": subcategory '" + sc.name + "'");
          if (w < 0)
            throw Error(lwhere + ": subcategory '" + sc.name + "' of class '" + cls +
                        "': negative affordance weight");
          sc.weights.push_back(w);
          sum += w;
        }
        if (sum <= 0)
          throw Error(lwhere + ": subcategory '" + sc.name + "' of class '" + cls +
                      "': unnormalizable all-zero annotation");
        sc.gt.resize(sc.weights.size());
        for (size_t k = 0; k < sc.weights.size(); ++k) sc.gt[k] = sc.weights[k] / sum;
        auto& list = o.subcats_[cls];
        for (const auto& prev : list)
          if (prev.name == sc.name)
            throw Error(lwhere + ": duplicate subcategory '" + sc.name + "' for class '" + cls + "'");
        list.push_back(std::move(sc));
      }
    } else {
      throw Error(where + ": unknown section [" + sec.name + "]");
    }
  }
  if (!saw_classes) throw Error(origin + ": missing [classes] section");
  o.finalize(origin);
  return o;
}

void Ontology::finalize(const std::string& origin) {
  for (const char* reserved : {kRoomLabel, kBuildingLabel}) {
    label_index_[reserved] = static_cast<int>(labels_.size());
    labels_.emplace_back(reserved);
  }
  // Slot layout follows class-label order.
  int cursor = 0;
  for (const auto& label : labels_) {
    auto it = groups_.find(label);
    if (it == groups_.end()) continue;
    SlotRange r{cursor, cursor + static_cast<int>(it->second.size())};
    slots_[label] = r;
    cursor = r.end;
  }
  total_slots_ = cursor;
  if (object_class_count() < 1) throw Error(origin + ": at least one object class required");
}

bool Ontology::has_label(const std::string& label) const {
  return label_index_.count(label) > 0;
}

int Ontology::label_index(const std::string& label) const {
  auto it = label_index_.find(label);
  if (it == label_index_.end()) throw Error("unknown class label '" + label + "'");
  return it->second;
}

const std::vector<std::string>* Ontology::affordance_group(const std::string& cls) const {
  label_index(cls);
  auto it = groups_.find(cls);
  return it == groups_.end() ? nullptr : &it->second;
}

std::optional<SlotRange> Ontology::slot_range(const std::string& cls) const {
  label_index(cls);
  auto it = slots_.find(cls);
  if (it == slots_.end()) return std::nullopt;
  return it->second;
}

const std::vector<Subcategory>* Ontology::subcategories(const std::string& cls) const {
  label_index(cls);
  auto it = subcats_.find(cls);
  return it == subcats_.end() ? nullptr : &it->second;
}

const std::vector<double>& Ontology::gt_vector(const std::string& cls,
                                               const std::string& subcat) const {
  const auto* list = subcategories(cls);
  if (list) {
    for (const auto& sc : *list)
      if (sc.name == subcat) return sc.gt;
  }
  throw Error("unknown subcategory '" + subcat + "' of class '" + cls + "'");
}

std::vector<std::string> Ontology::group_classes() const {
  std::vector<std::string> out;
  for (const auto& label : labels_)
    if (groups_.count(label)) out.push_back(label);
  return out;
}

std::string Ontology::save_text() const {
  std::string out = "# ceci ontology v1\n[classes]\n";
  for (int i = 0; i < object_class_count(); ++i) out += labels_[i] + "\n";
  for (const auto& label : labels_) {
    auto git = groups_.find(label);
    if (git == groups_.end()) continue;
    out += "[group " + label + "]\n";
    for (size_t i = 0; i < git->second.size(); ++i)
      out += git->second[i] + (i + 1 < git->second.size() ? " " : "\n");
    auto sit = subcats_.find(label);
    if (sit == subcats_.end()) continue;
    out += "[subcategories " + label + "]\n";
    for (const auto& sc : sit->second) {
      out += sc.name;
      for (double w : sc.weights) out += " " + format_double(w);
      out += "\n";
    }
  }
  return out;
}

bool Ontology::operator==(const Ontology& other) const {
  if (labels_ != other.labels_ || groups_ != other.groups_ || slots_ != other.slots_)
    return false;
  if (subcats_.size() != other.subcats_.size()) return false;
  for (const auto& [cls, list] : subcats_) {
    auto it = other.subcats_.find(cls);
    if (it == other.subcats_.end() || it->second.size() != list.size()) return false;
    for (size_t i = 0; i < list.size(); ++i) {
      if (list[i].name != it->second[i].name || list[i].weights != it->second[i].weights ||
          list[i].gt != it->second[i].gt)
        return false;
    }
  }
  return true;
}

}  // namespace ceci
