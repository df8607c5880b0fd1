#include "ceci/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ceci {

FrequencyTable fit_frequency_table(const std::vector<SceneGraph>& graphs,
                                   const Ontology& ontology, double alpha) {
  if (graphs.empty()) throw Error("oracle fit: empty corpus");
  if (alpha <= 0) throw Error("oracle fit: smoothing alpha must be positive");

  FrequencyTable table;
  table.alpha = alpha;
  table.labels = ontology.class_labels();
  table.slots = ontology.total_slots();
  table.ontology_hash = ontology.content_hash();

  const size_t m = table.labels.size();
  std::vector<long long> rooms_with(m, 0);
  Matrix mass_sum(table.slots, static_cast<int>(m));

  std::map<std::string, int> col;
  for (size_t j = 0; j < m; ++j) col[table.labels[j]] = static_cast<int>(j);

  for (const auto& g : graphs) {
    for (const auto& room : g.nodes) {
      if (room.layer != Layer::Rooms) continue;
      table.room_count += 1;

      std::set<std::string> present;
      present.insert(kRoomLabel);
      // mean gt mass per slot over this room's nodes of the slot-owning class
      std::vector<double> slot_mass(table.slots, 0.0);
      std::vector<int> slot_nodes(table.slots, 0);
      for (int child : g.children_of(room.id)) {
        const GraphNode& n = *g.find_node(child);
        present.insert(n.class_label);
        auto range = ontology.slot_range(n.class_label);
        if (!range || n.gt_affordance.empty()) continue;
        for (int s = range->begin; s < range->end; ++s) {
          slot_mass[s] += n.gt_affordance[s - range->begin];
          slot_nodes[s] += 1;
        }
      }
      for (const auto& label : present) {
        auto it = col.find(label);
        if (it == col.end()) throw Error("oracle fit: label '" + label + "' not in ontology");
        rooms_with[it->second] += 1;
        for (int s = 0; s < table.slots; ++s)
          if (slot_nodes[s] > 0)
            mass_sum(s, it->second) += slot_mass[s] / slot_nodes[s];
      }
    }
  }
  if (table.room_count == 0) throw Error("oracle fit: corpus has no rooms");

  const double denom = static_cast<double>(table.room_count) + 2.0 * alpha;
  table.p_label.resize(m);
  table.joint = Matrix(table.slots, static_cast<int>(m));
  for (size_t j = 0; j < m; ++j) {
    table.p_label[j] = (static_cast<double>(rooms_with[j]) + alpha) / denom;
    for (int s = 0; s < table.slots; ++s)
      table.joint(s, static_cast<int>(j)) = (mass_sum(s, static_cast<int>(j)) + alpha) / denom;
  }
  return table;
}

std::vector<std::string> room_context(const SceneGraph& g, int node_id) {
  const GraphNode* node = g.find_node(node_id);
  if (!node) throw Error("room_context: no node with id " + std::to_string(node_id));
  if (node->layer != Layer::Objects)
    throw Error("room_context: node " + std::to_string(node_id) + " is not an object");
  auto room = g.parent_of(node_id);
  if (!room) throw Error("room_context: node " + std::to_string(node_id) + " has no room");

  std::set<std::string> present;
  present.insert(kRoomLabel);
  for (int child : g.children_of(*room)) {
    if (child == node_id) continue;
    present.insert(g.find_node(child)->class_label);
  }
  return std::vector<std::string>(present.begin(), present.end());
}

std::vector<double> predict_expectation(const FrequencyTable& table,
                                        const Ontology& ontology,
                                        const std::string& class_label,
                                        const std::vector<std::string>& context) {
  auto range = ontology.slot_range(class_label);
  if (!range)
    throw Error("oracle predict: class '" + class_label + "' owns no affordance group");
  if (context.empty()) throw Error("oracle predict: empty context");

  std::map<std::string, int> col;
  for (size_t j = 0; j < table.labels.size(); ++j) col[table.labels[j]] = static_cast<int>(j);

  double denom = 1.0;
  std::vector<int> cols;
  for (const auto& label : context) {
    auto it = col.find(label);
    if (it == col.end())
      throw Error("oracle predict: context label '" + label + "' not in table");
    cols.push_back(it->second);
    denom *= table.p_label[it->second];
  }

  std::vector<double> scores;
  double total = 0.0;
  for (int s = range->begin; s < range->end; ++s) {
    double joint_sum = 0.0;
    for (int j : cols) joint_sum += table.joint(s, j);
    double score = joint_sum / denom;
    scores.push_back(score);
    total += score;
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error("oracle predict: degenerate score total for class '" + class_label + "'");
  for (auto& v : scores) v /= total;
  return scores;
}

std::map<int, std::vector<double>> oracle_predict(const FrequencyTable& table,
                                                  const Ontology& ontology,
                                                  const SceneGraph& g) {
  std::map<int, std::vector<double>> out;
  for (const auto& n : g.nodes) {
    if (n.layer != Layer::Objects) continue;
    if (!ontology.slot_range(n.class_label)) continue;
    out[n.id] =
        predict_expectation(table, ontology, n.class_label, room_context(g, n.id));
  }
  return out;
}

void FrequencyTable::save(const std::string& path) const {
  std::string out = "# ceci freqtable v1\n[meta]\n";
  out += "alpha " + format_double(alpha) + "\n";
  out += "rooms " + std::to_string(room_count) + "\n";
  out += "slots " + std::to_string(slots) + "\n";
  out += "ontology_hash " + hex_u64(ontology_hash) + "\n";
  out += "[labels]\n";
  for (const auto& l : labels) out += "label " + l + "\n";
  out += "[marginal]\n";
  for (size_t j = 0; j < labels.size(); ++j)
    out += "p " + labels[j] + " " + format_double(p_label[j]) + "\n";
  out += "[joint]\n";
  for (int s = 0; s < slots; ++s) {
    out += "slot " + std::to_string(s);
    for (size_t j = 0; j < labels.size(); ++j)
      out += " " + format_double(joint(s, static_cast<int>(j)));
    out += "\n";
  }
  write_file(path, out);
}

FrequencyTable FrequencyTable::load(const std::string& path) {
  if (!file_exists(path)) throw Error(path + ": frequency table does not exist");
  std::string text = read_file(path);
  if (text.rfind("# ceci freqtable v1", 0) != 0)
    throw Error(path + ": not a ceci frequency table (missing version line)");
  auto sections = parse_sections(text, path);

  FrequencyTable table;
  bool saw_meta = false, saw_labels = false, saw_marginal = false, saw_joint = false;
  for (const auto& sec : sections) {
    std::string where = path + ":" + std::to_string(sec.header_line);
    if (sec.name == "meta") {
      saw_meta = true;
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        const auto& t = sec.lines[i];
        std::string lw = path + ":" + std::to_string(sec.line_numbers[i]);
        if (t.size() != 2) throw Error(lw + ": expected 'key value'");
        if (t[0] == "alpha") table.alpha = parse_double(t[1], lw);
        else if (t[0] == "rooms") table.room_count = parse_int(t[1], lw);
        else if (t[0] == "slots") table.slots = static_cast<int>(parse_int(t[1], lw));
        else if (t[0] == "ontology_hash") table.ontology_hash = parse_hex_u64(t[1], lw);
        else throw Error(lw + ": unknown meta key '" + t[0] + "'");
      }
    } else if (sec.name == "labels") {
      saw_labels = true;
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        const auto& t = sec.lines[i];
        std::string lw = path + ":" + std::to_string(sec.line_numbers[i]);
        if (t.size() != 2 || t[0] != "label") throw Error(lw + ": expected 'label name'");
        table.labels.push_back(t[1]);
      }
    } else if (sec.name == "marginal") {
      saw_marginal = true;
      table.p_label.assign(table.labels.size(), 0.0);
      if (sec.lines.size() != table.labels.size())
        throw Error(where + ": marginal row count does not match label count");
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        const auto& t = sec.lines[i];
        std::string lw = path + ":" + std::to_string(sec.line_numbers[i]);
        if (t.size() != 3 || t[0] != "p") throw Error(lw + ": expected 'p label value'");
        if (t[1] != table.labels[i]) throw Error(lw + ": marginal rows out of label order");
        table.p_label[i] = parse_double(t[2], lw);
      }
    } else if (sec.name == "joint") {
      saw_joint = true;
      table.joint = Matrix(table.slots, static_cast<int>(table.labels.size()));
      if (sec.lines.size() != static_cast<size_t>(table.slots))
        throw Error(where + ": joint row count does not match slot count");
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        const auto& t = sec.lines[i];
        std::string lw = path + ":" + std::to_string(sec.line_numbers[i]);
        if (t.size() != table.labels.size() + 2 || t[0] != "slot")
          throw Error(lw + ": expected 'slot index values...'");
        if (parse_int(t[1], lw) != static_cast<long long>(i))
          throw Error(lw + ": joint rows out of slot order");
        for (size_t j = 0; j < table.labels.size(); ++j)
          table.joint(static_cast<int>(i), static_cast<int>(j)) = parse_double(t[j + 2], lw);
      }
    } else {
      throw Error(where + ": unknown section [" + sec.name + "]");
    }
  }
  if (!saw_meta || !saw_labels || !saw_marginal || !saw_joint)
    throw Error(path + ": incomplete frequency table");
  return table;
}

}  // namespace ceci
