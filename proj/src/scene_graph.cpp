#include "ceci/scene_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace ceci {

char layer_code(Layer l) {
  switch (l) {
    case Layer::Building: return 'B';
    case Layer::Rooms: return 'R';
    case Layer::Objects: return 'O';
  }
  return '?';
}

Layer layer_from_code(char c, const std::string& context) {
  switch (c) {
    case 'B': return Layer::Building;
    case 'R': return Layer::Rooms;
    case 'O': return Layer::Objects;
  }
  throw Error(context + ": unknown layer code '" + std::string(1, c) + "'");
}

const GraphNode* SceneGraph::find_node(int id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::optional<int> SceneGraph::parent_of(int id) const {
  for (const auto& e : edges)
    if (e.child == id) return e.parent;
  return std::nullopt;
}

std::vector<int> SceneGraph::children_of(int id) const {
  std::vector<int> out;
  for (const auto& e : edges)
    if (e.parent == id) out.push_back(e.child);
  return out;
}

bool graphs_equal(const SceneGraph& a, const SceneGraph& b) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
  auto edge_key = [](const GraphEdge& e) { return std::make_pair(e.parent, e.child); };
  std::vector<std::pair<int, int>> ea, eb;
  for (const auto& e : a.edges) ea.push_back(edge_key(e));
  for (const auto& e : b.edges) eb.push_back(edge_key(e));
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  if (ea != eb) return false;
  std::map<int, const GraphNode*> na;
  for (const auto& n : a.nodes) na[n.id] = &n;
  for (const auto& n : b.nodes) {
    auto it = na.find(n.id);
    if (it == na.end()) return false;
    const GraphNode& m = *it->second;
    if (m.layer != n.layer || m.class_label != n.class_label ||
        m.subcategory != n.subcategory || m.gt_affordance != n.gt_affordance)
      return false;
  }
  return true;
}

std::vector<std::string> validate(const SceneGraph& g, const Ontology* ontology) {
  std::vector<std::string> v;
  const int n = static_cast<int>(g.nodes.size());
  if (n == 0) {
    v.push_back("graph is empty");
    return v;
  }

  std::set<int> ids;
  for (const auto& node : g.nodes) {
    if (node.id < 0 || node.id >= n)
      v.push_back("node " + std::to_string(node.id) + ": id outside dense range 0.." +
                  std::to_string(n - 1));
    else if (!ids.insert(node.id).second)
      v.push_back("node " + std::to_string(node.id) + ": duplicate id");
  }
  if (static_cast<int>(ids.size()) != n) return v;  // id map unreliable past this point

  std::map<int, const GraphNode*> by_id;
  for (const auto& node : g.nodes) by_id[node.id] = &node;

  std::vector<int> buildings;
  for (const auto& node : g.nodes)
    if (node.layer == Layer::Building) buildings.push_back(node.id);
  if (buildings.empty()) v.push_back("no building node");
  if (buildings.size() > 1) {
    std::string msg = "multiple roots: building nodes";
    for (int id : buildings) msg += " " + std::to_string(id);
    v.push_back(msg);
  }

  std::map<int, int> parent;
  std::set<std::pair<int, int>> seen_edges;
  for (const auto& e : g.edges) {
    if (!by_id.count(e.parent) || !by_id.count(e.child)) {
      v.push_back("edge " + std::to_string(e.parent) + "->" + std::to_string(e.child) +
                  ": endpoint does not exist");
      continue;
    }
    if (e.parent == e.child) {
      v.push_back("edge " + std::to_string(e.parent) + "->" + std::to_string(e.child) +
                  ": self-loop");
      continue;
    }
    if (!seen_edges.insert({e.parent, e.child}).second) {
      v.push_back("edge " + std::to_string(e.parent) + "->" + std::to_string(e.child) +
                  ": duplicate");
      continue;
    }
    Layer pl = by_id[e.parent]->layer;
    Layer cl = by_id[e.child]->layer;
    bool ok = (pl == Layer::Building && cl == Layer::Rooms) ||
              (pl == Layer::Rooms && cl == Layer::Objects);
    if (!ok) {
      v.push_back("edge " + std::to_string(e.parent) + "->" + std::to_string(e.child) +
                  ": layer skip (" + std::string(1, layer_code(pl)) + "->" +
                  std::string(1, layer_code(cl)) + ")");
      continue;
    }
    if (parent.count(e.child))
      v.push_back("node " + std::to_string(e.child) + ": multiple parents");
    else
      parent[e.child] = e.parent;
  }

  for (const auto& node : g.nodes) {
    if (node.layer == Layer::Building) {
      if (parent.count(node.id))
        v.push_back("node " + std::to_string(node.id) + ": building has a parent");
    } else if (!parent.count(node.id)) {
      v.push_back("node " + std::to_string(node.id) + ": orphan (no parent edge)");
    }
  }

  for (const auto& node : g.nodes) {
    std::string who = "node " + std::to_string(node.id);
    if (node.layer != Layer::Objects) {
      const char* expect = node.layer == Layer::Building ? kBuildingLabel : kRoomLabel;
      if (node.class_label != expect)
        v.push_back(who + ": layer " + std::string(1, layer_code(node.layer)) +
                    " must carry label '" + expect + "'");
      if (!node.subcategory.empty()) v.push_back(who + ": subcategory on non-object node");
      if (!node.gt_affordance.empty()) v.push_back(who + ": gt affordance on non-object node");
      continue;
    }
    if (node.class_label == kRoomLabel || node.class_label == kBuildingLabel)
      v.push_back(who + ": object node with reserved label '" + node.class_label + "'");
    if (!node.gt_affordance.empty()) {
      double sum = 0.0;
      bool neg = false;
      for (double x : node.gt_affordance) {
        sum += x;
        neg = neg || x < 0;
      }
      if (neg) v.push_back(who + ": negative gt affordance entry");
      if (std::fabs(sum - 1.0) > 1e-9)
        v.push_back(who + ": gt affordance does not sum to 1 (sum=" + format_double(sum) + ")");
    }
    if (ontology) {
      if (!ontology->has_label(node.class_label)) {
        v.push_back(who + ": unknown label '" + node.class_label + "'");
        continue;
      }
      auto range = ontology->slot_range(node.class_label);
      if (!node.gt_affordance.empty()) {
        if (!range)
          v.push_back(who + ": gt affordance on class '" + node.class_label +
                      "' which owns no group");
        else if (static_cast<int>(node.gt_affordance.size()) != range->size())
          v.push_back(who + ": gt affordance length " +
                      std::to_string(node.gt_affordance.size()) + " != group size " +
                      std::to_string(range->size()));
      }
      if (!node.subcategory.empty()) {
        const auto* subs = ontology->subcategories(node.class_label);
        bool found = false;
        if (subs)
          for (const auto& sc : *subs) found = found || sc.name == node.subcategory;
        if (!found)
          v.push_back(who + ": unknown subcategory '" + node.subcategory + "' of class '" +
                      node.class_label + "'");
      }
    }
  }
  return v;
}

Matrix encode_features(const SceneGraph& g, const Ontology& ontology) {
  Matrix m(static_cast<int>(g.nodes.size()), ontology.vocab_size());
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    if (!ontology.has_label(g.nodes[i].class_label))
      throw Error("encode_features: node " + std::to_string(g.nodes[i].id) +
                  ": unknown label '" + g.nodes[i].class_label + "'");
    m(static_cast<int>(i), ontology.label_index(g.nodes[i].class_label)) = 1.0;
  }
  return m;
}

std::string serialize_graph(const SceneGraph& g) {
  std::vector<const GraphNode*> order;
  for (const auto& n : g.nodes) order.push_back(&n);
  std::sort(order.begin(), order.end(),
            [](const GraphNode* a, const GraphNode* b) { return a->id < b->id; });
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : g.edges) edges.emplace_back(e.parent, e.child);
  std::sort(edges.begin(), edges.end());

  std::string out = "g " + std::to_string(g.nodes.size());
  for (const GraphNode* n : order) {
    out += " ; n " + std::to_string(n->id) + " " + std::string(1, layer_code(n->layer)) +
           " " + n->class_label;
    if (!n->subcategory.empty()) out += " s " + n->subcategory;
    if (!n->gt_affordance.empty()) {
      out += " t " + std::to_string(n->gt_affordance.size());
      for (double x : n->gt_affordance) out += " " + format_double(x);
    }
  }
  for (auto [p, c] : edges) out += " ; e " + std::to_string(p) + " " + std::to_string(c);
  return out;
}

SceneGraph deserialize_graph(std::string_view line, const std::string& context) {
  auto toks = split_tokens(line);
  size_t i = 0;
  auto need = [&](const char* what) -> const std::string& {
    if (i >= toks.size())
      throw Error(context + ": truncated record at token " + std::to_string(i) +
                  ", expected " + what);
    return toks[i++];
  };
  if (need("'g'") != "g") throw Error(context + ": record must start with 'g'");
  long long count = parse_int(need("node count"), context);
  if (count <= 0) throw Error(context + ": node count must be positive");

  SceneGraph g;
  while (i < toks.size()) {
    if (need("';'") != ";")
      throw Error(context + ": expected ';' separator at token " + std::to_string(i - 1));
    const std::string& kind = need("'n' or 'e'");
    if (kind == "n") {
      GraphNode node;
      node.id = static_cast<int>(parse_int(need("node id"), context));
      const std::string& lc = need("layer code");
      if (lc.size() != 1) throw Error(context + ": bad layer code '" + lc + "'");
      node.layer = layer_from_code(lc[0], context);
      node.class_label = need("class label");
      while (i < toks.size() && toks[i] != ";") {
        const std::string& tag = need("'s' or 't'");
        if (tag == "s") {
          node.subcategory = need("subcategory name");
        } else if (tag == "t") {
          long long k = parse_int(need("gt length"), context);
          if (k <= 0) throw Error(context + ": gt length must be positive");
          for (long long j = 0; j < k; ++j)
            node.gt_affordance.push_back(parse_double(need("gt value"), context));
        } else {
          throw Error(context + ": unknown node field tag '" + tag + "'");
        }
      }
      g.nodes.push_back(std::move(node));
    } else if (kind == "e") {
      GraphEdge e;
      e.parent = static_cast<int>(parse_int(need("edge parent"), context));
      e.child = static_cast<int>(parse_int(need("edge child"), context));
      g.edges.push_back(e);
    } else {
      throw Error(context + ": unknown record kind '" + kind + "'");
    }
  }
  if (static_cast<long long>(g.nodes.size()) != count)
    throw Error(context + ": declared " + std::to_string(count) + " nodes, found " +
                std::to_string(g.nodes.size()));
  return g;
}

void write_corpus(const std::string& path, const std::vector<SceneGraph>& graphs) {
  std::string out;
  for (const auto& g : graphs) {
    out += serialize_graph(g);
    out += '\n';
  }
  write_file(path, out);
}

std::vector<SceneGraph> read_corpus(const std::string& path) {
  std::string text = read_file(path);
  std::vector<SceneGraph> graphs;
  size_t pos = 0;
  int lineno = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line = (eol == std::string::npos)
                                ? std::string_view(text).substr(pos)
                                : std::string_view(text).substr(pos, eol - pos);
    pos = (eol == std::string::npos) ? text.size() : eol + 1;
    ++lineno;
    if (split_tokens(line).empty()) continue;
    graphs.push_back(deserialize_graph(line, path + ":" + std::to_string(lineno)));
  }
  return graphs;
}

}  // namespace ceci
