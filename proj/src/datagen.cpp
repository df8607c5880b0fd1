#include "ceci/datagen.hpp"

#include <algorithm>
#include <cmath>

namespace ceci {

GeneratorConfig GeneratorConfig::load(const std::string& path, const Ontology& ontology) {
  if (!file_exists(path)) throw Error(path + ": generator config does not exist");
  GeneratorConfig cfg;
  auto sections = parse_sections(read_file(path), path);
  bool saw_generator = false;
  for (const auto& sec : sections) {
    std::string where = path + ":" + std::to_string(sec.header_line);
    if (sec.name == "generator") {
      saw_generator = true;
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        const auto& t = sec.lines[i];
        std::string lw = path + ":" + std::to_string(sec.line_numbers[i]);
        if (t.size() != 2) throw Error(lw + ": expected 'key value'");
        if (t[0] == "graphs") cfg.corpus_size = static_cast<int>(parse_int(t[1], lw));
        else if (t[0] == "rooms_min") cfg.rooms_min = static_cast<int>(parse_int(t[1], lw));
        else if (t[0] == "rooms_max") cfg.rooms_max = static_cast<int>(parse_int(t[1], lw));
        else if (t[0] == "augment_ratio") cfg.augment_ratio = parse_double(t[1], lw);
        else throw Error(lw + ": unknown generator key '" + t[0] + "'");
      }
    } else if (sec.name == "archetype") {
      if (sec.args.size() != 1) throw Error(where + ": [archetype] takes exactly one name");
      Archetype arch;
      arch.name = sec.args[0];
      for (const auto& prev : cfg.archetypes)
        if (prev.name == arch.name)
          throw Error(where + ": duplicate archetype '" + arch.name + "'");
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        const auto& t = sec.lines[i];
        std::string lw = path + ":" + std::to_string(sec.line_numbers[i]);
        if (t[0] == "weight") {
          if (t.size() != 2) throw Error(lw + ": expected 'weight value'");
          arch.weight = parse_double(t[1], lw);
        } else if (t[0] == "item") {
          if (t.size() != 5)
            throw Error(lw + ": expected 'item class presence_prob count_min count_max'");
          ArchetypeItem item;
          item.class_label = t[1];
          item.presence_prob = parse_double(t[2], lw);
          item.count_min = static_cast<int>(parse_int(t[3], lw));
          item.count_max = static_cast<int>(parse_int(t[4], lw));
          if (!ontology.has_label(item.class_label) ||
              item.class_label == kRoomLabel || item.class_label == kBuildingLabel)
            throw Error(lw + ": unknown object class '" + item.class_label + "'");
          if (item.presence_prob < 0 || item.presence_prob > 1)
            throw Error(lw + ": presence_prob outside [0,1]");
          if (item.count_min < 1 || item.count_max < item.count_min)
            throw Error(lw + ": bad count range");
          arch.items.push_back(std::move(item));
        } else if (t[0] == "subcat") {
          if (t.size() < 4 || t.size() % 2 != 0)
            throw Error(lw + ": expected 'subcat class (name prob)+'");
          const std::string& cls = t[1];
          const auto* subs = ontology.subcategories(cls);
          if (!subs)
            throw Error(lw + ": subcat table for class '" + cls +
                        "' which has no subcategories in the ontology");
          std::vector<std::pair<std::string, double>> table;
          double sum = 0.0;
          for (size_t k = 2; k + 1 < t.size(); k += 2) {
            const std::string& name = t[k];
            bool known = false;
            for (const auto& sc : *subs) known = known || sc.name == name;
            if (!known)
              throw Error(lw + ": unknown subcategory '" + name + "' of class '" + cls + "'");
            double p = parse_double(t[k + 1], lw);
            if (p < 0) throw Error(lw + ": negative probability");
            table.emplace_back(name, p);
            sum += p;
          }
          if (std::fabs(sum - 1.0) > 1e-9)
            throw Error(lw + ": subcategory table for '" + cls +
                        "' does not sum to 1 (sum=" + format_double(sum) + ")");
          if (arch.subcat_probs.count(cls))
            throw Error(lw + ": duplicate subcat table for '" + cls + "'");
          arch.subcat_probs[cls] = std::move(table);
        } else {
          throw Error(lw + ": unknown archetype key '" + t[0] + "'");
        }
      }
      if (arch.weight <= 0) throw Error(where + ": archetype weight must be positive");
      // Every group-owning class the archetype can emit needs a subcat table.
      for (const auto& item : arch.items) {
        if (ontology.slot_range(item.class_label) && !arch.subcat_probs.count(item.class_label))
          throw Error(where + ": archetype '" + arch.name + "' emits class '" +
                      item.class_label + "' but has no subcat table for it");
      }
      cfg.archetypes.push_back(std::move(arch));
    } else {
      throw Error(where + ": unknown section [" + sec.name + "]");
    }
  }
  if (!saw_generator) throw Error(path + ": missing [generator] section");
  if (cfg.archetypes.empty()) throw Error(path + ": no archetypes defined");
  if (cfg.corpus_size < 1) throw Error(path + ": graphs must be >= 1");
  if (cfg.rooms_min < 1 || cfg.rooms_max < cfg.rooms_min)
    throw Error(path + ": bad rooms range");
  if (cfg.augment_ratio < 0 || cfg.augment_ratio >= 1)
    throw Error(path + ": augment_ratio must be in [0,1)");
  return cfg;
}

SceneGraph sample_graph(const GeneratorConfig& config, const Ontology& ontology, Rng& rng) {
  SceneGraph g;
  GraphNode building;
  building.id = 0;
  building.layer = Layer::Building;
  building.class_label = kBuildingLabel;
  g.nodes.push_back(building);

  std::vector<double> weights;
  for (const auto& a : config.archetypes) weights.push_back(a.weight);

  int next_id = 1;
  long long room_count = rng.range(config.rooms_min, config.rooms_max);
  for (long long r = 0; r < room_count; ++r) {
    const Archetype& arch = config.archetypes[rng.weighted(weights)];
    GraphNode room;
    room.id = next_id++;
    room.layer = Layer::Rooms;
    room.class_label = kRoomLabel;
    g.nodes.push_back(room);
    g.edges.push_back({0, room.id});

    for (const auto& item : arch.items) {
      if (item.presence_prob < 1.0 && !rng.bernoulli(item.presence_prob)) continue;
      long long count = rng.range(item.count_min, item.count_max);
      for (long long c = 0; c < count; ++c) {
        GraphNode obj;
        obj.id = next_id++;
        obj.layer = Layer::Objects;
        obj.class_label = item.class_label;
        auto st = arch.subcat_probs.find(item.class_label);
        if (st != arch.subcat_probs.end()) {
          std::vector<double> probs;
          for (const auto& [_, p] : st->second) probs.push_back(p);
          const std::string& name = st->second[rng.weighted(probs)].first;
          obj.subcategory = name;
          obj.gt_affordance = ontology.gt_vector(item.class_label, name);
        }
        g.nodes.push_back(std::move(obj));
        g.edges.push_back({room.id, g.nodes.back().id});
      }
    }
  }
  return g;
}

namespace {

SceneGraph delete_objects(const SceneGraph& g, const std::vector<int>& doomed) {
  std::vector<int> remap(g.nodes.size(), -1);
  SceneGraph out;
  int next = 0;
  for (const auto& n : g.nodes) {
    if (std::find(doomed.begin(), doomed.end(), n.id) != doomed.end()) continue;
    GraphNode copy = n;
    remap[n.id] = next;
    copy.id = next++;
    out.nodes.push_back(std::move(copy));
  }
  for (const auto& e : g.edges) {
    if (remap[e.parent] < 0 || remap[e.child] < 0) continue;
    out.edges.push_back({remap[e.parent], remap[e.child]});
  }
  return out;
}

}  // namespace

std::vector<SceneGraph> augment(const SceneGraph& g, double ratio, Rng& rng) {
  if (ratio < 0 || ratio >= 1) throw Error("augment: ratio must be in [0,1)");
  std::vector<int> object_ids;
  for (const auto& n : g.nodes)
    if (n.layer == Layer::Objects) object_ids.push_back(n.id);
  std::sort(object_ids.begin(), object_ids.end());

  const int depth = static_cast<int>(std::floor(ratio * static_cast<double>(object_ids.size())));
  std::vector<SceneGraph> out;
  if (depth == 0) return out;

  rng.shuffle(object_ids);
  std::vector<int> doomed;
  for (int k = 1; k <= depth; ++k) {
    doomed.push_back(object_ids[k - 1]);
    out.push_back(delete_objects(g, doomed));
  }
  return out;
}

GeneratedCorpus generate_corpus(const GeneratorConfig& config, const Ontology& ontology) {
  GeneratedCorpus corpus;
  for (int i = 0; i < config.corpus_size; ++i) {
    Rng sample_rng(derive_seed(config.seed, static_cast<uint64_t>(i), 0));
    SceneGraph base = sample_graph(config, ontology, sample_rng);
    Rng augment_rng(derive_seed(config.seed, static_cast<uint64_t>(i), 1));
    std::vector<SceneGraph> variants = augment(base, config.augment_ratio, augment_rng);
    corpus.graphs.push_back(std::move(base));
    corpus.entries.push_back({i, 0, Split::Unassigned});
    for (size_t k = 0; k < variants.size(); ++k) {
      corpus.graphs.push_back(std::move(variants[k]));
      corpus.entries.push_back({i, static_cast<int>(k) + 1, Split::Unassigned});
    }
  }
  return corpus;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    case Split::Unassigned: return "-";
  }
  return "-";
}

Split split_from_name(const std::string& s, const std::string& context) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  if (s == "-") return Split::Unassigned;
  throw Error(context + ": unknown split tag '" + s + "'");
}

void assign_splits(std::vector<CorpusEntry>& entries, const SplitFractions& fractions,
                   uint64_t seed) {
  double total = fractions.train + fractions.val + fractions.test;
  if (std::fabs(total - 1.0) > 1e-9)
    throw Error("assign_splits: fractions sum to " + format_double(total) + ", expected 1");
  if (fractions.train < 0 || fractions.val < 0 || fractions.test < 0)
    throw Error("assign_splits: negative fraction");
  int base_count = 0;
  for (const auto& e : entries) base_count = std::max(base_count, e.base_index + 1);
  if (base_count == 0) throw Error("assign_splits: empty corpus");

  std::vector<int> order(base_count);
  for (int i = 0; i < base_count; ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0x53504c49ull));  // split stream
  rng.shuffle(order);

  long long n_train = std::llround(fractions.train * base_count);
  long long n_val = std::llround(fractions.val * base_count);
  n_train = std::min<long long>(n_train, base_count);
  n_val = std::min<long long>(n_val, base_count - n_train);

  std::vector<Split> base_split(base_count, Split::Test);
  for (long long i = 0; i < n_train; ++i) base_split[order[i]] = Split::Train;
  for (long long i = n_train; i < n_train + n_val; ++i) base_split[order[i]] = Split::Val;
  for (auto& e : entries) e.split = base_split[e.base_index];
}

void write_sidecar(const std::string& path, const std::vector<CorpusEntry>& entries) {
  std::string out = "# ceci sidecar v1\n";
  for (size_t i = 0; i < entries.size(); ++i) {
    out += "entry " + std::to_string(i) + " " + std::to_string(entries[i].base_index) +
           " " + std::to_string(entries[i].variant) + " " + split_name(entries[i].split) +
           "\n";
  }
  write_file(path, out);
}

std::vector<CorpusEntry> read_sidecar(const std::string& path) {
  auto sections_text = read_file(path);
  if (sections_text.rfind("# ceci sidecar v1", 0) != 0)
    throw Error(path + ": not a sidecar file (missing version line)");
  std::vector<CorpusEntry> entries;
  size_t pos = 0;
  int lineno = 0;
  std::string_view text = sections_text;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line =
        (eol == std::string_view::npos) ? text.substr(pos) : text.substr(pos, eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() : eol + 1;
    ++lineno;
    std::string context = path + ":" + std::to_string(lineno);
    size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    auto t = split_tokens(line);
    if (t.empty()) continue;
    if (t[0] != "entry" || t.size() != 5) throw Error(context + ": malformed sidecar row");
    long long index = parse_int(t[1], context);
    if (index != static_cast<long long>(entries.size()))
      throw Error(context + ": sidecar rows out of order");
    CorpusEntry e;
    e.base_index = static_cast<int>(parse_int(t[2], context));
    e.variant = static_cast<int>(parse_int(t[3], context));
    e.split = split_from_name(t[4], context);
    entries.push_back(e);
  }
  return entries;
}

std::vector<const Example*> Dataset::split_view(Split s) const {
  std::vector<const Example*> out;
  for (const auto& e : examples)
    if (e.split == s) out.push_back(&e);
  return out;
}

SceneGraph strip_ground_truth(const SceneGraph& g,
                              std::map<int, std::vector<double>>* targets_out) {
  SceneGraph out = g;
  for (auto& n : out.nodes) {
    if (!n.gt_affordance.empty() && targets_out) (*targets_out)[n.id] = n.gt_affordance;
    n.gt_affordance.clear();
    n.subcategory.clear();
  }
  return out;
}

Dataset make_dataset(const std::vector<SceneGraph>& gt_graphs,
                     const std::vector<CorpusEntry>& entries, const Ontology& ontology) {
  if (gt_graphs.size() != entries.size())
    throw Error("make_dataset: corpus has " + std::to_string(gt_graphs.size()) +
                " graphs but sidecar has " + std::to_string(entries.size()) + " entries");
  Dataset ds;
  for (size_t i = 0; i < gt_graphs.size(); ++i) {
    Example ex;
    ex.input = strip_ground_truth(gt_graphs[i], &ex.targets);
    ex.base_index = entries[i].base_index;
    ex.variant = entries[i].variant;
    ex.split = entries[i].split;
    for (const auto& n : gt_graphs[i].nodes) {
      if (n.layer != Layer::Objects) continue;
      if (ontology.slot_range(n.class_label) && !ex.targets.count(n.id))
        throw Error("make_dataset: graph " + std::to_string(i) + " node " +
                    std::to_string(n.id) + " (class '" + n.class_label +
                    "') owns an affordance group but has no ground truth");
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

}  // namespace ceci
