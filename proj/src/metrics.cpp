#include "ceci/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ceci/text.hpp"

namespace ceci {

namespace {

void check_distribution(const std::vector<double>& p, const char* op) {
  double sum = 0.0;
  for (double v : p) {
    if (v < -1e-12) throw Error(std::string(op) + ": negative probability entry");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-6)
    throw Error(std::string(op) + ": input not normalized (sum=" + format_double(sum) + ")");
}

}  // namespace

double wasserstein_1d(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw Error("wasserstein_1d: length mismatch");
  if (p.empty()) throw Error("wasserstein_1d: empty distribution");
  check_distribution(p, "wasserstein_1d");
  check_distribution(q, "wasserstein_1d");
  double cdf_p = 0.0, cdf_q = 0.0, total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    cdf_p += p[i];
    cdf_q += q[i];
    total += std::fabs(cdf_p - cdf_q);
  }
  return total;
}

double energy_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw Error("energy_distance: length mismatch");
  if (p.empty()) throw Error("energy_distance: empty distribution");
  check_distribution(p, "energy_distance");
  check_distribution(q, "energy_distance");
  const size_t n = p.size();
  double exy = 0.0, exx = 0.0, eyy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      double d = std::fabs(static_cast<double>(i) - static_cast<double>(j));
      exy += p[i] * q[j] * d;
      exx += p[i] * p[j] * d;
      eyy += q[i] * q[j] * d;
    }
  }
  double radicand = 2.0 * exy - exx - eyy;
  if (radicand < -1e-12)
    throw Error("energy_distance: negative radicand " + format_double(radicand) +
                " (internal error)");
  return std::sqrt(std::max(0.0, radicand));
}

MomentStats moment_stats(const std::vector<double>& samples) {
  MomentStats out;
  const size_t n = samples.size();
  if (n == 0) return out;
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(n);
  out.mean = mean;
  if (n < 2) return out;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : samples) {
    double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  out.variance = m2;
  if (n < 3 || m2 <= 0.0) return out;
  out.skewness = m3 / std::pow(m2, 1.5);
  out.kurtosis = m4 / (m2 * m2) - 3.0;
  return out;
}

std::vector<DistanceSample> distance_samples(
    const std::vector<const SceneGraph*>& graphs,
    const std::vector<const NodeDistributions*>& predicted,
    const std::vector<const NodeDistributions*>& reference,
    const Ontology& ontology) {
  if (graphs.size() != predicted.size() || graphs.size() != reference.size())
    throw Error("distance_samples: list length mismatch");
  std::vector<DistanceSample> out;
  for (size_t gi = 0; gi < graphs.size(); ++gi) {
    for (const auto& n : graphs[gi]->nodes) {
      if (n.layer != Layer::Objects || !ontology.slot_range(n.class_label)) continue;
      auto pit = predicted[gi]->find(n.id);
      auto rit = reference[gi]->find(n.id);
      if (pit == predicted[gi]->end())
        throw Error("distance_samples: graph " + std::to_string(gi) +
                    " has no prediction for node " + std::to_string(n.id));
      if (rit == reference[gi]->end())
        throw Error("distance_samples: graph " + std::to_string(gi) +
                    " has no reference distribution for node " + std::to_string(n.id));
      DistanceSample s;
      s.graph_index = static_cast<int>(gi);
      s.node_id = n.id;
      s.class_label = n.class_label;
      s.wasserstein = wasserstein_1d(pit->second, rit->second);
      s.energy = energy_distance(pit->second, rit->second);
      out.push_back(std::move(s));
    }
  }
  return out;
}

bool CorrelationMatrix::same_shape(const CorrelationMatrix& other) const {
  return rows == other.rows && cols == other.cols;
}

CorrelationMatrix correlation_matrix(const std::vector<const SceneGraph*>& graphs,
                                     const std::vector<const NodeDistributions*>& dists,
                                     const std::vector<std::string>& target_classes,
                                     const Ontology& ontology) {
  if (graphs.size() != dists.size())
    throw Error("correlation_matrix: list length mismatch");
  if (target_classes.empty()) throw Error("correlation_matrix: no target classes");

  CorrelationMatrix m;
  std::map<std::string, int> row_begin;
  for (const auto& cls : target_classes) {
    const auto* group = ontology.affordance_group(cls);
    if (!group)
      throw Error("correlation_matrix: class '" + cls + "' owns no affordance group");
    row_begin[cls] = static_cast<int>(m.rows.size());
    for (const auto& aff : *group) m.rows.emplace_back(cls, aff);
  }
  m.cols = ontology.class_labels();
  std::map<std::string, int> col_of;
  for (size_t j = 0; j < m.cols.size(); ++j) col_of[m.cols[j]] = static_cast<int>(j);

  Matrix sum(static_cast<int>(m.rows.size()), static_cast<int>(m.cols.size()));
  Matrix count(static_cast<int>(m.rows.size()), static_cast<int>(m.cols.size()));

  long long target_nodes = 0;
  for (size_t gi = 0; gi < graphs.size(); ++gi) {
    const SceneGraph& g = *graphs[gi];
    for (const auto& room : g.nodes) {
      if (room.layer != Layer::Rooms) continue;
      std::set<std::string> present;
      present.insert(kRoomLabel);
      std::vector<int> members = g.children_of(room.id);
      for (int id : members) present.insert(g.find_node(id)->class_label);

      for (int id : members) {
        const GraphNode& n = *g.find_node(id);
        auto rb = row_begin.find(n.class_label);
        if (rb == row_begin.end()) continue;
        auto dit = dists[gi]->find(n.id);
        if (dit == dists[gi]->end())
          throw Error("correlation_matrix: graph " + std::to_string(gi) +
                      " has no distribution for node " + std::to_string(n.id));
        const auto& dist = dit->second;
        const auto* group = ontology.affordance_group(n.class_label);
        if (dist.size() != group->size())
          throw Error("correlation_matrix: distribution length mismatch for node " +
                      std::to_string(n.id));
        ++target_nodes;
        for (const auto& label : present) {
          int j = col_of.at(label);
          for (size_t k = 0; k < dist.size(); ++k) {
            sum(rb->second + static_cast<int>(k), j) += dist[k];
            count(rb->second + static_cast<int>(k), j) += 1.0;
          }
        }
      }
    }
  }
  if (target_nodes == 0) throw Error("correlation_matrix: no target-class nodes in corpus");

  m.values = Matrix(sum.rows(), sum.cols());
  m.defined = Matrix(sum.rows(), sum.cols());
  for (int r = 0; r < sum.rows(); ++r)
    for (int c = 0; c < sum.cols(); ++c)
      if (count(r, c) > 0.0) {
        m.values(r, c) = sum(r, c) / count(r, c);
        m.defined(r, c) = 1.0;
      }
  return m;
}

namespace {

double frobenius_over_rows(const CorrelationMatrix& a, const CorrelationMatrix& b,
                           const std::vector<int>& rows) {
  double total = 0.0;
  for (int r : rows)
    for (int c = 0; c < a.values.cols(); ++c) {
      if (a.defined(r, c) == 0.0 || b.defined(r, c) == 0.0) continue;
      double d = a.values(r, c) - b.values(r, c);
      total += d * d;
    }
  return std::sqrt(total);
}

}  // namespace

double frobenius_diff(const CorrelationMatrix& a, const CorrelationMatrix& b) {
  if (!a.same_shape(b)) throw Error("frobenius_diff: shape or label-order mismatch");
  std::vector<int> rows(a.rows.size());
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  return frobenius_over_rows(a, b, rows);
}

double frobenius_diff(const CorrelationMatrix& a, const CorrelationMatrix& b,
                      const std::string& target_class) {
  if (!a.same_shape(b)) throw Error("frobenius_diff: shape or label-order mismatch");
  std::vector<int> rows;
  for (size_t i = 0; i < a.rows.size(); ++i)
    if (a.rows[i].first == target_class) rows.push_back(static_cast<int>(i));
  if (rows.empty())
    throw Error("frobenius_diff: class '" + target_class + "' has no rows");
  return frobenius_over_rows(a, b, rows);
}

namespace {

std::string render_moments(const char* tag, const MomentStats& m) {
  auto cell = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("-");
  };
  return std::string(tag) + " mean " + cell(m.mean) + " variance " + cell(m.variance) +
         " skewness " + cell(m.skewness) + " kurtosis " + cell(m.kurtosis) + "\n";
}

void render_correlation(std::string& out, const char* name, const CorrelationMatrix& m) {
  out += "[correlation ";
  out += name;
  out += "]\ncols";
  for (const auto& c : m.cols) out += " " + c;
  out += "\n";
  for (size_t r = 0; r < m.rows.size(); ++r) {
    out += "row " + m.rows[r].first + " " + m.rows[r].second;
    for (int c = 0; c < m.values.cols(); ++c)
      out += " " + (m.defined(static_cast<int>(r), c) != 0.0
                        ? format_double(m.values(static_cast<int>(r), c))
                        : std::string("-"));
    out += "\n";
  }
}

}  // namespace

std::string render_report(const EvalReport& report) {
  std::string out = "# ceci report v1\n";
  out += "# estimators: wasserstein over slots at integer support points in schema order;\n";
  out += "# correlation entries are mean predicted probability conditioned on room\n";
  out += "# co-occurrence; kurtosis is excess (fisher), population moments.\n";
  out += "[reference]\n";
  out += "# published full-scale HM3D results, not reproducible on synthetic corpora\n";
  out += render_moments("wasserstein", MomentStats{kReferenceWasserstein.mean,
                                                   kReferenceWasserstein.variance,
                                                   kReferenceWasserstein.skewness,
                                                   kReferenceWasserstein.kurtosis});
  out += render_moments("energy", MomentStats{kReferenceEnergy.mean,
                                              kReferenceEnergy.variance,
                                              kReferenceEnergy.skewness,
                                              kReferenceEnergy.kurtosis});
  for (const auto& [cls, v] : kReferenceFrobenius)
    out += "frobenius " + cls + " " + format_double(v) + "\n";
  out += "[moments]\n";
  out += render_moments("wasserstein", report.wasserstein);
  out += render_moments("energy", report.energy);
  out += "[distances]\n";
  for (const auto& s : report.samples)
    out += "node " + std::to_string(s.graph_index) + " " + std::to_string(s.node_id) +
           " " + s.class_label + " " + format_double(s.wasserstein) + " " +
           format_double(s.energy) + "\n";
  render_correlation(out, "pred", report.pred_corr);
  render_correlation(out, "gt", report.gt_corr);
  out += "[frobenius]\n";
  for (const auto& [cls, v] : report.frobenius_per_class)
    out += "class " + cls + " " + format_double(v) + "\n";
  out += "all " + format_double(report.frobenius_all) + "\n";
  return out;
}

namespace {

std::optional<double> parse_cell(const std::string& tok, const std::string& context) {
  if (tok == "-") return std::nullopt;
  return parse_double(tok, context);
}

MomentStats parse_moment_line(const std::vector<std::string>& t, const std::string& lw) {
  if (t.size() != 9 || t[1] != "mean" || t[3] != "variance" || t[5] != "skewness" ||
      t[7] != "kurtosis")
    throw Error(lw + ": malformed moment row");
  MomentStats m;
  m.mean = parse_cell(t[2], lw);
  m.variance = parse_cell(t[4], lw);
  m.skewness = parse_cell(t[6], lw);
  m.kurtosis = parse_cell(t[8], lw);
  return m;
}

CorrelationMatrix parse_correlation_section(const ConfigSection& sec,
                                            const std::string& origin) {
  CorrelationMatrix m;
  std::vector<std::vector<std::optional<double>>> rows;
  for (size_t i = 0; i < sec.lines.size(); ++i) {
    const auto& t = sec.lines[i];
    std::string lw = origin + ":" + std::to_string(sec.line_numbers[i]);
    if (t[0] == "cols") {
      m.cols.assign(t.begin() + 1, t.end());
    } else if (t[0] == "row") {
      if (t.size() != m.cols.size() + 3) throw Error(lw + ": malformed correlation row");
      m.rows.emplace_back(t[1], t[2]);
      std::vector<std::optional<double>> vals;
      for (size_t k = 3; k < t.size(); ++k) vals.push_back(parse_cell(t[k], lw));
      rows.push_back(std::move(vals));
    } else {
      throw Error(lw + ": unknown correlation key '" + t[0] + "'");
    }
  }
  m.values = Matrix(static_cast<int>(rows.size()), static_cast<int>(m.cols.size()));
  m.defined = Matrix(static_cast<int>(rows.size()), static_cast<int>(m.cols.size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      if (rows[r][c]) {
        m.values(static_cast<int>(r), static_cast<int>(c)) = *rows[r][c];
        m.defined(static_cast<int>(r), static_cast<int>(c)) = 1.0;
      }
  return m;
}

}  // namespace

EvalReport parse_report(const std::string& text, const std::string& origin) {
  if (text.rfind("# ceci report v1", 0) != 0)
    throw Error(origin + ": not a ceci report (missing version line)");
  EvalReport report;
  for (const auto& sec : parse_sections(text, origin)) {
    if (sec.name == "reference") continue;
    if (sec.name == "moments") {
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        const auto& t = sec.lines[i];
        std::string lw = origin + ":" + std::to_string(sec.line_numbers[i]);
        if (t[0] == "wasserstein") report.wasserstein = parse_moment_line(t, lw);
        else if (t[0] == "energy") report.energy = parse_moment_line(t, lw);
        else throw Error(lw + ": unknown moments key '" + t[0] + "'");
      }
    } else if (sec.name == "distances") {
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        const auto& t = sec.lines[i];
        std::string lw = origin + ":" + std::to_string(sec.line_numbers[i]);
        if (t.size() != 6 || t[0] != "node") throw Error(lw + ": malformed distance row");
        DistanceSample s;
        s.graph_index = static_cast<int>(parse_int(t[1], lw));
        s.node_id = static_cast<int>(parse_int(t[2], lw));
        s.class_label = t[3];
        s.wasserstein = parse_double(t[4], lw);
        s.energy = parse_double(t[5], lw);
        report.samples.push_back(std::move(s));
      }
    } else if (sec.name == "correlation") {
      if (sec.args.size() != 1)
        throw Error(origin + ":" + std::to_string(sec.header_line) +
                    ": [correlation] needs a tag");
      if (sec.args[0] == "pred") report.pred_corr = parse_correlation_section(sec, origin);
      else if (sec.args[0] == "gt") report.gt_corr = parse_correlation_section(sec, origin);
      else throw Error(origin + ": unknown correlation tag '" + sec.args[0] + "'");
    } else if (sec.name == "frobenius") {
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        const auto& t = sec.lines[i];
        std::string lw = origin + ":" + std::to_string(sec.line_numbers[i]);
        if (t[0] == "class" && t.size() == 3)
          report.frobenius_per_class.emplace_back(t[1], parse_double(t[2], lw));
        else if (t[0] == "all" && t.size() == 2)
          report.frobenius_all = parse_double(t[1], lw);
        else
          throw Error(lw + ": malformed frobenius row");
      }
    } else {
      throw Error(origin + ":" + std::to_string(sec.header_line) + ": unknown section [" +
                  sec.name + "]");
    }
  }
  return report;
}

std::string render_correlations(const CorrelationReport& report) {
  std::string out = "# ceci correlations v1\n";
  render_correlation(out, "pred", report.pred);
  render_correlation(out, "gt", report.gt);
  out += "[frobenius]\n";
  for (const auto& [cls, v] : report.per_class)
    out += "class " + cls + " " + format_double(v) + "\n";
  out += "all " + format_double(report.all) + "\n";
  return out;
}

CorrelationReport parse_correlations(const std::string& text, const std::string& origin) {
  if (text.rfind("# ceci correlations v1", 0) != 0)
    throw Error(origin + ": not a ceci correlations file (missing version line)");
  CorrelationReport report;
  for (const auto& sec : parse_sections(text, origin)) {
    if (sec.name == "correlation") {
      if (sec.args.size() != 1)
        throw Error(origin + ":" + std::to_string(sec.header_line) +
                    ": [correlation] needs a tag");
      if (sec.args[0] == "pred") report.pred = parse_correlation_section(sec, origin);
      else if (sec.args[0] == "gt") report.gt = parse_correlation_section(sec, origin);
      else throw Error(origin + ": unknown correlation tag '" + sec.args[0] + "'");
    } else if (sec.name == "frobenius") {
      for (size_t i = 0; i < sec.lines.size(); ++i) {
        const auto& t = sec.lines[i];
        std::string lw = origin + ":" + std::to_string(sec.line_numbers[i]);
        if (t[0] == "class" && t.size() == 3)
          report.per_class.emplace_back(t[1], parse_double(t[2], lw));
        else if (t[0] == "all" && t.size() == 2)
          report.all = parse_double(t[1], lw);
        else
          throw Error(lw + ": malformed frobenius row");
      }
    } else {
      throw Error(origin + ":" + std::to_string(sec.header_line) + ": unknown section [" +
                  sec.name + "]");
    }
  }
  return report;
}

std::string correlation_csv(const CorrelationMatrix& m) {
  std::string out = "class,affordance";
  for (const auto& c : m.cols) out += "," + c;
  out += "\n";
  for (size_t r = 0; r < m.rows.size(); ++r) {
    out += m.rows[r].first + "," + m.rows[r].second;
    for (int c = 0; c < m.values.cols(); ++c) {
      out += ",";
      if (m.defined(static_cast<int>(r), c) != 0.0)
        out += format_double(m.values(static_cast<int>(r), c));
    }
    out += "\n";
  }
  return out;
}

}  // namespace ceci
