#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ceci/matrix.hpp"
#include "ceci/ontology.hpp"
#include "ceci/scene_graph.hpp"

namespace ceci {

// W1 between two distributions on support points 0,1,...,n-1 with unit
// spacing: sum of absolute CDF differences.
double wasserstein_1d(const std::vector<double>& p, const std::vector<double>& q);

// sqrt(2 E|X-Y| - E|X-X'| - E|Y-Y'|), exact double sums over the supports.
double energy_distance(const std::vector<double>& p, const std::vector<double>& q);

// Population moments; kurtosis is excess (Fisher). A moment whose
// precondition fails (fewer than 2 samples for variance, fewer than 3 or
// zero variance for the shape moments) is left unset.
struct MomentStats {
  std::optional<double> mean;
  std::optional<double> variance;
  std::optional<double> skewness;
  std::optional<double> kurtosis;
};

MomentStats moment_stats(const std::vector<double>& samples);

struct DistanceSample {
  int graph_index = 0;
  int node_id = 0;
  std::string class_label;
  double wasserstein = 0.0;
  double energy = 0.0;
};

using NodeDistributions = std::map<int, std::vector<double>>;

// Per-node distances between two distribution sets over the same corpus
// (typically model predictions vs ground truth).
std::vector<DistanceSample> distance_samples(
    const std::vector<const SceneGraph*>& graphs,
    const std::vector<const NodeDistributions*>& predicted,
    const std::vector<const NodeDistributions*>& reference,
    const Ontology& ontology);

// Rows are (target class, affordance) pairs in schema order; columns are all
// class labels. entry(row, col) = mean probability of the row's affordance
// over target-class nodes whose room contains the column's label; a pair
// that never co-occurs is undefined.
struct CorrelationMatrix {
  std::vector<std::pair<std::string, std::string>> rows;  // (class, affordance)
  std::vector<std::string> cols;
  Matrix values;
  Matrix defined;  // 0/1

  bool same_shape(const CorrelationMatrix& other) const;
};

CorrelationMatrix correlation_matrix(const std::vector<const SceneGraph*>& graphs,
                                     const std::vector<const NodeDistributions*>& dists,
                                     const std::vector<std::string>& target_classes,
                                     const Ontology& ontology);

// Frobenius norm of the entrywise difference over entries defined in both
// matrices; undefined entries are excluded pairwise.
double frobenius_diff(const CorrelationMatrix& a, const CorrelationMatrix& b);
// Same, restricted to the rows of one target class.
double frobenius_diff(const CorrelationMatrix& a, const CorrelationMatrix& b,
                      const std::string& target_class);

// Published results of the full-scale HM3D study; kept as reference metadata
// because they are not reproducible on synthetic desk-scale corpora.
struct ReferenceMoments {
  double mean, variance, skewness, kurtosis;
};
inline constexpr ReferenceMoments kReferenceWasserstein{0.1517, 0.01371, 0.5635, -0.9086};
inline constexpr ReferenceMoments kReferenceEnergy{0.3205, 0.02245, 0.0491, -0.8878};
inline const std::vector<std::pair<std::string, double>> kReferenceFrobenius = {
    {"chair", 0.0605},
    {"fabric", 0.0606},
    {"container_solids", 0.2062},
    {"container_liquids", 0.1697},
};

struct EvalReport {
  std::vector<DistanceSample> samples;
  MomentStats wasserstein;
  MomentStats energy;
  CorrelationMatrix pred_corr;
  CorrelationMatrix gt_corr;
  std::vector<std::pair<std::string, double>> frobenius_per_class;
  double frobenius_all = 0.0;
};

std::string render_report(const EvalReport& report);
EvalReport parse_report(const std::string& text, const std::string& origin);

// Correlation matrices + Frobenius norms alone, as written by `ceci correlate`.
struct CorrelationReport {
  CorrelationMatrix pred;
  CorrelationMatrix gt;
  std::vector<std::pair<std::string, double>> per_class;
  double all = 0.0;
};

std::string render_correlations(const CorrelationReport& report);
CorrelationReport parse_correlations(const std::string& text, const std::string& origin);

// Comma-separated matrix for external plotting; undefined entries are empty.
std::string correlation_csv(const CorrelationMatrix& m);

}  // namespace ceci
