#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "dymacl/curriculum.hpp"
#include "dymacl/dyan.hpp"
#include "dymacl/env.hpp"

namespace dymacl {

// One teammate-branch embedding sample. The semantic label is the number of
// teammates visible in the observation; the scenario label identifies the
// task size the sample came from.
struct SemanticSample {
  std::vector<double> embedding;
  int semantic_label = 0;
  int scenario_label = 0;
};

enum class DistanceMetric { Euclidean, Cosine };

DistanceMetric distance_metric_from_string(const std::string& s);

struct DistanceReport {
  double intra = 0.0;  // mean pairwise distance within a semantic class
  double inter = 0.0;  // mean pairwise distance across classes
  double ratio = 0.0;  // intra / inter; 0 with degenerate=true when inter == 0
  bool degenerate = false;
  std::map<int, std::size_t> class_counts;
};

// Roll out the scripted policy on both teams in each scenario and record the
// teammate embedding of every alive team-A agent until the per-scenario
// quota is met. Deterministic given the seed.
std::vector<SemanticSample> collect_embeddings(const DyanParams& params,
                                               const std::vector<WorldConfig>& scenarios,
                                               std::size_t samples_per_scenario,
                                               std::uint64_t seed);

// Mean intra-/inter-class pairwise distances over semantic labels; classes
// with fewer than two samples are excluded from the intra mean. Requires at
// least two classes with two or more samples each.
DistanceReport distance_report(const std::vector<SemanticSample>& samples,
                               DistanceMetric metric = DistanceMetric::Euclidean);

// CSV with one row per sample: semantic_label, scenario_label, e0..e{n-1}.
void export_samples_csv(const std::vector<SemanticSample>& samples,
                        const std::filesystem::path& path);
void export_report(const DistanceReport& report, const std::filesystem::path& path);

}  // namespace dymacl
