#include "dymacl/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace dymacl {

DistanceMetric distance_metric_from_string(const std::string& s) {
  if (s == "euclidean") return DistanceMetric::Euclidean;
  if (s == "cosine") return DistanceMetric::Cosine;
  throw ParseError("unknown distance metric: " + s);
}

std::vector<SemanticSample> collect_embeddings(const DyanParams& params,
                                               const std::vector<WorldConfig>& scenarios,
                                               std::size_t samples_per_scenario,
                                               std::uint64_t seed) {
  std::vector<SemanticSample> samples;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    std::size_t taken = 0;
    std::size_t episode = 0;
    while (taken < samples_per_scenario) {
      WorldConfig wc = scenarios[s];
      wc.seed = derive_seed(derive_seed(seed, s), episode);
      World world = World::reset(wc);
      while (!world.done() && taken < samples_per_scenario) {
        std::map<int, Action> actions;
        for (const AgentState& a : world.agents())
          if (a.alive) actions[a.id] = world.scripted_opponent(a.id);
        for (int id : world.alive_ids(Team::A)) {
          if (taken >= samples_per_scenario) break;
          Observation obs = world.observe(id);
          auto [tm_embed, en_embed] = dyan_embed(params, obs);
          (void)en_embed;
          SemanticSample sample;
          sample.embedding = std::move(tm_embed);
          sample.semantic_label = static_cast<int>(obs.teammate_features.size());
          sample.scenario_label = static_cast<int>(s);
          samples.push_back(std::move(sample));
          ++taken;
        }
        if (taken >= samples_per_scenario) break;
        world.step(actions);
      }
      ++episode;
    }
  }
  return samples;
}

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b,
                DistanceMetric metric) {
  if (a.size() != b.size()) throw ShapeError("distance: embedding width mismatch");
  if (metric == DistanceMetric::Euclidean) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 1.0;  // zero vectors: maximal dissimilarity
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

DistanceReport distance_report(const std::vector<SemanticSample>& samples,
                               DistanceMetric metric) {
  DistanceReport report;
  for (const SemanticSample& s : samples) ++report.class_counts[s.semantic_label];

  std::size_t usable_classes = 0;
  for (const auto& [label, count] : report.class_counts)
    if (count >= 2) ++usable_classes;
  if (usable_classes < 2)
    throw AnalysisError("distance_report needs >= 2 semantic classes with >= 2 samples");

  double intra_sum = 0.0, inter_sum = 0.0;
  std::size_t intra_n = 0, inter_n = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      double d = distance(samples[i].embedding, samples[j].embedding, metric);
      if (samples[i].semantic_label == samples[j].semantic_label) {
        if (report.class_counts[samples[i].semantic_label] >= 2) {
          intra_sum += d;
          ++intra_n;
        }
      } else {
        inter_sum += d;
        ++inter_n;
      }
    }
  }
  report.intra = intra_n > 0 ? intra_sum / static_cast<double>(intra_n) : 0.0;
  report.inter = inter_n > 0 ? inter_sum / static_cast<double>(inter_n) : 0.0;
  if (report.inter == 0.0) {
    report.ratio = 0.0;
    report.degenerate = true;
  } else {
    report.ratio = report.intra / report.inter;
  }
  return report;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void export_samples_csv(const std::vector<SemanticSample>& samples,
                        const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  std::size_t width = samples.empty() ? 0 : samples[0].embedding.size();
  os << "semantic_label,scenario_label";
  for (std::size_t i = 0; i < width; ++i) os << ",e" << i;
  os << '\n';
  for (const SemanticSample& s : samples) {
    if (s.embedding.size() != width) throw ShapeError("export: ragged embedding widths");
    os << s.semantic_label << ',' << s.scenario_label;
    for (double v : s.embedding) os << ',' << format_double(v);
    os << '\n';
  }
  if (!os) throw IoError("write failed on " + path.string());
}

void export_report(const DistanceReport& report, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << "intra: " << format_double(report.intra) << "\n";
  os << "inter: " << format_double(report.inter) << "\n";
  os << "ratio: " << format_double(report.ratio) << "\n";
  os << "degenerate: " << (report.degenerate ? 1 : 0) << "\n";
  for (const auto& [label, count] : report.class_counts)
    os << "class " << label << ": " << count << "\n";
  if (!os) throw IoError("write failed on " + path.string());
}

}  // namespace dymacl
