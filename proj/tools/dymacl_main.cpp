#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dymacl/analysis.hpp"
#include "dymacl/curriculum.hpp"
#include "dymacl/dyan.hpp"
#include "dymacl/errors.hpp"
#include "dymacl/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;
constexpr int kVerifyFailure = 3;

struct TaskArg {
  std::size_t team_a = 0;
  std::size_t team_b = 0;
  std::size_t map_side = 0;
};

// "3v3" or "5v5@13"
TaskArg parse_task_arg(const std::string& s) {
  TaskArg t;
  std::size_t v = s.find('v');
  if (v == std::string::npos || v == 0) throw dymacl::ParseError("task must look like 3v3[@side]");
  std::size_t at = s.find('@');
  try {
    t.team_a = std::stoul(s.substr(0, v));
    t.team_b = std::stoul(s.substr(v + 1, at == std::string::npos ? std::string::npos : at - v - 1));
    if (at != std::string::npos) t.map_side = std::stoul(s.substr(at + 1));
  } catch (const std::logic_error&) {
    throw dymacl::ParseError("task must look like 3v3[@side]");
  }
  if (t.team_a == 0 || t.team_b == 0) throw dymacl::ParseError("task team sizes must be >= 1");
  return t;
}

void atomic_rename(const std::filesystem::path& tmp, const std::filesystem::path& final_path) {
  std::filesystem::rename(tmp, final_path);
}

int cmd_train(const std::string& config, const std::string& out, bool seed_set,
              std::uint64_t seed, const std::string& transfer) {
  dymacl::CurriculumSpec spec = dymacl::parse_spec(config);
  if (seed_set) spec.seed = seed;
  if (!transfer.empty()) spec.transfer.kind = dymacl::transfer_kind_from_string(transfer);
  dymacl::RunReport report = dymacl::run(spec, out);
  std::printf("completed %zu task(s) in %.1f s; report in %s\n", report.tasks.size(),
              report.wall_seconds, out.c_str());
  for (const dymacl::TaskReport& t : report.tasks) {
    std::printf("task %zu: win_rate %.3f survivors %.2f kills %.2f reward %.3f\n", t.task_index,
                t.eval.win_rate, t.eval.mean_survivors, t.eval.mean_kills, t.eval.mean_reward);
  }
  return kOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& task, std::size_t episodes,
             std::uint64_t seed, std::size_t max_steps, const std::string& out_csv) {
  TaskArg t = parse_task_arg(task);
  dymacl::WorldConfig wc;
  wc.team_a_size = t.team_a;
  wc.team_b_size = t.team_b;
  wc.map_side = t.map_side;
  wc.max_steps = max_steps;
  dymacl::DyanParams params = dymacl::dyan_load(checkpoint);
  dymacl::EvalMetrics m = dymacl::evaluate(params, wc, episodes, seed);
  std::printf("episodes   %zu\n", m.episodes);
  std::printf("win_rate   %.4f\n", m.win_rate);
  std::printf("survivors  %.3f +/- %.3f\n", m.mean_survivors, m.survivors_se);
  std::printf("kills      %.3f +/- %.3f\n", m.mean_kills, m.kills_se);
  std::printf("reward     %.4f +/- %.4f\n", m.mean_reward, m.reward_se);
  if (!out_csv.empty()) {
    FILE* f = std::fopen(out_csv.c_str(), "w");
    if (f == nullptr) throw dymacl::IoError("cannot write " + out_csv);
    std::fprintf(f, "episodes,win_rate,survivors,survivors_se,kills,kills_se,reward,reward_se\n");
    std::fprintf(f, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.episodes, m.win_rate,
                 m.mean_survivors, m.survivors_se, m.mean_kills, m.kills_se, m.mean_reward,
                 m.reward_se);
    std::fclose(f);
  }
  return kOk;
}

int cmd_analyze(const std::string& checkpoint, const std::string& scenarios,
                const std::string& out, std::size_t samples, std::uint64_t seed,
                const std::string& metric) {
  std::vector<dymacl::WorldConfig> scenario_configs;
  std::string rest = scenarios;
  while (!rest.empty()) {
    std::size_t comma = rest.find(',');
    std::string tok = rest.substr(0, comma);
    rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
    if (tok.empty()) continue;
    std::size_t n = 0;
    try {
      n = std::stoul(tok);
    } catch (const std::logic_error&) {
      throw dymacl::ParseError("scenario sizes must be integers: " + tok);
    }
    dymacl::WorldConfig wc;
    wc.team_a_size = n;
    wc.team_b_size = n;
    scenario_configs.push_back(wc);
  }
  if (scenario_configs.size() < 2)
    throw dymacl::AnalysisError("analyze needs at least two scenario sizes");

  dymacl::DyanParams params = dymacl::dyan_load(checkpoint);
  std::vector<dymacl::SemanticSample> samples_out =
      dymacl::collect_embeddings(params, scenario_configs, samples, seed);
  dymacl::DistanceReport report =
      dymacl::distance_report(samples_out, dymacl::distance_metric_from_string(metric));

  std::filesystem::create_directories(out);
  std::filesystem::path embed_path = std::filesystem::path(out) / "embeddings.csv";
  std::filesystem::path report_path = std::filesystem::path(out) / "distance_report.txt";
  dymacl::export_samples_csv(samples_out, embed_path.string() + ".tmp");
  atomic_rename(embed_path.string() + ".tmp", embed_path);
  dymacl::export_report(report, report_path.string() + ".tmp");
  atomic_rename(report_path.string() + ".tmp", report_path);

  std::printf("samples %zu classes %zu\n", samples_out.size(), report.class_counts.size());
  std::printf("intra %.6f inter %.6f ratio %.6f%s\n", report.intra, report.inter, report.ratio,
              report.degenerate ? " (degenerate)" : "");
  return kOk;
}

int cmd_verify(bool inject_fault) {
  std::vector<dymacl::SuiteResult> results = dymacl::run_verification(inject_fault);
  std::size_t width = 0;
  for (const dymacl::SuiteResult& r : results) width = std::max(width, r.name.size());
  for (const dymacl::SuiteResult& r : results) {
    std::printf("%-*s  %s  %s\n", static_cast<int>(width), r.name.c_str(),
                r.passed ? "PASS" : "FAIL", r.detail.c_str());
  }
  return dymacl::all_passed(results) ? kOk : kVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DyAN curriculum training for two-team gridworld battles"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Run a curriculum from a config file");
  std::string train_config, train_out, train_transfer;
  std::uint64_t train_seed = 0;
  bool train_seed_set = false;
  train->add_option("--config", train_config, "Curriculum config (JSON)")->required();
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_option("--seed", train_seed, "Override the config seed")
      ->each([&](const std::string&) { train_seed_set = true; });
  train->add_option("--transfer", train_transfer, "Override transfer mode")
      ->check(CLI::IsMember({"none", "reuse", "distill", "reload"}));

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a task");
  std::string eval_ckpt, eval_task = "3v3", eval_csv;
  std::size_t eval_episodes = 100, eval_max_steps = 300;
  std::uint64_t eval_seed = 0;
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
  eval->add_option("--task", eval_task, "Task spec, e.g. 5v5 or 5v5@13");
  eval->add_option("--episodes", eval_episodes, "Evaluation episodes")
      ->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "Evaluation seed");
  eval->add_option("--max-steps", eval_max_steps, "Episode step cap");
  eval->add_option("--out", eval_csv, "Optional metrics CSV path");

  auto* analyze = app.add_subcommand("analyze", "Embedding distance analysis");
  std::string an_ckpt, an_scenarios = "3,4,5", an_out = "analysis", an_metric = "euclidean";
  std::size_t an_samples = 200;
  std::uint64_t an_seed = 0;
  analyze->add_option("--checkpoint", an_ckpt, "Checkpoint file")->required();
  analyze->add_option("--scenarios", an_scenarios, "Comma-separated team sizes");
  analyze->add_option("--out", an_out, "Output directory");
  analyze->add_option("--samples", an_samples, "Samples per scenario");
  analyze->add_option("--seed", an_seed, "Rollout seed");
  analyze->add_option("--metric", an_metric, "Distance metric")
      ->check(CLI::IsMember({"euclidean", "cosine"}));

  auto* verify = app.add_subcommand("verify", "Run the correctness suites");
  bool inject_fault = false;
  verify->add_flag("--inject-fault", inject_fault,
                   "Corrupt one gradient on purpose (harness self-test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (train->parsed())
      return cmd_train(train_config, train_out, train_seed_set, train_seed, train_transfer);
    if (eval->parsed())
      return cmd_eval(eval_ckpt, eval_task, eval_episodes, eval_seed, eval_max_steps, eval_csv);
    if (analyze->parsed())
      return cmd_analyze(an_ckpt, an_scenarios, an_out, an_samples, an_seed, an_metric);
    if (verify->parsed()) return cmd_verify(inject_fault);
  } catch (const dymacl::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const dymacl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
