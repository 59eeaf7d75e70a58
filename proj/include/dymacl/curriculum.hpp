#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "dymacl/env.hpp"
#include "dymacl/learners.hpp"
#include "dymacl/replay.hpp"
#include "dymacl/transfer.hpp"

namespace dymacl {

struct TaskSpec {
  std::size_t team_a = 0;
  std::size_t team_b = 0;
  std::size_t map_side = 0;  // 0 -> auto
  std::size_t budget_steps = 0;
};

struct CurriculumSpec {
  std::vector<TaskSpec> tasks;
  TransferMode transfer;
  LearnerConfig learner;
  DyanSpec dyan;
  ReplayConfig replay;
  WorldConfig env;  // template; team sizes / map side / seed come from the task
  std::size_t eval_episodes = 100;
  std::uint64_t seed = 0;
  bool self_play = false;  // opponent uses the learner's own policy instead of the script

  void validate() const;  // throws ConfigError; warns on shrinking agent counts
  WorldConfig world_for(std::size_t task_index) const;
};

// JSON config file with a documented schema; unknown keys are rejected and
// missing keys fall back to the defaults above.
CurriculumSpec parse_spec(const std::filesystem::path& config_file);
CurriculumSpec parse_spec_string(const std::string& json_text);
std::string spec_to_json(const CurriculumSpec& spec);

struct EvalMetrics {
  double win_rate = 0.0;
  double mean_survivors = 0.0;
  double survivors_se = 0.0;
  double mean_kills = 0.0;
  double kills_se = 0.0;
  double mean_reward = 0.0;
  double reward_se = 0.0;
  std::size_t episodes = 0;
};

struct EpisodeLog {
  std::size_t episode = 0;
  std::size_t steps = 0;
  double epsilon = 0.0;
  double loss = 0.0;  // mean update loss within the episode, 0 before training starts
  double reward = 0.0;
  Outcome outcome = Outcome::Ongoing;
};

struct TaskReport {
  std::size_t task_index = 0;
  std::string checkpoint_path;
  std::uint64_t reload_source_hash = 0;  // hash of the reloaded checkpoint, 0 if fresh
  std::vector<EpisodeLog> curve;
  EvalMetrics eval;
  std::size_t env_steps = 0;
};

struct RunReport {
  std::vector<TaskReport> tasks;
  double wall_seconds = 0.0;  // informational; excluded from the summary file
};

// Transfer inputs for one task's training.
struct TransferContext {
  TransferMode mode;
  std::vector<const TaskBuffer*> reuse_buffers;  // D_1..D_k incl. current (BufferReuse)
  const TeacherSet* teachers = nullptr;          // Distillation
};

struct TrainTaskResult {
  std::vector<EpisodeLog> curve;
  std::size_t env_steps = 0;
};

// Core training loop for one task: full episodes until the step budget is
// spent (so consumption overshoots by at most one episode), storing
// transitions in `current` and updating every cfg.train_every env steps.
// Fully deterministic given `seed`.
TrainTaskResult train_task(LearnerState& state, const WorldConfig& task_world,
                           TaskBuffer& current, const TransferContext& ctx,
                           std::size_t budget_steps, std::uint64_t seed,
                           bool self_play = false);

// Seed stream for task k of a run; exposed so a single-task curriculum can be
// reproduced by calling train_task directly.
std::uint64_t task_train_seed(std::uint64_t run_seed, std::size_t task_index);

// Greedy (epsilon = 0) evaluation against the scripted opponent.
EvalMetrics evaluate(const DyanParams& params, const WorldConfig& task,
                     std::size_t episodes, std::uint64_t seed, bool carry_hidden = false);

// Execute the whole curriculum, writing checkpoints, per-task curve CSVs, a
// config echo and a summary file into out_dir.
RunReport run(const CurriculumSpec& spec, const std::filesystem::path& out_dir);

void write_curve_csv(const std::vector<EpisodeLog>& curve, const std::filesystem::path& path);
void write_summary(const CurriculumSpec& spec, const RunReport& report,
                   const std::filesystem::path& path);

std::string library_version();

}  // namespace dymacl
