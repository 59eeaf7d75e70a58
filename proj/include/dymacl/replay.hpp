#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dymacl/env.hpp"
#include "dymacl/rng.hpp"
#include "dymacl/tensor.hpp"

namespace dymacl {

// One learning-team step. Observation/action/reward entries are aligned with
// agent_ids (the team members alive when the step was taken); next_obs is
// aligned with next_agent_ids (members still alive afterwards). hidden /
// next_hidden are populated only when recurrent training stores them.
struct Transition {
  int task_id = 0;
  std::vector<int> agent_ids;
  std::vector<Observation> obs;
  std::vector<int> actions;
  std::vector<double> rewards;
  double team_reward = 0.0;
  std::vector<int> next_agent_ids;
  std::vector<Observation> next_obs;
  bool done = false;
  std::vector<Tensor> hidden;
  std::vector<Tensor> next_hidden;
};

struct ReplayConfig {
  std::size_t capacity = 100000;
  std::size_t min_fill = 5000;  // sampling is not ready below this fill level
};

// Per-task ring buffer with uniform, seeded sampling.
class TaskBuffer {
 public:
  TaskBuffer(int task_id, ReplayConfig cfg = {});

  void push(Transition t);  // ProtocolError if t.task_id mismatches

  int task_id() const { return task_id_; }
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return cfg_.capacity; }
  bool ready() const { return items_.size() >= cfg_.min_fill; }
  const Transition& at(std::size_t i) const;  // insertion order, oldest first

  // Uniform with replacement; nullopt when below min_fill.
  std::optional<std::vector<Transition>> sample(std::size_t batch, Rng& rng) const;

  void dump(const std::filesystem::path& path) const;
  static TaskBuffer restore(const std::filesystem::path& path);

 private:
  int task_id_;
  ReplayConfig cfg_;
  std::vector<Transition> items_;  // ring storage
  std::size_t head_ = 0;           // index of oldest element once full
};

struct MultiBatch {
  bool ready = false;
  int not_ready_task = -1;  // offending task when !ready
  std::vector<int> task_ids;
  std::vector<std::vector<Transition>> per_task;
};

// Exactly `batch` transitions from each buffer, in buffer order; if any
// buffer is below its threshold the result names the first offending task.
MultiBatch multi_sample(const std::vector<const TaskBuffer*>& buffers, std::size_t batch,
                        Rng& rng);

// Zero-pad an observation to fixed neighbor slot counts and flatten:
// [env | self | teammates then zeros | enemies then zeros]. Real neighbors
// keep their stored order; ShapeError when they exceed the slots.
std::vector<double> pad_to(const Observation& obs, std::size_t teammate_slots,
                           std::size_t enemy_slots);

std::size_t padded_width(std::size_t teammate_slots, std::size_t enemy_slots);

}  // namespace dymacl
