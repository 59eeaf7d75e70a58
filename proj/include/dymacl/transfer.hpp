#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dymacl/dyan.hpp"
#include "dymacl/learners.hpp"
#include "dymacl/replay.hpp"

namespace dymacl {

enum class TransferKind { None, BufferReuse, Distillation, ModelReload };

TransferKind transfer_kind_from_string(const std::string& s);
std::string to_string(TransferKind k);

struct TransferMode {
  TransferKind kind = TransferKind::None;
  double omega = 1.0;          // distillation temperature (teacher side)
  double distill_weight = 1.0; // multiplier on the distillation term
  // Off by default: also divide the student logits by omega.
  bool symmetric_temperature = false;
  // Off by default: evaluate task-i samples with a frozen task-i teacher
  // inside the buffer-reuse sum instead of the current network.
  bool frozen_teacher_reuse = false;

  void validate() const;
};

// Frozen previous-task networks. Never mutated while a student trains.
struct TeacherSet {
  std::vector<DyanParams> teachers;

  bool empty() const { return teachers.empty(); }
  std::size_t size() const { return teachers.size(); }
};

// Sum over tasks of the per-task TD loss, every task's samples evaluated by
// the current online/target pair; with one buffer this is exactly the plain
// TD loss on that batch. When `frozen_teachers` is given (the literal
// per-task-network reading, enabled by TransferMode::frozen_teacher_reuse),
// prior tasks' terms are computed by their frozen networks instead and enter
// the sum as constants, carrying no gradient.
Graph::NodeId build_buffer_reuse_loss(Graph& g, const DyanNodes& online_nodes,
                                      const MultiBatch& batches, const DyanParams& online,
                                      const DyanParams& target, const LearnerConfig& cfg,
                                      const TeacherSet* frozen_teachers = nullptr);

double buffer_reuse_loss(const MultiBatch& batches, const DyanParams& online,
                         const DyanParams& target, const LearnerConfig& cfg);

// Eq-style distillation: for each teacher i and observation s,
//   sum_a softmax(q_i(s)/omega)_a * [ln softmax(q_i(s)/omega)_a
//                                    - ln softmax(q_student(s))_a],
// averaged over nothing (plain double sum). Teachers are graph constants.
Graph::NodeId build_distillation_loss(Graph& g, const DyanNodes& student_nodes,
                                      const DyanSpec& spec, const TeacherSet& teachers,
                                      const std::vector<Observation>& states,
                                      const TransferMode& mode);

double distillation_loss(const TeacherSet& teachers, const DyanParams& student,
                         const std::vector<Observation>& states, double omega);

// Initialize the next task's learner from a checkpoint: online and target
// both take the stored parameters, the optimizer and the epsilon schedule
// start fresh. Incompatible specs raise CheckpointError naming the field.
LearnerState model_reload(const std::filesystem::path& checkpoint, const LearnerConfig& cfg,
                          const DyanSpec& expected);

void check_spec_compatible(const DyanSpec& loaded, const DyanSpec& expected);

}  // namespace dymacl
