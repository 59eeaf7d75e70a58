#include "dymacl/transfer.hpp"

#include <cmath>

namespace dymacl {

TransferKind transfer_kind_from_string(const std::string& s) {
  if (s == "none") return TransferKind::None;
  if (s == "reuse" || s == "buffer_reuse") return TransferKind::BufferReuse;
  if (s == "distill" || s == "distillation") return TransferKind::Distillation;
  if (s == "reload" || s == "model_reload") return TransferKind::ModelReload;
  throw ParseError("unknown transfer mode: " + s);
}

std::string to_string(TransferKind k) {
  switch (k) {
    case TransferKind::None: return "none";
    case TransferKind::BufferReuse: return "reuse";
    case TransferKind::Distillation: return "distill";
    case TransferKind::ModelReload: return "reload";
  }
  return "none";
}

void TransferMode::validate() const {
  if (omega <= 0.0) throw DomainError("distillation temperature must be > 0");
  if (distill_weight < 0.0) throw ConfigError("distill_weight must be >= 0");
}

Graph::NodeId build_buffer_reuse_loss(Graph& g, const DyanNodes& online_nodes,
                                      const MultiBatch& batches, const DyanParams& online,
                                      const DyanParams& target, const LearnerConfig& cfg,
                                      const TeacherSet* frozen_teachers) {
  if (!batches.ready) throw ContractError("buffer_reuse_loss on a not-ready multi-batch");
  if (batches.per_task.empty()) throw ContractError("buffer_reuse_loss needs >= 1 task batch");
  std::size_t b = batches.per_task.front().size();
  for (const auto& batch : batches.per_task)
    if (batch.size() != b) throw ContractError("buffer_reuse_loss: batch size mismatch");

  Graph::NodeId total = -1;
  for (std::size_t i = 0; i < batches.per_task.size(); ++i) {
    const auto& batch = batches.per_task[i];
    Graph::NodeId term;
    bool frozen = frozen_teachers != nullptr && i + 1 < batches.per_task.size() &&
                  i < frozen_teachers->size();
    if (frozen) {
      // Literal reading: the task-i network evaluates task-i samples. The
      // term is a constant w.r.t. the student.
      const DyanParams& teacher = frozen_teachers->teachers[i];
      double v = cfg.algorithm == Algorithm::IQL ? iql_loss(batch, teacher, teacher, cfg.gamma)
                                                 : vdn_loss(batch, teacher, teacher, cfg.gamma);
      term = g.constant_scalar(v);
    } else {
      term = build_td_loss(g, online_nodes, batch, online, target, cfg);
    }
    total = total < 0 ? term : g.add(total, term);
  }
  return total;
}

double buffer_reuse_loss(const MultiBatch& batches, const DyanParams& online,
                         const DyanParams& target, const LearnerConfig& cfg) {
  Graph g;
  DyanNodes nodes = dyan_add_params(g, online, false);
  return g.value(build_buffer_reuse_loss(g, nodes, batches, online, target, cfg)).at(0);
}

Graph::NodeId build_distillation_loss(Graph& g, const DyanNodes& student_nodes,
                                      const DyanSpec& spec, const TeacherSet& teachers,
                                      const std::vector<Observation>& states,
                                      const TransferMode& mode) {
  mode.validate();
  if (teachers.empty()) throw ContractError("distillation needs at least one teacher");
  double student_omega = mode.symmetric_temperature ? mode.omega : 1.0;

  Graph::NodeId total = -1;
  for (const Observation& obs : states) {
    // Student log-probabilities (graph); one forward shared by all teachers.
    DyanGraphOutput fo = dyan_forward_graph(g, student_nodes, spec, obs,
                                            g.constant(dyan_zero_hidden(spec)));
    Graph::NodeId student_log_p = g.log_softmax_t(fo.q_values, student_omega);

    for (const DyanParams& teacher : teachers.teachers) {
      ForwardOutput tfo = dyan_forward(teacher, obs);
      std::vector<double> t_log_p = log_softmax_with_temperature(tfo.q_values, mode.omega);
      std::vector<double> t_p(t_log_p.size());
      double p_log_p = 0.0;
      for (std::size_t a = 0; a < t_log_p.size(); ++a) {
        t_p[a] = std::exp(t_log_p[a]);
        p_log_p += t_p[a] * t_log_p[a];
      }
      // KL(p_teacher || p_student) = sum p ln p - sum p ln q.
      Graph::NodeId cross = g.dot(g.constant_vector(t_p), student_log_p);
      Graph::NodeId term = g.add_scalar(g.scale(cross, -1.0), p_log_p);
      total = total < 0 ? term : g.add(total, term);
    }
  }
  if (total < 0) total = g.constant_scalar(0.0);  // empty state list
  return total;
}

double distillation_loss(const TeacherSet& teachers, const DyanParams& student,
                         const std::vector<Observation>& states, double omega) {
  TransferMode mode;
  mode.kind = TransferKind::Distillation;
  mode.omega = omega;
  Graph g;
  DyanNodes nodes = dyan_add_params(g, student, false);
  return g.value(build_distillation_loss(g, nodes, student.spec, teachers, states, mode)).at(0);
}

void check_spec_compatible(const DyanSpec& loaded, const DyanSpec& expected) {
  auto fail = [](const char* field) {
    throw CheckpointError(std::string("checkpoint spec mismatch: ") + field);
  };
  if (loaded.env_self_width != expected.env_self_width) fail("env_self_width");
  if (loaded.neighbor_feature_width != expected.neighbor_feature_width)
    fail("neighbor_feature_width");
  if (loaded.hidden_units != expected.hidden_units) fail("hidden_units");
  if (loaded.num_actions != expected.num_actions) fail("num_actions");
  if (loaded.aggregation != expected.aggregation) fail("aggregation");
  if (loaded.activation != expected.activation) fail("activation");
  if (loaded.use_gru != expected.use_gru) fail("use_gru");
  if (loaded.split_teams != expected.split_teams) fail("split_teams");
  if (loaded.vanilla != expected.vanilla) fail("vanilla");
  if (loaded.vanilla) {
    if (loaded.teammate_slots != expected.teammate_slots) fail("teammate_slots");
    if (loaded.enemy_slots != expected.enemy_slots) fail("enemy_slots");
  }
}

LearnerState model_reload(const std::filesystem::path& checkpoint, const LearnerConfig& cfg,
                          const DyanSpec& expected) {
  cfg.validate();
  DyanParams loaded = dyan_load(checkpoint);
  check_spec_compatible(loaded.spec, expected);
  DyanParams target = loaded;
  OptimizerState opt(cfg.optimizer, loaded.parameters());
  return LearnerState{cfg, std::move(loaded), std::move(target), std::move(opt), 0,
                      cfg.epsilon_start};
}

}  // namespace dymacl
