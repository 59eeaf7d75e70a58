#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dymacl/dyan.hpp"
#include "dymacl/replay.hpp"
#include "dymacl/tensor.hpp"

namespace dymacl {

enum class Algorithm { IQL, VDN };

Algorithm algorithm_from_string(const std::string& s);
std::string to_string(Algorithm a);

struct LearnerConfig {
  Algorithm algorithm = Algorithm::IQL;
  double gamma = 0.98;
  std::size_t batch_size = 32;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  std::size_t epsilon_anneal_episodes = 99;
  std::size_t target_update_interval = 20;
  double grad_clip_norm = 10.0;
  OptimizerConfig optimizer;      // Adam, lr 1e-4 by default
  bool recurrent_training = false;
  std::size_t train_every = 1;      // env steps between update rounds
  std::size_t updates_per_step = 1; // gradient updates per round (replay ratio)

  void validate() const;
};

// eps(e) = max(end, start - e * (start-end)/anneal), annealed per episode.
double epsilon_at(const LearnerConfig& cfg, std::size_t episode);

// Epsilon-greedy over q-values; greedy ties break to the lowest index.
int select_action(const std::vector<double>& q_values, double epsilon, Rng& rng);

// Online/target parameter pair with optimizer state. All teammates act from
// the same online snapshot; the target is refreshed every
// target_update_interval successful updates.
struct LearnerState {
  LearnerConfig cfg;
  DyanParams online;
  DyanParams target;
  OptimizerState optimizer;
  std::uint64_t updates = 0;
  double epsilon = 1.0;

  static LearnerState fresh(const LearnerConfig& cfg, const DyanSpec& spec,
                            std::uint64_t seed);
};

// Builds the TD loss for a batch on the given graph. Per transition the
// squared TD error is averaged over the agents stored in it (IQL) or taken on
// the summed team value (VDN); transitions are summed over the batch.
// Targets come from `target` through the plain forward path (constants).
Graph::NodeId build_td_loss(Graph& g, const DyanNodes& online_nodes,
                            const std::vector<Transition>& batch, const DyanParams& online,
                            const DyanParams& target, const LearnerConfig& cfg);

// Convenience scalar evaluations (used by tests and oracles).
double iql_loss(const std::vector<Transition>& batch, const DyanParams& online,
                const DyanParams& target, double gamma);
double vdn_loss(const std::vector<Transition>& batch, const DyanParams& online,
                const DyanParams& target, double gamma);

struct StepReport {
  bool applied = false;
  double loss = 0.0;
  double grad_norm = 0.0;
  bool target_refreshed = false;
};

// Total-loss builder: receives the graph and the online parameter nodes and
// returns the scalar loss node.
using LossBuilder = std::function<Graph::NodeId(Graph&, const DyanNodes&)>;

// One update: build loss, backward, clip to cfg.grad_clip_norm, optimizer
// step, refresh target every cfg.target_update_interval updates. A
// NumericError anywhere aborts the step without touching the parameters.
StepReport train_step(LearnerState& state, const LossBuilder& build_total_loss);

// Plain DQN/VDN step on one batch plus an optional extra loss term.
StepReport train_step(LearnerState& state, const std::vector<Transition>& batch,
                      const LossBuilder* extra_loss = nullptr);

}  // namespace dymacl
