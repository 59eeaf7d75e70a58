#include "dymacl/learners.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace dymacl {

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "iql") return Algorithm::IQL;
  if (s == "vdn") return Algorithm::VDN;
  throw ParseError("unknown algorithm: " + s);
}

std::string to_string(Algorithm a) { return a == Algorithm::IQL ? "iql" : "vdn"; }

void LearnerConfig::validate() const {
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must be in [0,1]");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 || epsilon_end > 1.0)
    throw ConfigError("epsilon must be in [0,1]");
  if (batch_size == 0) throw ConfigError("batch_size must be > 0");
  if (target_update_interval == 0) throw ConfigError("target_update_interval must be > 0");
  if (epsilon_anneal_episodes == 0) throw ConfigError("epsilon_anneal_episodes must be > 0");
  if (train_every == 0) throw ConfigError("train_every must be > 0");
  if (updates_per_step == 0) throw ConfigError("updates_per_step must be > 0");
  if (grad_clip_norm <= 0.0) throw ConfigError("grad_clip_norm must be > 0");
}

double epsilon_at(const LearnerConfig& cfg, std::size_t episode) {
  double slope = (cfg.epsilon_start - cfg.epsilon_end) /
                 static_cast<double>(cfg.epsilon_anneal_episodes);
  return std::max(cfg.epsilon_end, cfg.epsilon_start - static_cast<double>(episode) * slope);
}

int select_action(const std::vector<double>& q_values, double epsilon, Rng& rng) {
  if (q_values.empty()) throw ContractError("select_action on empty q vector");
  if (epsilon < 0.0 || epsilon > 1.0) throw ContractError("epsilon out of [0,1]");
  if (epsilon > 0.0 && rng.next_bernoulli(epsilon))
    return static_cast<int>(rng.next_index(q_values.size()));
  int best = 0;
  for (std::size_t i = 1; i < q_values.size(); ++i)
    if (q_values[i] > q_values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

LearnerState LearnerState::fresh(const LearnerConfig& cfg, const DyanSpec& spec,
                                 std::uint64_t seed) {
  cfg.validate();
  DyanParams online = dyan_build(spec, seed);
  DyanParams target = online;
  OptimizerState opt(cfg.optimizer, online.parameters());
  return LearnerState{cfg, std::move(online), std::move(target), std::move(opt), 0,
                      cfg.epsilon_start};
}

namespace {

const Tensor& hidden_for(const Transition& t, std::size_t slot, const Tensor& zero,
                         bool recurrent, bool next) {
  const std::vector<Tensor>& store = next ? t.next_hidden : t.hidden;
  if (recurrent && slot < store.size() && !store[slot].empty()) return store[slot];
  return zero;
}

// Bootstrap target for every agent stored in the transition, via the plain
// forward path of the target network. Entry i corresponds to t.agent_ids[i];
// terminal entries (episode done or agent dead afterwards) use target 0.
std::vector<double> agent_targets(const Transition& t, const DyanParams& target, double gamma,
                                  bool recurrent) {
  Tensor zero = dyan_zero_hidden(target.spec);
  std::unordered_map<int, std::size_t> next_slot;
  for (std::size_t i = 0; i < t.next_agent_ids.size(); ++i)
    next_slot[t.next_agent_ids[i]] = i;

  std::vector<double> ys(t.agent_ids.size());
  for (std::size_t i = 0; i < t.agent_ids.size(); ++i) {
    double y = t.rewards[i];
    auto it = next_slot.find(t.agent_ids[i]);
    if (!t.done && it != next_slot.end()) {
      const Observation& next_obs = t.next_obs[it->second];
      ForwardOutput fo = dyan_forward(target, next_obs,
                                      hidden_for(t, it->second, zero, recurrent, true));
      y += gamma * *std::max_element(fo.q_values.begin(), fo.q_values.end());
    }
    ys[i] = y;
  }
  return ys;
}

void check_batch(const std::vector<Transition>& batch) {
  if (batch.empty()) throw ContractError("loss on empty batch");
  for (const Transition& t : batch) {
    if (t.agent_ids.empty()) throw ContractError("transition with no agents");
    if (t.obs.size() != t.agent_ids.size() || t.actions.size() != t.agent_ids.size() ||
        t.rewards.size() != t.agent_ids.size())
      throw ContractError("transition field lengths disagree");
  }
}

}  // namespace

Graph::NodeId build_td_loss(Graph& g, const DyanNodes& online_nodes,
                            const std::vector<Transition>& batch, const DyanParams& online,
                            const DyanParams& target, const LearnerConfig& cfg) {
  check_batch(batch);
  const DyanSpec& spec = online.spec;
  Tensor zero = dyan_zero_hidden(spec);

  Graph::NodeId total = -1;
  for (const Transition& t : batch) {
    std::vector<double> ys = agent_targets(t, target, cfg.gamma, cfg.recurrent_training);

    Graph::NodeId per_transition;
    if (cfg.algorithm == Algorithm::IQL) {
      Graph::NodeId acc = -1;
      for (std::size_t i = 0; i < t.agent_ids.size(); ++i) {
        Graph::NodeId hid = g.constant(
            hidden_for(t, i, zero, cfg.recurrent_training, false));
        DyanGraphOutput fo = dyan_forward_graph(g, online_nodes, spec, t.obs[i], hid);
        Graph::NodeId q_sa = g.pick(fo.q_values, static_cast<std::size_t>(t.actions[i]));
        Graph::NodeId err = g.square(g.add_scalar(q_sa, -ys[i]));
        acc = acc < 0 ? err : g.add(acc, err);
      }
      per_transition = g.scale(acc, 1.0 / static_cast<double>(t.agent_ids.size()));
    } else {
      // VDN: squared error on the summed team value against the team reward.
      Graph::NodeId q_tot = -1;
      double y = t.team_reward;
      for (std::size_t i = 0; i < t.agent_ids.size(); ++i) {
        Graph::NodeId hid = g.constant(
            hidden_for(t, i, zero, cfg.recurrent_training, false));
        DyanGraphOutput fo = dyan_forward_graph(g, online_nodes, spec, t.obs[i], hid);
        Graph::NodeId q_sa = g.pick(fo.q_values, static_cast<std::size_t>(t.actions[i]));
        q_tot = q_tot < 0 ? q_sa : g.add(q_tot, q_sa);
      }
      if (!t.done) {
        Tensor tzero = dyan_zero_hidden(target.spec);
        for (std::size_t i = 0; i < t.next_agent_ids.size(); ++i) {
          ForwardOutput fo = dyan_forward(
              target, t.next_obs[i], hidden_for(t, i, tzero, cfg.recurrent_training, true));
          y += cfg.gamma * *std::max_element(fo.q_values.begin(), fo.q_values.end());
        }
      }
      per_transition = g.square(g.add_scalar(q_tot, -y));
    }
    total = total < 0 ? per_transition : g.add(total, per_transition);
  }
  return total;
}

namespace {

double td_loss_value(const std::vector<Transition>& batch, const DyanParams& online,
                     const DyanParams& target, double gamma, Algorithm alg) {
  LearnerConfig cfg;
  cfg.algorithm = alg;
  cfg.gamma = gamma;
  Graph g;
  DyanNodes nodes = dyan_add_params(g, online, false);
  Graph::NodeId loss = build_td_loss(g, nodes, batch, online, target, cfg);
  return g.value(loss).at(0);
}

}  // namespace

double iql_loss(const std::vector<Transition>& batch, const DyanParams& online,
                const DyanParams& target, double gamma) {
  return td_loss_value(batch, online, target, gamma, Algorithm::IQL);
}

double vdn_loss(const std::vector<Transition>& batch, const DyanParams& online,
                const DyanParams& target, double gamma) {
  return td_loss_value(batch, online, target, gamma, Algorithm::VDN);
}

StepReport train_step(LearnerState& state, const LossBuilder& build_total_loss) {
  StepReport report;
  std::vector<Tensor> grads;
  try {
    Graph g;
    DyanNodes nodes = dyan_add_params(g, state.online, true);
    Graph::NodeId loss = build_total_loss(g, nodes);
    if (g.value(loss).size() != 1) throw ContractError("total loss must be scalar");
    report.loss = g.value(loss).at(0);
    g.backward(loss);
    grads = dyan_collect_grads(g, nodes, state.online.spec);
    report.grad_norm = clip_grad_norm(grads, state.cfg.grad_clip_norm);
  } catch (const NumericError&) {
    return report;  // abort without touching parameters
  }

  state.optimizer.step(state.online.parameters(), grads);
  ++state.updates;
  if (state.updates % state.cfg.target_update_interval == 0) {
    state.target = state.online;
    report.target_refreshed = true;
  }
  report.applied = true;
  return report;
}

StepReport train_step(LearnerState& state, const std::vector<Transition>& batch,
                      const LossBuilder* extra_loss) {
  return train_step(state, [&](Graph& g, const DyanNodes& nodes) {
    Graph::NodeId loss =
        build_td_loss(g, nodes, batch, state.online, state.target, state.cfg);
    if (extra_loss != nullptr) loss = g.add(loss, (*extra_loss)(g, nodes));
    return loss;
  });
}

}  // namespace dymacl
