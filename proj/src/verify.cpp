#include "dymacl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "dymacl/curriculum.hpp"
#include "dymacl/dyan.hpp"
#include "dymacl/env.hpp"
#include "dymacl/learners.hpp"
#include "dymacl/tensor.hpp"
#include "dymacl/transfer.hpp"

namespace dymacl {

namespace {

#ifdef DYMACL_FAULT_INJECTION
constexpr bool kBuildFault = true;
#else
constexpr bool kBuildFault = false;
#endif

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-6});
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

// Central finite differences over every leaf coordinate against the
// backward-pass gradients. The difference quotient touches only forward
// evaluations, so it is independent of the backward implementation.
using LeafLoss = std::function<Graph::NodeId(Graph&, const std::vector<Graph::NodeId>&)>;

double max_fd_rel_err(const std::vector<Tensor>& leaves, const LeafLoss& loss_fn,
                      double h, bool fault = false) {
  Graph g;
  std::vector<Graph::NodeId> ids;
  for (const Tensor& t : leaves) ids.push_back(g.leaf(t));
  Graph::NodeId loss = loss_fn(g, ids);
  g.backward(loss);
  std::vector<Tensor> analytic;
  for (Graph::NodeId id : ids) analytic.push_back(g.grad(id));
  if (fault && !analytic.empty() && analytic[0].size() > 0) analytic[0].at(0) += 0.5;

  auto eval = [&](const std::vector<Tensor>& ts) {
    Graph ge;
    std::vector<Graph::NodeId> cids;
    for (const Tensor& t : ts) cids.push_back(ge.constant(t));
    return ge.value(loss_fn(ge, cids)).at(0);
  };

  double worst = 0.0;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    for (std::size_t i = 0; i < leaves[k].size(); ++i) {
      std::vector<Tensor> plus = leaves;
      std::vector<Tensor> minus = leaves;
      plus[k].at(i) += h;
      minus[k].at(i) -= h;
      double fd = (eval(plus) - eval(minus)) / (2.0 * h);
      worst = std::max(worst, rel_err(analytic[k].at(i), fd));
    }
  }
  return worst;
}

// FD over all DyanParams coordinates against graph gradients of scalar_fn.
double dyan_fd_max_rel_err(const DyanParams& params,
                           const std::function<Graph::NodeId(Graph&, const DyanNodes&)>& build,
                           double h) {
  Graph g;
  DyanNodes nodes = dyan_add_params(g, params, true);
  Graph::NodeId loss = build(g, nodes);
  g.backward(loss);
  std::vector<Tensor> analytic = dyan_collect_grads(g, nodes, params.spec);

  auto eval = [&](const DyanParams& p) {
    Graph ge;
    DyanNodes n = dyan_add_params(ge, p, false);
    return ge.value(build(ge, n)).at(0);
  };

  double worst = 0.0;
  DyanParams work = params;
  std::vector<Tensor*> tensors = work.parameters();
  std::size_t slot = 0;
  for (Tensor* t : tensors) {
    for (std::size_t i = 0; i < t->size(); ++i) {
      double keep = t->at(i);
      t->at(i) = keep + h;
      double up = eval(work);
      t->at(i) = keep - h;
      double down = eval(work);
      t->at(i) = keep;
      double fd = (up - down) / (2.0 * h);
      worst = std::max(worst, rel_err(analytic[slot].at(i), fd));
    }
    ++slot;
  }
  return worst;
}

Observation random_obs(Rng& rng, std::size_t env_self, std::size_t nbr_width,
                       std::size_t teammates, std::size_t enemies) {
  Observation obs;
  obs.env_features.clear();
  obs.self_features.clear();
  for (std::size_t i = 0; i < env_self; ++i)
    (i < env_self / 2 ? obs.env_features : obs.self_features).push_back(rng.uniform(-1, 1));
  for (std::size_t k = 0; k < teammates; ++k) {
    std::vector<double> f;
    for (std::size_t i = 0; i < nbr_width; ++i) f.push_back(rng.uniform(-1, 1));
    obs.teammate_features.push_back(std::move(f));
  }
  for (std::size_t k = 0; k < enemies; ++k) {
    std::vector<double> f;
    for (std::size_t i = 0; i < nbr_width; ++i) f.push_back(rng.uniform(-1, 1));
    obs.enemy_features.push_back(std::move(f));
  }
  return obs;
}

DyanSpec tiny_spec(Aggregation agg) {
  DyanSpec spec;
  spec.env_self_width = 8;
  spec.neighbor_feature_width = 3;
  spec.hidden_units = 5;
  spec.num_actions = 4;
  spec.aggregation = agg;
  return spec;
}

SuiteResult per_op_gradients(bool fault) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(derive_seed(seed, "verify-ops"));
    // dense, all activations
    for (Activation act :
         {Activation::Identity, Activation::Relu, Activation::Tanh, Activation::Sigmoid}) {
      Tensor w = init_matrix(3, 4, rng);
      Tensor b = init_vector(3, 4, rng);
      Tensor x = Tensor::vector({rng.uniform(0.2, 1), rng.uniform(0.2, 1), rng.uniform(0.2, 1),
                                 rng.uniform(0.2, 1)});
      worst = std::max(worst, max_fd_rel_err(
                                  {w, b, x},
                                  [act](Graph& g, const std::vector<Graph::NodeId>& ids) {
                                    return g.sum(g.square(
                                        g.dense(ids[2], ids[0], ids[1], act)));
                                  },
                                  1e-5, fault));
      fault = false;  // one corrupted comparison is enough for the self-test
    }
    // gru_step: gradients w.r.t. every parameter and both inputs
    {
      std::vector<Tensor> leaves;
      for (int i = 0; i < 9; ++i)
        leaves.push_back(i % 3 == 2 ? init_vector(3, 4, rng)
                                    : (i % 3 == 1 ? init_matrix(3, 3, rng)
                                                  : init_matrix(3, 4, rng)));
      leaves.push_back(Tensor::vector({rng.uniform(-1, 1), rng.uniform(-1, 1),
                                       rng.uniform(-1, 1), rng.uniform(-1, 1)}));  // x
      leaves.push_back(
          Tensor::vector({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}));  // h
      worst = std::max(
          worst, max_fd_rel_err(
                     leaves,
                     [](Graph& g, const std::vector<Graph::NodeId>& ids) {
                       Graph::GruNodes p{ids[0], ids[1], ids[2], ids[3], ids[4],
                                         ids[5], ids[6], ids[7], ids[8]};
                       return g.sum(g.square(g.gru_step(ids[9], ids[10], p)));
                     },
                     1e-5));
    }
    // aggregation, all kinds, over 3 items
    for (Aggregation agg : {Aggregation::Sum, Aggregation::Mean, Aggregation::Max}) {
      std::vector<Tensor> items;
      for (int k = 0; k < 3; ++k)
        items.push_back(Tensor::vector(
            {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)}));
      worst = std::max(worst, max_fd_rel_err(
                                  items,
                                  [agg](Graph& g, const std::vector<Graph::NodeId>& ids) {
                                    return g.sum(g.square(g.aggregate(agg, ids, 3)));
                                  },
                                  1e-5));
    }
    // softmax with temperature
    {
      Tensor logits = Tensor::vector({rng.uniform(-2, 2), rng.uniform(-2, 2),
                                      rng.uniform(-2, 2), rng.uniform(-2, 2)});
      double omega = rng.uniform(0.5, 3.0);
      worst = std::max(worst,
                       max_fd_rel_err(
                           {logits},
                           [omega](Graph& g, const std::vector<Graph::NodeId>& ids) {
                             Graph::NodeId y = g.softmax_t(ids[0], omega);
                             return g.sum(g.square(y));
                           },
                           1e-5));
    }
  }
  return {"gradients/per-op", worst < 1e-4, "max rel err " + fmt("%.3g", worst)};
}

SuiteResult full_dyan_gradients() {
  double worst = 0.0;
  for (Aggregation agg : {Aggregation::Sum, Aggregation::Mean, Aggregation::Max}) {
    DyanSpec spec = tiny_spec(agg);
    for (std::size_t neighbors : {0u, 1u, 3u}) {
      for (std::uint64_t seed = 0; seed < 2; ++seed) {
        DyanParams params = dyan_build(spec, derive_seed(seed, "verify-dyan"));
        Rng rng(derive_seed(seed, 77 + neighbors));
        Observation obs = random_obs(rng, spec.env_self_width, spec.neighbor_feature_width,
                                     neighbors, neighbors);
        std::vector<double> targets;
        for (std::size_t a = 0; a < spec.num_actions; ++a) targets.push_back(rng.uniform(-1, 1));
        auto build = [&](Graph& g, const DyanNodes& nodes) {
          DyanGraphOutput fo = dyan_forward_graph(g, nodes, spec, obs,
                                                  g.constant(dyan_zero_hidden(spec)));
          Graph::NodeId diff = g.sub(fo.q_values, g.constant_vector(targets));
          return g.sum(g.square(diff));
        };
        worst = std::max(worst, dyan_fd_max_rel_err(params, build, 1e-5));
      }
    }
  }
  return {"gradients/full-dyan", worst < 1e-3, "max rel err " + fmt("%.3g", worst)};
}

SuiteResult permutation_invariance() {
  double worst = 0.0;
  for (Aggregation agg : {Aggregation::Sum, Aggregation::Mean, Aggregation::Max}) {
    DyanSpec spec = tiny_spec(agg);
    DyanParams params = dyan_build(spec, 11);
    Rng rng(derive_seed(13, "verify-perm"));
    for (int trial = 0; trial < 200; ++trial) {
      Observation obs = random_obs(rng, spec.env_self_width, spec.neighbor_feature_width,
                                   2 + rng.next_index(4), 2 + rng.next_index(4));
      ForwardOutput a = dyan_forward(params, obs);
      Observation shuffled = obs;
      for (std::size_t i = shuffled.teammate_features.size(); i > 1; --i)
        std::swap(shuffled.teammate_features[i - 1],
                  shuffled.teammate_features[rng.next_index(i)]);
      for (std::size_t i = shuffled.enemy_features.size(); i > 1; --i)
        std::swap(shuffled.enemy_features[i - 1], shuffled.enemy_features[rng.next_index(i)]);
      ForwardOutput b = dyan_forward(params, shuffled);
      for (std::size_t i = 0; i < a.q_values.size(); ++i)
        worst = std::max(worst, std::fabs(a.q_values[i] - b.q_values[i]));
    }
  }
  return {"invariance/permutation", worst < 1e-9, "max |dq| " + fmt("%.3g", worst)};
}

// Independent scalar re-implementations of the two transfer losses, written
// against the plain forward path only.
double oracle_td(const std::vector<Transition>& batch, const DyanParams& online,
                 const DyanParams& target, double gamma) {
  double total = 0.0;
  for (const Transition& t : batch) {
    double per = 0.0;
    for (std::size_t i = 0; i < t.agent_ids.size(); ++i) {
      double y = t.rewards[i];
      if (!t.done) {
        for (std::size_t j = 0; j < t.next_agent_ids.size(); ++j) {
          if (t.next_agent_ids[j] != t.agent_ids[i]) continue;
          std::vector<double> q = dyan_forward(target, t.next_obs[j]).q_values;
          y += gamma * *std::max_element(q.begin(), q.end());
        }
      }
      double q_sa =
          dyan_forward(online, t.obs[i]).q_values[static_cast<std::size_t>(t.actions[i])];
      per += (q_sa - y) * (q_sa - y);
    }
    total += per / static_cast<double>(t.agent_ids.size());
  }
  return total;
}

double oracle_distill(const TeacherSet& teachers, const DyanParams& student,
                      const std::vector<Observation>& states, double omega) {
  double total = 0.0;
  for (const Observation& obs : states) {
    std::vector<double> sq = dyan_forward(student, obs).q_values;
    std::vector<double> s_log_p = log_softmax_with_temperature(sq, 1.0);
    for (const DyanParams& teacher : teachers.teachers) {
      std::vector<double> tq = dyan_forward(teacher, obs).q_values;
      std::vector<double> t_log_p = log_softmax_with_temperature(tq, omega);
      for (std::size_t a = 0; a < tq.size(); ++a)
        total += std::exp(t_log_p[a]) * (t_log_p[a] - s_log_p[a]);
    }
  }
  return total;
}

Transition synthetic_transition(Rng& rng, const DyanSpec& spec, std::size_t agents, bool done) {
  Transition t;
  for (std::size_t i = 0; i < agents; ++i) {
    t.agent_ids.push_back(static_cast<int>(i));
    t.obs.push_back(random_obs(rng, spec.env_self_width, spec.neighbor_feature_width,
                               rng.next_index(3), rng.next_index(3)));
    t.actions.push_back(static_cast<int>(rng.next_index(spec.num_actions)));
    t.rewards.push_back(rng.uniform(-1, 5));
    t.team_reward += t.rewards.back();
    if (!done) {
      t.next_agent_ids.push_back(static_cast<int>(i));
      t.next_obs.push_back(random_obs(rng, spec.env_self_width, spec.neighbor_feature_width,
                                      rng.next_index(3), rng.next_index(3)));
    }
  }
  t.done = done;
  return t;
}

SuiteResult loss_oracles() {
  DyanSpec spec = tiny_spec(Aggregation::Sum);
  DyanParams online = dyan_build(spec, 21);
  DyanParams target = dyan_build(spec, 22);
  Rng rng(derive_seed(23, "verify-loss"));

  LearnerConfig cfg;
  cfg.gamma = 0.9;

  MultiBatch mb;
  mb.ready = true;
  for (int task = 0; task < 2; ++task) {
    std::vector<Transition> batch;
    for (int j = 0; j < 4; ++j)
      batch.push_back(synthetic_transition(rng, spec, 1 + rng.next_index(3), j == 3));
    mb.task_ids.push_back(task);
    mb.per_task.push_back(std::move(batch));
  }
  double got = buffer_reuse_loss(mb, online, target, cfg);
  double expect = 0.0;
  for (const auto& batch : mb.per_task) expect += oracle_td(batch, online, target, cfg.gamma);
  bool reuse_ok = std::fabs(got - expect) < 1e-10;

  TeacherSet teachers;
  teachers.teachers.push_back(dyan_build(spec, 31));
  teachers.teachers.push_back(dyan_build(spec, 32));
  std::vector<Observation> states;
  for (int i = 0; i < 6; ++i)
    states.push_back(random_obs(rng, spec.env_self_width, spec.neighbor_feature_width,
                                rng.next_index(3), rng.next_index(3)));
  double d_got = distillation_loss(teachers, online, states, 1.7);
  double d_expect = oracle_distill(teachers, online, states, 1.7);
  bool distill_ok = std::fabs(d_got - d_expect) < 1e-10;

  TeacherSet self;
  self.teachers.push_back(online);
  bool identity_ok = distillation_loss(self, online, states, 1.0) == 0.0;

  bool nonneg_ok = true;
  for (int i = 0; i < 100 && nonneg_ok; ++i) {
    TeacherSet ts;
    ts.teachers.push_back(dyan_build(spec, 100 + static_cast<std::uint64_t>(i)));
    std::vector<Observation> ss = {random_obs(rng, spec.env_self_width,
                                              spec.neighbor_feature_width, rng.next_index(3),
                                              rng.next_index(3))};
    if (distillation_loss(ts, online, ss, rng.uniform(0.5, 2.0)) < 0.0) nonneg_ok = false;
  }

  bool ok = reuse_ok && distill_ok && identity_ok && nonneg_ok;
  std::string detail = std::string("reuse ") + (reuse_ok ? "ok" : "FAIL") + ", distill " +
                       (distill_ok ? "ok" : "FAIL") + ", identity " +
                       (identity_ok ? "ok" : "FAIL") + ", nonneg " + (nonneg_ok ? "ok" : "FAIL");
  return {"loss/oracles", ok, detail};
}

SuiteResult env_audit() {
  Rng rng(derive_seed(5, "verify-env"));
  WorldConfig wc;
  wc.team_a_size = 4;
  wc.team_b_size = 4;
  wc.map_side = 9;
  wc.max_steps = 50;
  wc.seed = 99;

  std::size_t steps = 0;
  bool ok = true;
  World world = World::reset(wc);
  std::size_t alive_before = world.alive_total();
  while (steps < 2000 && ok) {
    if (world.done()) {
      world = World::reset(wc);
      alive_before = world.alive_total();
    }
    std::map<int, Action> actions;
    for (const AgentState& a : world.agents())
      if (a.alive) actions[a.id] = Action::from_id(static_cast<int>(rng.next_index(Action::kCount)));
    StepResult res = world.step(actions);
    long long total = 0;
    for (long long u : res.reward_units) total += u;
    long long expect = StepResult::kMoveCost * res.moves +
                       StepResult::kAttackHit * res.attacks_on_enemies +
                       StepResult::kKill * res.kills +
                       StepResult::kAttackEmpty * res.attacks_on_empty +
                       StepResult::kVictim * res.victims;
    if (total != expect) ok = false;
    if (world.alive_total() > alive_before) ok = false;
    alive_before = world.alive_total();
    ++steps;
  }
  return {"env/reward-audit", ok, ok ? "2000 random steps exact" : "audit identity violated"};
}

}  // namespace

std::vector<SuiteResult> run_verification(bool inject_fault) {
  bool fault = inject_fault || kBuildFault;
  std::vector<SuiteResult> results;
  results.push_back(per_op_gradients(fault));
  results.push_back(full_dyan_gradients());
  results.push_back(permutation_invariance());
  results.push_back(loss_oracles());
  results.push_back(env_audit());
  return results;
}

bool all_passed(const std::vector<SuiteResult>& results) {
  for (const SuiteResult& r : results)
    if (!r.passed) return false;
  return true;
}

}  // namespace dymacl
