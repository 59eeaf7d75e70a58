#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thread>

#include "dymacl/curriculum.hpp"
#include "dymacl/stats.hpp"

using namespace dymacl;

namespace {

// 1v1 against an opponent that never moves. The learner has to find the
// enemy and attack it; a random policy mostly wanders and pays move costs.
struct SanityResult {
  double trained_reward = 0.0;
  double random_reward = 0.0;
};

WorldConfig sanity_world(std::uint64_t seed) {
  WorldConfig wc;
  wc.team_a_size = 1;
  wc.team_b_size = 1;
  wc.map_side = 6;
  wc.max_steps = 25;
  wc.seed = seed;
  return wc;
}

double mean_reward_with_policy(const DyanParams* params, std::uint64_t seed,
                               std::size_t episodes) {
  // params == nullptr plays uniformly at random.
  Rng rng(derive_seed(seed, "rollout"));
  std::vector<double> rewards;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    World world = World::reset(sanity_world(derive_seed(seed, 5000 + ep)));
    double reward = 0.0;
    while (!world.done()) {
      std::map<int, Action> actions;
      for (int id : world.alive_ids(Team::A)) {
        if (params == nullptr) {
          actions[id] = Action::from_id(static_cast<int>(rng.next_index(Action::kCount)));
        } else {
          Observation obs = world.observe(id);
          ForwardOutput fo = dyan_forward(*params, obs);
          actions[id] = Action::from_id(select_action(fo.q_values, 0.0, rng));
        }
      }
      for (int id : world.alive_ids(Team::B)) actions[id] = Action::stay();
      StepResult res = world.step(actions);
      reward += res.team_reward[0];
    }
    rewards.push_back(reward);
  }
  return mean(rewards);
}

SanityResult run_seed(std::uint64_t seed) {
  LearnerConfig cfg;
  cfg.batch_size = 32;
  cfg.optimizer.learning_rate = 5e-4;
  DyanSpec spec;
  spec.hidden_units = 8;
  LearnerState state = LearnerState::fresh(cfg, spec, derive_seed(seed, "init"));

  ReplayConfig replay_cfg{20000, 200};
  TaskBuffer buffer(0, replay_cfg);
  Rng rng_explore(derive_seed(seed, "explore"));
  Rng rng_sample(derive_seed(seed, "sample"));

  const std::size_t episodes = 2000;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    World world = World::reset(sanity_world(derive_seed(seed, 1000 + ep)));
    state.epsilon = epsilon_at(cfg, ep);
    while (!world.done()) {
      Transition tr;
      tr.task_id = 0;
      std::map<int, Action> actions;
      for (int id : world.alive_ids(Team::A)) {
        Observation obs = world.observe(id);
        ForwardOutput fo = dyan_forward(state.online, obs);
        int action = select_action(fo.q_values, state.epsilon, rng_explore);
        actions[id] = Action::from_id(action);
        tr.agent_ids.push_back(id);
        tr.obs.push_back(std::move(obs));
        tr.actions.push_back(action);
      }
      for (int id : world.alive_ids(Team::B)) actions[id] = Action::stay();
      StepResult res = world.step(actions);
      for (int id : tr.agent_ids) tr.rewards.push_back(res.rewards[static_cast<std::size_t>(id)]);
      tr.team_reward = res.team_reward[0];
      tr.done = res.done;
      for (int id : world.alive_ids(Team::A)) {
        tr.next_agent_ids.push_back(id);
        tr.next_obs.push_back(world.observe(id));
      }
      buffer.push(std::move(tr));
      if (auto batch = buffer.sample(cfg.batch_size, rng_sample)) train_step(state, *batch);
    }
  }

  SanityResult out;
  out.trained_reward = mean_reward_with_policy(&state.online, derive_seed(seed, "trained"), 50);
  out.random_reward = mean_reward_with_policy(nullptr, derive_seed(seed, "random"), 50);
  return out;
}

}  // namespace

TEST_CASE("a learner beats the random policy on 1v1 after 2000 episodes") {
  const std::size_t seeds = 10;
  std::vector<SanityResult> results(seeds);
  std::vector<std::thread> workers;
  unsigned lanes = std::max(1u, std::thread::hardware_concurrency());
  for (unsigned lane = 0; lane < lanes; ++lane) {
    workers.emplace_back([&, lane] {
      for (std::size_t s = lane; s < seeds; s += lanes) results[s] = run_seed(s);
    });
  }
  for (std::thread& w : workers) w.join();

  std::vector<double> trained, random_policy;
  for (const SanityResult& r : results) {
    trained.push_back(r.trained_reward);
    random_policy.push_back(r.random_reward);
  }
  double p = paired_t_pvalue_greater(trained, random_policy);
  INFO("trained mean ", mean(trained), " random mean ", mean(random_policy), " p ", p);
  CHECK(p < 0.05);
}
