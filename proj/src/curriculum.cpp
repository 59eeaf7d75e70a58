#include "dymacl/curriculum.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "dymacl/checkpoint.hpp"
#include "dymacl/stats.hpp"

namespace dymacl {

using nlohmann::json;

std::string library_version() { return "dymacl 0.1.0 / container v1"; }

void CurriculumSpec::validate() const {
  if (tasks.empty()) throw ConfigError("curriculum needs at least one task");
  for (const TaskSpec& t : tasks) {
    if (t.team_a < 1 || t.team_b < 1) throw ConfigError("task team sizes must be >= 1");
    if (t.budget_steps == 0) throw ConfigError("task budget_steps must be > 0");
  }
  for (std::size_t k = 1; k < tasks.size(); ++k) {
    if (tasks[k].team_a + tasks[k].team_b < tasks[k - 1].team_a + tasks[k - 1].team_b)
      std::cerr << "warning: task " << k << " has fewer agents than task " << k - 1 << "\n";
  }
  transfer.validate();
  learner.validate();
  dyan.validate();
  if (eval_episodes == 0) throw ConfigError("eval_episodes must be > 0");
  for (std::size_t k = 0; k < tasks.size(); ++k) world_for(k).validate();
}

WorldConfig CurriculumSpec::world_for(std::size_t task_index) const {
  if (task_index >= tasks.size()) throw ContractError("task index out of range");
  WorldConfig wc = env;
  wc.team_a_size = tasks[task_index].team_a;
  wc.team_b_size = tasks[task_index].team_b;
  wc.map_side = tasks[task_index].map_side;
  return wc;
}

// ---------------------------------------------------------------------------
// Config parsing.

namespace {

void reject_unknown(const json& j, const char* where,
                    std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ParseError(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) throw ParseError(std::string("unknown key \"") + key + "\" in " + where);
  }
}

template <typename T>
void get_to_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

void parse_task(const json& j, TaskSpec& t) {
  reject_unknown(j, "tasks[]", {"team_size", "team_a", "team_b", "map_side", "budget_steps"});
  if (j.contains("team_size")) {
    t.team_a = j.at("team_size").get<std::size_t>();
    t.team_b = t.team_a;
  }
  get_to_if(j, "team_a", t.team_a);
  get_to_if(j, "team_b", t.team_b);
  get_to_if(j, "map_side", t.map_side);
  if (!j.contains("budget_steps")) throw ParseError("tasks[] entry missing budget_steps");
  t.budget_steps = j.at("budget_steps").get<std::size_t>();
}

}  // namespace

CurriculumSpec parse_spec_string(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }

  CurriculumSpec spec;
  try {
    reject_unknown(j, "config",
                   {"seed", "eval_episodes", "self_play", "tasks", "transfer", "learner",
                    "dyan", "replay", "env"});
    get_to_if(j, "seed", spec.seed);
    get_to_if(j, "eval_episodes", spec.eval_episodes);
    get_to_if(j, "self_play", spec.self_play);

    if (!j.contains("tasks") || !j.at("tasks").is_array() || j.at("tasks").empty())
      throw ParseError("config needs a non-empty tasks array");
    for (const json& tj : j.at("tasks")) {
      TaskSpec t;
      parse_task(tj, t);
      spec.tasks.push_back(t);
    }

    if (j.contains("transfer")) {
      const json& tj = j.at("transfer");
      reject_unknown(tj, "transfer",
                     {"kind", "omega", "distill_weight", "symmetric_temperature",
                      "frozen_teacher_reuse"});
      if (tj.contains("kind"))
        spec.transfer.kind = transfer_kind_from_string(tj.at("kind").get<std::string>());
      get_to_if(tj, "omega", spec.transfer.omega);
      get_to_if(tj, "distill_weight", spec.transfer.distill_weight);
      get_to_if(tj, "symmetric_temperature", spec.transfer.symmetric_temperature);
      get_to_if(tj, "frozen_teacher_reuse", spec.transfer.frozen_teacher_reuse);
    }

    if (j.contains("learner")) {
      const json& lj = j.at("learner");
      reject_unknown(lj, "learner",
                     {"algorithm", "gamma", "batch_size", "epsilon_start", "epsilon_end",
                      "epsilon_anneal_episodes", "target_update_interval", "grad_clip_norm",
                      "recurrent_training", "train_every", "updates_per_step", "optimizer"});
      if (lj.contains("algorithm"))
        spec.learner.algorithm = algorithm_from_string(lj.at("algorithm").get<std::string>());
      get_to_if(lj, "gamma", spec.learner.gamma);
      get_to_if(lj, "batch_size", spec.learner.batch_size);
      get_to_if(lj, "epsilon_start", spec.learner.epsilon_start);
      get_to_if(lj, "epsilon_end", spec.learner.epsilon_end);
      get_to_if(lj, "epsilon_anneal_episodes", spec.learner.epsilon_anneal_episodes);
      get_to_if(lj, "target_update_interval", spec.learner.target_update_interval);
      get_to_if(lj, "grad_clip_norm", spec.learner.grad_clip_norm);
      get_to_if(lj, "recurrent_training", spec.learner.recurrent_training);
      get_to_if(lj, "train_every", spec.learner.train_every);
      get_to_if(lj, "updates_per_step", spec.learner.updates_per_step);
      if (lj.contains("optimizer")) {
        const json& oj = lj.at("optimizer");
        reject_unknown(oj, "optimizer",
                       {"kind", "learning_rate", "beta1", "beta2", "alpha", "epsilon"});
        if (oj.contains("kind"))
          spec.learner.optimizer.kind =
              optimizer_kind_from_string(oj.at("kind").get<std::string>());
        get_to_if(oj, "learning_rate", spec.learner.optimizer.learning_rate);
        get_to_if(oj, "beta1", spec.learner.optimizer.beta1);
        get_to_if(oj, "beta2", spec.learner.optimizer.beta2);
        get_to_if(oj, "alpha", spec.learner.optimizer.alpha);
        get_to_if(oj, "epsilon", spec.learner.optimizer.epsilon);
      }
    }

    if (j.contains("dyan")) {
      const json& dj = j.at("dyan");
      reject_unknown(dj, "dyan",
                     {"hidden_units", "aggregation", "activation", "use_gru", "split_teams",
                      "vanilla", "teammate_slots", "enemy_slots"});
      get_to_if(dj, "hidden_units", spec.dyan.hidden_units);
      if (dj.contains("aggregation"))
        spec.dyan.aggregation = aggregation_from_string(dj.at("aggregation").get<std::string>());
      if (dj.contains("activation"))
        spec.dyan.activation = activation_from_string(dj.at("activation").get<std::string>());
      get_to_if(dj, "use_gru", spec.dyan.use_gru);
      get_to_if(dj, "split_teams", spec.dyan.split_teams);
      get_to_if(dj, "vanilla", spec.dyan.vanilla);
      get_to_if(dj, "teammate_slots", spec.dyan.teammate_slots);
      get_to_if(dj, "enemy_slots", spec.dyan.enemy_slots);
    }

    if (j.contains("replay")) {
      const json& rj = j.at("replay");
      reject_unknown(rj, "replay", {"capacity", "min_fill"});
      get_to_if(rj, "capacity", spec.replay.capacity);
      get_to_if(rj, "min_fill", spec.replay.min_fill);
    }

    if (j.contains("env")) {
      const json& ej = j.at("env");
      reject_unknown(ej, "env", {"obs_radius", "max_steps", "hp_max", "attack_damage"});
      get_to_if(ej, "obs_radius", spec.env.obs_radius);
      get_to_if(ej, "max_steps", spec.env.max_steps);
      get_to_if(ej, "hp_max", spec.env.hp_max);
      get_to_if(ej, "attack_damage", spec.env.attack_damage);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed config value: ") + e.what());
  }

  try {
    spec.validate();
  } catch (const Error& e) {
    throw ParseError(std::string("invalid config: ") + e.what());
  }
  return spec;
}

CurriculumSpec parse_spec(const std::filesystem::path& config_file) {
  std::ifstream is(config_file);
  if (!is) throw ParseError("config not found: " + config_file.string());
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_spec_string(text);
}

std::string spec_to_json(const CurriculumSpec& spec) {
  json tasks = json::array();
  for (const TaskSpec& t : spec.tasks)
    tasks.push_back({{"team_a", t.team_a},
                     {"team_b", t.team_b},
                     {"map_side", t.map_side},
                     {"budget_steps", t.budget_steps}});
  json j = {
      {"seed", spec.seed},
      {"eval_episodes", spec.eval_episodes},
      {"self_play", spec.self_play},
      {"tasks", tasks},
      {"transfer",
       {{"kind", to_string(spec.transfer.kind)},
        {"omega", spec.transfer.omega},
        {"distill_weight", spec.transfer.distill_weight},
        {"symmetric_temperature", spec.transfer.symmetric_temperature},
        {"frozen_teacher_reuse", spec.transfer.frozen_teacher_reuse}}},
      {"learner",
       {{"algorithm", to_string(spec.learner.algorithm)},
        {"gamma", spec.learner.gamma},
        {"batch_size", spec.learner.batch_size},
        {"epsilon_start", spec.learner.epsilon_start},
        {"epsilon_end", spec.learner.epsilon_end},
        {"epsilon_anneal_episodes", spec.learner.epsilon_anneal_episodes},
        {"target_update_interval", spec.learner.target_update_interval},
        {"grad_clip_norm", spec.learner.grad_clip_norm},
        {"recurrent_training", spec.learner.recurrent_training},
        {"train_every", spec.learner.train_every},
        {"updates_per_step", spec.learner.updates_per_step},
        {"optimizer",
         {{"kind", to_string(spec.learner.optimizer.kind)},
          {"learning_rate", spec.learner.optimizer.learning_rate},
          {"beta1", spec.learner.optimizer.beta1},
          {"beta2", spec.learner.optimizer.beta2},
          {"alpha", spec.learner.optimizer.alpha},
          {"epsilon", spec.learner.optimizer.epsilon}}}}},
      {"dyan",
       {{"hidden_units", spec.dyan.hidden_units},
        {"aggregation", to_string(spec.dyan.aggregation)},
        {"activation", to_string(spec.dyan.activation)},
        {"use_gru", spec.dyan.use_gru},
        {"split_teams", spec.dyan.split_teams},
        {"vanilla", spec.dyan.vanilla},
        {"teammate_slots", spec.dyan.teammate_slots},
        {"enemy_slots", spec.dyan.enemy_slots}}},
      {"replay", {{"capacity", spec.replay.capacity}, {"min_fill", spec.replay.min_fill}}},
      {"env",
       {{"obs_radius", spec.env.obs_radius},
        {"max_steps", spec.env.max_steps},
        {"hp_max", spec.env.hp_max},
        {"attack_damage", spec.env.attack_damage}}},
      {"version", library_version()},
  };
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Training engine.

std::uint64_t task_train_seed(std::uint64_t run_seed, std::size_t task_index) {
  return derive_seed(derive_seed(run_seed, "task"), task_index);
}

namespace {

struct ActingPolicy {
  const DyanParams& params;
  bool carry_hidden;
  std::map<int, Tensor> hidden;  // per agent, zeros at episode start

  void reset() { hidden.clear(); }

  // Returns (action, hidden before acting, hidden after acting).
  std::tuple<int, Tensor, Tensor> act(const World& world, int id, double epsilon, Rng& rng) {
    Observation obs = world.observe(id);
    Tensor h = dyan_zero_hidden(params.spec);
    if (carry_hidden) {
      auto it = hidden.find(id);
      if (it != hidden.end()) h = it->second;
    }
    ForwardOutput fo = dyan_forward(params, obs, h);
    int action = select_action(fo.q_values, epsilon, rng);
    if (carry_hidden) hidden[id] = fo.hidden_next;
    return {action, h, fo.hidden_next};
  }
};

LossBuilder make_distill_builder(const TransferContext& ctx, const LearnerState& state,
                                 const std::vector<Transition>& batch) {
  std::vector<Observation> states;
  for (const Transition& t : batch)
    for (const Observation& o : t.obs) states.push_back(o);
  double weight = ctx.mode.distill_weight;
  const TeacherSet* teachers = ctx.teachers;
  TransferMode mode = ctx.mode;
  const DyanSpec spec = state.online.spec;
  return [states = std::move(states), weight, teachers, mode, spec](
             Graph& g, const DyanNodes& nodes) {
    return g.scale(build_distillation_loss(g, nodes, spec, *teachers, states, mode), weight);
  };
}

}  // namespace

TrainTaskResult train_task(LearnerState& state, const WorldConfig& task_world,
                           TaskBuffer& current, const TransferContext& ctx,
                           std::size_t budget_steps, std::uint64_t seed, bool self_play) {
  Rng rng_explore(derive_seed(seed, "explore"));
  Rng rng_sample(derive_seed(seed, "sample"));
  bool recurrent = state.cfg.recurrent_training;

  TrainTaskResult result;
  std::size_t episode = 0;
  while (result.env_steps < budget_steps) {
    WorldConfig wc = task_world;
    wc.seed = derive_seed(seed, 1000 + episode);
    World world = World::reset(wc);
    state.epsilon = epsilon_at(state.cfg, episode);

    ActingPolicy policy{state.online, recurrent, {}};
    policy.reset();
    ActingPolicy opponent{state.online, recurrent, {}};

    EpisodeLog log;
    log.episode = episode;
    log.epsilon = state.epsilon;
    double loss_sum = 0.0;
    std::size_t loss_count = 0;

    while (!world.done()) {
      std::vector<int> ids = world.alive_ids(Team::A);
      std::map<int, Action> actions;
      Transition tr;
      tr.task_id = current.task_id();
      for (int id : ids) {
        Observation obs = world.observe(id);
        auto [action, h_before, h_after] = policy.act(world, id, state.epsilon, rng_explore);
        actions[id] = Action::from_id(action);
        tr.agent_ids.push_back(id);
        tr.obs.push_back(std::move(obs));
        tr.actions.push_back(action);
        if (recurrent) tr.hidden.push_back(h_before);
      }
      for (int id : world.alive_ids(Team::B)) {
        if (self_play) {
          auto [action, h_before, h_after] =
              opponent.act(world, id, state.epsilon, rng_explore);
          (void)h_before;
          (void)h_after;
          actions[id] = Action::from_id(action);
        } else {
          actions[id] = world.scripted_opponent(id);
        }
      }

      StepResult res = world.step(actions);
      for (int id : ids) tr.rewards.push_back(res.rewards[static_cast<std::size_t>(id)]);
      tr.team_reward = res.team_reward[static_cast<std::size_t>(Team::A)];
      tr.done = res.done;
      for (int id : world.alive_ids(Team::A)) {
        tr.next_agent_ids.push_back(id);
        tr.next_obs.push_back(world.observe(id));
        if (recurrent) tr.next_hidden.push_back(policy.hidden[id]);
      }
      current.push(std::move(tr));

      ++result.env_steps;
      ++log.steps;
      log.reward += res.team_reward[static_cast<std::size_t>(Team::A)];

      if (result.env_steps % state.cfg.train_every == 0) {
        for (std::size_t round = 0; round < state.cfg.updates_per_step; ++round) {
          StepReport step_report;
          switch (ctx.mode.kind) {
            case TransferKind::BufferReuse: {
              MultiBatch mb = multi_sample(ctx.reuse_buffers, state.cfg.batch_size, rng_sample);
              if (mb.ready) {
                const TeacherSet* frozen =
                    ctx.mode.frozen_teacher_reuse ? ctx.teachers : nullptr;
                step_report = train_step(state, [&](Graph& g, const DyanNodes& nodes) {
                  return build_buffer_reuse_loss(g, nodes, mb, state.online, state.target,
                                                 state.cfg, frozen);
                });
              }
              break;
            }
            case TransferKind::Distillation: {
              auto batch = current.sample(state.cfg.batch_size, rng_sample);
              if (batch) {
                if (ctx.teachers != nullptr && !ctx.teachers->empty()) {
                  LossBuilder extra = make_distill_builder(ctx, state, *batch);
                  step_report = train_step(state, *batch, &extra);
                } else {
                  step_report = train_step(state, *batch);
                }
              }
              break;
            }
            case TransferKind::None:
            case TransferKind::ModelReload: {
              auto batch = current.sample(state.cfg.batch_size, rng_sample);
              if (batch) step_report = train_step(state, *batch);
              break;
            }
          }
          if (step_report.applied) {
            loss_sum += step_report.loss;
            ++loss_count;
          }
        }
      }
    }

    log.loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
    log.outcome = world.outcome();
    result.curve.push_back(log);
    ++episode;
  }
  return result;
}

EvalMetrics evaluate(const DyanParams& params, const WorldConfig& task, std::size_t episodes,
                     std::uint64_t seed, bool carry_hidden) {
  if (episodes == 0) throw ConfigError("evaluate needs episodes > 0");
  std::vector<double> wins, survivors, kills, rewards;
  Rng rng(derive_seed(seed, "eval"));  // consumed only by epsilon=0 selection, kept for parity
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    WorldConfig wc = task;
    wc.seed = derive_seed(seed, ep);
    World world = World::reset(wc);
    ActingPolicy policy{params, carry_hidden, {}};
    policy.reset();
    double reward = 0.0;
    while (!world.done()) {
      std::map<int, Action> actions;
      for (int id : world.alive_ids(Team::A)) {
        auto [action, h_before, h_after] = policy.act(world, id, 0.0, rng);
        (void)h_before;
        (void)h_after;
        actions[id] = Action::from_id(action);
      }
      for (int id : world.alive_ids(Team::B)) actions[id] = world.scripted_opponent(id);
      StepResult res = world.step(actions);
      reward += res.team_reward[static_cast<std::size_t>(Team::A)];
    }
    wins.push_back(world.outcome() == Outcome::AWins ? 1.0 : 0.0);
    survivors.push_back(static_cast<double>(world.alive_count(Team::A)));
    kills.push_back(static_cast<double>(task.team_b_size - world.alive_count(Team::B)));
    rewards.push_back(reward);
  }
  EvalMetrics m;
  m.episodes = episodes;
  m.win_rate = mean(wins);
  m.mean_survivors = mean(survivors);
  m.survivors_se = standard_error(survivors);
  m.mean_kills = mean(kills);
  m.kills_se = standard_error(kills);
  m.mean_reward = mean(rewards);
  m.reward_se = standard_error(rewards);
  return m;
}

// ---------------------------------------------------------------------------
// Whole-run driver and report files.

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_curve_csv(const std::vector<EpisodeLog>& curve, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << "episode,steps,epsilon,loss,reward,outcome\n";
  for (const EpisodeLog& e : curve) {
    os << e.episode << ',' << e.steps << ',' << format_double(e.epsilon) << ','
       << format_double(e.loss) << ',' << format_double(e.reward) << ','
       << to_string(e.outcome) << '\n';
  }
  if (!os) throw IoError("write failed on " + path.string());
}

void write_summary(const CurriculumSpec& spec, const RunReport& report,
                   const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << "version: " << library_version() << "\n";
  os << "seed: " << spec.seed << "\n";
  os << "transfer: " << to_string(spec.transfer.kind) << "\n";
  os << "tasks: " << spec.tasks.size() << "\n";
  for (const TaskReport& t : report.tasks) {
    const TaskSpec& ts = spec.tasks[t.task_index];
    os << "\n[task " << t.task_index << "] " << ts.team_a << "v" << ts.team_b << "\n";
    os << "checkpoint: " << std::filesystem::path(t.checkpoint_path).filename().string() << "\n";
    if (t.reload_source_hash != 0) {
      char buf[24];
      std::snprintf(buf, sizeof(buf), "%016llx",
                    static_cast<unsigned long long>(t.reload_source_hash));
      os << "reloaded_from_hash: " << buf << "\n";
    }
    os << "env_steps: " << t.env_steps << "\n";
    os << "episodes: " << t.curve.size() << "\n";
    os << "eval_episodes: " << t.eval.episodes << "\n";
    os << "win_rate: " << format_double(t.eval.win_rate) << "\n";
    os << "survivors: " << format_double(t.eval.mean_survivors) << " se "
       << format_double(t.eval.survivors_se) << "\n";
    os << "kills: " << format_double(t.eval.mean_kills) << " se "
       << format_double(t.eval.kills_se) << "\n";
    os << "reward: " << format_double(t.eval.mean_reward) << " se "
       << format_double(t.eval.reward_se) << "\n";
  }
  if (!os) throw IoError("write failed on " + path.string());
}

RunReport run(const CurriculumSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream os(out_dir / "config_echo.json", std::ios::trunc);
    if (!os) throw IoError("cannot write config echo");
    os << spec_to_json(spec) << "\n";
  }

  auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  std::vector<std::unique_ptr<TaskBuffer>> reuse_buffers;
  TeacherSet teachers;
  std::string prev_checkpoint;

  for (std::size_t k = 0; k < spec.tasks.size(); ++k) {
    WorldConfig wc = spec.world_for(k);
    std::uint64_t tseed = task_train_seed(spec.seed, k);

    TaskReport tr;
    tr.task_index = k;

    LearnerState state = [&] {
      if (spec.transfer.kind == TransferKind::ModelReload && !prev_checkpoint.empty()) {
        tr.reload_source_hash = file_hash(prev_checkpoint);
        return model_reload(prev_checkpoint, spec.learner, spec.dyan);
      }
      return LearnerState::fresh(spec.learner, spec.dyan, derive_seed(tseed, "init"));
    }();

    auto current = std::make_unique<TaskBuffer>(static_cast<int>(k), spec.replay);
    TransferContext ctx;
    ctx.mode = spec.transfer;
    if (spec.transfer.kind == TransferKind::BufferReuse) {
      for (const auto& b : reuse_buffers) ctx.reuse_buffers.push_back(b.get());
      ctx.reuse_buffers.push_back(current.get());
    }
    if (spec.transfer.kind == TransferKind::Distillation ||
        (spec.transfer.kind == TransferKind::BufferReuse && spec.transfer.frozen_teacher_reuse))
      ctx.teachers = &teachers;

    TrainTaskResult trained =
        train_task(state, wc, *current, ctx, spec.tasks[k].budget_steps, tseed, spec.self_play);
    tr.curve = std::move(trained.curve);
    tr.env_steps = trained.env_steps;

    std::string name = "task_" + std::to_string(k) + "_" + std::to_string(spec.tasks[k].team_a) +
                       "v" + std::to_string(spec.tasks[k].team_b);
    std::filesystem::path ckpt = out_dir / (name + ".ckpt");
    dyan_save(state.online, ckpt);
    tr.checkpoint_path = ckpt.string();
    prev_checkpoint = ckpt.string();

    tr.eval = evaluate(state.online, wc, spec.eval_episodes, derive_seed(tseed, "eval"),
                       spec.learner.recurrent_training);
    write_curve_csv(tr.curve, out_dir / (name + "_curve.csv"));

    if (spec.transfer.kind == TransferKind::BufferReuse)
      reuse_buffers.push_back(std::move(current));
    if (spec.transfer.kind == TransferKind::Distillation ||
        (spec.transfer.kind == TransferKind::BufferReuse && spec.transfer.frozen_teacher_reuse))
      teachers.teachers.push_back(state.online);

    report.tasks.push_back(std::move(tr));
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_summary(spec, report, out_dir / "summary.txt");
  return report;
}

}  // namespace dymacl
