#include "dymacl/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dymacl {

namespace {

// Move offsets: all (dx, dy) with dx^2 + dy^2 <= 4, enumerated row-major in
// dy then dx. Index 6 is (0,0) = stay.
constexpr std::array<std::pair<int, int>, Action::kMoveCount> kMoveOffsets = {{
    {0, -2},
    {-1, -1}, {0, -1}, {1, -1},
    {-2, 0}, {-1, 0}, {0, 0}, {1, 0}, {2, 0},
    {-1, 1}, {0, 1}, {1, 1},
    {0, 2},
}};

// Attack offsets: the 8 surrounding cells, row-major.
constexpr std::array<std::pair<int, int>, Action::kAttackCount> kAttackOffsets = {{
    {-1, -1}, {0, -1}, {1, -1},
    {-1, 0}, {1, 0},
    {-1, 1}, {0, 1}, {1, 1},
}};

int chebyshev(int ax, int ay, int bx, int by) {
  return std::max(std::abs(ax - bx), std::abs(ay - by));
}

}  // namespace

std::size_t WorldConfig::auto_map_side(std::size_t total_agents) {
  auto side = static_cast<std::size_t>(
      std::ceil(4.0 * std::sqrt(static_cast<double>(total_agents))));
  return std::max<std::size_t>(side, 10);
}

std::size_t WorldConfig::side() const {
  return map_side > 0 ? map_side : auto_map_side(team_a_size + team_b_size);
}

void WorldConfig::validate() const {
  if (team_a_size < 1 || team_b_size < 1) throw ConfigError("team sizes must be >= 1");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (obs_radius < 1) throw ConfigError("obs_radius must be >= 1");
  if (hp_max <= 0.0) throw ConfigError("hp_max must be > 0");
  if (attack_damage <= 0.0) throw ConfigError("attack_damage must be > 0");
  std::size_t s = side();
  std::size_t half_capacity = (s / 2) * s;  // each team starts on its own half
  if (team_a_size + team_b_size > s * s)
    throw ConfigError("map too small: " + std::to_string(team_a_size + team_b_size) +
                      " agents > " + std::to_string(s * s) + " cells");
  if (team_a_size > half_capacity || team_b_size > half_capacity)
    throw ConfigError("map too small: a team of " +
                      std::to_string(std::max(team_a_size, team_b_size)) +
                      " does not fit on one half (" + std::to_string(half_capacity) + " cells)");
}

std::pair<int, int> Action::offset() const {
  if (is_move()) return kMoveOffsets[static_cast<std::size_t>(id)];
  if (is_attack()) return kAttackOffsets[static_cast<std::size_t>(id - kMoveCount)];
  throw ConfigError("invalid action id " + std::to_string(id));
}

Action Action::from_id(int id) {
  if (id < 0 || id >= kCount) throw ConfigError("action id out of range: " + std::to_string(id));
  return Action{id};
}

Action Action::stay() { return Action{6}; }

Action Action::move_to(int dx, int dy) {
  for (std::size_t i = 0; i < kMoveOffsets.size(); ++i) {
    if (kMoveOffsets[i].first == dx && kMoveOffsets[i].second == dy)
      return Action{static_cast<int>(i)};
  }
  throw ConfigError("no move action with that offset");
}

Action Action::attack_at(int dx, int dy) {
  for (std::size_t i = 0; i < kAttackOffsets.size(); ++i) {
    if (kAttackOffsets[i].first == dx && kAttackOffsets[i].second == dy)
      return Action{static_cast<int>(i) + kMoveCount};
  }
  throw ConfigError("no attack action with that offset");
}

std::vector<double> Observation::env_self() const {
  std::vector<double> out;
  out.reserve(env_features.size() + self_features.size());
  out.insert(out.end(), env_features.begin(), env_features.end());
  out.insert(out.end(), self_features.begin(), self_features.end());
  return out;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Ongoing: return "ongoing";
    case Outcome::AWins: return "a_wins";
    case Outcome::BWins: return "b_wins";
    case Outcome::Draw: return "draw";
  }
  return "ongoing";
}

bool World::in_bounds(int x, int y) const {
  int s = static_cast<int>(cfg_.side());
  return x >= 0 && y >= 0 && x < s && y < s;
}

int World::agent_at(int x, int y) const {
  if (!in_bounds(x, y)) return -1;
  return grid_[static_cast<std::size_t>(y) * cfg_.side() + static_cast<std::size_t>(x)];
}

const AgentState& World::agent(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= agents_.size())
    throw ProtocolError("unknown agent id " + std::to_string(id));
  return agents_[static_cast<std::size_t>(id)];
}

void World::place_teams(Rng& rng) {
  int s = static_cast<int>(cfg_.side());
  int half = s / 2;

  // Candidate cells on the left half; a Fisher-Yates prefix shuffle picks
  // distinct cells. Team B mirrors team A across the vertical axis when the
  // sizes match, otherwise it gets its own mirrored sample.
  std::vector<std::pair<int, int>> cells;
  cells.reserve(static_cast<std::size_t>(half * s));
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < half; ++x) cells.emplace_back(x, y);

  auto draw = [&](std::size_t count) {
    std::vector<std::pair<int, int>> picked;
    picked.reserve(count);
    std::vector<std::pair<int, int>> pool = cells;
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t j = i + rng.next_index(pool.size() - i);
      std::swap(pool[i], pool[j]);
      picked.push_back(pool[i]);
    }
    return picked;
  };

  std::vector<std::pair<int, int>> a_cells = draw(cfg_.team_a_size);
  std::vector<std::pair<int, int>> b_cells;
  if (cfg_.team_b_size == cfg_.team_a_size) {
    b_cells = a_cells;
  } else {
    b_cells = draw(cfg_.team_b_size);
  }

  grid_.assign(static_cast<std::size_t>(s) * static_cast<std::size_t>(s), -1);
  agents_.clear();
  agents_.reserve(cfg_.team_a_size + cfg_.team_b_size);
  int id = 0;
  for (auto [x, y] : a_cells) {
    agents_.push_back(AgentState{id, Team::A, x, y, cfg_.hp_max, true, -1, 0.0});
    grid_[static_cast<std::size_t>(y) * s + x] = id;
    ++id;
  }
  for (auto [x, y] : b_cells) {
    int mx = s - 1 - x;
    agents_.push_back(AgentState{id, Team::B, mx, y, cfg_.hp_max, true, -1, 0.0});
    grid_[static_cast<std::size_t>(y) * s + mx] = id;
    ++id;
  }
}

World World::reset(const WorldConfig& config) {
  config.validate();
  World w;
  w.cfg_ = config;
  Rng rng(derive_seed(config.seed, "placement"));
  w.place_teams(rng);
  w.step_ = 0;
  w.done_ = false;
  w.outcome_ = Outcome::Ongoing;
  return w;
}

World World::create(const WorldConfig& config,
                    const std::vector<std::tuple<Team, int, int>>& placements) {
  World w;
  w.cfg_ = config;
  w.cfg_.team_a_size = 0;
  w.cfg_.team_b_size = 0;
  for (const auto& [team, x, y] : placements)
    (team == Team::A ? w.cfg_.team_a_size : w.cfg_.team_b_size) += 1;
  w.cfg_.validate();

  std::size_t s = w.cfg_.side();
  w.grid_.assign(s * s, -1);
  int id = 0;
  for (const auto& [team, x, y] : placements) {
    if (!w.in_bounds(x, y)) throw ConfigError("placement out of bounds");
    if (w.agent_at(x, y) != -1) throw ConfigError("two agents share a cell");
    w.agents_.push_back(AgentState{id, team, x, y, w.cfg_.hp_max, true, -1, 0.0});
    w.grid_[static_cast<std::size_t>(y) * s + static_cast<std::size_t>(x)] = id;
    ++id;
  }
  return w;
}

StepResult World::step(const std::map<int, Action>& joint_actions) {
  if (done_) throw ProtocolError("step on a finished episode");
  for (const auto& [id, action] : joint_actions) {
    if (id < 0 || static_cast<std::size_t>(id) >= agents_.size())
      throw ProtocolError("action for unknown agent " + std::to_string(id));
    if (!agents_[static_cast<std::size_t>(id)].alive)
      throw ProtocolError("action for dead agent " + std::to_string(id));
    if (action.id < 0 || action.id >= Action::kCount)
      throw ProtocolError("invalid action id " + std::to_string(action.id));
  }
  for (const AgentState& a : agents_) {
    if (a.alive && joint_actions.find(a.id) == joint_actions.end())
      throw ProtocolError("missing action for alive agent " + std::to_string(a.id));
  }

  StepResult res;
  res.rewards.assign(agents_.size(), 0.0);
  res.reward_units.assign(agents_.size(), 0);
  std::vector<bool> attacked(agents_.size(), false);
  std::vector<bool> kill_credited(agents_.size(), false);
  int s = static_cast<int>(cfg_.side());

  // Phase 1: moves, ascending agent id. Blocked or out-of-bounds moves
  // resolve as stay but still cost the move penalty.
  for (const auto& [id, action] : joint_actions) {
    if (!action.is_move()) continue;
    AgentState& a = agents_[static_cast<std::size_t>(id)];
    res.reward_units[a.id] += StepResult::kMoveCost;
    ++res.moves;
    auto [dx, dy] = action.offset();
    int nx = a.x + dx;
    int ny = a.y + dy;
    if ((dx != 0 || dy != 0) && in_bounds(nx, ny) && agent_at(nx, ny) == -1) {
      grid_[static_cast<std::size_t>(a.y) * s + a.x] = -1;
      a.x = nx;
      a.y = ny;
      grid_[static_cast<std::size_t>(ny) * s + nx] = a.id;
    }
  }

  // Phase 2: attacks, ascending agent id. All damage lands before the death
  // check; the kill credit goes to the attacker whose hit crossed zero.
  for (const auto& [id, action] : joint_actions) {
    if (!action.is_attack()) continue;
    AgentState& a = agents_[static_cast<std::size_t>(id)];
    auto [dx, dy] = action.offset();
    int tx = a.x + dx;
    int ty = a.y + dy;
    int victim_id = agent_at(tx, ty);
    bool enemy_hit = victim_id >= 0 && agents_[static_cast<std::size_t>(victim_id)].team != a.team;
    if (enemy_hit) {
      AgentState& victim = agents_[static_cast<std::size_t>(victim_id)];
      res.reward_units[a.id] += StepResult::kAttackHit;
      ++res.attacks_on_enemies;
      attacked[static_cast<std::size_t>(victim_id)] = true;
      victim.hp -= cfg_.attack_damage;
      if (victim.hp <= 0.0 && !kill_credited[static_cast<std::size_t>(victim_id)]) {
        kill_credited[static_cast<std::size_t>(victim_id)] = true;
        res.reward_units[a.id] += StepResult::kKill;
        ++res.kills;
        ++res.kills_this_step[static_cast<std::size_t>(a.team)];
      }
    } else {
      // Empty cell, out of bounds, or a teammate: counts as attacking empty.
      res.reward_units[a.id] += StepResult::kAttackEmpty;
      ++res.attacks_on_empty;
    }
  }

  // Phase 3: victim penalties and deaths.
  for (AgentState& a : agents_) {
    if (attacked[static_cast<std::size_t>(a.id)]) {
      res.reward_units[a.id] += StepResult::kVictim;
      ++res.victims;
    }
    if (a.alive && a.hp <= 0.0) {
      a.hp = 0.0;
      a.alive = false;
      grid_[static_cast<std::size_t>(a.y) * s + a.x] = -1;
    }
  }

  for (const auto& [id, action] : joint_actions) {
    AgentState& a = agents_[static_cast<std::size_t>(id)];
    a.last_action = action.id;
    a.last_reward = static_cast<double>(res.reward_units[id]) * StepResult::kRewardUnit;
  }

  std::array<long long, 2> team_units{0, 0};
  for (const AgentState& a : agents_)
    team_units[static_cast<std::size_t>(a.team)] += res.reward_units[a.id];
  for (std::size_t t = 0; t < 2; ++t)
    res.team_reward[t] = static_cast<double>(team_units[t]) * StepResult::kRewardUnit;
  for (std::size_t i = 0; i < agents_.size(); ++i)
    res.rewards[i] = static_cast<double>(res.reward_units[i]) * StepResult::kRewardUnit;

  ++step_;
  std::size_t alive_a = alive_count(Team::A);
  std::size_t alive_b = alive_count(Team::B);
  if (alive_a == 0 || alive_b == 0 || step_ >= cfg_.max_steps) {
    done_ = true;
    if (alive_a > 0 && alive_b == 0)
      outcome_ = Outcome::AWins;
    else if (alive_b > 0 && alive_a == 0)
      outcome_ = Outcome::BWins;
    else
      outcome_ = Outcome::Draw;
  }
  res.done = done_;
  res.outcome = done_ ? outcome_ : Outcome::Ongoing;
  return res;
}

Observation World::observe(int agent_id) const {
  const AgentState& self = agent(agent_id);
  if (!self.alive) throw ProtocolError("observe on dead agent " + std::to_string(agent_id));

  Observation obs;
  int r = cfg_.obs_radius;
  int window = 2 * r + 1;

  // Out-of-bounds occupancy of the obs window, pooled to a 4x4 grid.
  obs.env_features.assign(Observation::kEnvFeatures, 0.0);
  std::array<int, Observation::kEnvFeatures> counts{};
  for (int wy = 0; wy < window; ++wy) {
    for (int wx = 0; wx < window; ++wx) {
      std::size_t block = static_cast<std::size_t>(wy * 4 / window) * 4 +
                          static_cast<std::size_t>(wx * 4 / window);
      ++counts[block];
      if (!in_bounds(self.x + wx - r, self.y + wy - r)) obs.env_features[block] += 1.0;
    }
  }
  for (std::size_t i = 0; i < Observation::kEnvFeatures; ++i)
    obs.env_features[i] /= static_cast<double>(counts[i]);

  double denom = cfg_.side() > 1 ? static_cast<double>(cfg_.side() - 1) : 1.0;
  obs.self_features.reserve(Observation::kSelfFeatures);
  obs.self_features.push_back(static_cast<double>(self.x) / denom);
  obs.self_features.push_back(static_cast<double>(self.y) / denom);
  obs.self_features.push_back(self.hp / cfg_.hp_max);
  for (int a = 0; a < Action::kCount; ++a)
    obs.self_features.push_back(self.last_action == a ? 1.0 : 0.0);
  obs.self_features.push_back(self.last_reward);

  for (const AgentState& other : agents_) {
    if (!other.alive || other.id == self.id) continue;
    if (chebyshev(self.x, self.y, other.x, other.y) > r) continue;
    std::vector<double> feat{
        static_cast<double>(other.x - self.x) / static_cast<double>(r),
        static_cast<double>(other.y - self.y) / static_cast<double>(r),
        other.hp / cfg_.hp_max,
    };
    if (other.team == self.team)
      obs.teammate_features.push_back(std::move(feat));
    else
      obs.enemy_features.push_back(std::move(feat));
  }
  return obs;
}

Action World::scripted_opponent(int agent_id) const {
  const AgentState& self = agent(agent_id);
  if (!self.alive) throw ProtocolError("scripted_opponent on dead agent");

  // The script sees what the agent sees: only enemies inside the obs window
  // count. Nearest adjacent enemy by Euclidean distance, lowest id tie-break;
  // nearest visible enemy overall by Chebyshev, lowest id tie-break.
  int best_adjacent = -1;
  double best_adjacent_d2 = 0.0;
  int nearest = -1;
  int nearest_d = 0;
  for (const AgentState& other : agents_) {
    if (!other.alive || other.team == self.team) continue;
    int dx = other.x - self.x;
    int dy = other.y - self.y;
    int cheb = std::max(std::abs(dx), std::abs(dy));
    if (cheb > cfg_.obs_radius) continue;
    if (cheb == 1) {
      double d2 = static_cast<double>(dx * dx + dy * dy);
      if (best_adjacent < 0 || d2 < best_adjacent_d2) {
        best_adjacent = other.id;
        best_adjacent_d2 = d2;
      }
    }
    if (nearest < 0 || cheb < nearest_d) {
      nearest = other.id;
      nearest_d = cheb;
    }
  }
  if (best_adjacent >= 0) {
    const AgentState& v = agents_[static_cast<std::size_t>(best_adjacent)];
    return Action::attack_at(v.x - self.x, v.y - self.y);
  }
  if (nearest < 0) return Action::stay();

  // One single-cell step that strictly reduces Chebyshev distance; ties break
  // on Euclidean distance, then enumeration order.
  const AgentState& target = agents_[static_cast<std::size_t>(nearest)];
  Action best = Action::stay();
  int best_d = chebyshev(self.x, self.y, target.x, target.y);
  long best_e2 = 0;
  bool found = false;
  for (auto [dx, dy] : std::initializer_list<std::pair<int, int>>{
           {-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}) {
    int nx = self.x + dx;
    int ny = self.y + dy;
    if (!in_bounds(nx, ny) || agent_at(nx, ny) != -1) continue;
    int d = chebyshev(nx, ny, target.x, target.y);
    long e2 = static_cast<long>(nx - target.x) * (nx - target.x) +
              static_cast<long>(ny - target.y) * (ny - target.y);
    if (d < best_d || (found && d == best_d && e2 < best_e2)) {
      best_d = d;
      best_e2 = e2;
      best = Action::move_to(dx, dy);
      found = true;
    }
  }
  return best;
}

std::vector<int> World::alive_ids(Team team) const {
  std::vector<int> ids;
  for (const AgentState& a : agents_)
    if (a.alive && a.team == team) ids.push_back(a.id);
  return ids;
}

std::size_t World::alive_count(Team team) const {
  std::size_t n = 0;
  for (const AgentState& a : agents_)
    if (a.alive && a.team == team) ++n;
  return n;
}

std::size_t World::alive_total() const {
  std::size_t n = 0;
  for (const AgentState& a : agents_)
    if (a.alive) ++n;
  return n;
}

std::string trace_header(const WorldConfig& config) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "# a=%zu b=%zu side=%zu max_steps=%zu obs_radius=%d hp=%g dmg=%g seed=%llu",
                config.team_a_size, config.team_b_size, config.side(), config.max_steps,
                config.obs_radius, config.hp_max, config.attack_damage,
                static_cast<unsigned long long>(config.seed));
  return buf;
}

std::string trace_line(const World& world) {
  std::string line = std::to_string(world.step_count());
  char buf[96];
  for (const AgentState& a : world.agents()) {
    std::snprintf(buf, sizeof(buf), " | %d:%s:%d:%d:%g:%d:%d:%g", a.id, team_name(a.team), a.x,
                  a.y, a.hp, a.alive ? 1 : 0, a.last_action, a.last_reward);
    line += buf;
  }
  return line;
}

}  // namespace dymacl
