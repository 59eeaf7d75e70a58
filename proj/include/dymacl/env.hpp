#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dymacl/errors.hpp"
#include "dymacl/rng.hpp"

namespace dymacl {

enum class Team : std::uint8_t { A = 0, B = 1 };

inline Team other_team(Team t) { return t == Team::A ? Team::B : Team::A; }
inline const char* team_name(Team t) { return t == Team::A ? "A" : "B"; }

struct WorldConfig {
  std::size_t team_a_size = 3;
  std::size_t team_b_size = 3;
  std::size_t map_side = 0;  // 0 -> auto: ceil(4*sqrt(total agents)), min 10
  std::size_t max_steps = 300;
  int obs_radius = 6;        // 13x13 window at the default
  double hp_max = 10.0;
  double attack_damage = 2.0;
  std::uint64_t seed = 0;

  std::size_t side() const;  // resolved map side
  void validate() const;     // throws ConfigError

  static std::size_t auto_map_side(std::size_t total_agents);
};

// 21 discrete actions: 13 moves (all cells within Euclidean radius 2,
// including stay) followed by 8 attacks (the surrounding cells).
struct Action {
  static constexpr int kMoveCount = 13;
  static constexpr int kAttackCount = 8;
  static constexpr int kCount = kMoveCount + kAttackCount;

  int id = 0;

  bool is_move() const { return id >= 0 && id < kMoveCount; }
  bool is_attack() const { return id >= kMoveCount && id < kCount; }
  // (dx, dy) offset of the target cell relative to the agent.
  std::pair<int, int> offset() const;

  static Action from_id(int id);
  static Action stay();
  static Action move_to(int dx, int dy);    // throws ConfigError if not a move offset
  static Action attack_at(int dx, int dy);  // throws ConfigError if not adjacent
};

struct AgentState {
  int id = 0;
  Team team = Team::A;
  int x = 0;
  int y = 0;
  double hp = 0.0;
  bool alive = false;
  int last_action = -1;    // -1 until the agent has acted
  double last_reward = 0.0;
};

// Per-agent view. Neighbor lists hold only alive agents within the
// Chebyshev obs window, ordered by ascending agent id; both may be empty.
struct Observation {
  static constexpr std::size_t kEnvFeatures = 16;
  static constexpr std::size_t kSelfFeatures = 2 + 1 + Action::kCount + 1;
  static constexpr std::size_t kNeighborWidth = 3;

  std::vector<double> env_features;   // kEnvFeatures
  std::vector<double> self_features;  // kSelfFeatures
  std::vector<std::vector<double>> teammate_features;
  std::vector<std::vector<double>> enemy_features;

  static std::size_t env_self_width() { return kEnvFeatures + kSelfFeatures; }
  std::vector<double> env_self() const;
};

enum class Outcome { Ongoing, AWins, BWins, Draw };

std::string to_string(Outcome o);

// All rewards are multiples of 0.005; they are accounted in integer units of
// 0.005 so the audit identity holds exactly. reward_units[i] * kRewardUnit is
// the double reward of agent i.
struct StepResult {
  static constexpr double kRewardUnit = 0.005;
  static constexpr long long kMoveCost = -1;        // -0.005
  static constexpr long long kAttackHit = 40;       // +0.2
  static constexpr long long kKill = 1000;          // +5
  static constexpr long long kAttackEmpty = -20;    // -0.1
  static constexpr long long kVictim = -20;         // -0.1, once per attacked agent

  std::vector<double> rewards;           // indexed by agent id, 0 for non-actors
  std::vector<long long> reward_units;   // exact integer ledger, same indexing
  std::array<double, 2> team_reward{0.0, 0.0};
  std::array<int, 2> kills_this_step{0, 0};
  bool done = false;
  Outcome outcome = Outcome::Ongoing;

  // Event counts for the reward audit.
  int moves = 0;
  int attacks_on_enemies = 0;
  int attacks_on_empty = 0;
  int victims = 0;
  int kills = 0;
};

// Two-team gridworld battle. Deterministic given (config, seed, actions):
// moves resolve before attacks, both in ascending agent id order; all
// simultaneous damage lands before the death check.
class World {
 public:
  static World reset(const WorldConfig& config);

  // Explicit placements (team, x, y); ids are assigned in list order. Team
  // sizes in the config are overwritten from the list. Used by tests and
  // scripted scenario setups.
  static World create(const WorldConfig& config,
                      const std::vector<std::tuple<Team, int, int>>& placements);

  // One action per alive agent; anything else is a ProtocolError.
  StepResult step(const std::map<int, Action>& joint_actions);

  Observation observe(int agent_id) const;  // ProtocolError for dead agents

  // Deterministic opponent working from the agent's own obs window: attack
  // the nearest adjacent enemy (lowest id tie-break); otherwise step toward
  // the nearest visible enemy; otherwise stay.
  Action scripted_opponent(int agent_id) const;

  const WorldConfig& config() const { return cfg_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  const AgentState& agent(int id) const;
  std::size_t step_count() const { return step_; }
  bool done() const { return done_; }
  Outcome outcome() const { return outcome_; }

  std::vector<int> alive_ids(Team team) const;
  std::size_t alive_count(Team team) const;
  std::size_t alive_total() const;
  int agent_at(int x, int y) const;  // agent id or -1

 private:
  World() = default;
  bool in_bounds(int x, int y) const;
  void place_teams(Rng& rng);

  WorldConfig cfg_;
  std::vector<AgentState> agents_;
  std::vector<int> grid_;  // side*side cells -> agent id or -1
  std::size_t step_ = 0;
  bool done_ = false;
  Outcome outcome_ = Outcome::Ongoing;
};

// One golden-trace record for the world's current state: step index followed
// by id:team:x:y:hp:alive:last_action:last_reward per agent.
std::string trace_line(const World& world);
std::string trace_header(const WorldConfig& config);

}  // namespace dymacl
