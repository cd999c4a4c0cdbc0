#pragma once

// Simple team sports simulator: N-vs-N on a continuous 2D field with
// stochastic shots, passes and steals, a scripted team policy, and game
// event emission.
//
// World frame: x across the field (width), y along it (length). The home team
// attacks the goal at (0, +half_length); the away team attacks (0, -half_length).
// Team-relative quantities ("up", "right", encodings) are expressed in a frame
// where the team attacks +y, i.e. the away frame is the world frame rotated by
// 180 degrees.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsd/random.hpp"

namespace hsd::sts2 {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum Team : int { kHome = 0, kAway = 1 };

inline Team other(Team t) { return t == kHome ? kAway : kHome; }

enum class GameEvent : int {
  kGoal = 0,
  kOffensiveRebound,
  kShotAttempt,
  kMadePass,
  kReceivedPass,
  kSteal,
  kPossessionGain,
  kPossessionLoss,
};
inline constexpr int kNumGameEvents = 8;

const char* event_name(GameEvent e);

enum class Winner : int { kNone = -1, kHome = 0, kAway = 1 };

struct EnvConfig {
  int agents_per_team = 3;
  int max_steps = 500;
  double field_half_width = 10.0;
  double field_half_length = 20.0;

  double max_speed = 0.5;
  double velocity_decay = 0.8;

  double pickup_radius = 1.0;
  double steal_radius = 0.6;
  double steal_probability = 0.05;

  double shot_base = 0.9;
  double shot_slope = 0.12;
  double shot_min = 0.02;
  double rebound_radius = 2.0;

  double intercept_radius = 0.5;
  double intercept_probability = 0.3;

  double kickoff_jitter = 0.5;

  // scripted team
  double shooting_range = 6.0;
  double pressure_radius = 1.5;
  double attack_line_margin = 6.0;
  double cover_fraction = 0.3;

  uint64_t rng_seed = 0;

  // Throws ConfigError on violated invariants.
  void validate() const;
};

int state_dim(int agents_per_team);
int obs_dim(int agents_per_team);
int num_actions(int agents_per_team);

// Action layout: 0 do-nothing, 1 shoot, 2..N+1 pass to teammate 0..N-1,
// then down, up, right, left.
struct ActionLayout {
  int n;
  int noop() const { return 0; }
  int shoot() const { return 1; }
  int pass(int teammate) const { return 2 + teammate; }
  int down() const { return n + 2; }
  int up() const { return n + 3; }
  int right() const { return n + 4; }
  int left() const { return n + 5; }
  int count() const { return n + 6; }
  bool is_pass(int a) const { return a >= 2 && a < n + 2; }
  bool is_move(int a) const { return a >= n + 2 && a < n + 6; }
};

struct Player {
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d vel = Eigen::Vector2d::Zero();
  bool operator==(const Player&) const = default;
};

struct GameState {
  std::array<std::vector<Player>, 2> players;
  int carrier_team = -1;   // -1 when the ball is free
  int carrier_index = -1;
  Eigen::Vector2d ball = Eigen::Vector2d::Zero();
  int step_count = 0;
  bool done = false;
  Winner winner = Winner::kNone;

  // possession bookkeeping used for event emission
  int last_team = -1;
  int last_carrier = -1;
  int rebound_team = -1;  // team whose missed shot has not been recovered yet

  bool ball_free() const { return carrier_team < 0; }
  bool has_ball(int team, int index) const {
    return carrier_team == team && carrier_index == index;
  }
  const Player& player(int team, int index) const { return players[team][index]; }
  bool operator==(const GameState&) const = default;
};

struct EventRecord {
  GameEvent event;
  int team;
  int player;
  bool operator==(const EventRecord&) const = default;
};

struct StepOutcome {
  GameState state;
  std::array<double, 2> reward{0.0, 0.0};
  bool done = false;
  Winner winner = Winner::kNone;
  std::vector<EventRecord> events;
};

// Kickoff state; both teams mirrored under 180 degree rotation.
GameState kickoff_state(const EnvConfig& config, Rng& rng);

// Advances one tick. Stochastic resolution draws from rng. Throws UsageError
// on malformed actions or when the episode is already over.
StepOutcome step(const EnvConfig& config, const GameState& state,
                 std::span<const int> home_actions, std::span<const int> away_actions,
                 Rng& rng);

// Shoot/pass without the ball, and self-passes, become do-nothing.
int effective_action(const EnvConfig& config, const GameState& state, int team, int index,
                     int action);

// Rotates the field by 180 degrees and swaps team labels.
GameState rotate_and_swap(const GameState& state);

Eigen::VectorXd encode_state(const EnvConfig& config, const GameState& state, Team perspective);
Eigen::VectorXd encode_observation(const EnvConfig& config, const GameState& state, Team team,
                                   int index);
// obs_dim x N matrix, one column per player of `team`.
Eigen::MatrixXd encode_team_observations(const EnvConfig& config, const GameState& state,
                                         Team team);

// Indices into an observation vector.
struct ObsLayout {
  int n;
  int carrier_rel() const { return 0; }      // 4 entries
  int self_has() const { return 4; }
  int team_has() const { return 5; }
  int own() const { return 6; }              // 4 entries
  int teammates() const { return 10; }       // 4 * (n - 1)
  int opponent_has() const { return 10 + 4 * (n - 1); }
  int opponents() const { return 11 + 4 * (n - 1); }  // 4 * n
  int size() const { return 11 + 4 * (n - 1) + 4 * n; }
};

// Rule-table opponent:
//   carrier: shoot inside shooting_range of the attacked goal; under pressure
//     (an opponent within pressure_radius) pass to a random open teammate; else
//     advance toward the goal.
//   own team in possession: move up until attack_line_margin from the goal
//     line, then spread laterally away from the carrier.
//   opponent in possession: the nearest player chases the carrier, the others
//     cover the point cover_fraction of the way from the own goal to the carrier.
//   ball free: the nearest player chases the ball, the others cover.
int scripted_action(const EnvConfig& config, const GameState& state, Team team, int index,
                    Rng& rng);

// Owns config, state and the environment RNG.
class Sts2Env {
 public:
  explicit Sts2Env(EnvConfig config);

  const GameState& reset(uint64_t seed);
  const StepOutcome& step(std::span<const int> home_actions, std::span<const int> away_actions);

  const GameState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }
  Rng& rng() { return rng_; }

  Eigen::VectorXd state_vector(Team perspective) const {
    return encode_state(config_, state_, perspective);
  }
  Eigen::MatrixXd observations(Team team) const {
    return encode_team_observations(config_, state_, team);
  }

 private:
  EnvConfig config_;
  GameState state_;
  StepOutcome last_;
  Rng rng_;
};

}  // namespace hsd::sts2
