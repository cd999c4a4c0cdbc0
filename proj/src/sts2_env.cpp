#include "hsd/sts2_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hsd::sts2 {

using Eigen::Vector2d;

const char* event_name(GameEvent e) {
  switch (e) {
    case GameEvent::kGoal: return "goal";
    case GameEvent::kOffensiveRebound: return "offensive_rebound";
    case GameEvent::kShotAttempt: return "shot_attempt";
    case GameEvent::kMadePass: return "made_pass";
    case GameEvent::kReceivedPass: return "received_pass";
    case GameEvent::kSteal: return "steal";
    case GameEvent::kPossessionGain: return "possession_gain";
    case GameEvent::kPossessionLoss: return "possession_loss";
  }
  return "unknown";
}

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// World <-> team frame. The away frame is the world rotated by 180 degrees.
Vector2d to_frame(Vector2d v, int team) { return team == kHome ? v : Vector2d(-v); }

Vector2d attacked_goal(const EnvConfig& c, int team) {
  return Vector2d(0.0, team == kHome ? c.field_half_length : -c.field_half_length);
}

Vector2d clamp_to_field(const EnvConfig& c, Vector2d p) {
  p.x() = std::clamp(p.x(), -c.field_half_width, c.field_half_width);
  p.y() = std::clamp(p.y(), -c.field_half_length, c.field_half_length);
  return p;
}

double distance_to_segment(const Vector2d& p, const Vector2d& a, const Vector2d& b) {
  const Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Unit direction for a movement action, in the world frame.
Vector2d move_direction(const ActionLayout& layout, int action, int team) {
  Vector2d d = Vector2d::Zero();
  if (action == layout.down()) d = Vector2d(0.0, -1.0);
  else if (action == layout.up()) d = Vector2d(0.0, 1.0);
  else if (action == layout.right()) d = Vector2d(1.0, 0.0);
  else if (action == layout.left()) d = Vector2d(-1.0, 0.0);
  return to_frame(d, team);
}

void check_actions(const EnvConfig& c, std::span<const int> actions, const char* who) {
  if (static_cast<int>(actions.size()) != c.agents_per_team) {
    throw UsageError(std::string("wrong number of ") + who + " actions");
  }
  const int n_act = num_actions(c.agents_per_team);
  for (int a : actions) {
    if (a < 0 || a >= n_act) {
      throw UsageError(std::string("malformed ") + who + " action index " + std::to_string(a));
    }
  }
}

class StepResolver {
 public:
  StepResolver(const EnvConfig& c, StepOutcome& out, Rng& rng) : c_(c), out_(out), rng_(rng) {}

  void emit(GameEvent e, int team, int player) { out_.events.push_back({e, team, player}); }

  // Hands the ball to (team, index), emitting gain/loss and rebound events.
  void acquire(int team, int index, bool from_free_ball) {
    GameState& s = out_.state;
    if (s.last_team >= 0 && s.last_team != team) {
      emit(GameEvent::kPossessionGain, team, index);
      emit(GameEvent::kPossessionLoss, s.last_team, s.last_carrier);
      out_.reward[team] += 0.1;
      out_.reward[s.last_team] -= 0.1;
    }
    if (from_free_ball && s.rebound_team == team) {
      emit(GameEvent::kOffensiveRebound, team, index);
    }
    s.rebound_team = -1;
    s.carrier_team = team;
    s.carrier_index = index;
    s.last_team = team;
    s.last_carrier = index;
    s.ball = s.players[team][index].pos;
  }

  void release(Vector2d where) {
    GameState& s = out_.state;
    s.carrier_team = -1;
    s.carrier_index = -1;
    s.ball = clamp_to_field(c_, where);
  }

  void shoot(int team, int index) {
    GameState& s = out_.state;
    emit(GameEvent::kShotAttempt, team, index);
    const Vector2d goal = attacked_goal(c_, team);
    const double d = (s.players[team][index].pos - goal).norm();
    const double p = std::max(c_.shot_min, c_.shot_base - c_.shot_slope * d);
    if (uniform01(rng_) < p) {
      emit(GameEvent::kGoal, team, index);
      out_.reward[team] += 1.0;
      out_.reward[other(Team(team))] -= 1.0;
      release(goal);
      s.rebound_team = -1;
      s.done = true;
      s.winner = static_cast<Winner>(team);
      return;
    }
    const double r = c_.rebound_radius * std::sqrt(uniform01(rng_));
    const double theta = uniform(rng_, 0.0, 2.0 * M_PI);
    release(goal + Vector2d(r * std::cos(theta), r * std::sin(theta)));
    s.rebound_team = team;
  }

  void pass(int team, int index, int receiver) {
    GameState& s = out_.state;
    const Vector2d from = s.players[team][index].pos;
    const Vector2d to = s.players[team][receiver].pos;
    const int opp = other(Team(team));
    int interceptor = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < c_.agents_per_team; ++j) {
      const Vector2d& p = s.players[opp][j].pos;
      if (distance_to_segment(p, from, to) <= c_.intercept_radius) {
        const double d = (p - from).norm();
        if (d < best) {
          best = d;
          interceptor = j;
        }
      }
    }
    if (interceptor >= 0 && uniform01(rng_) < c_.intercept_probability) {
      release(s.players[opp][interceptor].pos);
      return;
    }
    emit(GameEvent::kMadePass, team, index);
    emit(GameEvent::kReceivedPass, team, receiver);
    s.carrier_index = receiver;
    s.last_carrier = receiver;
    s.ball = to;
  }

  void try_steal() {
    GameState& s = out_.state;
    if (s.ball_free()) return;
    const int opp = other(Team(s.carrier_team));
    const Vector2d carrier = s.players[s.carrier_team][s.carrier_index].pos;
    std::vector<std::pair<double, int>> close;
    for (int j = 0; j < c_.agents_per_team; ++j) {
      const double d = (s.players[opp][j].pos - carrier).norm();
      if (d <= c_.steal_radius) close.emplace_back(d, j);
    }
    std::sort(close.begin(), close.end());
    for (const auto& [d, j] : close) {
      if (uniform01(rng_) < c_.steal_probability) {
        emit(GameEvent::kSteal, opp, j);
        acquire(opp, j, false);
        return;
      }
    }
  }

  void try_pickup() {
    GameState& s = out_.state;
    if (!s.ball_free()) return;
    int best_team = -1, best_index = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 2; ++t) {
      for (int i = 0; i < c_.agents_per_team; ++i) {
        const double d = (s.players[t][i].pos - s.ball).norm();
        // strict comparison keeps the lowest (team, index) on ties
        if (d <= c_.pickup_radius && d < best) {
          best = d;
          best_team = t;
          best_index = i;
        }
      }
    }
    if (best_team >= 0) acquire(best_team, best_index, true);
  }

 private:
  const EnvConfig& c_;
  StepOutcome& out_;
  Rng& rng_;
};

}  // namespace

void EnvConfig::validate() const {
  if (agents_per_team < 1) throw ConfigError("agents_per_team must be >= 1");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (!(field_half_width > 0.0) || !(field_half_length > 0.0)) {
    throw ConfigError("field dimensions must be positive");
  }
  if (std::abs(field_half_length - 2.0 * field_half_width) > 1e-12 * field_half_length) {
    throw ConfigError("field_half_length must be twice field_half_width");
  }
  if (!(max_speed > 0.0)) throw ConfigError("max_speed must be positive");
  if (velocity_decay < 0.0 || velocity_decay >= 1.0) {
    throw ConfigError("velocity_decay must lie in [0, 1)");
  }
  for (double p : {steal_probability, shot_base, shot_min, intercept_probability, cover_fraction}) {
    if (!is_probability(p)) throw ConfigError("probability parameter outside [0, 1]");
  }
  for (double r : {pickup_radius, steal_radius, rebound_radius, intercept_radius, shooting_range,
                   pressure_radius, shot_slope, kickoff_jitter, attack_line_margin}) {
    if (r < 0.0) throw ConfigError("radius/slope parameters must be non-negative");
  }
}

int state_dim(int n) { return 4 + 10 * n; }
int obs_dim(int n) { return 7 + 8 * n; }
int num_actions(int n) { return n + 6; }

GameState kickoff_state(const EnvConfig& c, Rng& rng) {
  c.validate();
  const int n = c.agents_per_team;
  GameState s;
  s.players[kHome].resize(n);
  s.players[kAway].resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = -c.field_half_width + 2.0 * c.field_half_width * (i + 0.5) / n;
    const double y = -0.25 * c.field_half_length;
    Vector2d p(x + uniform(rng, -c.kickoff_jitter, c.kickoff_jitter),
               y + uniform(rng, -c.kickoff_jitter, c.kickoff_jitter));
    p = clamp_to_field(c, p);
    s.players[kHome][i].pos = p;
    s.players[kAway][i].pos = -p;
  }
  return s;
}

int effective_action(const EnvConfig& c, const GameState& s, int team, int index, int action) {
  const ActionLayout layout{c.agents_per_team};
  const bool carrier = s.has_ball(team, index);
  if (action == layout.shoot() && !carrier) return layout.noop();
  if (layout.is_pass(action)) {
    if (!carrier) return layout.noop();
    if (action - 2 == index) return layout.noop();
  }
  return action;
}

StepOutcome step(const EnvConfig& c, const GameState& state, std::span<const int> home_actions,
                 std::span<const int> away_actions, Rng& rng) {
  if (state.done) throw UsageError("step called on a finished episode");
  check_actions(c, home_actions, "home");
  check_actions(c, away_actions, "away");

  const ActionLayout layout{c.agents_per_team};
  const int n = c.agents_per_team;
  StepOutcome out;
  out.state = state;
  GameState& s = out.state;

  std::array<std::vector<int>, 2> eff;
  for (int t = 0; t < 2; ++t) {
    const auto& acts = t == kHome ? home_actions : away_actions;
    eff[t].resize(n);
    for (int i = 0; i < n; ++i) eff[t][i] = effective_action(c, state, t, i, acts[i]);
  }

  // kinematics
  for (int t = 0; t < 2; ++t) {
    for (int i = 0; i < n; ++i) {
      Player& p = s.players[t][i];
      p.vel *= c.velocity_decay;
      if (layout.is_move(eff[t][i])) {
        p.vel += (1.0 - c.velocity_decay) * c.max_speed * move_direction(layout, eff[t][i], t);
      }
      p.pos += p.vel;
      if (std::abs(p.pos.x()) > c.field_half_width) p.vel.x() = 0.0;
      if (std::abs(p.pos.y()) > c.field_half_length) p.vel.y() = 0.0;
      p.pos = clamp_to_field(c, p.pos);
    }
  }
  if (!s.ball_free()) s.ball = s.players[s.carrier_team][s.carrier_index].pos;

  StepResolver resolver(c, out, rng);
  if (!s.ball_free()) {
    const int t = s.carrier_team;
    const int i = s.carrier_index;
    const int a = eff[t][i];
    if (a == layout.shoot()) resolver.shoot(t, i);
    else if (layout.is_pass(a)) resolver.pass(t, i, a - 2);
  }
  if (!s.done) {
    resolver.try_steal();
    resolver.try_pickup();
  }

  const double hold = 1.0 / (2.0 * c.max_steps);
  for (int t = 0; t < 2; ++t) out.reward[t] += s.carrier_team == t ? hold : -hold;

  s.step_count += 1;
  if (!s.done && s.step_count >= c.max_steps) {
    s.done = true;
    s.winner = Winner::kNone;
  }
  out.done = s.done;
  out.winner = s.winner;
  return out;
}

GameState rotate_and_swap(const GameState& s) {
  GameState r = s;
  for (int t = 0; t < 2; ++t) {
    r.players[t] = s.players[1 - t];
    for (Player& p : r.players[t]) {
      p.pos = -p.pos;
      p.vel = -p.vel;
    }
  }
  auto swap_team = [](int t) { return t < 0 ? t : 1 - t; };
  r.carrier_team = swap_team(s.carrier_team);
  r.last_team = swap_team(s.last_team);
  r.rebound_team = swap_team(s.rebound_team);
  r.ball = -s.ball;
  if (s.winner != Winner::kNone) r.winner = static_cast<Winner>(1 - static_cast<int>(s.winner));
  return r;
}

namespace {

struct Normalizer {
  Vector2d extent;
  double speed;
  Vector2d pos(const Vector2d& p) const { return p.cwiseQuotient(extent); }
  Vector2d vel(const Vector2d& v) const { return v / speed; }
};

Normalizer normalizer(const EnvConfig& c) {
  return {Vector2d(c.field_half_width, c.field_half_length), c.max_speed};
}

// Carrier kinematics, or the ball at rest when nobody holds it.
std::pair<Vector2d, Vector2d> ball_kinematics(const GameState& s) {
  if (s.ball_free()) return {s.ball, Vector2d::Zero()};
  const Player& p = s.players[s.carrier_team][s.carrier_index];
  return {p.pos, p.vel};
}

}  // namespace

Eigen::VectorXd encode_state(const EnvConfig& c, const GameState& s, Team perspective) {
  const int n = c.agents_per_team;
  const Normalizer norm = normalizer(c);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(state_dim(n));
  const auto [ball_pos, ball_vel] = ball_kinematics(s);
  const Vector2d goal(0.0, c.field_half_length);
  v.segment<2>(0) = norm.pos(to_frame(ball_pos, perspective) - goal);
  v.segment<2>(2) = norm.vel(to_frame(ball_vel, perspective));
  if (!s.ball_free()) {
    const int slot = (s.carrier_team == perspective ? 0 : n) + s.carrier_index;
    v[4 + slot] = 1.0;
  }
  int k = 4 + 2 * n;
  for (int t : {static_cast<int>(perspective), static_cast<int>(other(perspective))}) {
    for (const Player& p : s.players[t]) {
      v.segment<2>(k) = norm.pos(to_frame(p.pos, perspective));
      v.segment<2>(k + 2) = norm.vel(to_frame(p.vel, perspective));
      k += 4;
    }
  }
  return v;
}

Eigen::VectorXd encode_observation(const EnvConfig& c, const GameState& s, Team team, int index) {
  const int n = c.agents_per_team;
  const ObsLayout layout{n};
  const Normalizer norm = normalizer(c);
  Eigen::VectorXd o = Eigen::VectorXd::Zero(layout.size());
  const Player& me = s.players[team][index];
  const Vector2d my_pos = to_frame(me.pos, team);
  const Vector2d my_vel = to_frame(me.vel, team);
  auto relative = [&](const Vector2d& pos, const Vector2d& vel, int at) {
    o.segment<2>(at) = norm.pos(to_frame(pos, team) - my_pos);
    o.segment<2>(at + 2) = norm.vel(to_frame(vel, team) - my_vel);
  };

  const auto [ball_pos, ball_vel] = ball_kinematics(s);
  relative(ball_pos, ball_vel, layout.carrier_rel());
  if (s.has_ball(team, index)) o.segment<4>(layout.carrier_rel()).setZero();
  o[layout.self_has()] = s.has_ball(team, index) ? 1.0 : 0.0;
  o[layout.team_has()] = s.carrier_team == team ? 1.0 : 0.0;
  o.segment<2>(layout.own()) = norm.pos(my_pos);
  o.segment<2>(layout.own() + 2) = norm.vel(my_vel);
  int k = layout.teammates();
  for (int j = 0; j < n; ++j) {
    if (j == index) continue;
    const Player& p = s.players[team][j];
    relative(p.pos, p.vel, k);
    k += 4;
  }
  o[layout.opponent_has()] = s.carrier_team == other(team) ? 1.0 : 0.0;
  k = layout.opponents();
  for (const Player& p : s.players[other(team)]) {
    relative(p.pos, p.vel, k);
    k += 4;
  }
  return o;
}

Eigen::MatrixXd encode_team_observations(const EnvConfig& c, const GameState& s, Team team) {
  const int n = c.agents_per_team;
  Eigen::MatrixXd obs(obs_dim(n), n);
  for (int i = 0; i < n; ++i) obs.col(i) = encode_observation(c, s, team, i);
  return obs;
}

namespace {

int move_toward(const ActionLayout& layout, const Vector2d& d) {
  if (d.norm() < 1e-9) return layout.noop();
  if (std::abs(d.y()) >= std::abs(d.x())) return d.y() > 0 ? layout.up() : layout.down();
  return d.x() > 0 ? layout.right() : layout.left();
}

int nearest_player(const std::vector<Vector2d>& team_pos, const Vector2d& target) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(team_pos.size()); ++j) {
    if ((team_pos[j] - target).norm() < (team_pos[best] - target).norm()) best = j;
  }
  return best;
}

}  // namespace

int scripted_action(const EnvConfig& c, const GameState& s, Team team, int index, Rng& rng) {
  const int n = c.agents_per_team;
  const ActionLayout layout{n};
  std::vector<Vector2d> mine(n), theirs(n);
  for (int j = 0; j < n; ++j) {
    mine[j] = to_frame(s.players[team][j].pos, team);
    theirs[j] = to_frame(s.players[other(team)][j].pos, team);
  }
  const Vector2d me = mine[index];
  const Vector2d goal(0.0, c.field_half_length);
  const Vector2d own_goal(0.0, -c.field_half_length);
  auto pressured = [&](const Vector2d& p) {
    for (const Vector2d& q : theirs) {
      if ((q - p).norm() <= c.pressure_radius) return true;
    }
    return false;
  };
  auto cover = [&](const Vector2d& threat) {
    const Vector2d target = own_goal + c.cover_fraction * (threat - own_goal);
    const Vector2d d = target - me;
    return d.norm() > 0.5 ? move_toward(layout, d) : layout.noop();
  };

  if (s.has_ball(team, index)) {
    if ((goal - me).norm() <= c.shooting_range) return layout.shoot();
    if (pressured(me)) {
      std::vector<int> open;
      for (int j = 0; j < n; ++j) {
        if (j != index && !pressured(mine[j])) open.push_back(j);
      }
      if (!open.empty()) return layout.pass(open[uniform_int(rng, static_cast<int>(open.size()))]);
    }
    return move_toward(layout, goal - me);
  }
  if (s.carrier_team == team) {
    if (me.y() < c.field_half_length - c.attack_line_margin) return layout.up();
    const Vector2d carrier = mine[s.carrier_index];
    if (me.x() >= carrier.x()) {
      return me.x() < c.field_half_width - 1.0 ? layout.right() : layout.noop();
    }
    return me.x() > -c.field_half_width + 1.0 ? layout.left() : layout.noop();
  }
  const Vector2d threat = s.ball_free() ? to_frame(s.ball, team) : theirs[s.carrier_index];
  if (nearest_player(mine, threat) == index) return move_toward(layout, threat - me);
  return cover(threat);
}

Sts2Env::Sts2Env(EnvConfig config) : config_(config), rng_(config.rng_seed) {
  config_.validate();
}

const GameState& Sts2Env::reset(uint64_t seed) {
  rng_.seed(seed);
  state_ = kickoff_state(config_, rng_);
  return state_;
}

const StepOutcome& Sts2Env::step(std::span<const int> home_actions,
                                 std::span<const int> away_actions) {
  last_ = sts2::step(config_, state_, home_actions, away_actions, rng_);
  state_ = last_.state;
  return last_;
}

}  // namespace hsd::sts2
