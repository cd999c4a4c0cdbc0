#include "hsd/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hsd {

using nlohmann::json;
using sts2::kAway;
using sts2::kHome;

namespace {

nn::OptimizerConfig optimizer_config(const TrainConfig& c, double learning_rate) {
  nn::OptimizerConfig opt;
  opt.kind = c.optimizer == "sgd" ? nn::OptimizerKind::kSgd : nn::OptimizerKind::kAdam;
  opt.learning_rate = learning_rate;
  return opt;
}

std::vector<int> argmax_columns(const nn::Matrix& q) {
  std::vector<int> out(q.cols());
  for (Eigen::Index c = 0; c < q.cols(); ++c) out[c] = argmax_first(q.col(c));
  return out;
}

std::vector<int> scripted_team(const sts2::EnvConfig& env, const sts2::GameState& s,
                               sts2::Team team, Rng& rng) {
  std::vector<int> a(env.agents_per_team);
  for (int i = 0; i < env.agents_per_team; ++i) a[i] = sts2::scripted_action(env, s, team, i, rng);
  return a;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

// ---------------------------------------------------------------------------
// TeamPolicy

TeamPolicy TeamPolicy::create(const TrainConfig& config) {
  config.validate();
  TeamPolicy p;
  p.config = config;
  const int n = config.env.agents_per_team;
  const bool hier = is_hierarchical(config.algorithm);
  const nn::OptimizerConfig opt = optimizer_config(config, config.learning_rate);

  if (p.uses_high()) {
    HighPolicyConfig hc;
    hc.obs_dim = config.obs_dim();
    hc.state_dim = config.state_dim();
    hc.num_agents = n;
    hc.num_choices = hier ? config.num_skills : config.num_actions();
    hc.hidden = hier ? config.high_hidden : config.flat_hidden;
    hc.mixer_embed = config.mixer_embed;
    hc.optimizer = opt;
    hc.target_factor = config.target_factor;
    Rng rng = make_rng(config.seed, "high_init");
    p.high = HighPolicy(hc, rng);
  }
  if (p.uses_low()) {
    LowPolicyConfig lc;
    lc.obs_dim = config.obs_dim();
    lc.num_skills = config.num_skills;
    lc.num_actions = config.num_actions();
    lc.hidden = config.algorithm == Algorithm::kIqlFlat ? config.flat_hidden : config.low_hidden;
    lc.optimizer = opt;
    lc.target_factor = config.target_factor;
    Rng rng = make_rng(config.seed, "low_init");
    p.low = LowPolicy(lc, rng);
  }
  if (hier) {
    DecoderConfig dc;
    dc.network = {kDecoderFrameDim, config.decoder_hidden, config.num_skills};
    dc.optimizer = optimizer_config(config, config.decoder_learning_rate);
    dc.min_dataset = config.decoder_batch;
    dc.passes = config.decoder_passes;
    dc.minibatch = config.decoder_minibatch;
    Rng rng = make_rng(config.seed, "decoder_init");
    p.decoder = SkillDecoder(dc, rng);
  }
  p.alpha = config.alpha_start;
  return p;
}

std::vector<int> TeamPolicy::greedy_skills(const nn::Matrix& observations) const {
  if (!hierarchical()) return std::vector<int>(observations.cols(), 0);
  return high.greedy_skills(observations);
}

std::vector<int> TeamPolicy::greedy_actions(const nn::Matrix& observations,
                                            const std::vector<int>& skills) const {
  if (!uses_low()) return argmax_columns(high.utilities(observations));
  return argmax_columns(low.action_values(observations, skills));
}

void TeamPolicy::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  Checkpoint ck;
  if (uses_high()) high.save(ck, "high");
  if (uses_low()) low.save(ck, "low");
  if (hierarchical()) decoder.save(ck, "decoder");
  ck.save(dir / "params.ckpt");
  save_config(config, dir / "config.json");
  std::ofstream out(dir / "state.json", std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + (dir / "state.json").string());
  out << json{{"alpha", alpha}, {"episode", episode}}.dump() << '\n';
}

TeamPolicy TeamPolicy::load(const std::filesystem::path& dir) {
  TeamPolicy p = create(load_config(dir / "config.json"));
  const Checkpoint ck = Checkpoint::load(dir / "params.ckpt");
  if (p.uses_high()) p.high.load(ck, "high");
  if (p.uses_low()) p.low.load(ck, "low");
  if (p.hierarchical()) p.decoder.load(ck, "decoder");
  std::ifstream in(dir / "state.json");
  if (!in) throw CheckpointError("missing " + (dir / "state.json").string());
  try {
    const json j = json::parse(in);
    p.alpha = j.at("alpha").get<double>();
    p.episode = j.at("episode").get<long>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed state.json: ") + e.what());
  }
  return p;
}

// ---------------------------------------------------------------------------
// Evaluation

TeammateSpec TeammateSpec::parse(const std::string& text) {
  TeammateSpec s;
  if (text == "training") return s;
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("bad teammate spec '" + text + "'");
  const std::string kind = text.substr(0, colon);
  int value = 0;
  try {
    std::size_t used = 0;
    value = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ConfigError("bad teammate spec '" + text + "'");
  }
  if (kind == "scripted") {
    s.kind = Kind::kScripted;
    s.count = value;
  } else if (kind == "skill") {
    s.kind = Kind::kFixedSkill;
    s.skill = value;
  } else {
    throw ConfigError("bad teammate spec '" + text + "'");
  }
  return s;
}

std::string TeammateSpec::str() const {
  switch (kind) {
    case Kind::kTraining: return "training";
    case Kind::kScripted: return "scripted:" + std::to_string(count);
    case Kind::kFixedSkill: return "skill:" + std::to_string(skill);
  }
  return "?";
}

namespace {

void check_spec(const TeamPolicy& policy, const TeammateSpec& spec) {
  const int n = policy.config.env.agents_per_team;
  if (spec.kind == TeammateSpec::Kind::kScripted && (spec.count < 1 || spec.count > n)) {
    throw ConfigError("scripted teammate count must lie in [1, " + std::to_string(n) + "]");
  }
  if (spec.kind == TeammateSpec::Kind::kFixedSkill) {
    if (!policy.hierarchical()) throw ConfigError("fixed-skill teammates need a hierarchical policy");
    if (spec.skill < 0 || spec.skill >= policy.config.num_skills) {
      throw ConfigError("pinned skill out of range");
    }
  }
}

// One greedy episode; returns the winner.
sts2::Winner play_episode(const TeamPolicy& policy, const TeammateSpec& spec, uint64_t seed,
                          long index, EpisodeLog* log) {
  const TrainConfig& cfg = policy.config;
  const int n = cfg.env.agents_per_team;
  const int first_scripted = spec.kind == TeammateSpec::Kind::kScripted ? n - spec.count : n;
  sts2::Sts2Env env(cfg.env);
  env.reset(derive_seed(seed, "eval_env", index));
  Rng opponent = make_rng(seed, "eval_opponent", index);
  Rng mates = make_rng(seed, "eval_teammates", index);

  if (log) {
    log->episode = index;
    log->agents_per_team = n;
    log->num_skills = cfg.num_skills;
    log->t_seg = cfg.t_seg;
    log->field_half_width = cfg.env.field_half_width;
    log->field_half_length = cfg.env.field_half_length;
    log->steps.clear();
  }

  std::vector<int> skills(n, 0);
  for (int t = 0; !env.state().done; ++t) {
    const nn::Matrix obs = env.observations(kHome);
    if (policy.hierarchical() && t % cfg.t_seg == 0) {
      skills = policy.greedy_skills(obs);
      if (spec.kind == TeammateSpec::Kind::kFixedSkill) skills[n - 1] = spec.skill;
    }
    std::vector<int> home = policy.greedy_actions(obs, skills);
    for (int i = first_scripted; i < n; ++i) {
      home[i] = sts2::scripted_action(cfg.env, env.state(), kHome, i, mates);
    }
    const std::vector<int> away = scripted_team(cfg.env, env.state(), kAway, opponent);

    StepRecord rec;
    if (log) {
      rec.step = t;
      rec.state = env.state();
      rec.home_actions = home;
      rec.away_actions = away;
      rec.skills = skills;
      for (int i = first_scripted; i < n; ++i) rec.skills[i] = -1;
    }
    const sts2::StepOutcome& out = env.step(home, away);
    if (log) {
      rec.reward = out.reward;
      rec.events = out.events;
      log->steps.push_back(std::move(rec));
    }
  }
  if (log) log->winner = env.state().winner;
  return env.state().winner;
}

}  // namespace

EvalResult adhoc_evaluate(const TeamPolicy& policy, const TeammateSpec& spec, int episodes,
                          uint64_t seed, bool record_logs) {
  check_spec(policy, spec);
  EvalResult r;
  r.episodes = episodes;
  for (int i = 0; i < episodes; ++i) {
    EpisodeLog log;
    const sts2::Winner w = play_episode(policy, spec, seed, i, record_logs ? &log : nullptr);
    if (w == sts2::Winner::kHome) ++r.wins;
    else if (w == sts2::Winner::kAway) ++r.losses;
    else ++r.draws;
    if (record_logs) r.logs.push_back(std::move(log));
  }
  return r;
}

EvalResult evaluate(const TeamPolicy& policy, int episodes, uint64_t seed, bool record_logs) {
  return adhoc_evaluate(policy, TeammateSpec{}, episodes, seed, record_logs);
}

SkillDataset collect_segments(const TeamPolicy& policy, int count, uint64_t seed) {
  if (!policy.hierarchical()) throw ConfigError("segment collection needs a hierarchical policy");
  const TrainConfig& cfg = policy.config;
  const int n = cfg.env.agents_per_team;
  SkillDataset data;
  Rng skill_rng = make_rng(seed, "segment_skills");
  for (long episode = 0; static_cast<int>(data.size()) < count; ++episode) {
    sts2::Sts2Env env(cfg.env);
    env.reset(derive_seed(seed, "segment_env", episode));
    Rng opponent = make_rng(seed, "segment_opponent", episode);
    std::vector<int> skills(n, 0);
    std::vector<std::vector<Eigen::VectorXd>> frames(n);
    for (int t = 0; !env.state().done && static_cast<int>(data.size()) < count; ++t) {
      const nn::Matrix obs = env.observations(kHome);
      if (t % cfg.t_seg == 0) {
        for (int i = 0; i < n; ++i) {
          skills[i] = uniform_int(skill_rng, cfg.num_skills);
          frames[i].clear();
        }
      }
      for (int i = 0; i < n; ++i) frames[i].push_back(obs.col(i));
      const std::vector<int> home = policy.greedy_actions(obs, skills);
      const std::vector<int> away = scripted_team(cfg.env, env.state(), kAway, opponent);
      env.step(home, away);
      if ((t + 1) % cfg.t_seg == 0) {
        for (int i = 0; i < n && static_cast<int>(data.size()) < count; ++i) {
          data.add(skills[i], preprocess_segment({i, skills[i], frames[i]}, cfg.k_skip, n));
        }
      }
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// Metrics

std::string MetricsRecord::to_json_line() const {
  json j{{"episode", episode},
         {"win_rate", win_rate},
         {"lose_rate", lose_rate},
         {"draw_rate", draw_rate},
         {"alpha", alpha},
         {"epsilon", epsilon},
         {"high_loss", optional_json(high_loss)},
         {"low_loss", optional_json(low_loss)},
         {"decoder_loss", optional_json(decoder_loss)},
         {"decoder_accuracy", optional_json(decoder_accuracy)},
         {"high_updates", high_updates},
         {"low_updates", low_updates},
         {"decoder_updates", decoder_updates}};
  return j.dump();
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct LossMeter {
  double sum = 0.0;
  long count = 0;
  void add(double v) {
    sum += v;
    ++count;
  }
  std::optional<double> take() {
    std::optional<double> out;
    if (count > 0) out = sum / count;
    sum = 0.0;
    count = 0;
    return out;
  }
};

class Trainer {
 public:
  Trainer(const TrainConfig& config, std::optional<std::filesystem::path> out_dir,
          const TrainingHooks& hooks)
      : cfg_(config),
        out_dir_(std::move(out_dir)),
        hooks_(hooks),
        policy_(TeamPolicy::create(config)),
        high_buffer_(config.buffer_capacity),
        low_buffer_(config.buffer_capacity),
        high_explore_(make_rng(config.seed, "high_explore")),
        low_explore_(make_rng(config.seed, "low_explore")),
        high_sample_(make_rng(config.seed, "high_replay")),
        low_sample_(make_rng(config.seed, "low_replay")),
        decoder_rng_(make_rng(config.seed, "decoder_train")) {
    alpha_.alpha = config.alpha_start;
    alpha_.alpha_end = config.alpha_end;
    alpha_.alpha_step = config.alpha_step;
    alpha_.alpha_threshold = config.alpha_threshold;
    high_gamma_ = config.high_discount_per_step ? std::pow(config.gamma, config.t_seg) : config.gamma;
  }

  RunArtifacts run() {
    if (out_dir_) {
      std::filesystem::create_directories(*out_dir_ / "checkpoints");
      save_config(cfg_, *out_dir_ / "config.json");
      metrics_out_.open(*out_dir_ / "metrics.jsonl", std::ios::trunc);
      if (!metrics_out_) throw std::runtime_error("cannot write metrics.jsonl");
    }
    for (long e = 0; e < cfg_.total_episodes; ++e) {
      run_episode(e);
      const long done = e + 1;
      policy_.episode = done;
      if (done % cfg_.eval_every == 0) evaluate_and_log(done);
      if (out_dir_ && cfg_.checkpoint_every > 0 && done % cfg_.checkpoint_every == 0) {
        policy_.save(*out_dir_ / "checkpoints" / ("episode_" + std::to_string(done)));
      }
    }
    if (out_dir_) {
      policy_.save(*out_dir_ / "checkpoints" / "final");
      if (cfg_.final_eval_episodes > 0) {
        const EvalResult r = evaluate(policy_, cfg_.final_eval_episodes,
                                      derive_seed(cfg_.seed, "final_eval"), true);
        std::filesystem::create_directories(*out_dir_ / "replays");
        for (const auto& log : r.logs) {
          char name[64];
          std::snprintf(name, sizeof(name), "episode_%05ld.jsonl", log.episode);
          write_episode_log(log, *out_dir_ / "replays" / name);
        }
      }
    }
    RunArtifacts art;
    art.metrics = metrics_;
    art.policy = policy_;
    art.run_dir = out_dir_;
    return art;
  }

 private:
  bool flat_qmix() const { return cfg_.algorithm == Algorithm::kQmixFlat; }
  bool uses_decoder() const {
    return cfg_.algorithm == Algorithm::kHsd || cfg_.algorithm == Algorithm::kHsdExt;
  }
  bool uses_curriculum() const {
    return cfg_.algorithm == Algorithm::kHsd || cfg_.algorithm == Algorithm::kHsdScripted;
  }

  void high_step_done() {
    ++high_steps_;
    if (high_steps_ % cfg_.train_every != 0) return;
    auto batch = high_buffer_.sample_refs(cfg_.minibatch, high_sample_);
    if (!batch) return;
    high_loss_.add(policy_.high.update_qmix(*batch, high_gamma_));
    ++high_updates_;
    if (hooks_.on_high_update) hooks_.on_high_update(high_steps_);
  }

  void low_step_done() {
    ++low_steps_;
    if (low_steps_ % cfg_.train_every != 0) return;
    auto batch = low_buffer_.sample_refs(cfg_.minibatch, low_sample_);
    if (!batch) return;
    low_loss_.add(policy_.low.update_iql(*batch, cfg_.gamma));
    ++low_updates_;
    if (hooks_.on_low_update) hooks_.on_low_update(low_steps_);
  }

  void push_high(HighTransition tr, const SegmentInfo& info) {
    if (hooks_.on_high_transition) hooks_.on_high_transition(tr, info);
    high_buffer_.push(std::move(tr));
  }

  void push_low(LowTransition tr) {
    if (hooks_.on_low_transition) hooks_.on_low_transition(tr);
    low_buffer_.push(std::move(tr));
  }

  // Subtask rewards for the scripted-reward variant: skill 0 is rewarded for
  // scoring, skill 1 for stealing.
  static double scripted_reward(int skill, int agent, const std::vector<sts2::EventRecord>& events) {
    double r = 0.0;
    for (const auto& e : events) {
      if (e.team != kHome || e.player != agent) continue;
      if (skill == 0 && e.event == sts2::GameEvent::kGoal) r += 1.0;
      if (skill == 1 && e.event == sts2::GameEvent::kSteal) r += 1.0;
    }
    return r;
  }

  void run_episode(long episode) {
    const int n = cfg_.env.agents_per_team;
    const bool hier = policy_.hierarchical();
    const double eps = cfg_.epsilon_at(episode);
    sts2::Sts2Env env(cfg_.env);
    env.reset(derive_seed(cfg_.seed, "train_env", static_cast<uint64_t>(episode)));
    Rng opponent = make_rng(cfg_.seed, "train_opponent", static_cast<uint64_t>(episode));

    std::vector<int> skills(n, 0);
    nn::Matrix obs = env.observations(kHome);
    Eigen::VectorXd state = env.state_vector(kHome);

    Eigen::VectorXd seg_state;
    nn::Matrix seg_obs;
    SegmentInfo seg;
    seg.episode = episode;
    std::vector<std::vector<Eigen::VectorXd>> frames(n);

    for (int t = 0; !env.state().done; ++t) {
      if (hier && t % cfg_.t_seg == 0) {
        skills = policy_.high.select_skills(obs, eps, high_explore_);
        seg_state = state;
        seg_obs = obs;
        seg.start_step = t;
        seg.rewards.clear();
        for (auto& f : frames) f.clear();
        high_step_done();
      }

      std::vector<int> home = flat_qmix() ? policy_.high.select_skills(obs, eps, high_explore_)
                                          : policy_.low.select_actions(obs, skills, eps, low_explore_);
      const std::vector<int> away = scripted_team(cfg_.env, env.state(), kAway, opponent);
      if (hier) {
        for (int i = 0; i < n; ++i) frames[i].push_back(obs.col(i));
      }

      const sts2::StepOutcome& out = env.step(home, away);
      const double reward = out.reward[kHome];
      const bool done = out.done;
      nn::Matrix next_obs = env.observations(kHome);
      Eigen::VectorXd next_state = env.state_vector(kHome);

      if (flat_qmix()) {
        SegmentInfo info{episode, t, {reward}};
        push_high({state, obs, home, reward, next_state, next_obs, done}, info);
        high_step_done();
      } else {
        std::vector<double> intrinsic(n, 0.0);
        bool segment_end = false;
        if (hier) {
          seg.rewards.push_back(reward);
          segment_end = static_cast<int>(seg.rewards.size()) == cfg_.t_seg;
        }
        if (segment_end) {
          const double r_seg = smdp_reward(seg.rewards, cfg_.t_seg, cfg_.gamma, cfg_.smdp_form);
          push_high({seg_state, seg_obs, skills, r_seg, next_state, next_obs, done}, seg);
          if (uses_decoder()) {
            std::vector<DecoderInput> inputs;
            for (int i = 0; i < n; ++i) {
              inputs.push_back(preprocess_segment({i, skills[i], frames[i]}, cfg_.k_skip, n));
            }
            const nn::Matrix probs = policy_.decoder.probabilities(inputs);
            for (int i = 0; i < n; ++i) {
              intrinsic[i] = probs(skills[i], i);
              dataset_.add(skills[i], std::move(inputs[i]));
            }
          }
        }
        for (int i = 0; i < n; ++i) {
          double r_low = reward;
          switch (cfg_.algorithm) {
            case Algorithm::kHsd:
              r_low = low_level_reward(reward, alpha_.alpha, intrinsic[i]);
              break;
            case Algorithm::kHsdExt:
              r_low = intrinsic[i];
              break;
            case Algorithm::kHsdScripted:
              r_low = low_level_reward(reward, alpha_.alpha,
                                       scripted_reward(skills[i], i, out.events));
              break;
            default:
              break;
          }
          push_low({obs.col(i), skills[i], home[i], r_low, next_obs.col(i), done});
        }
        low_step_done();
      }
      obs = std::move(next_obs);
      state = std::move(next_state);
    }

    if (uses_decoder() && static_cast<int>(dataset_.size()) >= cfg_.decoder_batch) {
      if (hooks_.on_decoder_flush) hooks_.on_decoder_flush(episode, dataset_.size());
      const double accuracy = policy_.decoder.accuracy(dataset_);
      const std::optional<double> loss = policy_.decoder.train(dataset_, decoder_rng_);
      if (loss) {
        decoder_loss_ = loss;
        decoder_accuracy_ = accuracy;
        ++decoder_updates_;
      }
    }
  }

  void evaluate_and_log(long episodes_done) {
    const EvalResult r = evaluate(policy_, cfg_.eval_episodes, derive_seed(cfg_.seed, "eval"));
    if (uses_curriculum()) {
      alpha_.update(r.win_rate(), episodes_done);
      policy_.alpha = alpha_.alpha;
    }
    MetricsRecord m;
    m.episode = episodes_done;
    m.win_rate = r.win_rate();
    m.lose_rate = r.lose_rate();
    m.draw_rate = r.draw_rate();
    m.alpha = alpha_.alpha;
    m.epsilon = cfg_.epsilon_at(episodes_done);
    m.high_loss = high_loss_.take();
    m.low_loss = low_loss_.take();
    m.decoder_loss = decoder_loss_;
    m.decoder_accuracy = decoder_accuracy_;
    decoder_loss_.reset();
    decoder_accuracy_.reset();
    m.high_updates = high_updates_;
    m.low_updates = low_updates_;
    m.decoder_updates = decoder_updates_;
    metrics_.push_back(m);
    if (metrics_out_.is_open()) {
      metrics_out_ << m.to_json_line() << '\n';
      metrics_out_.flush();
    }
    if (hooks_.on_metrics) hooks_.on_metrics(m);
  }

  TrainConfig cfg_;
  std::optional<std::filesystem::path> out_dir_;
  TrainingHooks hooks_;
  TeamPolicy policy_;
  AlphaSchedule alpha_;
  ReplayBuffer<HighTransition> high_buffer_;
  ReplayBuffer<LowTransition> low_buffer_;
  SkillDataset dataset_;
  Rng high_explore_, low_explore_, high_sample_, low_sample_, decoder_rng_;
  double high_gamma_ = 0.99;

  long high_steps_ = 0, low_steps_ = 0;
  long high_updates_ = 0, low_updates_ = 0, decoder_updates_ = 0;
  LossMeter high_loss_, low_loss_;
  std::optional<double> decoder_loss_, decoder_accuracy_;
  std::vector<MetricsRecord> metrics_;
  std::ofstream metrics_out_;
};

}  // namespace

RunArtifacts run_training(const TrainConfig& config,
                          const std::optional<std::filesystem::path>& out_dir,
                          const TrainingHooks& hooks) {
  config.validate();
  Trainer trainer(config, out_dir, hooks);
  return trainer.run();
}

}  // namespace hsd
