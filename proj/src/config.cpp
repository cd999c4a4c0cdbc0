#include "hsd/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hsd {

using nlohmann::json;

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kHsd: return "hsd";
    case Algorithm::kQmixFlat: return "qmix_flat";
    case Algorithm::kIqlFlat: return "iql_flat";
    case Algorithm::kHsdScripted: return "hsd_scripted";
    case Algorithm::kHsdExt: return "hsd_ext";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kHsd, Algorithm::kQmixFlat, Algorithm::kIqlFlat,
                      Algorithm::kHsdScripted, Algorithm::kHsdExt}) {
    if (name == algorithm_name(a)) return a;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

void TrainConfig::validate() const {
  try {
    env.validate();
  } catch (const sts2::ConfigError& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
  auto check = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  check(num_skills >= 1, "num_skills must be >= 1");
  if (!is_hierarchical(algorithm)) {
    check(num_skills == 1, "flat algorithms require num_skills = 1");
  }
  if (algorithm == Algorithm::kHsdScripted) {
    check(num_skills >= 2, "hsd_scripted needs at least two skills");
  }
  check(k_skip >= 1, "k_skip must be >= 1");
  check(t_seg >= 2 * k_skip, "t_seg must be >= 2 * k_skip");
  check(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  check(learning_rate >= 0.0, "learning_rate must be non-negative");
  check(optimizer == "adam" || optimizer == "sgd", "optimizer must be 'adam' or 'sgd'");
  check(buffer_capacity >= 1, "buffer_capacity must be >= 1");
  check(minibatch >= 1, "minibatch must be >= 1");
  check(train_every >= 1, "train_every must be >= 1");
  check(eval_every >= 1, "eval_every must be >= 1");
  check(eval_episodes >= 1, "eval_episodes must be >= 1");
  check(total_episodes >= 0, "total_episodes must be >= 0");
  check(epsilon_start >= 0.0 && epsilon_start <= 1.0, "epsilon_start must lie in [0, 1]");
  check(epsilon_end >= 0.0 && epsilon_end <= 1.0, "epsilon_end must lie in [0, 1]");
  check(epsilon_decay_episodes >= 1, "epsilon_decay_episodes must be >= 1");
  check(alpha_end >= 0.0 && alpha_end <= alpha_start && alpha_start <= 1.0,
        "alpha must satisfy 0 <= alpha_end <= alpha_start <= 1");
  check(alpha_step >= 0.0, "alpha_step must be non-negative");
  check(alpha_threshold >= 0.0 && alpha_threshold <= 1.0, "alpha_threshold must lie in [0, 1]");
  check(decoder_batch >= 1 && decoder_passes >= 1 && decoder_minibatch >= 1 &&
            decoder_hidden >= 1,
        "decoder sizes must be positive");
  check(decoder_learning_rate >= 0.0, "decoder_learning_rate must be non-negative");
  check(target_factor >= 0.0 && target_factor <= 1.0, "target_factor must lie in [0, 1]");
  for (const auto* widths : {&low_hidden, &high_hidden, &flat_hidden}) {
    for (int w : *widths) check(w >= 1, "hidden widths must be positive");
  }
  check(mixer_embed >= 1, "mixer_embed must be >= 1");
  check(checkpoint_every >= 0, "checkpoint_every must be >= 0");
  check(final_eval_episodes >= 0, "final_eval_episodes must be >= 0");
}

double TrainConfig::epsilon_at(long episode) const {
  const double frac = std::min(1.0, static_cast<double>(episode) / epsilon_decay_episodes);
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

namespace {

json env_to_json(const sts2::EnvConfig& e) {
  return json{{"agents_per_team", e.agents_per_team},
              {"max_steps", e.max_steps},
              {"field_half_width", e.field_half_width},
              {"field_half_length", e.field_half_length},
              {"max_speed", e.max_speed},
              {"velocity_decay", e.velocity_decay},
              {"pickup_radius", e.pickup_radius},
              {"steal_radius", e.steal_radius},
              {"steal_probability", e.steal_probability},
              {"shot_base", e.shot_base},
              {"shot_slope", e.shot_slope},
              {"shot_min", e.shot_min},
              {"rebound_radius", e.rebound_radius},
              {"intercept_radius", e.intercept_radius},
              {"intercept_probability", e.intercept_probability},
              {"kickoff_jitter", e.kickoff_jitter},
              {"shooting_range", e.shooting_range},
              {"pressure_radius", e.pressure_radius},
              {"attack_line_margin", e.attack_line_margin},
              {"cover_fraction", e.cover_fraction},
              {"rng_seed", e.rng_seed}};
}

json config_to_json(const TrainConfig& c) {
  return json{
      {"algorithm", algorithm_name(c.algorithm)},
      {"num_skills", c.num_skills},
      {"t_seg", c.t_seg},
      {"k_skip", c.k_skip},
      {"gamma", c.gamma},
      {"learning_rate", c.learning_rate},
      {"optimizer", c.optimizer},
      {"buffer_capacity", c.buffer_capacity},
      {"minibatch", c.minibatch},
      {"train_every", c.train_every},
      {"eval_every", c.eval_every},
      {"eval_episodes", c.eval_episodes},
      {"total_episodes", c.total_episodes},
      {"epsilon_start", c.epsilon_start},
      {"epsilon_end", c.epsilon_end},
      {"epsilon_decay_episodes", c.epsilon_decay_episodes},
      {"alpha_start", c.alpha_start},
      {"alpha_end", c.alpha_end},
      {"alpha_step", c.alpha_step},
      {"alpha_threshold", c.alpha_threshold},
      {"decoder_batch", c.decoder_batch},
      {"decoder_passes", c.decoder_passes},
      {"decoder_minibatch", c.decoder_minibatch},
      {"decoder_hidden", c.decoder_hidden},
      {"decoder_learning_rate", c.decoder_learning_rate},
      {"target_factor", c.target_factor},
      {"low_hidden", c.low_hidden},
      {"high_hidden", c.high_hidden},
      {"flat_hidden", c.flat_hidden},
      {"mixer_embed", c.mixer_embed},
      {"smdp_form", c.smdp_form == SmdpRewardForm::kDiscountedSum ? "discounted" : "scaled"},
      {"high_discount_per_step", c.high_discount_per_step},
      {"checkpoint_every", c.checkpoint_every},
      {"final_eval_episodes", c.final_eval_episodes},
      {"seed", c.seed},
      {"env", env_to_json(c.env)},
  };
}

// Reads every known key present in `j` into the matching field and rejects
// unknown keys.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& field) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      field = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

sts2::EnvConfig env_from_json(const json& j) {
  sts2::EnvConfig e;
  Reader r(j, "env");
  r.read("agents_per_team", e.agents_per_team);
  r.read("max_steps", e.max_steps);
  r.read("field_half_width", e.field_half_width);
  r.read("field_half_length", e.field_half_length);
  r.read("max_speed", e.max_speed);
  r.read("velocity_decay", e.velocity_decay);
  r.read("pickup_radius", e.pickup_radius);
  r.read("steal_radius", e.steal_radius);
  r.read("steal_probability", e.steal_probability);
  r.read("shot_base", e.shot_base);
  r.read("shot_slope", e.shot_slope);
  r.read("shot_min", e.shot_min);
  r.read("rebound_radius", e.rebound_radius);
  r.read("intercept_radius", e.intercept_radius);
  r.read("intercept_probability", e.intercept_probability);
  r.read("kickoff_jitter", e.kickoff_jitter);
  r.read("shooting_range", e.shooting_range);
  r.read("pressure_radius", e.pressure_radius);
  r.read("attack_line_margin", e.attack_line_margin);
  r.read("cover_fraction", e.cover_fraction);
  r.read("rng_seed", e.rng_seed);
  r.finish();
  return e;
}

}  // namespace

std::string to_json_string(const TrainConfig& config) { return config_to_json(config).dump(2); }

TrainConfig config_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  TrainConfig c;
  Reader r(j, "config");
  std::string algorithm = algorithm_name(c.algorithm);
  r.read("algorithm", algorithm);
  c.algorithm = parse_algorithm(algorithm);
  r.read("num_skills", c.num_skills);
  r.read("t_seg", c.t_seg);
  r.read("k_skip", c.k_skip);
  r.read("gamma", c.gamma);
  r.read("learning_rate", c.learning_rate);
  r.read("optimizer", c.optimizer);
  r.read("buffer_capacity", c.buffer_capacity);
  r.read("minibatch", c.minibatch);
  r.read("train_every", c.train_every);
  r.read("eval_every", c.eval_every);
  r.read("eval_episodes", c.eval_episodes);
  r.read("total_episodes", c.total_episodes);
  r.read("epsilon_start", c.epsilon_start);
  r.read("epsilon_end", c.epsilon_end);
  r.read("epsilon_decay_episodes", c.epsilon_decay_episodes);
  r.read("alpha_start", c.alpha_start);
  r.read("alpha_end", c.alpha_end);
  r.read("alpha_step", c.alpha_step);
  r.read("alpha_threshold", c.alpha_threshold);
  r.read("decoder_batch", c.decoder_batch);
  r.read("decoder_passes", c.decoder_passes);
  r.read("decoder_minibatch", c.decoder_minibatch);
  r.read("decoder_hidden", c.decoder_hidden);
  r.read("decoder_learning_rate", c.decoder_learning_rate);
  r.read("target_factor", c.target_factor);
  r.read("low_hidden", c.low_hidden);
  r.read("high_hidden", c.high_hidden);
  r.read("flat_hidden", c.flat_hidden);
  r.read("mixer_embed", c.mixer_embed);
  std::string form = "discounted";
  r.read("smdp_form", form);
  if (form == "discounted") c.smdp_form = SmdpRewardForm::kDiscountedSum;
  else if (form == "scaled") c.smdp_form = SmdpRewardForm::kScaledSum;
  else throw ConfigError("smdp_form must be 'discounted' or 'scaled'");
  r.read("high_discount_per_step", c.high_discount_per_step);
  r.read("checkpoint_every", c.checkpoint_every);
  r.read("final_eval_episodes", c.final_eval_episodes);
  r.read("seed", c.seed);
  if (const json* env = r.child("env")) c.env = env_from_json(*env);
  r.finish();
  c.validate();
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_string(ss.str());
}

void save_config(const TrainConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write config " + path.string());
  out << to_json_string(config) << '\n';
}

}  // namespace hsd
