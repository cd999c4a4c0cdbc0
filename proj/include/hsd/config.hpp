#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsd/high_level.hpp"
#include "hsd/sts2_env.hpp"

namespace hsd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { kHsd, kQmixFlat, kIqlFlat, kHsdScripted, kHsdExt };

const char* algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

inline bool is_hierarchical(Algorithm a) {
  return a == Algorithm::kHsd || a == Algorithm::kHsdScripted || a == Algorithm::kHsdExt;
}

// Mirrors the JSON config file key for key.
struct TrainConfig {
  Algorithm algorithm = Algorithm::kHsd;
  int num_skills = 4;
  int t_seg = 10;
  int k_skip = 2;
  double gamma = 0.99;
  double learning_rate = 1e-4;
  std::string optimizer = "adam";  // "adam" or "sgd"
  int buffer_capacity = 100000;
  int minibatch = 256;
  int train_every = 10;
  int eval_every = 100;
  int eval_episodes = 20;
  int total_episodes = 50000;

  double epsilon_start = 0.5;
  double epsilon_end = 0.05;
  int epsilon_decay_episodes = 1000;

  double alpha_start = 1.0;
  double alpha_end = 0.6;
  double alpha_step = 0.01;
  double alpha_threshold = 0.70;

  int decoder_batch = 1000;  // N_batch
  int decoder_passes = 10;
  int decoder_minibatch = 100;
  int decoder_hidden = 128;
  double decoder_learning_rate = 1e-4;

  double target_factor = 0.01;
  std::vector<int> low_hidden{64, 64};
  std::vector<int> high_hidden{128, 128};
  std::vector<int> flat_hidden{128, 128};
  int mixer_embed = 64;

  SmdpRewardForm smdp_form = SmdpRewardForm::kDiscountedSum;
  bool high_discount_per_step = false;  // bootstrap with gamma^t_seg instead of gamma

  int checkpoint_every = 100;  // episodes; 0 keeps only the final checkpoint
  int final_eval_episodes = 100;  // greedy episodes recorded as replay logs after training

  uint64_t seed = 0;
  sts2::EnvConfig env;

  void validate() const;

  int obs_dim() const { return sts2::obs_dim(env.agents_per_team); }
  int state_dim() const { return sts2::state_dim(env.agents_per_team); }
  int num_actions() const { return sts2::num_actions(env.agents_per_team); }
  double epsilon_at(long episode) const;
};

std::string to_json_string(const TrainConfig& config);
TrainConfig config_from_json_string(const std::string& text);
TrainConfig load_config(const std::filesystem::path& path);
void save_config(const TrainConfig& config, const std::filesystem::path& path);

}  // namespace hsd
