#pragma once

// Skill-selection level: a parameter-shared utility network Q^n(o, z) whose
// per-agent values are combined by a monotonic mixer into Q_tot(s, z).
// Agents pick skills independently (epsilon-greedy on their own utility);
// training is centralized through the mixer.

#include <span>
#include <vector>

#include "hsd/approximators.hpp"
#include "hsd/checkpoint.hpp"
#include "hsd/replay.hpp"

namespace hsd {

enum class SmdpRewardForm {
  kDiscountedSum,  // sum_i gamma^i R_i
  kScaledSum,      // gamma^t_seg * sum_i R_i
};

// Reward accrued over one high-level step. Throws std::invalid_argument when
// rewards.size() != t_seg.
double smdp_reward(std::span<const double> rewards, int t_seg, double gamma,
                   SmdpRewardForm form = SmdpRewardForm::kDiscountedSum);

// Index of the first maximal entry.
int argmax_first(const Eigen::Ref<const Eigen::VectorXd>& values);

struct HighPolicyConfig {
  int obs_dim = 31;
  int state_dim = 34;
  int num_agents = 3;
  int num_choices = 4;  // skills, or primitive actions for flat QMIX
  std::vector<int> hidden{128, 128};
  int mixer_embed = 64;
  int hyper_hidden = 64;
  nn::OptimizerConfig optimizer;
  double target_factor = 0.01;
};

class HighPolicy {
 public:
  HighPolicy() = default;
  HighPolicy(HighPolicyConfig config, Rng& init_rng);

  // num_choices x N utilities for obs (obs_dim x N).
  nn::Matrix utilities(const nn::Matrix& observations) const;
  std::vector<int> select_skills(const nn::Matrix& observations, double epsilon, Rng& rng) const;
  std::vector<int> greedy_skills(const nn::Matrix& observations) const;
  double joint_value(const nn::Matrix& observations, const Eigen::VectorXd& state,
                     std::span<const int> skills) const;

  // Mean 1/2 (y - Q_tot)^2 with y = R + gamma * (1 - terminal) * Q_tot_target(s', z'),
  // z'^n = argmax of the target utilities. Parameters untouched.
  double td_loss(const std::vector<const HighTransition*>& batch, double gamma) const;
  // One optimizer step on td_loss, then soft target update. Returns the pre-step loss.
  double update_qmix(const std::vector<const HighTransition*>& batch, double gamma);

  const HighPolicyConfig& config() const { return config_; }
  nn::Mlp& utility() { return utility_; }
  const nn::Mlp& utility() const { return utility_; }
  nn::Mixer& mixer() { return mixer_; }
  const nn::Mixer& mixer() const { return mixer_; }
  nn::Mlp& target_utility() { return target_utility_; }
  nn::Mixer& target_mixer() { return target_mixer_; }

  void save(Checkpoint& ck, const std::string& prefix = "high") const;
  void load(const Checkpoint& ck, const std::string& prefix = "high");

 private:
  struct Batch;
  Batch gather(const std::vector<const HighTransition*>& batch) const;
  Eigen::RowVectorXd targets(const Batch& b, double gamma) const;

  HighPolicyConfig config_;
  nn::Mlp utility_, target_utility_;
  nn::Mixer mixer_, target_mixer_;
};

}  // namespace hsd
