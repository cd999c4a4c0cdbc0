#pragma once

// Skill-conditioned primitive-action values Q(o, z, a): one shared network
// whose input is the observation with the skill one-hot appended.

#include <vector>

#include "hsd/approximators.hpp"
#include "hsd/checkpoint.hpp"
#include "hsd/replay.hpp"

namespace hsd {

// R_L = alpha * R + (1 - alpha) * R_I, where R_I is zero except on the
// segment-final step. Throws std::invalid_argument if alpha is outside
// [alpha_min, 1].
double low_level_reward(double team_reward, double alpha, double intrinsic,
                        double alpha_min = 0.0);

struct LowPolicyConfig {
  int obs_dim = 31;
  int num_skills = 4;
  int num_actions = 9;
  std::vector<int> hidden{64, 64};
  nn::OptimizerConfig optimizer;
  double target_factor = 0.01;
};

class LowPolicy {
 public:
  LowPolicy() = default;
  LowPolicy(LowPolicyConfig config, Rng& init_rng);

  nn::Matrix network_input(const nn::Matrix& observations, const std::vector<int>& skills) const;
  // num_actions x B
  nn::Matrix action_values(const nn::Matrix& observations, const std::vector<int>& skills) const;

  int select_action(const Eigen::VectorXd& observation, int skill, double epsilon, Rng& rng) const;
  // One action per column; draws from rng in column order, matching repeated
  // select_action calls.
  std::vector<int> select_actions(const nn::Matrix& observations, const std::vector<int>& skills,
                                  double epsilon, Rng& rng) const;

  double td_loss(const std::vector<const LowTransition*>& batch, double gamma) const;
  double update_iql(const std::vector<const LowTransition*>& batch, double gamma);

  const LowPolicyConfig& config() const { return config_; }
  nn::Mlp& network() { return q_; }
  const nn::Mlp& network() const { return q_; }
  nn::Mlp& target() { return q_target_; }

  void save(Checkpoint& ck, const std::string& prefix = "low") const;
  void load(const Checkpoint& ck, const std::string& prefix = "low");

 private:
  struct Batch;
  Batch gather(const std::vector<const LowTransition*>& batch) const;
  Eigen::RowVectorXd targets(const Batch& b, double gamma) const;

  LowPolicyConfig config_;
  nn::Mlp q_, q_target_;
};

}  // namespace hsd
