#include "hsd/high_level.hpp"

#include <cmath>
#include <stdexcept>

namespace hsd {

double smdp_reward(std::span<const double> rewards, int t_seg, double gamma, SmdpRewardForm form) {
  if (static_cast<int>(rewards.size()) != t_seg) {
    throw std::invalid_argument("smdp_reward: expected " + std::to_string(t_seg) +
                                " rewards, got " + std::to_string(rewards.size()));
  }
  double total = 0.0;
  if (form == SmdpRewardForm::kScaledSum) {
    for (double r : rewards) total += r;
    return std::pow(gamma, t_seg) * total;
  }
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

int argmax_first(const Eigen::Ref<const Eigen::VectorXd>& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

struct HighPolicy::Batch {
  nn::Matrix obs, next_obs;     // obs_dim x (N*B), agent-major blocks of B columns
  nn::Matrix states, next_states;
  std::vector<int> skills;      // N*B, same layout as obs columns
  Eigen::RowVectorXd reward, not_terminal;
};

HighPolicy::HighPolicy(HighPolicyConfig config, Rng& init_rng) : config_(std::move(config)) {
  nn::MlpSpec spec{config_.obs_dim, config_.hidden, config_.num_choices};
  utility_ = nn::Mlp(spec, init_rng, "utility");
  nn::MixerSpec mspec{config_.num_agents, config_.state_dim, config_.mixer_embed,
                      config_.hyper_hidden};
  mixer_ = nn::Mixer(mspec, init_rng, "mixer");
  target_utility_ = utility_;
  target_mixer_ = mixer_;
}

nn::Matrix HighPolicy::utilities(const nn::Matrix& observations) const {
  return utility_.forward(observations);
}

std::vector<int> HighPolicy::select_skills(const nn::Matrix& observations, double epsilon,
                                           Rng& rng) const {
  const nn::Matrix q = utilities(observations);
  std::vector<int> z(observations.cols());
  for (size_t n = 0; n < z.size(); ++n) {
    if (uniform01(rng) < epsilon) {
      z[n] = uniform_int(rng, config_.num_choices);
    } else {
      z[n] = argmax_first(q.col(n));
    }
  }
  return z;
}

std::vector<int> HighPolicy::greedy_skills(const nn::Matrix& observations) const {
  const nn::Matrix q = utilities(observations);
  std::vector<int> z(observations.cols());
  for (size_t n = 0; n < z.size(); ++n) z[n] = argmax_first(q.col(n));
  return z;
}

double HighPolicy::joint_value(const nn::Matrix& observations, const Eigen::VectorXd& state,
                               std::span<const int> skills) const {
  const nn::Matrix q = utilities(observations);
  nn::Matrix chosen(config_.num_agents, 1);
  for (int n = 0; n < config_.num_agents; ++n) chosen(n, 0) = q(skills[n], n);
  return mixer_.forward(chosen, state)(0);
}

HighPolicy::Batch HighPolicy::gather(const std::vector<const HighTransition*>& batch) const {
  const int n_agents = config_.num_agents;
  const int bsz = static_cast<int>(batch.size());
  Batch b;
  b.obs.resize(config_.obs_dim, n_agents * bsz);
  b.next_obs.resize(config_.obs_dim, n_agents * bsz);
  b.states.resize(config_.state_dim, bsz);
  b.next_states.resize(config_.state_dim, bsz);
  b.skills.resize(n_agents * bsz);
  b.reward.resize(bsz);
  b.not_terminal.resize(bsz);
  for (int k = 0; k < bsz; ++k) {
    const HighTransition& tr = *batch[k];
    if (tr.observations.cols() != n_agents || tr.observations.rows() != config_.obs_dim ||
        tr.state.size() != config_.state_dim) {
      throw nn::ShapeError("HighTransition has wrong dimensions");
    }
    b.states.col(k) = tr.state;
    b.next_states.col(k) = tr.next_state;
    b.reward[k] = tr.reward;
    b.not_terminal[k] = tr.terminal ? 0.0 : 1.0;
    for (int n = 0; n < n_agents; ++n) {
      b.obs.col(n * bsz + k) = tr.observations.col(n);
      b.next_obs.col(n * bsz + k) = tr.next_observations.col(n);
      b.skills[n * bsz + k] = tr.skills[n];
    }
  }
  return b;
}

Eigen::RowVectorXd HighPolicy::targets(const Batch& b, double gamma) const {
  const int n_agents = config_.num_agents;
  const int bsz = static_cast<int>(b.reward.size());
  const nn::Matrix next_q = target_utility_.forward(b.next_obs);
  nn::Matrix chosen(n_agents, bsz);
  for (int n = 0; n < n_agents; ++n) {
    for (int k = 0; k < bsz; ++k) chosen(n, k) = next_q.col(n * bsz + k).maxCoeff();
  }
  const Eigen::RowVectorXd next_tot = target_mixer_.forward(chosen, b.next_states);
  return b.reward + gamma * b.not_terminal.cwiseProduct(next_tot);
}

double HighPolicy::td_loss(const std::vector<const HighTransition*>& batch, double gamma) const {
  const Batch b = gather(batch);
  const int n_agents = config_.num_agents;
  const int bsz = static_cast<int>(batch.size());
  const nn::Matrix q = utility_.forward(b.obs);
  nn::Matrix chosen(n_agents, bsz);
  for (int n = 0; n < n_agents; ++n) {
    for (int k = 0; k < bsz; ++k) chosen(n, k) = q(b.skills[n * bsz + k], n * bsz + k);
  }
  const Eigen::RowVectorXd td = targets(b, gamma) - mixer_.forward(chosen, b.states);
  return 0.5 * td.squaredNorm() / bsz;
}

double HighPolicy::update_qmix(const std::vector<const HighTransition*>& batch, double gamma) {
  if (batch.empty()) throw std::invalid_argument("update_qmix: empty batch");
  const Batch b = gather(batch);
  const int n_agents = config_.num_agents;
  const int bsz = static_cast<int>(batch.size());

  const Eigen::RowVectorXd y = targets(b, gamma);
  nn::MlpCache ucache;
  const nn::Matrix q = utility_.forward(b.obs, ucache);
  nn::Matrix chosen(n_agents, bsz);
  for (int n = 0; n < n_agents; ++n) {
    for (int k = 0; k < bsz; ++k) chosen(n, k) = q(b.skills[n * bsz + k], n * bsz + k);
  }
  nn::MixerCache mcache;
  const Eigen::RowVectorXd q_tot = mixer_.forward(chosen, b.states, mcache);
  const Eigen::RowVectorXd diff = q_tot - y;
  const double loss = 0.5 * diff.squaredNorm() / bsz;

  utility_.params().zero_grad();
  mixer_.params().zero_grad();
  const nn::Matrix dchosen = mixer_.backward(mcache, diff / bsz);
  nn::Matrix dq = nn::Matrix::Zero(q.rows(), q.cols());
  for (int n = 0; n < n_agents; ++n) {
    for (int k = 0; k < bsz; ++k) dq(b.skills[n * bsz + k], n * bsz + k) = dchosen(n, k);
  }
  utility_.backward(ucache, dq);
  nn::optimizer_step(utility_.params(), config_.optimizer);
  nn::optimizer_step(mixer_.params(), config_.optimizer);
  nn::soft_update(target_utility_.params(), utility_.params(), config_.target_factor);
  nn::soft_update(target_mixer_.params(), mixer_.params(), config_.target_factor);
  return loss;
}

void HighPolicy::save(Checkpoint& ck, const std::string& prefix) const {
  ck.put(prefix + ".utility", utility_.params());
  ck.put(prefix + ".mixer", mixer_.params());
  ck.put(prefix + ".utility_target", target_utility_.params());
  ck.put(prefix + ".mixer_target", target_mixer_.params());
}

void HighPolicy::load(const Checkpoint& ck, const std::string& prefix) {
  ck.get(prefix + ".utility", utility_.params());
  ck.get(prefix + ".mixer", mixer_.params());
  ck.get(prefix + ".utility_target", target_utility_.params());
  ck.get(prefix + ".mixer_target", target_mixer_.params());
}

}  // namespace hsd
