#include "hsd/low_level.hpp"

#include <stdexcept>

#include "hsd/high_level.hpp"

namespace hsd {

double low_level_reward(double team_reward, double alpha, double intrinsic, double alpha_min) {
  if (!(alpha >= alpha_min && alpha <= 1.0)) {
    throw std::invalid_argument("low_level_reward: alpha outside [alpha_min, 1]");
  }
  return alpha * team_reward + (1.0 - alpha) * intrinsic;
}

struct LowPolicy::Batch {
  nn::Matrix input, next_input;
  std::vector<int> actions;
  Eigen::RowVectorXd reward, not_terminal;
};

LowPolicy::LowPolicy(LowPolicyConfig config, Rng& init_rng) : config_(std::move(config)) {
  nn::MlpSpec spec{config_.obs_dim + config_.num_skills, config_.hidden, config_.num_actions};
  q_ = nn::Mlp(spec, init_rng, "q");
  q_target_ = q_;
}

nn::Matrix LowPolicy::network_input(const nn::Matrix& observations,
                                    const std::vector<int>& skills) const {
  if (observations.rows() != config_.obs_dim ||
      static_cast<size_t>(observations.cols()) != skills.size()) {
    throw nn::ShapeError("LowPolicy: observation/skill shape mismatch");
  }
  nn::Matrix x = nn::Matrix::Zero(config_.obs_dim + config_.num_skills, observations.cols());
  x.topRows(config_.obs_dim) = observations;
  for (size_t c = 0; c < skills.size(); ++c) {
    if (skills[c] < 0 || skills[c] >= config_.num_skills) {
      throw std::invalid_argument("LowPolicy: skill out of range");
    }
    x(config_.obs_dim + skills[c], static_cast<Eigen::Index>(c)) = 1.0;
  }
  return x;
}

nn::Matrix LowPolicy::action_values(const nn::Matrix& observations,
                                    const std::vector<int>& skills) const {
  return q_.forward(network_input(observations, skills));
}

int LowPolicy::select_action(const Eigen::VectorXd& observation, int skill, double epsilon,
                             Rng& rng) const {
  return select_actions(nn::Matrix(observation), {skill}, epsilon, rng).front();
}

std::vector<int> LowPolicy::select_actions(const nn::Matrix& observations,
                                           const std::vector<int>& skills, double epsilon,
                                           Rng& rng) const {
  const nn::Matrix q = action_values(observations, skills);
  std::vector<int> a(skills.size());
  for (size_t c = 0; c < a.size(); ++c) {
    if (uniform01(rng) < epsilon) {
      a[c] = uniform_int(rng, config_.num_actions);
    } else {
      a[c] = argmax_first(q.col(static_cast<Eigen::Index>(c)));
    }
  }
  return a;
}

LowPolicy::Batch LowPolicy::gather(const std::vector<const LowTransition*>& batch) const {
  const int bsz = static_cast<int>(batch.size());
  nn::Matrix obs(config_.obs_dim, bsz), next_obs(config_.obs_dim, bsz);
  std::vector<int> skills(bsz);
  Batch b;
  b.actions.resize(bsz);
  b.reward.resize(bsz);
  b.not_terminal.resize(bsz);
  for (int k = 0; k < bsz; ++k) {
    const LowTransition& tr = *batch[k];
    if (tr.action < 0 || tr.action >= config_.num_actions) {
      throw std::invalid_argument("LowTransition action out of range");
    }
    obs.col(k) = tr.observation;
    next_obs.col(k) = tr.next_observation;
    skills[k] = tr.skill;
    b.actions[k] = tr.action;
    b.reward[k] = tr.reward;
    b.not_terminal[k] = tr.terminal ? 0.0 : 1.0;
  }
  b.input = network_input(obs, skills);
  b.next_input = network_input(next_obs, skills);
  return b;
}

Eigen::RowVectorXd LowPolicy::targets(const Batch& b, double gamma) const {
  const Eigen::RowVectorXd next_max = q_target_.forward(b.next_input).colwise().maxCoeff();
  return b.reward + gamma * b.not_terminal.cwiseProduct(next_max);
}

double LowPolicy::td_loss(const std::vector<const LowTransition*>& batch, double gamma) const {
  const Batch b = gather(batch);
  const nn::Matrix q = q_.forward(b.input);
  const Eigen::RowVectorXd y = targets(b, gamma);
  double loss = 0.0;
  for (int k = 0; k < q.cols(); ++k) {
    const double d = q(b.actions[k], k) - y[k];
    loss += 0.5 * d * d;
  }
  return loss / static_cast<double>(q.cols());
}

double LowPolicy::update_iql(const std::vector<const LowTransition*>& batch, double gamma) {
  if (batch.empty()) throw std::invalid_argument("update_iql: empty batch");
  const Batch b = gather(batch);
  const Eigen::RowVectorXd y = targets(b, gamma);
  nn::MlpCache cache;
  const nn::Matrix q = q_.forward(b.input, cache);
  const int bsz = static_cast<int>(q.cols());
  nn::Matrix dq = nn::Matrix::Zero(q.rows(), bsz);
  double loss = 0.0;
  for (int k = 0; k < bsz; ++k) {
    const double d = q(b.actions[k], k) - y[k];
    loss += 0.5 * d * d;
    dq(b.actions[k], k) = d / bsz;
  }
  q_.params().zero_grad();
  q_.backward(cache, dq);
  nn::optimizer_step(q_.params(), config_.optimizer);
  nn::soft_update(q_target_.params(), q_.params(), config_.target_factor);
  return loss / bsz;
}

void LowPolicy::save(Checkpoint& ck, const std::string& prefix) const {
  ck.put(prefix + ".q", q_.params());
  ck.put(prefix + ".q_target", q_target_.params());
}

void LowPolicy::load(const Checkpoint& ck, const std::string& prefix) {
  ck.get(prefix + ".q", q_.params());
  ck.get(prefix + ".q_target", q_target_.params());
}

}  // namespace hsd
