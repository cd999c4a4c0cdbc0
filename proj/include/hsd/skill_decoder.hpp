#pragma once

// Skill decoder p(z | tau): trajectory preprocessing, the online
// (skill, trajectory) dataset, supervised training, and the intrinsic reward.

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hsd/approximators.hpp"
#include "hsd/checkpoint.hpp"

namespace hsd {

struct RawSegment {
  int agent = 0;
  int skill = 0;
  std::vector<Eigen::VectorXd> frames;  // egocentric observations, one per step
};

struct DecoderInput {
  std::vector<Eigen::VectorXd> frames;  // differences of downsampled, reduced frames
};

// Observation entries kept for decoding: carrier-relative kinematics, the
// self/team possession flags, own kinematics, the opponent possession flag.
std::vector<int> retained_entries(int agents_per_team);
inline constexpr int kDecoderFrameDim = 11;

// Number of difference frames produced for a segment of t_seg steps.
int decoder_sequence_length(int t_seg, int k_skip);

// Keeps frames 0, k_skip, 2*k_skip, ..., projects them to the retained entries
// and returns consecutive differences. Throws std::invalid_argument when
// t_seg < 2 * k_skip or k_skip < 1.
DecoderInput preprocess_segment(const RawSegment& segment, int k_skip, int agents_per_team);

class SkillDataset {
 public:
  void add(int skill, DecoderInput input);
  std::size_t size() const { return skills_.size(); }
  bool empty() const { return skills_.empty(); }
  void clear();
  const std::vector<int>& skills() const { return skills_; }
  const std::vector<DecoderInput>& inputs() const { return inputs_; }
  // Per-skill counts (class-balance diagnostic).
  std::vector<int> counts(int num_skills) const;
  // One line per pair: skill label followed by the flattened frames.
  void dump(std::ostream& out) const;

 private:
  std::vector<int> skills_;
  std::vector<DecoderInput> inputs_;
};

struct DecoderConfig {
  nn::BiLstmSpec network;
  nn::OptimizerConfig optimizer;
  int min_dataset = 1000;  // N_batch
  int passes = 10;
  int minibatch = 100;
};

class SkillDecoder {
 public:
  SkillDecoder() = default;
  SkillDecoder(DecoderConfig config, Rng& init_rng);

  // K x B probabilities; all inputs must share one sequence length.
  nn::Matrix probabilities(const std::vector<const DecoderInput*>& inputs) const;
  nn::Matrix probabilities(const std::vector<DecoderInput>& inputs) const;
  // p(skill | input)
  double intrinsic_reward(int skill, const DecoderInput& input) const;

  double mean_cross_entropy(const SkillDataset& data) const;
  double accuracy(const SkillDataset& data) const;

  // Trains on the whole dataset and empties it. Returns the pre-update mean
  // cross-entropy, or nullopt (dataset untouched) when it holds fewer than
  // min_dataset pairs.
  std::optional<double> train(SkillDataset& data, Rng& rng);

  const DecoderConfig& config() const { return config_; }
  nn::BiLstm& network() { return net_; }
  const nn::BiLstm& network() const { return net_; }

  void save(Checkpoint& ck, const std::string& key = "decoder") const;
  void load(const Checkpoint& ck, const std::string& key = "decoder");

 private:
  static std::vector<nn::Matrix> stack(const std::vector<const DecoderInput*>& inputs);

  DecoderConfig config_;
  nn::BiLstm net_;
};

}  // namespace hsd
