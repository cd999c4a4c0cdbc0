#include "hsd/skill_decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "hsd/high_level.hpp"
#include "hsd/sts2_env.hpp"

namespace hsd {

std::vector<int> retained_entries(int agents_per_team) {
  const sts2::ObsLayout layout{agents_per_team};
  std::vector<int> idx;
  for (int k = 0; k < 4; ++k) idx.push_back(layout.carrier_rel() + k);
  idx.push_back(layout.self_has());
  idx.push_back(layout.team_has());
  for (int k = 0; k < 4; ++k) idx.push_back(layout.own() + k);
  idx.push_back(layout.opponent_has());
  return idx;
}

int decoder_sequence_length(int t_seg, int k_skip) {
  return (t_seg + k_skip - 1) / k_skip - 1;
}

DecoderInput preprocess_segment(const RawSegment& segment, int k_skip, int agents_per_team) {
  const int t_seg = static_cast<int>(segment.frames.size());
  if (k_skip < 1) throw std::invalid_argument("preprocess_segment: k_skip must be >= 1");
  if (t_seg < 2 * k_skip) {
    throw std::invalid_argument("preprocess_segment: segment shorter than 2 * k_skip");
  }
  const std::vector<int> keep = retained_entries(agents_per_team);
  std::vector<Eigen::VectorXd> reduced;
  for (int t = 0; t < t_seg; t += k_skip) {
    const Eigen::VectorXd& f = segment.frames[t];
    if (f.size() != sts2::obs_dim(agents_per_team)) {
      throw std::invalid_argument("preprocess_segment: frame has wrong dimension");
    }
    Eigen::VectorXd r(keep.size());
    for (size_t k = 0; k < keep.size(); ++k) r[k] = f[keep[k]];
    reduced.push_back(std::move(r));
  }
  DecoderInput out;
  for (size_t t = 1; t < reduced.size(); ++t) out.frames.push_back(reduced[t] - reduced[t - 1]);
  return out;
}

void SkillDataset::add(int skill, DecoderInput input) {
  if (input.frames.empty()) throw std::invalid_argument("SkillDataset: empty input");
  if (!inputs_.empty() && inputs_.front().frames.size() != input.frames.size()) {
    throw std::invalid_argument("SkillDataset: sequence length differs from dataset");
  }
  skills_.push_back(skill);
  inputs_.push_back(std::move(input));
}

void SkillDataset::clear() {
  skills_.clear();
  inputs_.clear();
}

std::vector<int> SkillDataset::counts(int num_skills) const {
  std::vector<int> c(num_skills, 0);
  for (int z : skills_) {
    if (z >= 0 && z < num_skills) ++c[z];
  }
  return c;
}

void SkillDataset::dump(std::ostream& out) const {
  for (size_t i = 0; i < skills_.size(); ++i) {
    out << skills_[i];
    for (const auto& f : inputs_[i].frames) {
      for (Eigen::Index k = 0; k < f.size(); ++k) out << ' ' << f[k];
    }
    out << '\n';
  }
}

SkillDecoder::SkillDecoder(DecoderConfig config, Rng& init_rng) : config_(config) {
  net_ = nn::BiLstm(config_.network, init_rng, "decoder");
}

std::vector<nn::Matrix> SkillDecoder::stack(const std::vector<const DecoderInput*>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("SkillDecoder: empty batch");
  const size_t steps = inputs.front()->frames.size();
  if (steps == 0) throw std::invalid_argument("SkillDecoder: empty sequence");
  const Eigen::Index dim = inputs.front()->frames.front().size();
  std::vector<nn::Matrix> frames(steps, nn::Matrix(dim, static_cast<Eigen::Index>(inputs.size())));
  for (size_t b = 0; b < inputs.size(); ++b) {
    if (inputs[b]->frames.size() != steps) {
      throw std::invalid_argument("SkillDecoder: sequences differ in length");
    }
    for (size_t t = 0; t < steps; ++t) {
      frames[t].col(static_cast<Eigen::Index>(b)) = inputs[b]->frames[t];
    }
  }
  return frames;
}

nn::Matrix SkillDecoder::probabilities(const std::vector<const DecoderInput*>& inputs) const {
  return net_.classify(stack(inputs));
}

nn::Matrix SkillDecoder::probabilities(const std::vector<DecoderInput>& inputs) const {
  std::vector<const DecoderInput*> ptrs;
  for (const auto& in : inputs) ptrs.push_back(&in);
  return probabilities(ptrs);
}

double SkillDecoder::intrinsic_reward(int skill, const DecoderInput& input) const {
  if (skill < 0 || skill >= config_.network.num_classes) {
    throw std::invalid_argument("intrinsic_reward: skill out of range");
  }
  return probabilities(std::vector<const DecoderInput*>{&input})(skill, 0);
}

namespace {

constexpr size_t kEvalChunk = 500;

template <typename Fn>
void for_chunks(const SkillDataset& data, Fn&& fn) {
  for (size_t start = 0; start < data.size(); start += kEvalChunk) {
    const size_t end = std::min(data.size(), start + kEvalChunk);
    std::vector<const DecoderInput*> ptrs;
    for (size_t i = start; i < end; ++i) ptrs.push_back(&data.inputs()[i]);
    fn(start, ptrs);
  }
}

}  // namespace

double SkillDecoder::mean_cross_entropy(const SkillDataset& data) const {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for_chunks(data, [&](size_t start, const std::vector<const DecoderInput*>& ptrs) {
    const nn::Matrix p = probabilities(ptrs);
    for (size_t b = 0; b < ptrs.size(); ++b) {
      total -= std::log(p(data.skills()[start + b], static_cast<Eigen::Index>(b)));
    }
  });
  return total / static_cast<double>(data.size());
}

double SkillDecoder::accuracy(const SkillDataset& data) const {
  if (data.empty()) return 0.0;
  int correct = 0;
  for_chunks(data, [&](size_t start, const std::vector<const DecoderInput*>& ptrs) {
    const nn::Matrix p = probabilities(ptrs);
    for (size_t b = 0; b < ptrs.size(); ++b) {
      if (argmax_first(p.col(static_cast<Eigen::Index>(b))) == data.skills()[start + b]) {
        ++correct;
      }
    }
  });
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::optional<double> SkillDecoder::train(SkillDataset& data, Rng& rng) {
  if (static_cast<int>(data.size()) < config_.min_dataset || data.empty()) return std::nullopt;
  const double initial = mean_cross_entropy(data);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t mb = static_cast<size_t>(std::max(1, config_.minibatch));
  for (int pass = 0; pass < config_.passes; ++pass) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += mb) {
      const size_t end = std::min(order.size(), start + mb);
      std::vector<const DecoderInput*> ptrs;
      for (size_t i = start; i < end; ++i) ptrs.push_back(&data.inputs()[order[i]]);
      nn::BiLstmCache cache;
      const nn::Matrix p = net_.classify(stack(ptrs), cache);
      nn::Matrix grad = p;
      for (size_t b = 0; b < ptrs.size(); ++b) {
        grad(data.skills()[order[start + b]], static_cast<Eigen::Index>(b)) -= 1.0;
      }
      grad /= static_cast<double>(ptrs.size());
      net_.params().zero_grad();
      net_.backward(cache, grad);
      nn::optimizer_step(net_.params(), config_.optimizer);
    }
  }
  data.clear();
  return initial;
}

void SkillDecoder::save(Checkpoint& ck, const std::string& key) const { ck.put(key, net_.params()); }

void SkillDecoder::load(const Checkpoint& ck, const std::string& key) { ck.get(key, net_.params()); }

}  // namespace hsd
