#pragma once

// Small dense-network toolkit with hand-written reverse-mode gradients:
// multilayer perceptron, monotonic mixing network with hypernetworks, and a
// bidirectional LSTM sequence classifier. Everything is double precision and
// batched column-wise: a batch of B inputs of width D is a D x B matrix.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsd/random.hpp"

namespace hsd::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ParamBlock {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix first_moment;
  Matrix second_moment;
};

// Named parameter blocks with gradient accumulators and optimizer state of
// identical shape.
class ParamSet {
 public:
  int add(std::string name, Matrix init);

  int size() const { return static_cast<int>(blocks_.size()); }
  ParamBlock& block(int i) { return blocks_[i]; }
  const ParamBlock& block(int i) const { return blocks_[i]; }
  Matrix& value(int i) { return blocks_[i].value; }
  const Matrix& value(int i) const { return blocks_[i].value; }
  Matrix& grad(int i) { return blocks_[i].grad; }

  int find(const std::string& name) const;  // -1 if absent
  int64_t num_parameters() const;
  int64_t optimizer_steps() const { return steps_; }
  void increment_steps() { ++steps_; }

  void zero_grad();
  bool same_shape(const ParamSet& other) const;

  // Flat access over all blocks in order, column-major within a block.
  double& coeff(int64_t flat_index);
  double grad_coeff(int64_t flat_index) const;

 private:
  std::vector<ParamBlock> blocks_;
  int64_t steps_ = 0;
};

enum class OptimizerKind { kAdam, kSgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Applies one update from the accumulated gradients and bumps the step counter.
void optimizer_step(ParamSet& params, const OptimizerConfig& config);

// target <- (1 - factor) * target + factor * online
void soft_update(ParamSet& target, const ParamSet& online, double factor);

// ---------------------------------------------------------------------------

struct MlpSpec {
  int input_dim = 0;
  std::vector<int> hidden;
  int output_dim = 0;
  double head_scale = 1e-2;
};

struct MlpCache {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activations of hidden layers
};

// Rectifier hidden layers, linear output.
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpSpec spec, Rng& rng, std::string prefix = "mlp");

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, MlpCache& cache) const;
  // Accumulates parameter gradients and returns dL/dx.
  Matrix backward(const MlpCache& cache, const Matrix& grad_out);

  int num_layers() const { return static_cast<int>(spec_.hidden.size()) + 1; }
  const MlpSpec& spec() const { return spec_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  Matrix& weight(int layer) { return params_.value(2 * layer); }
  Matrix& bias(int layer) { return params_.value(2 * layer + 1); }

 private:
  MlpSpec spec_;
  ParamSet params_;
};

// ---------------------------------------------------------------------------

struct MixerSpec {
  int num_agents = 3;
  int state_dim = 34;
  int embed_dim = 64;
  int hyper_hidden = 64;
};

struct MixerCache {
  Matrix utilities, states;
  Matrix w1_raw;    // (N*E) x B, before abs
  Matrix pre;       // E x B
  Matrix hidden;    // E x B
  Matrix w2_raw;    // E x B, before abs
  Matrix v_pre;     // H x B
  Matrix v_hidden;  // H x B
};

// Q_tot = |w2(s)|' elu(|W1(s)| q + b1(s)) + V(s). Weights and b1 come from
// single linear hypernetworks of the state; V is a two-layer network.
class Mixer {
 public:
  Mixer() = default;
  Mixer(MixerSpec spec, Rng& rng, std::string prefix = "mixer");

  RowVector forward(const Matrix& utilities, const Matrix& states) const;
  RowVector forward(const Matrix& utilities, const Matrix& states, MixerCache& cache) const;
  // Accumulates parameter gradients and returns dL/dutilities (N x B).
  Matrix backward(const MixerCache& cache, const RowVector& grad_out);

  const MixerSpec& spec() const { return spec_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  enum Block : int {
    kW1Weight = 0, kW1Bias, kB1Weight, kB1Bias, kW2Weight, kW2Bias,
    kVHiddenWeight, kVHiddenBias, kVOutWeight, kVOutBias
  };

 private:
  MixerSpec spec_;
  ParamSet params_;
};

// ---------------------------------------------------------------------------

struct BiLstmSpec {
  int input_dim = 11;
  int hidden = 128;
  int num_classes = 4;
};

struct LstmTrace {
  std::vector<Matrix> gates;   // 4H x B post-nonlinearity, order i f g o
  std::vector<Matrix> cells;   // c_t
  std::vector<Matrix> tanh_cells;
  std::vector<Matrix> hiddens;  // h_t
};

struct BiLstmCache {
  std::vector<Matrix> frames;
  LstmTrace forward_dir, backward_dir;  // backward_dir runs over reversed frames
  Matrix pooled;   // 2H x B
  Matrix probs;    // K x B
};

// Bidirectional LSTM; per-frame outputs [h_fwd; h_bwd] are mean-pooled over
// time and fed to a softmax head.
class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(BiLstmSpec spec, Rng& rng, std::string prefix = "decoder");

  // frames[t] is input_dim x B. Returns K x B class probabilities.
  Matrix classify(const std::vector<Matrix>& frames) const;
  Matrix classify(const std::vector<Matrix>& frames, BiLstmCache& cache) const;
  // grad_logits is dL/dlogits (K x B). Accumulates parameter gradients.
  void backward(const BiLstmCache& cache, const Matrix& grad_logits);

  const BiLstmSpec& spec() const { return spec_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  enum Block : int {
    kFwdInput = 0, kFwdRecurrent, kFwdBias, kBwdInput, kBwdRecurrent, kBwdBias,
    kHeadWeight, kHeadBias
  };

 private:
  void run_direction(const std::vector<Matrix>& frames, bool reversed, int first_block,
                     LstmTrace& trace) const;
  void backprop_direction(const std::vector<Matrix>& frames, bool reversed, int first_block,
                          const LstmTrace& trace, const Matrix& grad_each_output);

  BiLstmSpec spec_;
  ParamSet params_;
};

Matrix softmax_columns(const Matrix& logits);

}  // namespace hsd::nn
