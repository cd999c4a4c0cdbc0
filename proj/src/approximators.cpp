#include "hsd/approximators.hpp"

#include <cmath>

namespace hsd::nn {

namespace {

Matrix uniform_matrix(int rows, int cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  // fill in a fixed order so initialization is reproducible across Eigen versions
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = uniform(rng, -bound, bound);
  }
  return m;
}

Matrix sigmoid(const Matrix& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace

// ---------------------------------------------------------------------------
// ParamSet

int ParamSet::add(std::string name, Matrix init) {
  ParamBlock b;
  b.name = std::move(name);
  b.grad = Matrix::Zero(init.rows(), init.cols());
  b.first_moment = Matrix::Zero(init.rows(), init.cols());
  b.second_moment = Matrix::Zero(init.rows(), init.cols());
  b.value = std::move(init);
  blocks_.push_back(std::move(b));
  return size() - 1;
}

int ParamSet::find(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (blocks_[i].name == name) return i;
  }
  return -1;
}

int64_t ParamSet::num_parameters() const {
  int64_t n = 0;
  for (const auto& b : blocks_) n += b.value.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& b : blocks_) b.grad.setZero();
}

bool ParamSet::same_shape(const ParamSet& other) const {
  if (size() != other.size()) return false;
  for (int i = 0; i < size(); ++i) {
    if (blocks_[i].value.rows() != other.blocks_[i].value.rows() ||
        blocks_[i].value.cols() != other.blocks_[i].value.cols()) {
      return false;
    }
  }
  return true;
}

double& ParamSet::coeff(int64_t flat_index) {
  for (auto& b : blocks_) {
    if (flat_index < b.value.size()) return b.value.data()[flat_index];
    flat_index -= b.value.size();
  }
  throw ShapeError("flat parameter index out of range");
}

double ParamSet::grad_coeff(int64_t flat_index) const {
  for (const auto& b : blocks_) {
    if (flat_index < b.grad.size()) return b.grad.data()[flat_index];
    flat_index -= b.grad.size();
  }
  throw ShapeError("flat parameter index out of range");
}

void optimizer_step(ParamSet& params, const OptimizerConfig& config) {
  params.increment_steps();
  const double t = static_cast<double>(params.optimizer_steps());
  if (config.kind == OptimizerKind::kSgd) {
    for (int i = 0; i < params.size(); ++i) {
      auto& b = params.block(i);
      b.value -= config.learning_rate * b.grad;
    }
    return;
  }
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (int i = 0; i < params.size(); ++i) {
    auto& b = params.block(i);
    b.first_moment = config.beta1 * b.first_moment + (1.0 - config.beta1) * b.grad;
    b.second_moment =
        config.beta2 * b.second_moment + (1.0 - config.beta2) * b.grad.cwiseProduct(b.grad);
    b.value.array() -= config.learning_rate * (b.first_moment.array() / c1) /
                       ((b.second_moment.array() / c2).sqrt() + config.epsilon);
  }
}

void soft_update(ParamSet& target, const ParamSet& online, double factor) {
  require(target.same_shape(online), "soft_update: parameter sets differ in shape");
  for (int i = 0; i < target.size(); ++i) {
    Matrix& t = target.value(i);
    t = (1.0 - factor) * t + factor * online.value(i);
  }
}

Matrix softmax_columns(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    Eigen::ArrayXd e = (logits.col(c).array() - m).exp();
    out.col(c) = (e / e.sum()).matrix();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mlp

Mlp::Mlp(MlpSpec spec, Rng& rng, std::string prefix) : spec_(std::move(spec)) {
  require(spec_.input_dim > 0 && spec_.output_dim > 0, "Mlp: dimensions must be positive");
  int fan_in = spec_.input_dim;
  std::vector<int> widths = spec_.hidden;
  widths.push_back(spec_.output_dim);
  for (size_t l = 0; l < widths.size(); ++l) {
    require(widths[l] > 0, "Mlp: dimensions must be positive");
    const bool head = l + 1 == widths.size();
    double bound = std::sqrt(6.0 / fan_in);
    if (head) bound *= spec_.head_scale;
    const std::string name = prefix + ".layer" + std::to_string(l);
    params_.add(name + ".weight", uniform_matrix(widths[l], fan_in, bound, rng));
    params_.add(name + ".bias", Matrix::Zero(widths[l], 1));
    fan_in = widths[l];
  }
}

Matrix Mlp::forward(const Matrix& x) const {
  MlpCache scratch;
  return forward(x, scratch);
}

Matrix Mlp::forward(const Matrix& x, MlpCache& cache) const {
  require(x.rows() == spec_.input_dim, "Mlp: input has " + std::to_string(x.rows()) +
                                           " rows, expected " + std::to_string(spec_.input_dim));
  cache.inputs.clear();
  cache.pre.clear();
  Matrix h = x;
  const int layers = num_layers();
  for (int l = 0; l < layers; ++l) {
    cache.inputs.push_back(h);
    Matrix z = params_.value(2 * l) * h;
    z.colwise() += params_.value(2 * l + 1).col(0);
    if (l + 1 == layers) return z;
    cache.pre.push_back(z);
    h = z.cwiseMax(0.0);
  }
  return h;
}

Matrix Mlp::backward(const MlpCache& cache, const Matrix& grad_out) {
  Matrix g = grad_out;
  for (int l = num_layers() - 1; l >= 0; --l) {
    if (l + 1 < num_layers()) {
      g = g.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
    }
    params_.grad(2 * l).noalias() += g * cache.inputs[l].transpose();
    params_.grad(2 * l + 1) += g.rowwise().sum();
    g = params_.value(2 * l).transpose() * g;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Mixer

Mixer::Mixer(MixerSpec spec, Rng& rng, std::string prefix) : spec_(spec) {
  require(spec_.num_agents > 0 && spec_.state_dim > 0 && spec_.embed_dim > 0 &&
              spec_.hyper_hidden > 0,
          "Mixer: dimensions must be positive");
  const int n = spec_.num_agents, s = spec_.state_dim, e = spec_.embed_dim, h = spec_.hyper_hidden;
  const double bs = 1.0 / std::sqrt(static_cast<double>(s));
  const double bh = 1.0 / std::sqrt(static_cast<double>(h));
  params_.add(prefix + ".hyper_w1.weight", uniform_matrix(n * e, s, bs, rng));
  params_.add(prefix + ".hyper_w1.bias", uniform_matrix(n * e, 1, bs, rng));
  params_.add(prefix + ".hyper_b1.weight", uniform_matrix(e, s, bs, rng));
  params_.add(prefix + ".hyper_b1.bias", uniform_matrix(e, 1, bs, rng));
  params_.add(prefix + ".hyper_w2.weight", uniform_matrix(e, s, bs, rng));
  params_.add(prefix + ".hyper_w2.bias", uniform_matrix(e, 1, bs, rng));
  params_.add(prefix + ".value.hidden.weight", uniform_matrix(h, s, bs, rng));
  params_.add(prefix + ".value.hidden.bias", uniform_matrix(h, 1, bs, rng));
  params_.add(prefix + ".value.out.weight", uniform_matrix(1, h, bh, rng));
  params_.add(prefix + ".value.out.bias", uniform_matrix(1, 1, bh, rng));
}

RowVector Mixer::forward(const Matrix& utilities, const Matrix& states) const {
  MixerCache scratch;
  return forward(utilities, states, scratch);
}

RowVector Mixer::forward(const Matrix& q, const Matrix& s, MixerCache& cache) const {
  const int n = spec_.num_agents, e = spec_.embed_dim;
  require(q.rows() == n, "Mixer: utilities must have one row per agent");
  require(s.rows() == spec_.state_dim, "Mixer: state has wrong dimension");
  require(q.cols() == s.cols(), "Mixer: utilities and states differ in batch size");
  auto affine = [&](int w, int b) {
    Matrix z = params_.value(w) * s;
    z.colwise() += params_.value(b).col(0);
    return z;
  };
  cache.utilities = q;
  cache.states = s;
  cache.w1_raw = affine(kW1Weight, kW1Bias);
  cache.pre = affine(kB1Weight, kB1Bias);
  for (int a = 0; a < n; ++a) {
    cache.pre.array() +=
        cache.w1_raw.middleRows(a * e, e).array().abs().rowwise() * q.row(a).array();
  }
  cache.hidden = cache.pre.unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); });
  cache.w2_raw = affine(kW2Weight, kW2Bias);
  cache.v_pre = affine(kVHiddenWeight, kVHiddenBias);
  cache.v_hidden = cache.v_pre.cwiseMax(0.0);
  RowVector out = (cache.w2_raw.array().abs() * cache.hidden.array()).colwise().sum().matrix();
  out += params_.value(kVOutWeight) * cache.v_hidden;
  out.array() += params_.value(kVOutBias)(0, 0);
  return out;
}

Matrix Mixer::backward(const MixerCache& c, const RowVector& g) {
  const int n = spec_.num_agents, e = spec_.embed_dim;
  const Matrix& s = c.states;
  auto sign = [](const Matrix& m) {
    return m.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
  };
  auto accumulate = [&](int w, int b, const Matrix& dz) {
    params_.grad(w).noalias() += dz * s.transpose();
    params_.grad(b) += dz.rowwise().sum();
  };

  // final layer
  const Matrix w2 = c.w2_raw.cwiseAbs();
  Matrix dw2 = (c.hidden.array().rowwise() * g.array()).matrix();
  accumulate(kW2Weight, kW2Bias, dw2.cwiseProduct(sign(c.w2_raw)));
  Matrix dhidden = (w2.array().rowwise() * g.array()).matrix();

  // state value path
  params_.grad(kVOutWeight).noalias() += g * c.v_hidden.transpose();
  params_.grad(kVOutBias)(0, 0) += g.sum();
  Matrix dv = params_.value(kVOutWeight).transpose() * g;
  dv = dv.cwiseProduct((c.v_pre.array() > 0.0).cast<double>().matrix());
  accumulate(kVHiddenWeight, kVHiddenBias, dv);

  // hidden mixing layer
  const Matrix elu_grad = c.pre.unaryExpr([](double x) { return x > 0.0 ? 1.0 : std::exp(x); });
  const Matrix dpre = dhidden.cwiseProduct(elu_grad);
  accumulate(kB1Weight, kB1Bias, dpre);
  Matrix dw1(c.w1_raw.rows(), c.w1_raw.cols());
  Matrix dq(n, g.cols());
  for (int a = 0; a < n; ++a) {
    const auto raw = c.w1_raw.middleRows(a * e, e);
    dq.row(a) = (dpre.array() * raw.array().abs()).colwise().sum().matrix();
    dw1.middleRows(a * e, e) =
        ((dpre.array().rowwise() * c.utilities.row(a).array()) * sign(raw).array()).matrix();
  }
  accumulate(kW1Weight, kW1Bias, dw1);
  return dq;
}

// ---------------------------------------------------------------------------
// BiLstm

BiLstm::BiLstm(BiLstmSpec spec, Rng& rng, std::string prefix) : spec_(spec) {
  require(spec_.input_dim > 0 && spec_.hidden > 0 && spec_.num_classes > 0,
          "BiLstm: dimensions must be positive");
  const int d = spec_.input_dim, h = spec_.hidden, k = spec_.num_classes;
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  for (const char* dir : {"fwd", "bwd"}) {
    const std::string p = prefix + "." + dir;
    params_.add(p + ".input", uniform_matrix(4 * h, d, bound, rng));
    params_.add(p + ".recurrent", uniform_matrix(4 * h, h, bound, rng));
    params_.add(p + ".bias", uniform_matrix(4 * h, 1, bound, rng));
  }
  params_.add(prefix + ".head.weight",
              uniform_matrix(k, 2 * h, 1e-2 * std::sqrt(6.0 / (2 * h)), rng));
  params_.add(prefix + ".head.bias", Matrix::Zero(k, 1));
}

void BiLstm::run_direction(const std::vector<Matrix>& frames, bool reversed, int first_block,
                           LstmTrace& trace) const {
  const int h = spec_.hidden;
  const int steps = static_cast<int>(frames.size());
  const Eigen::Index batch = frames.front().cols();
  const Matrix& wx = params_.value(first_block);
  const Matrix& wh = params_.value(first_block + 1);
  const Matrix& b = params_.value(first_block + 2);
  trace = LstmTrace{};
  Matrix hprev = Matrix::Zero(h, batch);
  Matrix cprev = Matrix::Zero(h, batch);
  for (int s = 0; s < steps; ++s) {
    const Matrix& x = frames[reversed ? steps - 1 - s : s];
    Matrix z = wx * x;
    z.noalias() += wh * hprev;
    z.colwise() += b.col(0);
    Matrix gates(4 * h, batch);
    gates.topRows(2 * h) = sigmoid(z.topRows(2 * h));
    gates.middleRows(2 * h, h) = z.middleRows(2 * h, h).array().tanh().matrix();
    gates.bottomRows(h) = sigmoid(z.bottomRows(h));
    Matrix c = gates.middleRows(h, h).cwiseProduct(cprev) +
               gates.topRows(h).cwiseProduct(gates.middleRows(2 * h, h));
    Matrix tc = c.array().tanh().matrix();
    Matrix hnew = gates.bottomRows(h).cwiseProduct(tc);
    trace.gates.push_back(std::move(gates));
    trace.cells.push_back(c);
    trace.tanh_cells.push_back(std::move(tc));
    trace.hiddens.push_back(hnew);
    hprev = std::move(hnew);
    cprev = std::move(c);
  }
}

Matrix BiLstm::classify(const std::vector<Matrix>& frames) const {
  BiLstmCache scratch;
  return classify(frames, scratch);
}

Matrix BiLstm::classify(const std::vector<Matrix>& frames, BiLstmCache& cache) const {
  require(!frames.empty(), "BiLstm: empty sequence");
  const Eigen::Index batch = frames.front().cols();
  for (const Matrix& f : frames) {
    require(f.rows() == spec_.input_dim, "BiLstm: frame has wrong dimension");
    require(f.cols() == batch, "BiLstm: frames differ in batch size");
  }
  const int h = spec_.hidden;
  cache.frames = frames;
  run_direction(frames, false, kFwdInput, cache.forward_dir);
  run_direction(frames, true, kBwdInput, cache.backward_dir);
  cache.pooled = Matrix::Zero(2 * h, batch);
  for (size_t t = 0; t < frames.size(); ++t) {
    cache.pooled.topRows(h) += cache.forward_dir.hiddens[t];
    cache.pooled.bottomRows(h) += cache.backward_dir.hiddens[t];
  }
  cache.pooled /= static_cast<double>(frames.size());
  Matrix logits = params_.value(kHeadWeight) * cache.pooled;
  logits.colwise() += params_.value(kHeadBias).col(0);
  cache.probs = softmax_columns(logits);
  return cache.probs;
}

void BiLstm::backprop_direction(const std::vector<Matrix>& frames, bool reversed,
                                int first_block, const LstmTrace& trace,
                                const Matrix& grad_each_output) {
  const int h = spec_.hidden;
  const int steps = static_cast<int>(frames.size());
  const Eigen::Index batch = grad_each_output.cols();
  const Matrix& wh = params_.value(first_block + 1);
  Matrix& gwx = params_.grad(first_block);
  Matrix& gwh = params_.grad(first_block + 1);
  Matrix& gb = params_.grad(first_block + 2);
  Matrix dh_next = Matrix::Zero(h, batch);
  Matrix dc_next = Matrix::Zero(h, batch);
  const Matrix zeros = Matrix::Zero(h, batch);
  Matrix dz(4 * h, batch);
  for (int s = steps - 1; s >= 0; --s) {
    const Matrix& x = frames[reversed ? steps - 1 - s : s];
    const Matrix& gates = trace.gates[s];
    const auto i = gates.topRows(h).array();
    const auto f = gates.middleRows(h, h).array();
    const auto g = gates.middleRows(2 * h, h).array();
    const auto o = gates.bottomRows(h).array();
    const auto tc = trace.tanh_cells[s].array();
    const Matrix& cprev = s > 0 ? trace.cells[s - 1] : zeros;
    const Matrix& hprev = s > 0 ? trace.hiddens[s - 1] : zeros;

    const Eigen::ArrayXXd dh = (grad_each_output + dh_next).array();
    const Eigen::ArrayXXd dc = dc_next.array() + dh * o * (1.0 - tc.square());
    dz.topRows(h) = (dc * g * i * (1.0 - i)).matrix();
    dz.middleRows(h, h) = (dc * cprev.array() * f * (1.0 - f)).matrix();
    dz.middleRows(2 * h, h) = (dc * i * (1.0 - g.square())).matrix();
    dz.bottomRows(h) = (dh * tc * o * (1.0 - o)).matrix();
    dc_next = (dc * f).matrix();

    gwx.noalias() += dz * x.transpose();
    gwh.noalias() += dz * hprev.transpose();
    gb += dz.rowwise().sum();
    dh_next.noalias() = wh.transpose() * dz;
  }
}

void BiLstm::backward(const BiLstmCache& cache, const Matrix& grad_logits) {
  const int h = spec_.hidden;
  params_.grad(kHeadWeight).noalias() += grad_logits * cache.pooled.transpose();
  params_.grad(kHeadBias) += grad_logits.rowwise().sum();
  const Matrix dpooled =
      params_.value(kHeadWeight).transpose() * grad_logits / static_cast<double>(cache.frames.size());
  backprop_direction(cache.frames, false, kFwdInput, cache.forward_dir, dpooled.topRows(h));
  backprop_direction(cache.frames, true, kBwdInput, cache.backward_dir, dpooled.bottomRows(h));
}

}  // namespace hsd::nn
