#include "lmnl/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lmnl/error.hpp"

namespace lmnl {

namespace {

void apply_activation(Matrix& z, Activation activation) {
  if (activation == Activation::ReLU) z = z.cwiseMax(0.0);
}

}  // namespace

Vector dense_forward(const DenseLayer& layer, const Vector& input) {
  if (input.size() != layer.in()) {
    std::ostringstream msg;
    msg << "dense_forward: input width " << input.size() << " != layer input width "
        << layer.in();
    throw ShapeError(msg.str());
  }
  if (layer.biases.size() != layer.out()) throw ShapeError("dense_forward: bias width mismatch");
  Vector z = layer.weights * input + layer.biases;
  if (layer.activation == Activation::ReLU) z = z.cwiseMax(0.0);
  return z;
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& inputs) {
  if (inputs.cols() != layer.in()) {
    std::ostringstream msg;
    msg << "dense_forward: input width " << inputs.cols() << " != layer input width "
        << layer.in();
    throw ShapeError(msg.str());
  }
  Matrix z = inputs * layer.weights.transpose();
  z.rowwise() += layer.biases.transpose();
  apply_activation(z, layer.activation);
  return z;
}

Vector softmax(const Vector& scores, const Availability& available) {
  if (scores.size() != available.size()) throw ShapeError("softmax: availability length mismatch");
  double max_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (available[i]) max_score = std::max(max_score, scores[i]);
  }
  if (!std::isfinite(max_score)) throw InvalidRowError("softmax: no available alternative");
  Vector p = Vector::Zero(scores.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (available[i]) {
      p[i] = std::exp(scores[i] - max_score);
      total += p[i];
    }
  }
  return p / total;
}

double cross_entropy(const Vector& probabilities, const Vector& label) {
  if (probabilities.size() != label.size()) throw ShapeError("cross_entropy: length mismatch");
  double loss = 0.0;
  for (Eigen::Index i = 0; i < label.size(); ++i) {
    if (label[i] != 0.0) loss -= label[i] * std::log(std::max(probabilities[i], kProbabilityFloor));
  }
  return loss;
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix w(rows, cols);
  // Fill row-major so the draw order does not depend on Eigen's storage order.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = rng.uniform(-limit, limit);
  }
  return w;
}

Vector dropout_mask(Eigen::Index width, double rate, Rng& rng, Mode mode) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must lie in [0, 1)");
  if (mode == Mode::Eval || rate == 0.0) return Vector::Ones(width);
  const double keep_scale = 1.0 / (1.0 - rate);
  Vector mask(width);
  for (Eigen::Index i = 0; i < width; ++i) mask[i] = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

void adam_step(AdamState& state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: params/grads count mismatch");
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.push_back(Vector::Zero(static_cast<Eigen::Index>(p.size())));
      state.second_moment.push_back(Vector::Zero(static_cast<Eigen::Index>(p.size())));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ShapeError("adam_step: tensor count differs from accumulator count");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != grads[t].size() ||
        static_cast<Eigen::Index>(params[t].size()) != state.first_moment[t].size()) {
      throw ShapeError("adam_step: tensor shape mismatch");
    }
    for (double g : grads[t]) {
      if (!std::isfinite(g)) {
        std::ostringstream msg;
        msg << "adam_step: non-finite gradient in tensor " << t << " at step " << state.step + 1;
        throw TrainingError(msg.str());
      }
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Vector& m = state.first_moment[k];
    Vector& v = state.second_moment[k];
    auto p = params[k];
    auto g = grads[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      m[ii] = state.beta1 * m[ii] + (1.0 - state.beta1) * g[i];
      v[ii] = state.beta2 * v[ii] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[ii] / correction1;
      const double v_hat = v[ii] / correction2;
      p[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

RepresentationNet::RepresentationNet(Eigen::Index inputs,
                                     const std::vector<Eigen::Index>& hidden_widths,
                                     Eigen::Index outputs, Rng& rng) {
  Eigen::Index fan_in = inputs;
  for (Eigen::Index width : hidden_widths) {
    if (width <= 0) throw ConfigError("hidden layer width must be positive");
    layers_.push_back({glorot_uniform(width, fan_in, rng), Vector::Zero(width), Activation::ReLU});
    fan_in = width;
  }
  layers_.push_back(
      {glorot_uniform(outputs, fan_in, rng), Vector::Zero(outputs), Activation::Identity});
}

Matrix RepresentationNet::forward(const Matrix& inputs, Mode mode, double dropout_rate, Rng* rng,
                                  NetCache* cache) const {
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
    cache->dropout.clear();
  }
  const bool drop = mode == Mode::Train && dropout_rate > 0.0;
  if (drop && rng == nullptr) throw ConfigError("dropout in training mode needs an rng");
  const double keep_scale = drop ? 1.0 / (1.0 - dropout_rate) : 1.0;

  Matrix x = inputs;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const DenseLayer& layer = layers_[k];
    if (x.cols() != layer.in()) throw ShapeError("RepresentationNet: input width mismatch");
    Matrix z = x * layer.weights.transpose();
    z.rowwise() += layer.biases.transpose();
    if (cache) {
      cache->inputs.push_back(x);
      cache->pre.push_back(z);
    }
    if (layer.activation == Activation::ReLU) z = z.cwiseMax(0.0);
    const bool hidden = k + 1 < layers_.size();
    if (hidden && drop) {
      Matrix mask(z.rows(), z.cols());
      for (Eigen::Index r = 0; r < mask.rows(); ++r) {
        for (Eigen::Index c = 0; c < mask.cols(); ++c) {
          mask(r, c) = rng->uniform() < dropout_rate ? 0.0 : keep_scale;
        }
      }
      z = z.cwiseProduct(mask);
      if (cache) cache->dropout.push_back(std::move(mask));
    } else if (cache) {
      cache->dropout.emplace_back();
    }
    x = std::move(z);
  }
  return x;
}

NetGradients RepresentationNet::backward(const NetCache& cache, const Matrix& d_outputs,
                                         bool input_gradient) const {
  if (cache.inputs.size() != layers_.size()) {
    throw ShapeError("RepresentationNet::backward: cache does not match network");
  }
  NetGradients grads;
  grads.weights.resize(layers_.size());
  grads.biases.resize(layers_.size());
  Matrix delta = d_outputs;  // d loss / d (post-activation, post-dropout) output of layer k
  for (std::size_t kk = layers_.size(); kk-- > 0;) {
    const DenseLayer& layer = layers_[kk];
    if (cache.dropout[kk].size() != 0) delta = delta.cwiseProduct(cache.dropout[kk]);
    if (layer.activation == Activation::ReLU) {
      delta = (cache.pre[kk].array() > 0.0).select(delta, 0.0);
    }
    grads.weights[kk] = delta.transpose() * cache.inputs[kk];
    grads.biases[kk] = delta.colwise().sum().transpose();
    if (kk > 0 || input_gradient) delta = delta * layer.weights;
  }
  if (input_gradient) grads.inputs = std::move(delta);
  return grads;
}

double RepresentationNet::squared_weight_norm() const {
  double total = 0.0;
  for (const auto& layer : layers_) total += layer.weights.squaredNorm();
  return total;
}

std::size_t RepresentationNet::weight_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.weights.size());
  return n;
}

std::size_t RepresentationNet::bias_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.biases.size());
  return n;
}

void RepresentationNet::zero() {
  for (auto& layer : layers_) {
    layer.weights.setZero();
    layer.biases.setZero();
  }
}

void RepresentationNet::reinitialize(Rng& rng) {
  for (auto& layer : layers_) {
    layer.weights = glorot_uniform(layer.out(), layer.in(), rng);
    layer.biases.setZero();
  }
}

}  // namespace lmnl
