#pragma once

// Dense-network compute kernel: layers, masked softmax, cross-entropy,
// reverse-mode gradients for the representation network, Adam and dropout.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lmnl/random.hpp"

namespace lmnl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Availability = Eigen::Array<bool, Eigen::Dynamic, 1>;
using AvailabilityMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Floor applied to a chosen probability before taking its log.
inline constexpr double kProbabilityFloor = 1e-12;

enum class Activation { Identity, ReLU };
enum class Mode { Train, Eval };

struct DenseLayer {
  Matrix weights;  // [out x in]
  Vector biases;   // [out]
  Activation activation = Activation::Identity;

  Eigen::Index in() const { return weights.cols(); }
  Eigen::Index out() const { return weights.rows(); }
};

Vector dense_forward(const DenseLayer& layer, const Vector& input);

/// Row-batched forward: `inputs` is [batch x in], result is [batch x out].
Matrix dense_forward(const DenseLayer& layer, const Matrix& inputs);

/// Masked, max-shifted softmax. Unavailable entries get probability 0.
Vector softmax(const Vector& scores, const Availability& available);

/// -sum_i y_i ln max(p_i, floor).
double cross_entropy(const Vector& probabilities, const Vector& label);

/// Glorot/Xavier uniform initialisation, limit sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Inverted dropout: kept units are scaled by 1/(1-rate). Identity in eval mode.
Vector dropout_mask(Eigen::Index width, double rate, Rng& rng, Mode mode = Mode::Train);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::int64_t step = 0;
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;
};

/// One bias-corrected Adam update over a list of flat parameter tensors.
/// Accumulators are sized on the first call; later calls must pass the same
/// tensor shapes. Throws TrainingError on a non-finite gradient.
void adam_step(AdamState& state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads);

/// Activations retained by a forward pass for the backward pass.
struct NetCache {
  std::vector<Matrix> inputs;       // input to layer k, [batch x in_k]
  std::vector<Matrix> pre;          // pre-activation of layer k
  std::vector<Matrix> dropout;      // mask applied after hidden layer k (empty in eval)
};

struct NetGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Matrix inputs;  // d loss / d network input, filled on request
};

/// Fully connected network mapping the Q features to one output per alternative:
/// ReLU hidden layers, each followed by dropout, then an identity output layer.
class RepresentationNet {
 public:
  RepresentationNet() = default;
  RepresentationNet(Eigen::Index inputs, const std::vector<Eigen::Index>& hidden_widths,
                    Eigen::Index outputs, Rng& rng);

  Eigen::Index input_width() const { return layers_.front().in(); }
  Eigen::Index output_width() const { return layers_.back().out(); }

  Matrix forward(const Matrix& inputs, Mode mode, double dropout_rate, Rng* rng,
                 NetCache* cache) const;

  NetGradients backward(const NetCache& cache, const Matrix& d_outputs,
                        bool input_gradient) const;

  /// sum of squared weights over all layers (biases excluded).
  double squared_weight_norm() const;

  std::size_t weight_count() const;
  std::size_t bias_count() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  void zero();
  void reinitialize(Rng& rng);

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace lmnl
