#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pd36/random.hpp"
#include "pd36/tensor.hpp"

namespace pd36 {

enum class Phase { train, infer };

/// Train/infer switch plus the random stream used by stochastic layers.
/// Infer mode carries no stream, so it cannot consume randomness.
class ExecMode {
public:
  static ExecMode infer() { return ExecMode(Phase::infer, nullptr); }
  static ExecMode train(Rng &rng) { return ExecMode(Phase::train, &rng); }

  Phase phase() const { return phase_; }
  bool training() const { return phase_ == Phase::train; }
  bool has_rng() const { return rng_ != nullptr; }
  /// Throws ConfigError when no stream was supplied.
  Rng &rng() const;

private:
  ExecMode(Phase phase, Rng *rng) : phase_(phase), rng_(rng) {}
  Phase phase_;
  Rng *rng_;
};

// ---------------------------------------------------------------------------
// conv2d: 3x3, stride 1, same zero padding, no bias, cross-correlation.
// Kernel layout is [3, 3, Cin, Cout] row-major.

template <typename T> struct ConvKernel {
  std::span<const T> weights;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
};

template <typename T> struct ConvGradients {
  BasicTensor<T> input;
  std::vector<T> kernel;
};

template <typename T> BasicTensor<T> conv2d(const BasicTensor<T> &input, ConvKernel<T> kernel);

template <typename T>
ConvGradients<T> conv2d_backward(const BasicTensor<T> &input, ConvKernel<T> kernel,
                                 const BasicTensor<T> &upstream);

// ---------------------------------------------------------------------------

template <typename T> BasicTensor<T> relu(const BasicTensor<T> &input);

/// Gradient passes where the forward input was strictly positive.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T> &input, const BasicTensor<T> &upstream);

// ---------------------------------------------------------------------------
// 2x2 max pooling, stride 2. `argmax` holds, for every output element, the
// flat input offset of the winner (first in row-major window order on ties).

template <typename T> struct PoolResult {
  BasicTensor<T> output;
  std::vector<std::size_t> argmax;
};

template <typename T> PoolResult<T> maxpool2x2(const BasicTensor<T> &input);

template <typename T>
BasicTensor<T> maxpool2x2_backward(const Shape &input_shape, std::span<const std::size_t> argmax,
                                   const BasicTensor<T> &upstream);

// ---------------------------------------------------------------------------
// Per-channel batch normalization.

struct BatchNormConfig {
  double epsilon = 1e-3;
  double momentum = 0.99;
};

template <typename T> struct BatchNormParams {
  std::span<const T> gamma;
  std::span<const T> beta;
  std::span<const T> moving_mean;
  std::span<const T> moving_variance;
};

template <typename T> struct BatchNormResult {
  BasicTensor<T> output;
  BasicTensor<T> normalized;
  /// Statistics actually used: batch statistics in train mode, moving
  /// statistics in infer mode. Variance is the biased (population) one.
  std::vector<T> mean;
  std::vector<T> variance;
  std::vector<T> inv_std;
  Phase phase = Phase::infer;
};

template <typename T> struct BatchNormGradients {
  BasicTensor<T> input;
  std::vector<T> gamma;
  std::vector<T> beta;
};

template <typename T> struct MovingStats {
  std::vector<T> mean;
  std::vector<T> variance;
};

template <typename T>
BatchNormResult<T> batchnorm(const BasicTensor<T> &input, const BatchNormParams<T> &params,
                             const BatchNormConfig &config, Phase phase);

/// moving <- momentum * moving + (1 - momentum) * batch, for a train-mode result.
template <typename T>
MovingStats<T> batchnorm_moving_update(const BatchNormParams<T> &params,
                                       const BatchNormResult<T> &result,
                                       const BatchNormConfig &config);

template <typename T>
BatchNormGradients<T> batchnorm_backward(const BatchNormResult<T> &result, std::span<const T> gamma,
                                         const BasicTensor<T> &upstream);

// ---------------------------------------------------------------------------

/// Per-channel spatial mean; output is N x 1 x 1 x C.
template <typename T> BasicTensor<T> global_avg_pool(const BasicTensor<T> &input);

template <typename T>
BasicTensor<T> global_avg_pool_backward(const Shape &input_shape, const BasicTensor<T> &upstream);

// ---------------------------------------------------------------------------
// Affine map y = x W + b on N x 1 x 1 x Din inputs. W is [Din, Dout].

template <typename T> struct DenseWeights {
  std::span<const T> weights;
  std::span<const T> bias;
  std::size_t in_features = 0;
  std::size_t out_features = 0;
};

template <typename T> struct DenseGradients {
  BasicTensor<T> input;
  std::vector<T> weights;
  std::vector<T> bias;
};

template <typename T> BasicTensor<T> dense(const BasicTensor<T> &input, DenseWeights<T> weights);

template <typename T>
DenseGradients<T> dense_backward(const BasicTensor<T> &input, DenseWeights<T> weights,
                                 const BasicTensor<T> &upstream);

// ---------------------------------------------------------------------------
// Inverted dropout. The mask holds the per-element multiplier (0 or
// 1/(1-rate)); it is empty when the layer acted as the identity.

template <typename T> struct DropoutResult {
  BasicTensor<T> output;
  std::vector<T> mask;
};

template <typename T>
DropoutResult<T> dropout(const BasicTensor<T> &input, double rate, const ExecMode &mode);

template <typename T>
BasicTensor<T> dropout_backward(std::span<const T> mask, const BasicTensor<T> &upstream);

// ---------------------------------------------------------------------------

/// Row-wise softmax over the channel axis of an N x 1 x 1 x C tensor.
template <typename T> BasicTensor<T> softmax(const BasicTensor<T> &logits);

/// Vector-Jacobian product of softmax given its output.
template <typename T>
BasicTensor<T> softmax_backward(const BasicTensor<T> &probabilities, const BasicTensor<T> &upstream);

/// Divides by 255; rejects values outside [0, 255].
Tensor rescale(const Tensor &input);

} // namespace pd36
