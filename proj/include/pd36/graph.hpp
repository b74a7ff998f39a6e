#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pd36/augment.hpp"
#include "pd36/ops.hpp"
#include "pd36/params.hpp"
#include "pd36/tensor.hpp"

namespace pd36 {

enum class OpKind {
  augment,
  rescale,
  conv2d,
  batchnorm,
  relu,
  maxpool2x2,
  global_avg_pool,
  dense,
  dropout,
  softmax,
};

std::string_view kind_name(OpKind kind);

/// One operator in the network. Fused nodes (the activation of a dense
/// layer) execute separately but report under the preceding layer.
struct OpNode {
  std::string name;
  OpKind kind = OpKind::relu;
  /// Filter count for conv2d, unit count for dense.
  std::size_t units = 0;
  std::size_t kernel_extent = 3;
  double rate = 0.0;
  BatchNormConfig batchnorm{};
  AugmentConfig augment{};
  bool fused = false;

  bool has_params() const {
    return kind == OpKind::conv2d || kind == OpKind::batchnorm || kind == OpKind::dense;
  }
};

/// Moving-statistics update produced by a train-mode batchnorm node.
struct BatchNormUpdate {
  std::size_t mean_index = 0;
  std::size_t variance_index = 0;
  std::vector<float> mean;
  std::vector<float> variance;
};

/// What a node's forward pass saved for its gradient.
struct NodeState {
  bool ran = false;
  std::shared_ptr<const Tensor> input;
  std::shared_ptr<const Tensor> output;
  std::vector<std::size_t> argmax;
  std::vector<float> mask;
  std::optional<BatchNormResult<float>> batchnorm;
};

struct NodeOutput {
  std::shared_ptr<const Tensor> output;
  NodeState state;
  std::optional<BatchNormUpdate> update;
};

/// Runs one node. When keep_state is false only `output` is populated.
NodeOutput run_node(const OpNode &node, const ParamStore &store, std::shared_ptr<const Tensor> input,
                    const ExecMode &mode, bool keep_state);

struct NodeGradients {
  Tensor input;
  /// (buffer index in the store, gradient)
  std::vector<std::pair<std::size_t, std::vector<float>>> params;
};

/// Gradients with respect to the node's input and parameters given the
/// gradient of a scalar loss with respect to its output. Throws StateError
/// if the node has not run with keep_state.
NodeGradients gradient_of(const OpNode &node, const ParamStore &store, const NodeState &state,
                          const Tensor &upstream);

} // namespace pd36
