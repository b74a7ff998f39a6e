#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pd36/graph.hpp"

namespace pd36 {

/// Knobs for the generic block builder. The defaults describe PD36-C.
struct ArchConfig {
  std::vector<std::size_t> filters{32, 32, 64, 64, 128, 128, 256, 256};
  /// Convs per block; a 2x2 max pool follows every block.
  std::size_t convs_per_block = 2;
  double dropout_features = 0.25;
  std::size_t dense_units = 256;
  double dropout_dense = 0.40;
  std::size_t num_classes = 38;
  std::size_t input_extent = 224;
  /// Multiplier on the He-uniform limit of the classification head, so a
  /// fresh model starts near the uniform distribution.
  double head_init_scale = 0.01;
  BatchNormConfig batchnorm{};
  AugmentConfig augment{};
};

/// Layer list plus the metadata needed to run and label it.
struct ModelSpec {
  std::vector<OpNode> nodes;
  std::size_t num_classes = 0;
  /// Native square input extent; 224 for the canonical network.
  std::size_t input_extent = 224;
  std::vector<std::string> class_names;
  /// Builder settings the node list was made from.
  ArchConfig arch;

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws ConfigError on unknown names.
  std::size_t index_of(std::string_view name) const;
  std::size_t pool_count() const;
  /// Required divisor of the input height and width.
  std::size_t spatial_divisor() const { return std::size_t{1} << pool_count(); }
};

struct Model {
  ModelSpec spec;
  ParamStore params;
};

ModelSpec make_spec(const ArchConfig &arch);

/// He-uniform conv/dense kernels (head scaled by head_init_scale), zero biases, gamma=1, beta=0, mean=0, var=1.
/// Each buffer draws from its own substream of init_seed.
ParamStore init_params(const ModelSpec &spec, std::uint64_t init_seed);

/// The PD36-C network for `num_classes` outputs (>= 2). `input_extent`
/// only changes the recorded native resolution; the weights are the same
/// for any legal extent.
Model build_pd36c(std::size_t num_classes = 38, std::uint64_t init_seed = 0, std::size_t input_extent = 224);

/// The 38 class directory names of the plant-disease corpus, in index order.
const std::vector<std::string> &canonical_class_names();

// ---------------------------------------------------------------------------

struct LayerShape {
  std::string name;
  std::string type;
  Shape shape;
};

/// Keras-style type name ("Conv2D", "BatchNormalization", ...).
std::string layer_type(const OpNode &node);

/// "(224, 224, 32)" for spatial outputs, "256" for vectors.
std::string format_output_shape(const Shape &shape);

/// Symbolic output shapes of every reported (non-fused) layer for a
/// height x width x 3 input.
std::vector<LayerShape> shape_trace(const ModelSpec &spec, std::size_t height, std::size_t width);
std::vector<LayerShape> shape_trace(const ModelSpec &spec, std::size_t extent);

struct AuditRow {
  std::string name;
  std::string type;
  std::string output_shape;
  std::size_t params = 0;
  std::size_t trainable = 0;
  std::size_t non_trainable = 0;
};

struct ParamAudit {
  std::vector<AuditRow> rows;
  std::size_t trainable = 0;
  std::size_t non_trainable = 0;
  std::size_t total = 0;
  std::size_t conv_params = 0;
  /// Hidden dense layer only; the classification head is counted apart.
  std::size_t hidden_dense_params = 0;
  std::size_t head_params = 0;

  /// Raw 32-bit parameter payload in bytes.
  std::size_t payload_bytes() const { return total * sizeof(float); }
};

ParamAudit param_audit(const ModelSpec &spec, const ParamStore &store);

/// Table with thousands separators and the three total lines.
std::string format_audit(const ParamAudit &audit);

/// "1,250,694"
std::string with_thousands(std::size_t value);

// ---------------------------------------------------------------------------

struct ForwardOptions {
  /// Save per-node state for a later backward pass.
  bool keep_state = false;
  /// Keep every node's output (activation capture).
  bool capture = false;
};

struct ForwardPass {
  Tensor probabilities;
  Tensor logits;
  std::vector<NodeState> states;
  /// outputs[i] is node i's output when capture or keep_state was requested.
  std::vector<std::shared_ptr<const Tensor>> outputs;
  std::vector<BatchNormUpdate> updates;
};

/// Validates a batch against the spec: 3 channels, extent a positive
/// multiple of spatial_divisor() (16 for PD36-C).
void check_input(const ModelSpec &spec, const Shape &batch);

ForwardPass forward(const ModelSpec &spec, const ParamStore &store, const Tensor &batch,
                    const ExecMode &mode, const ForwardOptions &options = {});

/// Infer-mode probabilities.
Tensor infer(const ModelSpec &spec, const ParamStore &store, const Tensor &batch);

/// Writes the moving statistics computed by a train-mode pass into the store.
void commit_batchnorm_updates(ParamStore &store, const ForwardPass &pass);

struct BackwardOptions {
  /// Stop once the gradient with respect to this node's output is known.
  std::optional<std::size_t> stop_at_output_of;
};

struct BackwardPass {
  Gradients params;
  /// Gradient w.r.t. the output of `stop_at_output_of`, when requested.
  Tensor output_grad;
};

/// Backpropagates d(loss)/d(logits) through every node before the final
/// softmax. Requires a forward pass run with keep_state.
BackwardPass backward(const ModelSpec &spec, const ParamStore &store, const ForwardPass &pass,
                      const Tensor &logit_grad, const BackwardOptions &options = {});

// ---------------------------------------------------------------------------

struct ClassProbability {
  std::size_t class_index = 0;
  std::string class_name;
  double probability = 0.0;
};

struct Prediction {
  std::size_t class_index = 0;
  std::string class_name;
  double confidence = 0.0;
  std::vector<ClassProbability> top_k;
};

/// Argmax with lowest-index tie-break; top-k sorted by descending
/// probability, ties by ascending index.
Prediction make_prediction(std::span<const float> probabilities, const std::vector<std::string> &labels,
                           std::size_t k);

Prediction predict(const ModelSpec &spec, const ParamStore &store, const Tensor &image,
                   const std::vector<std::string> &labels, std::size_t k);

} // namespace pd36
