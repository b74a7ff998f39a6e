#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pd36/image.hpp"
#include "pd36/model.hpp"

namespace pd36 {

enum class ClassScore { logit, probability };

struct GradCamOptions {
  std::string target_layer = "conv2d_7";
  /// Differentiate the pre-softmax logit (default) or the softmax output.
  ClassScore score = ClassScore::logit;
};

struct HeatMap {
  Grid grid;
  std::string layer;
  std::size_t class_index = 0;
  /// The raw map was constant, so the grid is all zeros.
  bool constant = false;
};

/// Min-max normalization to [0, 1]; a constant grid becomes zeros and sets `constant`.
Grid normalize_min_max(Grid grid, bool &constant);

/// ReLU(sum_k w_k A_k) with w_k the spatial mean of dScore/dA_k, min-max
/// normalized, at the activation's own extent. Both tensors are 1 x h x w x K.
Grid grad_cam_map(const Tensor &activations, const Tensor &gradients, bool &constant);

/// Infer-mode forward with state kept, one backward from the class score
/// to the target conv output, then grad_cam_map upsampled bilinearly to
/// the image extent. `image` is 1 x H x W x 3 in [0, 255].
HeatMap grad_cam(const ModelSpec &spec, const ParamStore &store, const Tensor &image, std::size_t class_index,
                 const GradCamOptions &options = {});

struct FeatureLayer {
  /// Post-activation node, e.g. "activation_3".
  std::string layer;
  /// Convolution feeding it, e.g. "conv2d_3".
  std::string conv;
  std::size_t channels = 0;
  std::vector<Grid> maps;
  std::vector<bool> constant;
};

struct FeatureGrid {
  std::vector<FeatureLayer> layers;
};

/// Post-ReLU activations of every conv layer, first min(max_maps, C)
/// channels each, every map min-max normalized.
FeatureGrid feature_maps(const ModelSpec &spec, const ParamStore &store, const Tensor &image,
                         std::size_t max_maps = 16);

/// One row per grid line, comma separated, %.9g.
std::string grid_csv(const Grid &grid);
/// Values in [0, 1] mapped to 0..255.
std::vector<std::uint8_t> grid_to_gray(const Grid &grid);

} // namespace pd36
