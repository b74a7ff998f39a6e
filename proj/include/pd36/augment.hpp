#pragma once

#include <cstddef>

#include "pd36/ops.hpp"
#include "pd36/random.hpp"
#include "pd36/tensor.hpp"

namespace pd36 {

/// Parameters of the training-time perturbation block. Factors are
/// half-widths of uniform ranges: rotation as a fraction of a full turn,
/// translation as a fraction of the image extent, zoom and contrast as
/// relative deviations from 1.
struct AugmentConfig {
  double flip_prob = 0.5;
  double rotation_factor = 0.03;
  double translation_factor = 0.02;
  double zoom_factor = 0.05;
  double contrast_factor = 0.1;
  /// Upper end of the pixel range the contrast step clamps to. The block
  /// runs before rescaling, so pixels are still in [0, 255].
  float value_max = 255.0f;

  void validate() const;
  static AugmentConfig disabled();
};

/// One image's sampled perturbation.
struct AugmentDraw {
  bool flip = false;
  double angle_degrees = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double sx = 1.0;
  double sy = 1.0;
  double contrast = 1.0;
};

AugmentDraw sample_augment(const AugmentConfig &config, Rng &rng, std::size_t height, std::size_t width);

Tensor flip_horizontal(const Tensor &images);

/// Rotation by `angle_degrees`, translation by (dx, dy) pixels and per-axis
/// zoom (sx, sy) about the image centre, realised as a single inverse map
/// with nearest-neighbour sampling. Source coordinates outside the image
/// clamp to the nearest edge pixel.
Tensor apply_geometric(const Tensor &images, double angle_degrees, double dx, double dy, double sx,
                       double sy);

/// x <- mean + (x - mean) * factor per image and channel, clamped to [0, value_max].
Tensor adjust_contrast(const Tensor &images, double factor, float value_max);

/// flip -> rotate -> translate -> zoom -> contrast on a single 1xHxWxC image.
Tensor augment_image(const Tensor &image, const AugmentDraw &draw, const AugmentConfig &config);

/// Infer mode returns the input unchanged. Train mode perturbs every image
/// independently from a substream derived from (one draw of the mode's
/// stream, image index).
Tensor augment_batch(const Tensor &images, const AugmentConfig &config, const ExecMode &mode);

} // namespace pd36
