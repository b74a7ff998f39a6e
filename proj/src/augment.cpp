#include "pd36/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pd36/parallel.hpp"

namespace pd36 {

void AugmentConfig::validate() const {
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) {
    throw ConfigError("flip_prob must lie in [0, 1]");
  }
  if (!(rotation_factor >= 0.0) || !(translation_factor >= 0.0) || !(zoom_factor >= 0.0) ||
      !(contrast_factor >= 0.0)) {
    throw ConfigError("augmentation factors must be non-negative");
  }
  if (zoom_factor >= 1.0) {
    throw ConfigError("zoom_factor must be below 1");
  }
  if (!(value_max > 0.0f)) {
    throw ConfigError("value_max must be positive");
  }
}

AugmentConfig AugmentConfig::disabled() {
  AugmentConfig c;
  c.flip_prob = 0.0;
  c.rotation_factor = 0.0;
  c.translation_factor = 0.0;
  c.zoom_factor = 0.0;
  c.contrast_factor = 0.0;
  return c;
}

AugmentDraw sample_augment(const AugmentConfig &config, Rng &rng, std::size_t height, std::size_t width) {
  AugmentDraw d;
  const double max_angle = config.rotation_factor * 360.0;
  const double max_dx = config.translation_factor * static_cast<double>(width);
  const double max_dy = config.translation_factor * static_cast<double>(height);
  // A fixed number of draws per image keeps substreams aligned.
  d.flip = rng.uniform() < config.flip_prob;
  d.angle_degrees = rng.uniform(-max_angle, max_angle);
  d.dx = rng.uniform(-max_dx, max_dx);
  d.dy = rng.uniform(-max_dy, max_dy);
  d.sx = rng.uniform(1.0 - config.zoom_factor, 1.0 + config.zoom_factor);
  d.sy = rng.uniform(1.0 - config.zoom_factor, 1.0 + config.zoom_factor);
  d.contrast = rng.uniform(1.0 - config.contrast_factor, 1.0 + config.contrast_factor);
  return d;
}

Tensor flip_horizontal(const Tensor &images) {
  const Shape s = images.shape();
  Tensor out(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t y = 0; y < s.h; ++y) {
      for (std::size_t x = 0; x < s.w; ++x) {
        const float *src = &images(n, y, s.w - 1 - x, 0);
        std::copy(src, src + s.c, &out(n, y, x, 0));
      }
    }
  }
  return out;
}

Tensor apply_geometric(const Tensor &images, double angle_degrees, double dx, double dy, double sx,
                       double sy) {
  const Shape s = images.shape();
  Tensor out(s);
  if (s.size() == 0) {
    return out;
  }
  const double theta = angle_degrees * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double cx = static_cast<double>(s.w) / 2.0;
  const double cy = static_cast<double>(s.h) / 2.0;
  const auto max_x = static_cast<double>(s.w - 1);
  const auto max_y = static_cast<double>(s.h - 1);

  for (std::size_t y = 0; y < s.h; ++y) {
    for (std::size_t x = 0; x < s.w; ++x) {
      // Undo zoom, then translation, then rotation; all about the centre.
      const double qx = (static_cast<double>(x) + 0.5 - cx) / sx - dx;
      const double qy = (static_cast<double>(y) + 0.5 - cy) / sy - dy;
      const double srcx = cos_t * qx + sin_t * qy + cx;
      const double srcy = -sin_t * qx + cos_t * qy + cy;
      const auto ix = static_cast<std::size_t>(std::clamp(std::floor(srcx), 0.0, max_x));
      const auto iy = static_cast<std::size_t>(std::clamp(std::floor(srcy), 0.0, max_y));
      for (std::size_t n = 0; n < s.n; ++n) {
        const float *src = &images(n, iy, ix, 0);
        std::copy(src, src + s.c, &out(n, y, x, 0));
      }
    }
  }
  return out;
}

Tensor adjust_contrast(const Tensor &images, double factor, float value_max) {
  const Shape s = images.shape();
  Tensor out(s);
  const std::size_t pixels = s.h * s.w;
  std::vector<double> mean(s.c);
  for (std::size_t n = 0; n < s.n; ++n) {
    std::fill(mean.begin(), mean.end(), 0.0);
    const float *img = images.image(n);
    for (std::size_t p = 0; p < pixels; ++p) {
      for (std::size_t c = 0; c < s.c; ++c) {
        mean[c] += img[p * s.c + c];
      }
    }
    for (double &m : mean) {
      m /= static_cast<double>(std::max<std::size_t>(pixels, 1));
    }
    float *dst = out.image(n);
    for (std::size_t p = 0; p < pixels; ++p) {
      for (std::size_t c = 0; c < s.c; ++c) {
        const double v = mean[c] + (img[p * s.c + c] - mean[c]) * factor;
        dst[p * s.c + c] = static_cast<float>(std::clamp(v, 0.0, static_cast<double>(value_max)));
      }
    }
  }
  return out;
}

Tensor augment_image(const Tensor &image, const AugmentDraw &draw, const AugmentConfig &config) {
  Tensor out = draw.flip ? flip_horizontal(image) : image;
  const bool geometric = draw.angle_degrees != 0.0 || draw.dx != 0.0 || draw.dy != 0.0 ||
                         draw.sx != 1.0 || draw.sy != 1.0;
  if (geometric) {
    out = apply_geometric(out, draw.angle_degrees, draw.dx, draw.dy, draw.sx, draw.sy);
  }
  if (draw.contrast != 1.0) {
    out = adjust_contrast(out, draw.contrast, config.value_max);
  }
  return out;
}

Tensor augment_batch(const Tensor &images, const AugmentConfig &config, const ExecMode &mode) {
  if (!mode.training()) {
    return images;
  }
  config.validate();
  const std::uint64_t base = mode.rng().next_u64();
  const Shape s = images.shape();
  Tensor out(s);
  parallel_for(s.n, [&](std::size_t n) {
    Rng rng = Rng::derive(base, n);
    const AugmentDraw draw = sample_augment(config, rng, s.h, s.w);
    const Tensor result = augment_image(images.slice(n), draw, config);
    std::copy(result.values().begin(), result.values().end(), out.image(n));
  });
  return out;
}

} // namespace pd36
