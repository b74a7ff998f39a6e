#include "pd36/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace pd36 {

Grid normalize_min_max(Grid grid, bool &constant) {
  constant = false;
  if (grid.values.empty()) {
    constant = true;
    return grid;
  }
  const auto [lo_it, hi_it] = std::minmax_element(grid.values.begin(), grid.values.end());
  const float lo = *lo_it;
  const float hi = *hi_it;
  if (!(hi > lo)) {
    constant = true;
    std::fill(grid.values.begin(), grid.values.end(), 0.0f);
    return grid;
  }
  const double range = static_cast<double>(hi) - lo;
  for (float &v : grid.values) {
    v = static_cast<float>(std::clamp((static_cast<double>(v) - lo) / range, 0.0, 1.0));
  }
  return grid;
}

Grid grad_cam_map(const Tensor &activations, const Tensor &gradients, bool &constant) {
  const Shape s = activations.shape();
  if (gradients.shape() != s || s.n != 1) {
    throw ShapeError("grad_cam_map: activations " + s.to_string() + " vs gradients " +
                     gradients.shape().to_string());
  }
  const std::size_t pixels = s.h * s.w;
  std::vector<double> weights(s.c, 0.0);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t k = 0; k < s.c; ++k) {
      weights[k] += gradients[p * s.c + k];
    }
  }
  for (double &w : weights) {
    w /= static_cast<double>(pixels);
  }
  Grid raw{s.h, s.w, std::vector<float>(pixels)};
  for (std::size_t p = 0; p < pixels; ++p) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.c; ++k) {
      acc += weights[k] * activations[p * s.c + k];
    }
    raw.values[p] = static_cast<float>(std::max(acc, 0.0));
  }
  return normalize_min_max(std::move(raw), constant);
}

HeatMap grad_cam(const ModelSpec &spec, const ParamStore &store, const Tensor &image, std::size_t class_index,
                 const GradCamOptions &options) {
  const std::size_t target = spec.index_of(options.target_layer);
  if (spec.nodes[target].kind != OpKind::conv2d) {
    throw ConfigError("Grad-CAM target '" + options.target_layer + "' is a " + std::string(kind_name(spec.nodes[target].kind)) +
                      " layer, not a convolution");
  }
  if (image.shape().n != 1) {
    throw ShapeError("Grad-CAM takes a single image, got " + image.shape().to_string());
  }
  if (class_index >= spec.num_classes) {
    throw InputError("class index " + std::to_string(class_index) + " outside [0, " +
                     std::to_string(spec.num_classes) + ")");
  }

  const ForwardPass pass = forward(spec, store, image, ExecMode::infer(), {.keep_state = true});
  Tensor seed(pass.logits.shape());
  if (options.score == ClassScore::logit) {
    seed[class_index] = 1.0f;
  } else {
    const float *p = pass.probabilities.data();
    for (std::size_t j = 0; j < spec.num_classes; ++j) {
      seed[j] = p[class_index] * ((j == class_index ? 1.0f : 0.0f) - p[j]);
    }
  }
  const BackwardPass back = backward(spec, store, pass, seed, {.stop_at_output_of = target});

  HeatMap heat;
  heat.layer = options.target_layer;
  heat.class_index = class_index;
  const Grid small = grad_cam_map(*pass.outputs[target], back.output_grad, heat.constant);
  const Shape in = image.shape();
  heat.grid = heat.constant ? Grid{in.h, in.w, std::vector<float>(in.h * in.w, 0.0f)}
                            : resize_bilinear(small, in.h, in.w);
  for (float &v : heat.grid.values) {
    v = std::clamp(v, 0.0f, 1.0f);
  }
  return heat;
}

FeatureGrid feature_maps(const ModelSpec &spec, const ParamStore &store, const Tensor &image,
                         std::size_t max_maps) {
  if (image.shape().n != 1) {
    throw ShapeError("feature_maps takes a single image, got " + image.shape().to_string());
  }
  const ForwardPass pass = forward(spec, store, image, ExecMode::infer(), {.capture = true});
  FeatureGrid grid;
  std::string last_conv;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const OpNode &node = spec.nodes[i];
    if (node.kind == OpKind::conv2d) {
      last_conv = node.name;
      continue;
    }
    if (node.kind != OpKind::relu || node.fused || last_conv.empty()) {
      continue;
    }
    const Tensor &act = *pass.outputs[i];
    const Shape s = act.shape();
    FeatureLayer layer;
    layer.layer = node.name;
    layer.conv = last_conv;
    layer.channels = s.c;
    const std::size_t count = std::min(max_maps, s.c);
    for (std::size_t k = 0; k < count; ++k) {
      Grid g{s.h, s.w, std::vector<float>(s.h * s.w)};
      for (std::size_t p = 0; p < s.h * s.w; ++p) {
        g.values[p] = act[p * s.c + k];
      }
      bool constant = false;
      layer.maps.push_back(normalize_min_max(std::move(g), constant));
      layer.constant.push_back(constant);
    }
    grid.layers.push_back(std::move(layer));
    last_conv.clear();
  }
  return grid;
}

std::string grid_csv(const Grid &grid) {
  std::string out;
  char buf[32];
  for (std::size_t y = 0; y < grid.height; ++y) {
    for (std::size_t x = 0; x < grid.width; ++x) {
      std::snprintf(buf, sizeof buf, x == 0 ? "%.9g" : ",%.9g", static_cast<double>(grid.at(y, x)));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::vector<std::uint8_t> grid_to_gray(const Grid &grid) {
  std::vector<std::uint8_t> gray(grid.values.size());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = static_cast<std::uint8_t>(std::lround(255.0f * std::clamp(grid.values[i], 0.0f, 1.0f)));
  }
  return gray;
}

} // namespace pd36
