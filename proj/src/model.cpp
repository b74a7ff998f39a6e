#include "pd36/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pd36 {

std::optional<std::size_t> ModelSpec::find(std::string_view name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t ModelSpec::index_of(std::string_view name) const {
  if (auto i = find(name)) {
    return *i;
  }
  throw ConfigError("unknown layer '" + std::string(name) + "'");
}

std::size_t ModelSpec::pool_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const OpNode &n) { return n.kind == OpKind::maxpool2x2; }));
}

namespace {

// Keras-style layer naming: first instance bare, later ones suffixed _1, _2, ...
std::string numbered(const std::string &base, std::size_t index) {
  return index == 0 ? base : base + "_" + std::to_string(index);
}

OpNode make_node(std::string name, OpKind kind) {
  OpNode n;
  n.name = std::move(name);
  n.kind = kind;
  return n;
}

} // namespace

ModelSpec make_spec(const ArchConfig &arch) {
  if (arch.num_classes < 2) {
    throw ConfigError("num_classes must be at least 2, got " + std::to_string(arch.num_classes));
  }
  if (arch.filters.empty() || arch.convs_per_block == 0 || arch.filters.size() % arch.convs_per_block != 0) {
    throw ConfigError("filter list must split evenly into blocks");
  }
  for (double rate : {arch.dropout_features, arch.dropout_dense}) {
    if (!(rate >= 0.0 && rate < 1.0)) {
      throw ConfigError("dropout rate must lie in [0, 1)");
    }
  }
  arch.augment.validate();

  ModelSpec spec;
  spec.num_classes = arch.num_classes;
  spec.input_extent = arch.input_extent;
  spec.arch = arch;

  OpNode aug = make_node("plant_augmentation", OpKind::augment);
  aug.augment = arch.augment;
  spec.nodes.push_back(aug);
  spec.nodes.push_back(make_node("rescale_0_1", OpKind::rescale));

  std::size_t pool = 0;
  for (std::size_t i = 0; i < arch.filters.size(); ++i) {
    OpNode conv = make_node(numbered("conv2d", i), OpKind::conv2d);
    conv.units = arch.filters[i];
    spec.nodes.push_back(conv);
    OpNode bn = make_node(numbered("batch_normalization", i), OpKind::batchnorm);
    bn.units = arch.filters[i];
    bn.batchnorm = arch.batchnorm;
    spec.nodes.push_back(bn);
    spec.nodes.push_back(make_node(numbered("activation", i), OpKind::relu));
    if ((i + 1) % arch.convs_per_block == 0) {
      spec.nodes.push_back(make_node(numbered("max_pooling2d", pool++), OpKind::maxpool2x2));
    }
  }

  OpNode drop1 = make_node("dropout", OpKind::dropout);
  drop1.rate = arch.dropout_features;
  spec.nodes.push_back(drop1);
  spec.nodes.push_back(make_node("global_average_pooling2d", OpKind::global_avg_pool));

  OpNode hidden = make_node("dense", OpKind::dense);
  hidden.units = arch.dense_units;
  spec.nodes.push_back(hidden);
  OpNode hidden_act = make_node("dense/relu", OpKind::relu);
  hidden_act.fused = true;
  spec.nodes.push_back(hidden_act);

  OpNode drop2 = make_node("dropout_1", OpKind::dropout);
  drop2.rate = arch.dropout_dense;
  spec.nodes.push_back(drop2);

  OpNode head = make_node("predictions", OpKind::dense);
  head.units = arch.num_classes;
  spec.nodes.push_back(head);
  OpNode head_act = make_node("predictions/softmax", OpKind::softmax);
  head_act.fused = true;
  spec.nodes.push_back(head_act);
  return spec;
}

ParamStore init_params(const ModelSpec &spec, std::uint64_t init_seed) {
  ParamStore store;
  std::size_t channels = 3;

  std::size_t head = spec.nodes.size();
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (spec.nodes[i].kind == OpKind::dense) {
      head = i;
    }
  }

  auto he_uniform = [&](std::size_t fan_in, std::size_t count, double scale = 1.0) {
    Rng rng = Rng::derive(init_seed, store.size());
    const double limit = scale * std::sqrt(6.0 / static_cast<double>(fan_in));
    std::vector<float> v(count);
    for (float &x : v) {
      x = static_cast<float>(rng.uniform(-limit, limit));
    }
    return v;
  };

  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const OpNode &node = spec.nodes[i];
    switch (node.kind) {
    case OpKind::conv2d: {
      const std::size_t taps = node.kernel_extent * node.kernel_extent;
      const std::size_t count = taps * channels * node.units;
      store.add({node.name, ParamRole::conv_kernel, {node.kernel_extent, node.kernel_extent, channels, node.units},
                 he_uniform(taps * channels, count), true});
      channels = node.units;
      break;
    }
    case OpKind::batchnorm: {
      const std::size_t c = channels;
      store.add({node.name, ParamRole::bn_gamma, {c}, std::vector<float>(c, 1.0f), true});
      store.add({node.name, ParamRole::bn_beta, {c}, std::vector<float>(c, 0.0f), true});
      store.add({node.name, ParamRole::bn_moving_mean, {c}, std::vector<float>(c, 0.0f), false});
      store.add({node.name, ParamRole::bn_moving_variance, {c}, std::vector<float>(c, 1.0f), false});
      break;
    }
    case OpKind::dense: {
      store.add({node.name, ParamRole::dense_kernel, {channels, node.units},
                 he_uniform(channels, channels * node.units, i == head ? spec.arch.head_init_scale : 1.0), true});
      store.add({node.name, ParamRole::dense_bias, {node.units}, std::vector<float>(node.units, 0.0f), true});
      channels = node.units;
      break;
    }
    default:
      break;
    }
  }
  return store;
}

const std::vector<std::string> &canonical_class_names() {
  static const std::vector<std::string> names = {
      "Apple___Apple_scab",
      "Apple___Black_rot",
      "Apple___Cedar_apple_rust",
      "Apple___healthy",
      "Blueberry___healthy",
      "Cherry_(including_sour)___Powdery_mildew",
      "Cherry_(including_sour)___healthy",
      "Corn_(maize)___Cercospora_leaf_spot Gray_leaf_spot",
      "Corn_(maize)___Common_rust_",
      "Corn_(maize)___Northern_Leaf_Blight",
      "Corn_(maize)___healthy",
      "Grape___Black_rot",
      "Grape___Esca_(Black_Measles)",
      "Grape___Leaf_blight_(Isariopsis_Leaf_Spot)",
      "Grape___healthy",
      "Orange___Haunglongbing_(Citrus_greening)",
      "Peach___Bacterial_spot",
      "Peach___healthy",
      "Pepper,_bell___Bacterial_spot",
      "Pepper,_bell___healthy",
      "Potato___Early_blight",
      "Potato___Late_blight",
      "Potato___healthy",
      "Raspberry___healthy",
      "Soybean___healthy",
      "Squash___Powdery_mildew",
      "Strawberry___Leaf_scorch",
      "Strawberry___healthy",
      "Tomato___Bacterial_spot",
      "Tomato___Early_blight",
      "Tomato___Late_blight",
      "Tomato___Leaf_Mold",
      "Tomato___Septoria_leaf_spot",
      "Tomato___Spider_mites Two-spotted_spider_mite",
      "Tomato___Target_Spot",
      "Tomato___Tomato_Yellow_Leaf_Curl_Virus",
      "Tomato___Tomato_mosaic_virus",
      "Tomato___healthy",
  };
  return names;
}

Model build_pd36c(std::size_t num_classes, std::uint64_t init_seed, std::size_t input_extent) {
  ArchConfig arch;
  arch.num_classes = num_classes;
  arch.input_extent = input_extent;
  Model model;
  model.spec = make_spec(arch);
  if (num_classes == canonical_class_names().size()) {
    model.spec.class_names = canonical_class_names();
  } else {
    for (std::size_t i = 0; i < num_classes; ++i) {
      model.spec.class_names.push_back("class_" + std::to_string(i));
    }
  }
  model.params = init_params(model.spec, init_seed);
  return model;
}

// ---------------------------------------------------------------------------

std::string layer_type(const OpNode &node) {
  switch (node.kind) {
  case OpKind::augment:
    return "Sequential";
  case OpKind::rescale:
    return "Rescaling";
  case OpKind::conv2d:
    return "Conv2D";
  case OpKind::batchnorm:
    return "BatchNormalization";
  case OpKind::relu:
    return "Activation";
  case OpKind::maxpool2x2:
    return "MaxPooling2D";
  case OpKind::global_avg_pool:
    return "GlobalAveragePooling2D";
  case OpKind::dense:
    return "Dense";
  case OpKind::dropout:
    return "Dropout";
  case OpKind::softmax:
    return "Softmax";
  }
  return "Unknown";
}

std::string format_output_shape(const Shape &shape) {
  if (shape.h == 1 && shape.w == 1) {
    return std::to_string(shape.c);
  }
  return "(" + std::to_string(shape.h) + ", " + std::to_string(shape.w) + ", " + std::to_string(shape.c) + ")";
}

std::vector<LayerShape> shape_trace(const ModelSpec &spec, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) {
    throw ShapeError("input extent must be positive");
  }
  Shape s{1, height, width, 3};
  std::vector<LayerShape> trace;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const OpNode &node = spec.nodes[i];
    switch (node.kind) {
    case OpKind::conv2d:
      s.c = node.units;
      break;
    case OpKind::batchnorm:
      if (node.units != 0 && node.units != s.c) {
        throw ShapeError(node.name + ": expects " + std::to_string(node.units) + " channels, got " +
                         std::to_string(s.c));
      }
      break;
    case OpKind::maxpool2x2:
      if (s.h % 2 != 0 || s.w % 2 != 0) {
        throw ShapeError(node.name + ": cannot halve odd extent " + std::to_string(s.h) + "x" +
                         std::to_string(s.w));
      }
      s.h /= 2;
      s.w /= 2;
      break;
    case OpKind::global_avg_pool:
      s.h = 1;
      s.w = 1;
      break;
    case OpKind::dense:
      s = Shape{1, 1, 1, node.units};
      break;
    default:
      break;
    }
    if (!node.fused) {
      trace.push_back({node.name, layer_type(node), s});
    }
  }
  return trace;
}

std::vector<LayerShape> shape_trace(const ModelSpec &spec, std::size_t extent) {
  return shape_trace(spec, extent, extent);
}

ParamAudit param_audit(const ModelSpec &spec, const ParamStore &store) {
  ParamAudit audit;
  const auto shapes = shape_trace(spec, spec.input_extent);
  std::size_t row = 0;
  for (const OpNode &node : spec.nodes) {
    if (node.fused) {
      continue;
    }
    AuditRow r{node.name, layer_type(node), format_output_shape(shapes.at(row++).shape)};
    for (const ParamBuffer &b : store.buffers()) {
      if (b.layer != node.name) {
        continue;
      }
      (b.trainable ? r.trainable : r.non_trainable) += b.values.size();
    }
    r.params = r.trainable + r.non_trainable;
    audit.trainable += r.trainable;
    audit.non_trainable += r.non_trainable;
    if (node.kind == OpKind::conv2d) {
      audit.conv_params += r.params;
    } else if (node.kind == OpKind::dense) {
      (node.name == "predictions" ? audit.head_params : audit.hidden_dense_params) += r.params;
    }
    audit.rows.push_back(std::move(r));
  }
  audit.total = audit.trainable + audit.non_trainable;
  return audit;
}

std::string with_thousands(std::size_t value) {
  std::string digits = std::to_string(value);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && (digits.size() - i) % 3 == 0) {
      out.push_back(',');
    }
    out.push_back(digits[i]);
  }
  return out;
}

std::string format_audit(const ParamAudit &audit) {
  std::size_t name_w = 5;
  std::size_t type_w = 4;
  std::size_t shape_w = 12;
  for (const auto &r : audit.rows) {
    name_w = std::max(name_w, r.name.size());
    type_w = std::max(type_w, r.type.size());
    shape_w = std::max(shape_w, r.output_shape.size());
  }
  auto pad = [](const std::string &s, std::size_t w) { return s + std::string(w - std::min(w, s.size()), ' '); };
  std::ostringstream os;
  os << pad("Layer", name_w) << "  " << pad("Type", type_w) << "  " << pad("Output Shape", shape_w) << "  Parameter\n";
  for (const auto &r : audit.rows) {
    os << pad(r.name, name_w) << "  " << pad(r.type, type_w) << "  " << pad(r.output_shape, shape_w) << "  "
       << with_thousands(r.params) << "\n";
  }
  os << "Trainable params " << with_thousands(audit.trainable) << "\n";
  os << "Non-trainable params " << with_thousands(audit.non_trainable) << "\n";
  os << "TOTAL " << with_thousands(audit.total) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------

void check_input(const ModelSpec &spec, const Shape &batch) {
  const std::size_t div = spec.spatial_divisor();
  if (batch.c != 3) {
    throw ShapeError("model input must have 3 channels, got " + batch.to_string());
  }
  if (batch.n == 0) {
    throw ShapeError("empty batch");
  }
  if (batch.h < div || batch.w < div || batch.h % div != 0 || batch.w % div != 0) {
    throw ShapeError("input extent " + std::to_string(batch.h) + "x" + std::to_string(batch.w) +
                     " must be a positive multiple of " + std::to_string(div));
  }
}

ForwardPass forward(const ModelSpec &spec, const ParamStore &store, const Tensor &batch,
                    const ExecMode &mode, const ForwardOptions &options) {
  check_input(spec, batch.shape());
  if (spec.nodes.empty() || spec.nodes.back().kind != OpKind::softmax) {
    throw ConfigError("model must end in a softmax node");
  }
  ForwardPass pass;
  const bool keep = options.keep_state;
  const bool record = keep || options.capture;
  if (keep) {
    pass.states.resize(spec.nodes.size());
  }
  if (record) {
    pass.outputs.resize(spec.nodes.size());
  }

  auto current = std::make_shared<const Tensor>(batch);
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (i + 1 == spec.nodes.size()) {
      pass.logits = *current;
    }
    NodeOutput out = run_node(spec.nodes[i], store, current, mode, keep);
    if (out.update) {
      pass.updates.push_back(std::move(*out.update));
    }
    if (keep) {
      pass.states[i] = std::move(out.state);
    }
    if (record) {
      pass.outputs[i] = out.output;
    }
    current = std::move(out.output);
  }
  pass.probabilities = *current;
  return pass;
}

Tensor infer(const ModelSpec &spec, const ParamStore &store, const Tensor &batch) {
  return forward(spec, store, batch, ExecMode::infer()).probabilities;
}

void commit_batchnorm_updates(ParamStore &store, const ForwardPass &pass) {
  for (const BatchNormUpdate &u : pass.updates) {
    store[u.mean_index].values = u.mean;
    store[u.variance_index].values = u.variance;
  }
}

BackwardPass backward(const ModelSpec &spec, const ParamStore &store, const ForwardPass &pass,
                      const Tensor &logit_grad, const BackwardOptions &options) {
  if (pass.states.size() != spec.nodes.size()) {
    throw StateError("backward requires a forward pass run with keep_state");
  }
  if (logit_grad.shape() != pass.logits.shape()) {
    throw ShapeError("logit gradient " + logit_grad.shape().to_string() + " does not match logits " +
                     pass.logits.shape().to_string());
  }
  std::size_t first_param = spec.nodes.size();
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (spec.nodes[i].has_params()) {
      first_param = i;
      break;
    }
  }

  BackwardPass result;
  result.params = Gradients::zeros_like(store);
  Tensor grad = logit_grad;
  // Walk from the node feeding the softmax down to the first parametric node.
  for (std::size_t i = spec.nodes.size() - 1; i > first_param;) {
    --i;
    if (options.stop_at_output_of && *options.stop_at_output_of == i) {
      result.output_grad = std::move(grad);
      return result;
    }
    NodeGradients g = gradient_of(spec.nodes[i], store, pass.states[i], grad);
    for (auto &[index, values] : g.params) {
      result.params.accumulate(index, values);
    }
    grad = std::move(g.input);
  }
  if (options.stop_at_output_of) {
    throw ConfigError("backward: requested node lies before the first parametric layer");
  }
  return result;
}

// ---------------------------------------------------------------------------

Prediction make_prediction(std::span<const float> probabilities, const std::vector<std::string> &labels,
                           std::size_t k) {
  const std::size_t classes = probabilities.size();
  if (labels.size() != classes) {
    throw ConfigError("label count " + std::to_string(labels.size()) + " does not match " +
                      std::to_string(classes) + " model outputs");
  }
  if (k < 1 || k > classes) {
    throw ConfigError("top-k must lie in [1, " + std::to_string(classes) + "], got " + std::to_string(k));
  }
  std::vector<std::size_t> order(classes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probabilities[a] > probabilities[b]; });

  Prediction p;
  p.class_index = order.front();
  p.class_name = labels[p.class_index];
  p.confidence = probabilities[p.class_index];
  for (std::size_t i = 0; i < k; ++i) {
    p.top_k.push_back({order[i], labels[order[i]], static_cast<double>(probabilities[order[i]])});
  }
  return p;
}

Prediction predict(const ModelSpec &spec, const ParamStore &store, const Tensor &image,
                   const std::vector<std::string> &labels, std::size_t k) {
  if (image.shape().n != 1) {
    throw ShapeError("predict expects a single image, got " + image.shape().to_string());
  }
  if (labels.size() != spec.num_classes) {
    throw ConfigError("label count " + std::to_string(labels.size()) + " does not match model head of " +
                      std::to_string(spec.num_classes));
  }
  const Tensor probs = infer(spec, store, image);
  return make_prediction(probs.values(), labels, k);
}

} // namespace pd36
