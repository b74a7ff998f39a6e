#include "pd36/graph.hpp"

namespace pd36 {

std::string_view kind_name(OpKind kind) {
  switch (kind) {
  case OpKind::augment:
    return "augment";
  case OpKind::rescale:
    return "rescale";
  case OpKind::conv2d:
    return "conv2d";
  case OpKind::batchnorm:
    return "batchnorm";
  case OpKind::relu:
    return "relu";
  case OpKind::maxpool2x2:
    return "maxpool2x2";
  case OpKind::global_avg_pool:
    return "globalavgpool";
  case OpKind::dense:
    return "dense";
  case OpKind::dropout:
    return "dropout";
  case OpKind::softmax:
    return "softmax";
  }
  return "unknown";
}

namespace {

ConvKernel<float> conv_kernel(const OpNode &node, const ParamStore &store, std::size_t in_channels) {
  const ParamBuffer &k = store.get(node.name, ParamRole::conv_kernel);
  return {k.values, in_channels, node.units};
}

DenseWeights<float> dense_weights(const OpNode &node, const ParamStore &store) {
  const ParamBuffer &w = store.get(node.name, ParamRole::dense_kernel);
  const ParamBuffer &b = store.get(node.name, ParamRole::dense_bias);
  return {w.values, b.values, w.dims.at(0), node.units};
}

BatchNormParams<float> bn_params(const OpNode &node, const ParamStore &store) {
  return {store.get(node.name, ParamRole::bn_gamma).values, store.get(node.name, ParamRole::bn_beta).values,
          store.get(node.name, ParamRole::bn_moving_mean).values,
          store.get(node.name, ParamRole::bn_moving_variance).values};
}

template <typename V> std::shared_ptr<const Tensor> share(V &&value) {
  return std::make_shared<const Tensor>(std::forward<V>(value));
}

} // namespace

NodeOutput run_node(const OpNode &node, const ParamStore &store, std::shared_ptr<const Tensor> input,
                    const ExecMode &mode, bool keep_state) {
  NodeOutput out;
  NodeState &state = out.state;
  const Tensor &x = *input;

  switch (node.kind) {
  case OpKind::augment:
    out.output = mode.training() ? share(augment_batch(x, node.augment, mode)) : input;
    break;
  case OpKind::rescale:
    out.output = share(rescale(x));
    break;
  case OpKind::conv2d:
    out.output = share(conv2d(x, conv_kernel(node, store, x.shape().c)));
    break;
  case OpKind::batchnorm: {
    const auto params = bn_params(node, store);
    auto result = batchnorm(x, params, node.batchnorm, mode.phase());
    if (mode.training()) {
      auto moving = batchnorm_moving_update(params, result, node.batchnorm);
      out.update = BatchNormUpdate{store.index_of(node.name, ParamRole::bn_moving_mean),
                                   store.index_of(node.name, ParamRole::bn_moving_variance),
                                   std::move(moving.mean), std::move(moving.variance)};
    }
    out.output = share(std::move(result.output));
    if (keep_state) {
      result.output = Tensor();
      state.batchnorm = std::move(result);
    }
    break;
  }
  case OpKind::relu:
    out.output = share(relu(x));
    break;
  case OpKind::maxpool2x2: {
    auto pooled = maxpool2x2(x);
    out.output = share(std::move(pooled.output));
    if (keep_state) {
      state.argmax = std::move(pooled.argmax);
    }
    break;
  }
  case OpKind::global_avg_pool:
    out.output = share(global_avg_pool(x));
    break;
  case OpKind::dense:
    out.output = share(dense(x, dense_weights(node, store)));
    break;
  case OpKind::dropout: {
    auto dropped = dropout(x, node.rate, mode);
    out.output = dropped.mask.empty() ? input : share(std::move(dropped.output));
    if (keep_state) {
      state.mask = std::move(dropped.mask);
    }
    break;
  }
  case OpKind::softmax:
    out.output = share(softmax(x));
    break;
  }

  if (keep_state) {
    state.ran = true;
    state.input = std::move(input);
    state.output = out.output;
  }
  return out;
}

NodeGradients gradient_of(const OpNode &node, const ParamStore &store, const NodeState &state,
                          const Tensor &upstream) {
  if (!state.ran || !state.input || !state.output) {
    throw StateError("gradient requested for node '" + node.name + "' before its forward pass");
  }
  const Tensor &x = *state.input;
  if (upstream.shape() != state.output->shape()) {
    throw ShapeError("upstream gradient " + upstream.shape().to_string() + " does not match output " +
                     state.output->shape().to_string() + " of '" + node.name + "'");
  }

  NodeGradients g;
  switch (node.kind) {
  case OpKind::augment:
  case OpKind::rescale:
    throw StateError("node '" + node.name + "' is not differentiable");
  case OpKind::conv2d: {
    auto cg = conv2d_backward(x, conv_kernel(node, store, x.shape().c), upstream);
    g.input = std::move(cg.input);
    g.params.emplace_back(store.index_of(node.name, ParamRole::conv_kernel), std::move(cg.kernel));
    break;
  }
  case OpKind::batchnorm: {
    if (!state.batchnorm) {
      throw StateError("batchnorm node '" + node.name + "' has no saved statistics");
    }
    const auto &gamma = store.get(node.name, ParamRole::bn_gamma).values;
    auto bg = batchnorm_backward<float>(*state.batchnorm, gamma, upstream);
    g.input = std::move(bg.input);
    g.params.emplace_back(store.index_of(node.name, ParamRole::bn_gamma), std::move(bg.gamma));
    g.params.emplace_back(store.index_of(node.name, ParamRole::bn_beta), std::move(bg.beta));
    break;
  }
  case OpKind::relu:
    g.input = relu_backward(x, upstream);
    break;
  case OpKind::maxpool2x2:
    g.input = maxpool2x2_backward<float>(x.shape(), state.argmax, upstream);
    break;
  case OpKind::global_avg_pool:
    g.input = global_avg_pool_backward(x.shape(), upstream);
    break;
  case OpKind::dense: {
    auto dg = dense_backward(x, dense_weights(node, store), upstream);
    g.input = std::move(dg.input);
    g.params.emplace_back(store.index_of(node.name, ParamRole::dense_kernel), std::move(dg.weights));
    g.params.emplace_back(store.index_of(node.name, ParamRole::dense_bias), std::move(dg.bias));
    break;
  }
  case OpKind::dropout:
    g.input = dropout_backward<float>(state.mask, upstream);
    break;
  case OpKind::softmax:
    g.input = softmax_backward(*state.output, upstream);
    break;
  }
  return g;
}

} // namespace pd36
