#include "pd36/params.hpp"

#include <functional>
#include <numeric>

#include "pd36/error.hpp"

namespace pd36 {

std::string_view role_name(ParamRole role) {
  switch (role) {
  case ParamRole::conv_kernel:
  case ParamRole::dense_kernel:
    return "kernel";
  case ParamRole::bn_gamma:
    return "gamma";
  case ParamRole::bn_beta:
    return "beta";
  case ParamRole::bn_moving_mean:
    return "moving_mean";
  case ParamRole::bn_moving_variance:
    return "moving_variance";
  case ParamRole::dense_bias:
    return "bias";
  }
  return "unknown";
}

std::optional<ParamRole> role_from_index(std::uint8_t index) {
  if (index > static_cast<std::uint8_t>(ParamRole::dense_bias)) {
    return std::nullopt;
  }
  return static_cast<ParamRole>(index);
}

bool role_is_trainable(ParamRole role) {
  return role != ParamRole::bn_moving_mean && role != ParamRole::bn_moving_variance;
}

std::string ParamBuffer::name() const { return layer + "/" + std::string(role_name(role)); }

std::size_t ParamBuffer::element_count() const {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::size_t ParamStore::add(ParamBuffer buffer) {
  if (buffer.values.size() != buffer.element_count()) {
    throw ShapeError("parameter " + buffer.name() + " has " + std::to_string(buffer.values.size()) +
                     " values for " + std::to_string(buffer.element_count()) + " elements");
  }
  if (find(buffer.layer, buffer.role)) {
    throw ConfigError("duplicate parameter " + buffer.name());
  }
  buffers_.push_back(std::move(buffer));
  return buffers_.size() - 1;
}

std::optional<std::size_t> ParamStore::find(std::string_view layer, ParamRole role) const {
  for (std::size_t i = 0; i < buffers_.size(); ++i) {
    if (buffers_[i].role == role && buffers_[i].layer == layer) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t ParamStore::index_of(std::string_view layer, ParamRole role) const {
  if (auto i = find(layer, role)) {
    return *i;
  }
  throw ConfigError("missing parameter " + std::string(layer) + "/" + std::string(role_name(role)));
}

const ParamBuffer &ParamStore::get(std::string_view layer, ParamRole role) const {
  return buffers_[index_of(layer, role)];
}

std::size_t ParamStore::trainable_count() const {
  std::size_t total = 0;
  for (const auto &b : buffers_) {
    if (b.trainable) {
      total += b.values.size();
    }
  }
  return total;
}

std::size_t ParamStore::non_trainable_count() const {
  std::size_t total = 0;
  for (const auto &b : buffers_) {
    if (!b.trainable) {
      total += b.values.size();
    }
  }
  return total;
}

Gradients Gradients::zeros_like(const ParamStore &store) {
  Gradients g;
  g.buffers.resize(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store[i].trainable) {
      g.buffers[i].assign(store[i].values.size(), 0.0f);
    }
  }
  return g;
}

void Gradients::accumulate(std::size_t index, const std::vector<float> &grad) {
  auto &dst = buffers.at(index);
  if (dst.size() != grad.size()) {
    throw ShapeError("gradient size mismatch for buffer " + std::to_string(index));
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    dst[i] += grad[i];
  }
}

} // namespace pd36
