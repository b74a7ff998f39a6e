#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pd36 {

enum class ParamRole : std::uint8_t {
  conv_kernel = 0,
  bn_gamma = 1,
  bn_beta = 2,
  bn_moving_mean = 3,
  bn_moving_variance = 4,
  dense_kernel = 5,
  dense_bias = 6,
};

std::string_view role_name(ParamRole role);
std::optional<ParamRole> role_from_index(std::uint8_t index);
bool role_is_trainable(ParamRole role);

/// One named weight buffer, e.g. "conv2d_7/kernel".
struct ParamBuffer {
  std::string layer;
  ParamRole role = ParamRole::conv_kernel;
  std::vector<std::size_t> dims;
  std::vector<float> values;
  bool trainable = true;

  std::string name() const;
  std::size_t element_count() const;
  bool operator==(const ParamBuffer &) const = default;
};

/// Ordered collection of every weight buffer of a model. Buffer order is the
/// network order and is part of the serialized format.
class ParamStore {
public:
  std::size_t add(ParamBuffer buffer);

  std::size_t size() const { return buffers_.size(); }
  const ParamBuffer &operator[](std::size_t i) const { return buffers_[i]; }
  ParamBuffer &operator[](std::size_t i) { return buffers_[i]; }
  const std::vector<ParamBuffer> &buffers() const { return buffers_; }

  std::optional<std::size_t> find(std::string_view layer, ParamRole role) const;
  /// Throws ConfigError when absent.
  std::size_t index_of(std::string_view layer, ParamRole role) const;
  const ParamBuffer &get(std::string_view layer, ParamRole role) const;

  std::size_t trainable_count() const;
  std::size_t non_trainable_count() const;
  std::size_t total_count() const { return trainable_count() + non_trainable_count(); }

  bool operator==(const ParamStore &) const = default;

private:
  std::vector<ParamBuffer> buffers_;
};

/// Gradient buffers aligned index-for-index with a ParamStore. Entries for
/// non-trainable buffers stay empty.
struct Gradients {
  std::vector<std::vector<float>> buffers;

  static Gradients zeros_like(const ParamStore &store);
  void accumulate(std::size_t index, const std::vector<float> &grad);
};

} // namespace pd36
