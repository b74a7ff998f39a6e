#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pd36/error.hpp"

namespace pd36 {

/// Extents of a rank-4 activation tensor in (N, H, W, C) order.
struct Shape {
  std::size_t n = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  std::size_t c = 0;

  constexpr std::size_t size() const { return n * h * w * c; }
  constexpr std::size_t image_size() const { return h * w * c; }
  constexpr bool operator==(const Shape &) const = default;

  std::string to_string() const;
};

/// Dense row-major (N, H, W, C) tensor. `float` is the compute type; the
/// `double` instantiation exists for finite-difference gradient checks.
template <typename T> class BasicTensor {
public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T(0)) : shape_(shape), data_(shape.size(), fill) {}
  BasicTensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.to_string());
    }
  }

  const Shape &shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T *data() { return data_.data(); }
  const T *data() const { return data_.data(); }
  const std::vector<T> &storage() const { return data_; }

  T &operator[](std::size_t i) { return data_[i]; }
  const T &operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(std::size_t n, std::size_t y, std::size_t x, std::size_t ch) const {
    return ((n * shape_.h + y) * shape_.w + x) * shape_.c + ch;
  }
  T &operator()(std::size_t n, std::size_t y, std::size_t x, std::size_t ch) {
    return data_[offset(n, y, x, ch)];
  }
  const T &operator()(std::size_t n, std::size_t y, std::size_t x, std::size_t ch) const {
    return data_[offset(n, y, x, ch)];
  }

  /// Pointer to the first element of image `n`.
  T *image(std::size_t n) { return data_.data() + n * shape_.image_size(); }
  const T *image(std::size_t n) const { return data_.data() + n * shape_.image_size(); }

  /// Copy of a single batch item as a 1xHxWxC tensor.
  BasicTensor slice(std::size_t n) const {
    Shape s{1, shape_.h, shape_.w, shape_.c};
    std::vector<T> out(image(n), image(n) + shape_.image_size());
    return BasicTensor(s, std::move(out));
  }

  bool operator==(const BasicTensor &) const = default;

private:
  Shape shape_{};
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// Stacks 1xHxWxC tensors of identical extent into one batch.
template <typename T> BasicTensor<T> stack(std::span<const BasicTensor<T>> images);

/// True when every element is finite.
template <typename T> bool all_finite(const BasicTensor<T> &t);

template <typename To, typename From> BasicTensor<To> tensor_cast(const BasicTensor<From> &t) {
  std::vector<To> out(t.values().begin(), t.values().end());
  return BasicTensor<To>(t.shape(), std::move(out));
}

} // namespace pd36
