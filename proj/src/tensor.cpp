#include "pd36/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace pd36 {

std::string Shape::to_string() const {
  return "[" + std::to_string(n) + "," + std::to_string(h) + "," + std::to_string(w) + "," +
         std::to_string(c) + "]";
}

template <typename T> BasicTensor<T> stack(std::span<const BasicTensor<T>> images) {
  if (images.empty()) {
    throw ShapeError("cannot stack an empty image list");
  }
  const Shape first = images.front().shape();
  Shape out_shape{0, first.h, first.w, first.c};
  for (const auto &img : images) {
    const Shape s = img.shape();
    if (s.h != first.h || s.w != first.w || s.c != first.c) {
      throw ShapeError("cannot stack " + s.to_string() + " with " + first.to_string());
    }
    out_shape.n += s.n;
  }
  std::vector<T> data;
  data.reserve(out_shape.size());
  for (const auto &img : images) {
    data.insert(data.end(), img.values().begin(), img.values().end());
  }
  return BasicTensor<T>(out_shape, std::move(data));
}

template <typename T> bool all_finite(const BasicTensor<T> &t) {
  return std::all_of(t.values().begin(), t.values().end(), [](T v) { return std::isfinite(v); });
}

template Tensor stack<float>(std::span<const Tensor>);
template TensorD stack<double>(std::span<const TensorD>);
template bool all_finite<float>(const Tensor &);
template bool all_finite<double>(const TensorD &);

} // namespace pd36
