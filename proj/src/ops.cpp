#include "pd36/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "pd36/parallel.hpp"

namespace pd36 {

Rng &ExecMode::rng() const {
  if (rng_ == nullptr) {
    throw ConfigError("train mode requires a random stream");
  }
  return *rng_;
}

namespace {

template <typename T> using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Output pixels per GEMM tile. Fixed so that the arithmetic never depends on
// the number of worker threads.
constexpr std::size_t kTileRows = 1024;
constexpr std::size_t kTaps = 9;

struct Tile {
  std::size_t image;
  std::size_t row0;
  std::size_t rows;
};

std::vector<Tile> make_tiles(std::size_t images, std::size_t pixels) {
  std::vector<Tile> tiles;
  for (std::size_t n = 0; n < images; ++n) {
    for (std::size_t r = 0; r < pixels; r += kTileRows) {
      tiles.push_back({n, r, std::min(kTileRows, pixels - r)});
    }
  }
  return tiles;
}

// Gathers the 3x3 neighbourhoods of `rows` consecutive output pixels into a
// rows x (9*C) matrix; out-of-image taps are zero.
template <typename T>
void im2col_tile(const T *image, std::size_t height, std::size_t width, std::size_t channels,
                 std::size_t row0, std::size_t rows, T *cols) {
  const std::size_t stride = kTaps * channels;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t p = row0 + r;
    const auto y = static_cast<std::ptrdiff_t>(p / width);
    const auto x = static_cast<std::ptrdiff_t>(p % width);
    T *dst = cols + r * stride;
    for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
      for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
        const std::ptrdiff_t sy = y + dy;
        const std::ptrdiff_t sx = x + dx;
        if (sy < 0 || sx < 0 || sy >= static_cast<std::ptrdiff_t>(height) ||
            sx >= static_cast<std::ptrdiff_t>(width)) {
          std::fill(dst, dst + channels, T(0));
        } else {
          const T *src = image + (static_cast<std::size_t>(sy) * width + static_cast<std::size_t>(sx)) * channels;
          std::copy(src, src + channels, dst);
        }
        dst += channels;
      }
    }
  }
}

template <typename T> void check_kernel(const Shape &in, const ConvKernel<T> &kernel) {
  if (in.c != kernel.in_channels ||
      kernel.weights.size() != kTaps * kernel.in_channels * kernel.out_channels) {
    throw ShapeError("conv2d: input " + in.to_string() + " incompatible with kernel [3,3," +
                     std::to_string(kernel.in_channels) + "," + std::to_string(kernel.out_channels) +
                     "] (" + std::to_string(kernel.weights.size()) + " weights)");
  }
}

// Kernel for the input gradient: spatially flipped with in/out swapped.
template <typename T> std::vector<T> transpose_flip(const ConvKernel<T> &kernel) {
  const std::size_t cin = kernel.in_channels;
  const std::size_t cout = kernel.out_channels;
  std::vector<T> out(kernel.weights.size());
  for (std::size_t tap = 0; tap < kTaps; ++tap) {
    const std::size_t flipped = kTaps - 1 - tap;
    for (std::size_t c = 0; c < cin; ++c) {
      for (std::size_t f = 0; f < cout; ++f) {
        out[(flipped * cout + f) * cin + c] = kernel.weights[(tap * cin + c) * cout + f];
      }
    }
  }
  return out;
}

} // namespace

template <typename T> BasicTensor<T> conv2d(const BasicTensor<T> &input, ConvKernel<T> kernel) {
  const Shape in = input.shape();
  check_kernel(in, kernel);
  const std::size_t pixels = in.h * in.w;
  const std::size_t depth = kTaps * in.c;
  const std::size_t cout = kernel.out_channels;
  BasicTensor<T> out(Shape{in.n, in.h, in.w, cout});

  const auto tiles = make_tiles(in.n, pixels);
  const Eigen::Map<const RowMatrix<T>> weights(kernel.weights.data(), depth, cout);
  parallel_for(tiles.size(), [&](std::size_t t) {
    const Tile tile = tiles[t];
    std::vector<T> cols(tile.rows * depth);
    im2col_tile(input.image(tile.image), in.h, in.w, in.c, tile.row0, tile.rows, cols.data());
    const Eigen::Map<const RowMatrix<T>> a(cols.data(), tile.rows, depth);
    Eigen::Map<RowMatrix<T>> o(out.image(tile.image) + tile.row0 * cout, tile.rows, cout);
    o.noalias() = a * weights;
  });
  return out;
}

template <typename T>
ConvGradients<T> conv2d_backward(const BasicTensor<T> &input, ConvKernel<T> kernel,
                                 const BasicTensor<T> &upstream) {
  const Shape in = input.shape();
  check_kernel(in, kernel);
  const std::size_t cout = kernel.out_channels;
  if (upstream.shape() != Shape{in.n, in.h, in.w, cout}) {
    throw ShapeError("conv2d backward: upstream " + upstream.shape().to_string() +
                     " does not match output of input " + in.to_string());
  }
  const std::size_t pixels = in.h * in.w;
  const std::size_t depth = kTaps * in.c;

  const auto tiles = make_tiles(in.n, pixels);
  std::vector<std::vector<T>> partials(tiles.size());
  parallel_for(tiles.size(), [&](std::size_t t) {
    const Tile tile = tiles[t];
    std::vector<T> cols(tile.rows * depth);
    im2col_tile(input.image(tile.image), in.h, in.w, in.c, tile.row0, tile.rows, cols.data());
    const Eigen::Map<const RowMatrix<T>> a(cols.data(), tile.rows, depth);
    const Eigen::Map<const RowMatrix<T>> g(upstream.image(tile.image) + tile.row0 * cout, tile.rows, cout);
    partials[t].resize(depth * cout);
    Eigen::Map<RowMatrix<T>> p(partials[t].data(), depth, cout);
    p.noalias() = a.transpose() * g;
  });

  ConvGradients<T> grads;
  grads.kernel.assign(depth * cout, T(0));
  for (const auto &p : partials) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      grads.kernel[i] += p[i];
    }
  }

  const std::vector<T> back = transpose_flip(kernel);
  grads.input = conv2d(upstream, ConvKernel<T>{back, cout, in.c});
  return grads;
}

// ---------------------------------------------------------------------------

template <typename T> BasicTensor<T> relu(const BasicTensor<T> &input) {
  BasicTensor<T> out(input.shape());
  std::transform(input.values().begin(), input.values().end(), out.values().begin(),
                 [](T v) { return v > T(0) ? v : T(0); });
  return out;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T> &input, const BasicTensor<T> &upstream) {
  if (input.shape() != upstream.shape()) {
    throw ShapeError("relu backward: " + input.shape().to_string() + " vs " + upstream.shape().to_string());
  }
  BasicTensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    out[i] = input[i] > T(0) ? upstream[i] : T(0);
  }
  return out;
}

// ---------------------------------------------------------------------------

template <typename T> PoolResult<T> maxpool2x2(const BasicTensor<T> &input) {
  const Shape in = input.shape();
  if (in.h % 2 != 0 || in.w % 2 != 0) {
    throw ShapeError("maxpool2x2 requires even spatial extent, got " + in.to_string());
  }
  const Shape os{in.n, in.h / 2, in.w / 2, in.c};
  PoolResult<T> result{BasicTensor<T>(os), std::vector<std::size_t>(os.size())};
  for (std::size_t n = 0; n < os.n; ++n) {
    for (std::size_t y = 0; y < os.h; ++y) {
      for (std::size_t x = 0; x < os.w; ++x) {
        for (std::size_t c = 0; c < os.c; ++c) {
          std::size_t best = input.offset(n, 2 * y, 2 * x, c);
          const std::size_t candidates[3] = {input.offset(n, 2 * y, 2 * x + 1, c),
                                             input.offset(n, 2 * y + 1, 2 * x, c),
                                             input.offset(n, 2 * y + 1, 2 * x + 1, c)};
          for (std::size_t k : candidates) {
            if (input[k] > input[best]) {
              best = k;
            }
          }
          const std::size_t o = result.output.offset(n, y, x, c);
          result.output[o] = input[best];
          result.argmax[o] = best;
        }
      }
    }
  }
  return result;
}

template <typename T>
BasicTensor<T> maxpool2x2_backward(const Shape &input_shape, std::span<const std::size_t> argmax,
                                   const BasicTensor<T> &upstream) {
  if (argmax.size() != upstream.size()) {
    throw ShapeError("maxpool backward: argmax/upstream size mismatch");
  }
  BasicTensor<T> grad(input_shape);
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    grad[argmax[i]] += upstream[i];
  }
  return grad;
}

// ---------------------------------------------------------------------------

template <typename T>
BatchNormResult<T> batchnorm(const BasicTensor<T> &input, const BatchNormParams<T> &params,
                             const BatchNormConfig &config, Phase phase) {
  const Shape in = input.shape();
  const std::size_t channels = in.c;
  if (params.gamma.size() != channels || params.beta.size() != channels ||
      params.moving_mean.size() != channels || params.moving_variance.size() != channels) {
    throw ShapeError("batchnorm: parameter length " + std::to_string(params.gamma.size()) +
                     " does not match channels of " + in.to_string());
  }
  const std::size_t count = in.n * in.h * in.w;

  BatchNormResult<T> r;
  r.phase = phase;
  r.mean.resize(channels);
  r.variance.resize(channels);
  r.inv_std.resize(channels);
  if (phase == Phase::train) {
    if (count == 0) {
      throw ShapeError("batchnorm: degenerate batch with zero elements per channel");
    }
    std::vector<double> sum(channels, 0.0);
    for (std::size_t p = 0; p < count; ++p) {
      const T *px = input.data() + p * channels;
      for (std::size_t c = 0; c < channels; ++c) {
        sum[c] += static_cast<double>(px[c]);
      }
    }
    std::vector<double> mean(channels);
    for (std::size_t c = 0; c < channels; ++c) {
      mean[c] = sum[c] / static_cast<double>(count);
    }
    std::vector<double> sq(channels, 0.0);
    for (std::size_t p = 0; p < count; ++p) {
      const T *px = input.data() + p * channels;
      for (std::size_t c = 0; c < channels; ++c) {
        const double d = static_cast<double>(px[c]) - mean[c];
        sq[c] += d * d;
      }
    }
    for (std::size_t c = 0; c < channels; ++c) {
      r.mean[c] = static_cast<T>(mean[c]);
      r.variance[c] = static_cast<T>(sq[c] / static_cast<double>(count));
    }
  } else {
    std::copy(params.moving_mean.begin(), params.moving_mean.end(), r.mean.begin());
    std::copy(params.moving_variance.begin(), params.moving_variance.end(), r.variance.begin());
  }
  for (std::size_t c = 0; c < channels; ++c) {
    r.inv_std[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(r.variance[c]) + config.epsilon));
  }

  r.output = BasicTensor<T>(in);
  r.normalized = BasicTensor<T>(in);
  for (std::size_t p = 0; p < count; ++p) {
    const T *px = input.data() + p * channels;
    T *xh = r.normalized.data() + p * channels;
    T *y = r.output.data() + p * channels;
    for (std::size_t c = 0; c < channels; ++c) {
      xh[c] = (px[c] - r.mean[c]) * r.inv_std[c];
      y[c] = params.gamma[c] * xh[c] + params.beta[c];
    }
  }
  return r;
}

template <typename T>
MovingStats<T> batchnorm_moving_update(const BatchNormParams<T> &params,
                                       const BatchNormResult<T> &result,
                                       const BatchNormConfig &config) {
  if (result.phase != Phase::train) {
    throw StateError("moving statistics are only updated from a train-mode pass");
  }
  const std::size_t channels = params.moving_mean.size();
  MovingStats<T> s{std::vector<T>(channels), std::vector<T>(channels)};
  const T m = static_cast<T>(config.momentum);
  for (std::size_t c = 0; c < channels; ++c) {
    s.mean[c] = m * params.moving_mean[c] + (T(1) - m) * result.mean[c];
    s.variance[c] = m * params.moving_variance[c] + (T(1) - m) * result.variance[c];
  }
  return s;
}

template <typename T>
BatchNormGradients<T> batchnorm_backward(const BatchNormResult<T> &result, std::span<const T> gamma,
                                         const BasicTensor<T> &upstream) {
  const Shape in = result.normalized.shape();
  if (upstream.shape() != in) {
    throw ShapeError("batchnorm backward: upstream " + upstream.shape().to_string() + " vs " + in.to_string());
  }
  const std::size_t channels = in.c;
  const std::size_t count = in.n * in.h * in.w;

  BatchNormGradients<T> g{BasicTensor<T>(in), std::vector<T>(channels), std::vector<T>(channels)};
  std::vector<double> sum_dy(channels, 0.0);
  std::vector<double> sum_dy_xh(channels, 0.0);
  for (std::size_t p = 0; p < count; ++p) {
    const T *dy = upstream.data() + p * channels;
    const T *xh = result.normalized.data() + p * channels;
    for (std::size_t c = 0; c < channels; ++c) {
      sum_dy[c] += static_cast<double>(dy[c]);
      sum_dy_xh[c] += static_cast<double>(dy[c]) * static_cast<double>(xh[c]);
    }
  }
  for (std::size_t c = 0; c < channels; ++c) {
    g.beta[c] = static_cast<T>(sum_dy[c]);
    g.gamma[c] = static_cast<T>(sum_dy_xh[c]);
  }

  if (result.phase == Phase::infer) {
    for (std::size_t p = 0; p < count; ++p) {
      const T *dy = upstream.data() + p * channels;
      T *dx = g.input.data() + p * channels;
      for (std::size_t c = 0; c < channels; ++c) {
        dx[c] = dy[c] * gamma[c] * result.inv_std[c];
      }
    }
    return g;
  }

  // dx = gamma * inv_std / M * (M dy - sum(dy) - xh * sum(dy xh))
  const double m = static_cast<double>(count);
  for (std::size_t p = 0; p < count; ++p) {
    const T *dy = upstream.data() + p * channels;
    const T *xh = result.normalized.data() + p * channels;
    T *dx = g.input.data() + p * channels;
    for (std::size_t c = 0; c < channels; ++c) {
      const double scale = static_cast<double>(gamma[c]) * static_cast<double>(result.inv_std[c]) / m;
      dx[c] = static_cast<T>(scale * (m * static_cast<double>(dy[c]) - sum_dy[c] -
                                      static_cast<double>(xh[c]) * sum_dy_xh[c]));
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

template <typename T> BasicTensor<T> global_avg_pool(const BasicTensor<T> &input) {
  const Shape in = input.shape();
  if (in.h == 0 || in.w == 0) {
    throw ShapeError("global_avg_pool: empty spatial extent " + in.to_string());
  }
  BasicTensor<T> out(Shape{in.n, 1, 1, in.c});
  const double area = static_cast<double>(in.h * in.w);
  std::vector<double> sum(in.c);
  for (std::size_t n = 0; n < in.n; ++n) {
    std::fill(sum.begin(), sum.end(), 0.0);
    const T *img = input.image(n);
    for (std::size_t p = 0; p < in.h * in.w; ++p) {
      for (std::size_t c = 0; c < in.c; ++c) {
        sum[c] += static_cast<double>(img[p * in.c + c]);
      }
    }
    for (std::size_t c = 0; c < in.c; ++c) {
      out(n, 0, 0, c) = static_cast<T>(sum[c] / area);
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> global_avg_pool_backward(const Shape &input_shape, const BasicTensor<T> &upstream) {
  if (upstream.shape() != Shape{input_shape.n, 1, 1, input_shape.c}) {
    throw ShapeError("global_avg_pool backward: upstream " + upstream.shape().to_string());
  }
  BasicTensor<T> grad(input_shape);
  const T inv_area = static_cast<T>(1.0 / static_cast<double>(input_shape.h * input_shape.w));
  for (std::size_t n = 0; n < input_shape.n; ++n) {
    T *img = grad.image(n);
    for (std::size_t p = 0; p < input_shape.h * input_shape.w; ++p) {
      for (std::size_t c = 0; c < input_shape.c; ++c) {
        img[p * input_shape.c + c] = upstream(n, 0, 0, c) * inv_area;
      }
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------

namespace {
template <typename T> void check_dense(const Shape &in, const DenseWeights<T> &w) {
  if (in.image_size() != w.in_features || w.weights.size() != w.in_features * w.out_features ||
      w.bias.size() != w.out_features) {
    throw ShapeError("dense: input " + in.to_string() + " incompatible with weights [" +
                     std::to_string(w.in_features) + "," + std::to_string(w.out_features) + "]");
  }
}
} // namespace

template <typename T> BasicTensor<T> dense(const BasicTensor<T> &input, DenseWeights<T> w) {
  const Shape in = input.shape();
  check_dense(in, w);
  BasicTensor<T> out(Shape{in.n, 1, 1, w.out_features});
  for (std::size_t n = 0; n < in.n; ++n) {
    const T *x = input.image(n);
    T *y = out.image(n);
    std::copy(w.bias.begin(), w.bias.end(), y);
    for (std::size_t i = 0; i < w.in_features; ++i) {
      const T xi = x[i];
      const T *row = w.weights.data() + i * w.out_features;
      for (std::size_t o = 0; o < w.out_features; ++o) {
        y[o] += xi * row[o];
      }
    }
  }
  return out;
}

template <typename T>
DenseGradients<T> dense_backward(const BasicTensor<T> &input, DenseWeights<T> w,
                                 const BasicTensor<T> &upstream) {
  const Shape in = input.shape();
  check_dense(in, w);
  if (upstream.shape() != Shape{in.n, 1, 1, w.out_features}) {
    throw ShapeError("dense backward: upstream " + upstream.shape().to_string());
  }
  DenseGradients<T> g{BasicTensor<T>(in), std::vector<T>(w.weights.size(), T(0)),
                      std::vector<T>(w.out_features, T(0))};
  for (std::size_t n = 0; n < in.n; ++n) {
    const T *x = input.image(n);
    const T *dy = upstream.image(n);
    T *dx = g.input.image(n);
    for (std::size_t o = 0; o < w.out_features; ++o) {
      g.bias[o] += dy[o];
    }
    for (std::size_t i = 0; i < w.in_features; ++i) {
      const T *row = w.weights.data() + i * w.out_features;
      T *grow = g.weights.data() + i * w.out_features;
      T acc = T(0);
      for (std::size_t o = 0; o < w.out_features; ++o) {
        grow[o] += x[i] * dy[o];
        acc += row[o] * dy[o];
      }
      dx[i] = acc;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

template <typename T>
DropoutResult<T> dropout(const BasicTensor<T> &input, double rate, const ExecMode &mode) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!mode.training() || rate == 0.0) {
    return {input, {}};
  }
  Rng &rng = mode.rng();
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  DropoutResult<T> r{BasicTensor<T>(input.shape()), std::vector<T>(input.size())};
  for (std::size_t i = 0; i < input.size(); ++i) {
    r.mask[i] = rng.uniform() < rate ? T(0) : keep_scale;
    r.output[i] = input[i] * r.mask[i];
  }
  return r;
}

template <typename T>
BasicTensor<T> dropout_backward(std::span<const T> mask, const BasicTensor<T> &upstream) {
  if (mask.empty()) {
    return upstream;
  }
  if (mask.size() != upstream.size()) {
    throw ShapeError("dropout backward: mask/upstream size mismatch");
  }
  BasicTensor<T> g(upstream.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    g[i] = upstream[i] * mask[i];
  }
  return g;
}

// ---------------------------------------------------------------------------

template <typename T> BasicTensor<T> softmax(const BasicTensor<T> &logits) {
  const Shape s = logits.shape();
  const std::size_t classes = s.image_size();
  if (classes == 0) {
    throw ShapeError("softmax over zero classes");
  }
  BasicTensor<T> out(s);
  std::vector<double> e(classes);
  for (std::size_t n = 0; n < s.n; ++n) {
    const T *z = logits.image(n);
    T *p = out.image(n);
    const double zmax = static_cast<double>(*std::max_element(z, z + classes));
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      e[c] = std::exp(static_cast<double>(z[c]) - zmax);
      sum += e[c];
    }
    for (std::size_t c = 0; c < classes; ++c) {
      // Floor at the smallest normal so every component stays strictly positive.
      p[c] = std::max(static_cast<T>(e[c] / sum), std::numeric_limits<T>::min());
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> softmax_backward(const BasicTensor<T> &probabilities, const BasicTensor<T> &upstream) {
  const Shape s = probabilities.shape();
  if (upstream.shape() != s) {
    throw ShapeError("softmax backward: upstream " + upstream.shape().to_string() + " vs " + s.to_string());
  }
  const std::size_t classes = s.image_size();
  BasicTensor<T> g(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    const T *p = probabilities.image(n);
    const T *dy = upstream.image(n);
    double dot = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      dot += static_cast<double>(p[c]) * static_cast<double>(dy[c]);
    }
    T *dz = g.image(n);
    for (std::size_t c = 0; c < classes; ++c) {
      dz[c] = static_cast<T>(static_cast<double>(p[c]) * (static_cast<double>(dy[c]) - dot));
    }
  }
  return g;
}

Tensor rescale(const Tensor &input) {
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const float v = input[i];
    if (!(v >= 0.0f && v <= 255.0f)) {
      throw InputError("rescale: pixel value " + std::to_string(v) + " outside [0, 255]");
    }
    out[i] = v / 255.0f;
  }
  return out;
}

#define PD36_INSTANTIATE_OPS(T)                                                                    \
  template BasicTensor<T> conv2d<T>(const BasicTensor<T> &, ConvKernel<T>);                        \
  template ConvGradients<T> conv2d_backward<T>(const BasicTensor<T> &, ConvKernel<T>,              \
                                               const BasicTensor<T> &);                            \
  template BasicTensor<T> relu<T>(const BasicTensor<T> &);                                         \
  template BasicTensor<T> relu_backward<T>(const BasicTensor<T> &, const BasicTensor<T> &);        \
  template PoolResult<T> maxpool2x2<T>(const BasicTensor<T> &);                                    \
  template BasicTensor<T> maxpool2x2_backward<T>(const Shape &, std::span<const std::size_t>,      \
                                                 const BasicTensor<T> &);                          \
  template BatchNormResult<T> batchnorm<T>(const BasicTensor<T> &, const BatchNormParams<T> &,     \
                                           const BatchNormConfig &, Phase);                        \
  template MovingStats<T> batchnorm_moving_update<T>(                                              \
      const BatchNormParams<T> &, const BatchNormResult<T> &, const BatchNormConfig &);            \
  template BatchNormGradients<T> batchnorm_backward<T>(const BatchNormResult<T> &,                 \
                                                       std::span<const T>, const BasicTensor<T> &); \
  template BasicTensor<T> global_avg_pool<T>(const BasicTensor<T> &);                              \
  template BasicTensor<T> global_avg_pool_backward<T>(const Shape &, const BasicTensor<T> &);      \
  template BasicTensor<T> dense<T>(const BasicTensor<T> &, DenseWeights<T>);                       \
  template DenseGradients<T> dense_backward<T>(const BasicTensor<T> &, DenseWeights<T>,            \
                                               const BasicTensor<T> &);                            \
  template DropoutResult<T> dropout<T>(const BasicTensor<T> &, double, const ExecMode &);          \
  template BasicTensor<T> dropout_backward<T>(std::span<const T>, const BasicTensor<T> &);         \
  template BasicTensor<T> softmax<T>(const BasicTensor<T> &);                                      \
  template BasicTensor<T> softmax_backward<T>(const BasicTensor<T> &, const BasicTensor<T> &);

PD36_INSTANTIATE_OPS(float)
PD36_INSTANTIATE_OPS(double)

#undef PD36_INSTANTIATE_OPS

} // namespace pd36
