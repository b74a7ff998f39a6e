#pragma once

// Central finite-difference checks of every differentiable op, in float and
// double. Each check builds a seeded random case, forms the scalar
// L = sum_i w_i y_i with fixed random weights w, and compares the op's
// backward pass (upstream = w) with (L(x + h) - L(x - h)) / 2h.
//
// Double runs are scored elementwise: |a - n| / max(|a|, |n|, floor).
// Float runs are scored norm-wise, ||a - n|| / max(||a||, ||n||), since
// float rounding of L alone puts ~1e-5 of absolute noise on every
// difference quotient. Both scores are recorded.
//
// Cases are built away from non-differentiable points: ReLU inputs satisfy
// |x| >= 0.05 and max-pool windows have a gap of at least 0.05 between
// entries.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <type_traits>
#include <vector>

#include "pd36/ops.hpp"
#include "pd36/trainer.hpp"

namespace pd36::testing {

struct GradCheck {
  std::string op;
  std::string wrt;
  std::uint64_t seed = 0;
  /// Worst elementwise relative error.
  double max_rel = 0.0;
  std::size_t coords = 0;
  /// ||a - n|| / max(||a||, ||n||).
  double norm_rel = 0.0;
};

struct ErrorStats {
  double max_rel = 0.0;
  double norm_rel = 0.0;
};

template <typename T> struct Precision;
template <> struct Precision<float> {
  static constexpr double step = 1e-2;
  static constexpr double floor = 1e-2;
  static constexpr double tolerance = 1e-3;
  static constexpr bool norm_wise = true;
  static constexpr const char *name = "float32";
};
template <> struct Precision<double> {
  static constexpr double step = 1e-4;
  static constexpr double floor = 1e-4;
  static constexpr double tolerance = 1e-6;
  static constexpr bool norm_wise = false;
  static constexpr const char *name = "float64";
};

template <typename T> BasicTensor<T> random_tensor(Shape s, Rng &rng, double lo = -1.0, double hi = 1.0) {
  BasicTensor<T> t(s);
  for (T &v : t.values()) {
    v = static_cast<T>(rng.uniform(lo, hi));
  }
  return t;
}

template <typename T> std::vector<T> random_vector(std::size_t n, Rng &rng, double lo = -1.0, double hi = 1.0) {
  std::vector<T> v(n);
  for (T &x : v) {
    x = static_cast<T>(rng.uniform(lo, hi));
  }
  return v;
}

/// Values bounded away from zero: |x| in [0.05, 1].
template <typename T> BasicTensor<T> kink_free_tensor(Shape s, Rng &rng) {
  BasicTensor<T> t(s);
  for (T &v : t.values()) {
    const double mag = rng.uniform(0.05, 1.0);
    v = static_cast<T>(rng.bernoulli(0.5) ? mag : -mag);
  }
  return t;
}

/// Every value distinct with spacing 0.05 in random order, so no max-pool
/// window is within 2h of a tie.
template <typename T> BasicTensor<T> spaced_tensor(Shape s, Rng &rng) {
  BasicTensor<T> t(s);
  std::vector<std::size_t> order(t.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    t[order[i]] = static_cast<T>(0.05 * static_cast<double>(i) - 0.025 * static_cast<double>(order.size()));
  }
  return t;
}

template <typename T> double weighted_sum(const BasicTensor<T> &y, const BasicTensor<T> &w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += static_cast<double>(w[i]) * static_cast<double>(y[i]);
  }
  return s;
}

/// Perturbs each coordinate of `x` in place, evaluating `loss` at x +- h.
template <typename T>
ErrorStats relative_errors(std::vector<T *> coords, const std::vector<T> &analytic, const std::function<double()> &loss) {
  const double h = Precision<T>::step;
  double worst = 0.0;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    T &x = *coords[i];
    const T saved = x;
    x = static_cast<T>(static_cast<double>(saved) + h);
    const double up = loss();
    x = static_cast<T>(static_cast<double>(saved) - h);
    const double down = loss();
    // The perturbation actually applied, after rounding to T.
    const double span = static_cast<double>(static_cast<T>(static_cast<double>(saved) + h)) -
                        static_cast<double>(static_cast<T>(static_cast<double>(saved) - h));
    x = saved;
    const double numeric = (up - down) / span;
    const double a = static_cast<double>(analytic[i]);
    const double denom = std::max({std::abs(a), std::abs(numeric), Precision<T>::floor});
    worst = std::max(worst, std::abs(a - numeric) / denom);
    diff2 += (a - numeric) * (a - numeric);
    a2 += a * a;
    n2 += numeric * numeric;
  }
  const double scale = std::sqrt(std::max(a2, n2));
  return {worst, scale > 0.0 ? std::sqrt(diff2) / scale : 0.0};
}

template <typename T> double score(const GradCheck &g) { return Precision<T>::norm_wise ? g.norm_rel : g.max_rel; }

template <typename T>
GradCheck make_check(std::string op, std::string wrt, std::uint64_t seed, std::vector<T *> coords,
                     const std::vector<T> &analytic, const std::function<double()> &loss) {
  const std::size_t n = coords.size();
  const ErrorStats e = relative_errors<T>(std::move(coords), analytic, loss);
  return {std::move(op), std::move(wrt), seed, e.max_rel, n, e.norm_rel};
}

template <typename T> std::vector<T *> pointers(std::vector<T> &v) {
  std::vector<T *> p;
  for (T &x : v) {
    p.push_back(&x);
  }
  return p;
}

template <typename T> std::vector<T *> pointers(BasicTensor<T> &t) {
  std::vector<T *> p;
  for (T &x : t.values()) {
    p.push_back(&x);
  }
  return p;
}

template <typename T> std::vector<T> as_vector(const BasicTensor<T> &t) {
  return std::vector<T>(t.values().begin(), t.values().end());
}

// ---------------------------------------------------------------------------

template <typename T> std::vector<GradCheck> check_conv2d(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t cin = 2 + rng.below(2);
  const std::size_t cout = 2 + rng.below(3);
  BasicTensor<T> x = random_tensor<T>(Shape{2, 5, 4, cin}, rng);
  std::vector<T> k = random_vector<T>(9 * cin * cout, rng, -0.5, 0.5);
  const auto kernel = [&] { return ConvKernel<T>{k, cin, cout}; };
  const BasicTensor<T> w = random_tensor<T>(Shape{2, 5, 4, cout}, rng);
  const auto grads = conv2d_backward(x, kernel(), w);
  const auto loss = [&] { return weighted_sum(conv2d(x, kernel()), w); };
  return {make_check<T>("conv2d", "input", seed, pointers(x), as_vector(grads.input), loss),
          make_check<T>("conv2d", "kernel", seed, pointers(k), grads.kernel, loss)};
}

template <typename T> std::vector<GradCheck> check_relu(std::uint64_t seed) {
  Rng rng(seed);
  BasicTensor<T> x = kink_free_tensor<T>(Shape{2, 3, 3, 4}, rng);
  const BasicTensor<T> w = random_tensor<T>(x.shape(), rng);
  const auto g = relu_backward(x, w);
  return {make_check<T>("relu", "input", seed, pointers(x), as_vector(g), [&] { return weighted_sum(relu(x), w); })};
}

template <typename T> std::vector<GradCheck> check_maxpool(std::uint64_t seed) {
  Rng rng(seed);
  BasicTensor<T> x = spaced_tensor<T>(Shape{2, 4, 6, 3}, rng);
  const auto fwd = maxpool2x2(x);
  const BasicTensor<T> w = random_tensor<T>(fwd.output.shape(), rng);
  const auto g = maxpool2x2_backward(x.shape(), fwd.argmax, w);
  return {make_check<T>("maxpool2x2", "input", seed, pointers(x), as_vector(g),
                        [&] { return weighted_sum(maxpool2x2(x).output, w); })};
}

template <typename T> std::vector<GradCheck> check_batchnorm(std::uint64_t seed, Phase phase) {
  Rng rng(seed);
  const std::size_t c = 3;
  BasicTensor<T> x = random_tensor<T>(Shape{3, 3, 2, c}, rng, -2.0, 2.0);
  std::vector<T> gamma = random_vector<T>(c, rng, 0.5, 1.5);
  std::vector<T> beta = random_vector<T>(c, rng);
  const std::vector<T> mean = random_vector<T>(c, rng, -0.5, 0.5);
  const std::vector<T> var = random_vector<T>(c, rng, 0.5, 2.0);
  const BatchNormConfig cfg;
  const auto params = [&] { return BatchNormParams<T>{gamma, beta, mean, var}; };
  const BasicTensor<T> w = random_tensor<T>(x.shape(), rng);
  const auto result = batchnorm(x, params(), cfg, phase);
  const auto g = batchnorm_backward(result, std::span<const T>(gamma), w);
  const auto loss = [&] { return weighted_sum(batchnorm(x, params(), cfg, phase).output, w); };
  const std::string name = phase == Phase::train ? "batchnorm(train)" : "batchnorm(infer)";
  return {make_check<T>(name, "input", seed, pointers(x), as_vector(g.input), loss),
          make_check<T>(name, "gamma", seed, pointers(gamma), g.gamma, loss),
          make_check<T>(name, "beta", seed, pointers(beta), g.beta, loss)};
}

template <typename T> std::vector<GradCheck> check_global_avg_pool(std::uint64_t seed) {
  Rng rng(seed);
  BasicTensor<T> x = random_tensor<T>(Shape{2, 3, 4, 5}, rng);
  const BasicTensor<T> w = random_tensor<T>(Shape{2, 1, 1, 5}, rng);
  const auto g = global_avg_pool_backward(x.shape(), w);
  return {make_check<T>("global_avg_pool", "input", seed, pointers(x), as_vector(g),
                        [&] { return weighted_sum(global_avg_pool(x), w); })};
}

template <typename T> std::vector<GradCheck> check_dense(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t din = 5 + rng.below(4);
  const std::size_t dout = 3 + rng.below(3);
  BasicTensor<T> x = random_tensor<T>(Shape{3, 1, 1, din}, rng);
  std::vector<T> wt = random_vector<T>(din * dout, rng);
  std::vector<T> b = random_vector<T>(dout, rng);
  const auto weights = [&] { return DenseWeights<T>{wt, b, din, dout}; };
  const BasicTensor<T> w = random_tensor<T>(Shape{3, 1, 1, dout}, rng);
  const auto g = dense_backward(x, weights(), w);
  const auto loss = [&] { return weighted_sum(dense(x, weights()), w); };
  return {make_check<T>("dense", "input", seed, pointers(x), as_vector(g.input), loss),
          make_check<T>("dense", "weights", seed, pointers(wt), g.weights, loss),
          make_check<T>("dense", "bias", seed, pointers(b), g.bias, loss)};
}

template <typename T> std::vector<GradCheck> check_dropout(std::uint64_t seed) {
  Rng rng(seed);
  BasicTensor<T> x = random_tensor<T>(Shape{2, 3, 3, 4}, rng);
  const BasicTensor<T> w = random_tensor<T>(x.shape(), rng);
  const double rate = 0.25 + 0.25 * rng.uniform();
  const std::uint64_t stream = rng.next_u64();
  // Every evaluation replays the same stream, so the mask is fixed.
  const auto run = [&] {
    Rng r(stream);
    return dropout(x, rate, ExecMode::train(r));
  };
  const auto g = dropout_backward(std::span<const T>(run().mask), w);
  return {make_check<T>("dropout(train)", "input", seed, pointers(x), as_vector(g),
                        [&] { return weighted_sum(run().output, w); })};
}

template <typename T> std::vector<GradCheck> check_softmax(std::uint64_t seed) {
  Rng rng(seed);
  BasicTensor<T> z = random_tensor<T>(Shape{3, 1, 1, 5}, rng, -2.0, 2.0);
  const BasicTensor<T> w = random_tensor<T>(z.shape(), rng);
  const auto g = softmax_backward(softmax(z), w);
  return {make_check<T>("softmax", "logits", seed, pointers(z), as_vector(g),
                        [&] { return weighted_sum(softmax(z), w); })};
}

/// Cross-entropy gradient p - q from the trainer against differences of
/// -sum q log softmax(z).
template <typename T> std::vector<GradCheck> check_cross_entropy(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t classes = 4 + rng.below(3);
  BasicTensor<T> z = random_tensor<T>(Shape{1, 1, 1, classes}, rng, -2.0, 2.0);
  const std::size_t target = rng.below(classes);
  const double smoothing = 0.1 * rng.uniform();
  const auto loss = [&] {
    const BasicTensor<T> p = softmax(z);
    double l = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double q = (c == target ? 1.0 - smoothing : 0.0) + smoothing / static_cast<double>(classes);
      l -= q * std::log(static_cast<double>(p[c]));
    }
    return l;
  };
  const BasicTensor<T> p = softmax(z);
  std::vector<float> pf(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    pf[c] = static_cast<float>(p[c]);
  }
  const CrossEntropy ce = cross_entropy(pf, target, smoothing);
  std::vector<T> analytic(ce.logit_grad.begin(), ce.logit_grad.end());
  return {make_check<T>("cross_entropy", "logits", seed, pointers(z), analytic, loss)};
}

template <typename T> std::vector<GradCheck> all_gradient_checks(std::uint64_t seed) {
  std::vector<GradCheck> out;
  const auto add = [&](std::vector<GradCheck> v) { out.insert(out.end(), v.begin(), v.end()); };
  add(check_conv2d<T>(seed));
  add(check_relu<T>(seed));
  add(check_maxpool<T>(seed));
  add(check_batchnorm<T>(seed, Phase::train));
  add(check_batchnorm<T>(seed, Phase::infer));
  add(check_global_avg_pool<T>(seed));
  add(check_dense<T>(seed));
  add(check_dropout<T>(seed));
  add(check_softmax<T>(seed));
  // The trainer's loss gradient exists in float only.
  if constexpr (std::is_same_v<T, float>) {
    add(check_cross_entropy<T>(seed));
  }
  return out;
}

} // namespace pd36::testing
