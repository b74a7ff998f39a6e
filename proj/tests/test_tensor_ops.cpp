#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "pd36/ops.hpp"
#include "pd36/parallel.hpp"
#include "support/gradcheck.hpp"

using namespace pd36;
using pd36::testing::random_tensor;
using pd36::testing::random_vector;

namespace {

// Direct 7-loop cross-correlation with zero padding, accumulated in double.
std::vector<double> naive_conv(const Tensor &x, const std::vector<float> &k, std::size_t cout) {
  const Shape s = x.shape();
  std::vector<double> y(s.n * s.h * s.w * cout, 0.0);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t i = 0; i < s.h; ++i)
      for (std::size_t j = 0; j < s.w; ++j)
        for (std::size_t o = 0; o < cout; ++o) {
          double acc = 0.0;
          for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) {
              const long yi = static_cast<long>(i) + di;
              const long xj = static_cast<long>(j) + dj;
              if (yi < 0 || xj < 0 || yi >= static_cast<long>(s.h) || xj >= static_cast<long>(s.w)) continue;
              for (std::size_t c = 0; c < s.c; ++c) {
                const double kv = k[(((di + 1) * 3 + (dj + 1)) * s.c + c) * cout + o];
                acc += kv * x(n, static_cast<std::size_t>(yi), static_cast<std::size_t>(xj), c);
              }
            }
          y[((n * s.h + i) * s.w + j) * cout + o] = acc;
        }
  return y;
}

} // namespace

TEST(Tensor, RejectsMismatchedData) {
  EXPECT_THROW(Tensor(Shape{1, 2, 2, 3}, std::vector<float>(11)), ShapeError);
}

TEST(Tensor, SliceAndStackRoundTrip) {
  Rng rng(3);
  const Tensor t = random_tensor<float>(Shape{3, 2, 2, 2}, rng);
  std::vector<Tensor> parts{t.slice(0), t.slice(1), t.slice(2)};
  EXPECT_EQ(stack<float>(parts), t);
}

TEST(Conv2d, OnesKernelCountsNeighbours) {
  const Tensor x(Shape{1, 3, 3, 1}, 1.0f);
  const std::vector<float> k(9, 1.0f);
  const Tensor y = conv2d(x, ConvKernel<float>{k, 1, 1});
  const std::vector<float> expected{4, 6, 4, 6, 9, 6, 4, 6, 4};
  EXPECT_EQ(std::vector<float>(y.values().begin(), y.values().end()), expected);
}

TEST(Conv2d, MatchesNaiveOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const std::size_t cin = 1 + rng.below(5);
    const std::size_t cout = 1 + rng.below(9);
    const Tensor x = random_tensor<float>(Shape{2, 3 + rng.below(6), 3 + rng.below(6), cin}, rng);
    const std::vector<float> k = random_vector<float>(9 * cin * cout, rng);
    const Tensor y = conv2d(x, ConvKernel<float>{k, cin, cout});
    const std::vector<double> ref = naive_conv(x, k, cout);
    ASSERT_EQ(y.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_NEAR(y[i], ref[i], 1e-5) << "seed " << seed << " at " << i;
    }
  }
}

TEST(Conv2d, RejectsChannelMismatch) {
  const Tensor x(Shape{1, 4, 4, 3});
  const std::vector<float> k(9 * 2 * 4);
  EXPECT_THROW(conv2d(x, ConvKernel<float>{k, 2, 4}), ShapeError);
}

TEST(Conv2d, BitIdenticalAcrossThreadCounts) {
  Rng rng(11);
  const Tensor x = random_tensor<float>(Shape{2, 32, 32, 16}, rng);
  const std::vector<float> k = random_vector<float>(9 * 16 * 32, rng);
  const Tensor up = random_tensor<float>(Shape{2, 32, 32, 32}, rng);
  const std::size_t saved = num_threads();
  set_num_threads(1);
  const Tensor y1 = conv2d(x, ConvKernel<float>{k, 16, 32});
  const auto g1 = conv2d_backward(x, ConvKernel<float>{k, 16, 32}, up);
  set_num_threads(4);
  const Tensor y4 = conv2d(x, ConvKernel<float>{k, 16, 32});
  const auto g4 = conv2d_backward(x, ConvKernel<float>{k, 16, 32}, up);
  set_num_threads(saved);
  EXPECT_EQ(y1, y4);
  EXPECT_EQ(g1.input, g4.input);
  EXPECT_EQ(g1.kernel, g4.kernel);
}

TEST(Relu, ZeroesNegativesAndGradientAtZeroIsZero) {
  const Tensor x(Shape{1, 1, 1, 4}, std::vector<float>{-1.0f, 0.0f, 0.5f, 2.0f});
  const Tensor y = relu(x);
  EXPECT_EQ(std::vector<float>(y.values().begin(), y.values().end()), (std::vector<float>{0, 0, 0.5f, 2}));
  const Tensor g = relu_backward(x, Tensor(x.shape(), 1.0f));
  EXPECT_EQ(std::vector<float>(g.values().begin(), g.values().end()), (std::vector<float>{0, 0, 1, 1}));
}

TEST(MaxPool, HandExampleAndFirstWinsTies) {
  // 1 x 2 x 4 x 1
  const Tensor x(Shape{1, 2, 4, 1}, std::vector<float>{1, 5, 3, 3, 2, 4, 3, 3});
  const auto r = maxpool2x2(x);
  EXPECT_EQ(r.output.shape(), (Shape{1, 1, 2, 1}));
  EXPECT_EQ(r.output[0], 5.0f);
  EXPECT_EQ(r.output[1], 3.0f);
  EXPECT_EQ(r.argmax[0], 1u);
  EXPECT_EQ(r.argmax[1], 2u);
  const Tensor g = maxpool2x2_backward(x.shape(), r.argmax, Tensor(r.output.shape(), std::vector<float>{7, 9}));
  EXPECT_EQ(std::vector<float>(g.values().begin(), g.values().end()), (std::vector<float>{0, 7, 9, 0, 0, 0, 0, 0}));
}

TEST(MaxPool, RejectsOddExtent) {
  EXPECT_THROW(maxpool2x2(Tensor(Shape{1, 3, 4, 1})), ShapeError);
}

TEST(BatchNorm, TrainModeNormalizesPerChannel) {
  Rng rng(5);
  const Tensor x = random_tensor<float>(Shape{4, 3, 3, 2}, rng, -3.0, 5.0);
  const std::vector<float> gamma{1, 1}, beta{0, 0}, mean{0, 0}, var{1, 1};
  const BatchNormConfig cfg;
  const auto r = batchnorm(x, BatchNormParams<float>{gamma, beta, mean, var}, cfg, Phase::train);
  for (std::size_t c = 0; c < 2; ++c) {
    double m = 0, m2 = 0, ym = 0, yv = 0;
    const std::size_t count = x.size() / 2;
    for (std::size_t i = c; i < x.size(); i += 2) {
      m += x[i];
      m2 += static_cast<double>(x[i]) * x[i];
      ym += r.output[i];
    }
    m /= count;
    const double v = m2 / count - m * m;
    ym /= count;
    for (std::size_t i = c; i < x.size(); i += 2) {
      yv += (r.output[i] - ym) * (r.output[i] - ym);
    }
    yv /= count;
    EXPECT_NEAR(r.mean[c], m, 1e-5);
    EXPECT_NEAR(r.variance[c], v, 1e-4);
    EXPECT_NEAR(ym, 0.0, 1e-5);
    EXPECT_NEAR(yv, v / (v + 1e-3), 1e-4);
  }
}

TEST(BatchNorm, InferModeUsesMovingStatistics) {
  const Tensor x(Shape{1, 1, 1, 2}, std::vector<float>{3.0f, -1.0f});
  const std::vector<float> gamma{2, 0.5f}, beta{1, -1}, mean{1, 0}, var{4, 0.25f};
  const auto r = batchnorm(x, BatchNormParams<float>{gamma, beta, mean, var}, BatchNormConfig{}, Phase::infer);
  EXPECT_NEAR(r.output[0], 2.0 * (3.0 - 1.0) / std::sqrt(4.0 + 1e-3) + 1.0, 1e-6);
  EXPECT_NEAR(r.output[1], 0.5 * (-1.0) / std::sqrt(0.25 + 1e-3) - 1.0, 1e-6);
}

TEST(BatchNorm, MovingUpdateUsesMomentum) {
  const Tensor x(Shape{2, 1, 1, 1}, std::vector<float>{1.0f, 3.0f});
  const std::vector<float> gamma{1}, beta{0}, mean{10}, var{5};
  const BatchNormParams<float> p{gamma, beta, mean, var};
  const BatchNormConfig cfg;
  const auto r = batchnorm(x, p, cfg, Phase::train);
  const auto m = batchnorm_moving_update(p, r, cfg);
  // batch mean 2, biased variance 1
  EXPECT_NEAR(m.mean[0], 0.99 * 10 + 0.01 * 2, 1e-6);
  EXPECT_NEAR(m.variance[0], 0.99 * 5 + 0.01 * 1, 1e-6);
}

TEST(GlobalAvgPool, MeansEachChannel) {
  const Tensor x(Shape{1, 2, 1, 2}, std::vector<float>{1, 10, 3, 20});
  const Tensor y = global_avg_pool(x);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 1, 2}));
  EXPECT_FLOAT_EQ(y[0], 2.0f);
  EXPECT_FLOAT_EQ(y[1], 15.0f);
}

TEST(Dense, MatchesHandProduct) {
  const Tensor x(Shape{1, 1, 1, 2}, std::vector<float>{1, 2});
  const std::vector<float> w{1, 2, 3, 4, 5, 6}; // [2, 3]
  const std::vector<float> b{0.5f, 0, -1};
  const Tensor y = dense(x, DenseWeights<float>{w, b, 2, 3});
  EXPECT_EQ(std::vector<float>(y.values().begin(), y.values().end()), (std::vector<float>{9.5f, 12, 14}));
}

TEST(Dropout, InferIsIdentityAndDrawsNothing) {
  Rng rng(1);
  const Tensor x = random_tensor<float>(Shape{1, 4, 4, 4}, rng);
  const auto r = dropout(x, 0.4, ExecMode::infer());
  EXPECT_EQ(r.output, x);
  EXPECT_TRUE(r.mask.empty());
}

TEST(Dropout, TrainMaskIsInvertedAndMatchesRate) {
  const Tensor x(Shape{1, 100, 100, 4}, 1.0f);
  Rng rng(42);
  const auto r = dropout(x, 0.4, ExecMode::train(rng));
  std::size_t dropped = 0;
  double sum = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ASSERT_TRUE(r.mask[i] == 0.0f || std::abs(r.mask[i] - 1.0f / 0.6f) < 1e-6f);
    dropped += r.mask[i] == 0.0f;
    sum += r.output[i];
  }
  EXPECT_NEAR(static_cast<double>(dropped) / x.size(), 0.4, 0.01);
  EXPECT_NEAR(sum / x.size(), 1.0, 0.02);
}

TEST(Dropout, SameStreamSameMask) {
  const Tensor x(Shape{1, 8, 8, 2}, 1.0f);
  Rng a(9), b(9);
  EXPECT_EQ(dropout(x, 0.25, ExecMode::train(a)).mask, dropout(x, 0.25, ExecMode::train(b)).mask);
}

TEST(Dropout, TrainWithoutStreamThrows) {
  EXPECT_THROW(ExecMode::infer().rng(), ConfigError);
}

TEST(Softmax, RowsSumToOneAndShiftInvariant) {
  Rng rng(8);
  const Tensor z = random_tensor<float>(Shape{3, 1, 1, 6}, rng, -5, 5);
  Tensor shifted = z;
  for (float &v : shifted.values()) v += 100.0f;
  const Tensor p = softmax(z);
  const Tensor q = softmax(shifted);
  for (std::size_t n = 0; n < 3; ++n) {
    double s = 0;
    for (std::size_t c = 0; c < 6; ++c) {
      s += p[n * 6 + c];
      EXPECT_NEAR(p[n * 6 + c], q[n * 6 + c], 1e-6);
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Softmax, ExtremeLogitsStayFiniteAndPositive) {
  const Tensor z(Shape{1, 1, 1, 3}, std::vector<float>{1000.0f, -1000.0f, 0.0f});
  const Tensor p = softmax(z);
  EXPECT_FLOAT_EQ(p[0], 1.0f);
  EXPECT_GT(p[1], 0.0f);
  EXPECT_TRUE(all_finite(p));
}

TEST(Rescale, DividesBy255AndRejectsOutOfRange) {
  const Tensor x(Shape{1, 1, 1, 3}, std::vector<float>{0.0f, 127.5f, 255.0f});
  const Tensor y = rescale(x);
  EXPECT_FLOAT_EQ(y[0], 0.0f);
  EXPECT_FLOAT_EQ(y[1], 0.5f);
  EXPECT_FLOAT_EQ(y[2], 1.0f);
  EXPECT_THROW(rescale(Tensor(Shape{1, 1, 1, 1}, 256.0f)), InputError);
  EXPECT_THROW(rescale(Tensor(Shape{1, 1, 1, 1}, -0.5f)), InputError);
}
