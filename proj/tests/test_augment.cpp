#include <gtest/gtest.h>

#include <cmath>

#include "pd36/augment.hpp"
#include "support/gradcheck.hpp"

using namespace pd36;
using pd36::testing::random_tensor;

namespace {

Tensor ramp(std::size_t h, std::size_t w, std::size_t c) {
  Tensor t(Shape{1, h, w, c});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(i % 256);
  return t;
}

} // namespace

TEST(Augment, DefaultsMatchPublishedFactors) {
  const AugmentConfig c;
  EXPECT_EQ(c.flip_prob, 0.5);
  EXPECT_EQ(c.rotation_factor, 0.03);
  EXPECT_EQ(c.translation_factor, 0.02);
  EXPECT_EQ(c.zoom_factor, 0.05);
  EXPECT_EQ(c.contrast_factor, 0.1);
}

TEST(Augment, ValidateRejectsBadFactors) {
  AugmentConfig c;
  c.flip_prob = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.zoom_factor = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.zoom_factor = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(AugmentConfig::disabled().validate());
}

TEST(Augment, SampledDrawsStayInRange) {
  const AugmentConfig c;
  Rng rng(1);
  std::size_t flips = 0;
  const std::size_t trials = 4000;
  for (std::size_t i = 0; i < trials; ++i) {
    const AugmentDraw d = sample_augment(c, rng, 224, 200);
    flips += d.flip;
    EXPECT_LE(std::abs(d.angle_degrees), 10.8);
    EXPECT_LE(std::abs(d.dx), 0.02 * 200);
    EXPECT_LE(std::abs(d.dy), 0.02 * 224);
    EXPECT_GE(d.sx, 0.95);
    EXPECT_LE(d.sx, 1.05);
    EXPECT_GE(d.sy, 0.95);
    EXPECT_LE(d.sy, 1.05);
    EXPECT_GE(d.contrast, 0.9);
    EXPECT_LE(d.contrast, 1.1);
  }
  EXPECT_NEAR(static_cast<double>(flips) / trials, 0.5, 0.03);
}

TEST(Augment, DisabledDrawIsIdentity) {
  Rng rng(2);
  const AugmentDraw d = sample_augment(AugmentConfig::disabled(), rng, 16, 16);
  const Tensor x = ramp(16, 16, 3);
  EXPECT_EQ(augment_image(x, d, AugmentConfig::disabled()), x);
}

TEST(Flip, MirrorsColumnsAndIsAnInvolution) {
  const Tensor x(Shape{1, 1, 3, 1}, std::vector<float>{1, 2, 3});
  const Tensor f = flip_horizontal(x);
  EXPECT_EQ(std::vector<float>(f.values().begin(), f.values().end()), (std::vector<float>{3, 2, 1}));
  const Tensor r = ramp(5, 7, 3);
  EXPECT_EQ(flip_horizontal(flip_horizontal(r)), r);
}

TEST(Geometric, IdentityParametersCopy) {
  const Tensor x = ramp(9, 11, 3);
  EXPECT_EQ(apply_geometric(x, 0, 0, 0, 1, 1), x);
}

TEST(Geometric, IntegerShiftMovesContentWithEdgeFill) {
  const Tensor x(Shape{1, 1, 5, 1}, std::vector<float>{10, 20, 30, 40, 50});
  const Tensor right = apply_geometric(x, 0, 2, 0, 1, 1);
  EXPECT_EQ(std::vector<float>(right.values().begin(), right.values().end()),
            (std::vector<float>{10, 10, 10, 20, 30}));
  const Tensor left = apply_geometric(x, 0, -1, 0, 1, 1);
  EXPECT_EQ(std::vector<float>(left.values().begin(), left.values().end()),
            (std::vector<float>{20, 30, 40, 50, 50}));
}

TEST(Geometric, HalfTurnMirrorsBothAxes) {
  const Tensor x = ramp(6, 8, 2);
  const Tensor r = apply_geometric(x, 180.0, 0, 0, 1, 1);
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t xx = 0; xx < 8; ++xx)
      for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(r(0, y, xx, c), x(0, 5 - y, 7 - xx, c));
}

TEST(Geometric, OutputsAreSourcePixels) {
  Rng rng(3);
  const Tensor x = random_tensor<float>(Shape{1, 12, 12, 1}, rng, 0, 255);
  const Tensor r = apply_geometric(x, 7.3, 0.6, -1.2, 1.04, 0.96);
  for (float v : r.values()) {
    EXPECT_NE(std::find(x.values().begin(), x.values().end(), v), x.values().end());
  }
}

TEST(Contrast, PreservesChannelMeanAndScalesDeviation) {
  Tensor x(Shape{1, 2, 2, 1}, std::vector<float>{100, 110, 120, 130});
  const Tensor y = adjust_contrast(x, 1.1, 255.0f);
  EXPECT_NEAR(y[0], 115 - 15 * 1.1, 1e-4);
  EXPECT_NEAR(y[3], 115 + 15 * 1.1, 1e-4);
  double mean = 0;
  for (float v : y.values()) mean += v;
  EXPECT_NEAR(mean / 4, 115.0, 1e-4);
  EXPECT_EQ(adjust_contrast(x, 1.0, 255.0f), x);
}

TEST(Contrast, ClampsToValueRange) {
  const Tensor x(Shape{1, 1, 2, 1}, std::vector<float>{0, 255});
  const Tensor y = adjust_contrast(x, 1.5, 255.0f);
  EXPECT_EQ(y[0], 0.0f);
  EXPECT_EQ(y[1], 255.0f);
}

TEST(Batch, InferModeIsIdentity) {
  Rng rng(4);
  const Tensor x = random_tensor<float>(Shape{2, 8, 8, 3}, rng, 0, 255);
  EXPECT_EQ(augment_batch(x, AugmentConfig{}, ExecMode::infer()), x);
}

TEST(Batch, TrainModeSeededAndPerImage) {
  Rng rng(5);
  const Tensor one = random_tensor<float>(Shape{1, 16, 16, 3}, rng, 0, 255);
  const Tensor x = stack<float>(std::vector<Tensor>{one, one, one, one});
  Rng a(9), b(9);
  const Tensor ya = augment_batch(x, AugmentConfig{}, ExecMode::train(a));
  const Tensor yb = augment_batch(x, AugmentConfig{}, ExecMode::train(b));
  EXPECT_EQ(ya, yb);
  EXPECT_EQ(ya.shape(), x.shape());
  std::size_t distinct = 0;
  for (std::size_t n = 1; n < 4; ++n) distinct += !(ya.slice(n) == ya.slice(0));
  EXPECT_GT(distinct, 0u);
  for (float v : ya.values()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 255.0f);
  }
}
