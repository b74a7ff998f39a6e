#pragma once

#include <cstddef>
#include <vector>

namespace pd36::testing {

struct Row {
  const char *name;
  const char *type;
  const char *shape;
  std::size_t params;
};

// Layer table of the published architecture at 224 x 224 x 3.
inline const std::vector<Row> &published_rows() {
  static const std::vector<Row> rows = {
      {"plant_augmentation", "Sequential", "(224, 224, 3)", 0},
      {"rescale_0_1", "Rescaling", "(224, 224, 3)", 0},
      {"conv2d", "Conv2D", "(224, 224, 32)", 864},
      {"batch_normalization", "BatchNormalization", "(224, 224, 32)", 128},
      {"activation", "Activation", "(224, 224, 32)", 0},
      {"conv2d_1", "Conv2D", "(224, 224, 32)", 9216},
      {"batch_normalization_1", "BatchNormalization", "(224, 224, 32)", 128},
      {"activation_1", "Activation", "(224, 224, 32)", 0},
      {"max_pooling2d", "MaxPooling2D", "(112, 112, 32)", 0},
      {"conv2d_2", "Conv2D", "(112, 112, 64)", 18432},
      {"batch_normalization_2", "BatchNormalization", "(112, 112, 64)", 256},
      {"activation_2", "Activation", "(112, 112, 64)", 0},
      {"conv2d_3", "Conv2D", "(112, 112, 64)", 36864},
      {"batch_normalization_3", "BatchNormalization", "(112, 112, 64)", 256},
      {"activation_3", "Activation", "(112, 112, 64)", 0},
      {"max_pooling2d_1", "MaxPooling2D", "(56, 56, 64)", 0},
      {"conv2d_4", "Conv2D", "(56, 56, 128)", 73728},
      {"batch_normalization_4", "BatchNormalization", "(56, 56, 128)", 512},
      {"activation_4", "Activation", "(56, 56, 128)", 0},
      {"conv2d_5", "Conv2D", "(56, 56, 128)", 147456},
      {"batch_normalization_5", "BatchNormalization", "(56, 56, 128)", 512},
      {"activation_5", "Activation", "(56, 56, 128)", 0},
      {"max_pooling2d_2", "MaxPooling2D", "(28, 28, 128)", 0},
      {"conv2d_6", "Conv2D", "(28, 28, 256)", 294912},
      {"batch_normalization_6", "BatchNormalization", "(28, 28, 256)", 1024},
      {"activation_6", "Activation", "(28, 28, 256)", 0},
      {"conv2d_7", "Conv2D", "(28, 28, 256)", 589824},
      {"batch_normalization_7", "BatchNormalization", "(28, 28, 256)", 1024},
      {"activation_7", "Activation", "(28, 28, 256)", 0},
      {"max_pooling2d_3", "MaxPooling2D", "(14, 14, 256)", 0},
      {"dropout", "Dropout", "(14, 14, 256)", 0},
      {"global_average_pooling2d", "GlobalAveragePooling2D", "256", 0},
      {"dense", "Dense", "256", 65792},
      {"dropout_1", "Dropout", "256", 0},
      {"predictions", "Dense", "38", 9766},
  };
  return rows;
}

} // namespace pd36::testing
