#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "pd36/image.hpp"
#include "pd36/random.hpp"
#include "pd36/trainer.hpp"

namespace pd36::testing {

/// Small separable training set: each class owns a random coarse colour
/// template (blocks of extent/4 pixels), and every image is half template,
/// half uniform noise.
inline InMemoryDataset template_dataset(std::size_t classes, std::size_t per_class, std::size_t extent,
                                        std::uint64_t seed) {
  Rng rng(Rng::derive(seed, 999).next_u64());
  const std::size_t cells = 4;
  const std::size_t block = extent / cells;
  std::vector<std::vector<float>> templates(classes, std::vector<float>(cells * cells * 3));
  for (auto &t : templates) {
    for (float &v : t) {
      v = static_cast<float>(rng.uniform(0, 255));
    }
  }
  std::vector<Tensor> images;
  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      Tensor t(Shape{1, extent, extent, 3});
      for (std::size_t y = 0; y < extent; ++y) {
        for (std::size_t x = 0; x < extent; ++x) {
          for (std::size_t ch = 0; ch < 3; ++ch) {
            const float base = templates[c][((y / block) * cells + x / block) * 3 + ch];
            t(0, y, x, ch) = 0.5f * base + 0.5f * static_cast<float>(rng.uniform(0, 255));
          }
        }
      }
      images.push_back(std::move(t));
      labels.push_back(c);
    }
  }
  return InMemoryDataset(std::move(images), std::move(labels), classes);
}

inline Image8 random_image8(std::size_t width, std::size_t height, std::uint64_t seed) {
  Rng rng(seed);
  Image8 img{width, height, std::vector<std::uint8_t>(width * height * 3)};
  for (auto &v : img.rgb) {
    v = static_cast<std::uint8_t>(rng.below(256));
  }
  return img;
}

inline Image8 solid_image8(std::size_t width, std::size_t height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image8 img{width, height, {}};
  for (std::size_t i = 0; i < width * height; ++i) {
    img.rgb.insert(img.rgb.end(), {r, g, b});
  }
  return img;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
  explicit ScratchDir(const std::string &tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("pd36-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir &) = delete;
  ScratchDir &operator=(const ScratchDir &) = delete;
  const std::filesystem::path &path() const { return path_; }

private:
  static int &counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

/// root/<split>/<class>/img_<i>.png with per-class solid colours plus noise.
inline void write_png_tree(const std::filesystem::path &root, const std::string &split,
                           const std::vector<std::string> &classes, std::size_t per_class, std::size_t extent,
                           std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto dir = root / split / classes[c];
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < per_class; ++i) {
      Image8 img{extent, extent, std::vector<std::uint8_t>(extent * extent * 3)};
      for (std::size_t p = 0; p < extent * extent; ++p) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const int base = ch == c % 3 ? 200 : 40;
          img.rgb[p * 3 + ch] = static_cast<std::uint8_t>(base + static_cast<int>(rng.below(40)) - 20);
        }
      }
      write_file_bytes(dir / ("img_" + std::to_string(i) + ".png"), encode_png_rgb(img));
    }
  }
}

} // namespace pd36::testing
