#pragma once

#include <cstddef>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pd36/tensor.hpp"

namespace pd36 {

/// Interleaved 8-bit RGB pixels, row-major.
struct Image8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;
};

struct Decoded {
  Image8 image;
  /// "png" or "jpeg".
  std::string format;
  /// Non-empty when the source was not 8-bit RGB, e.g. "gray -> rgb".
  std::string conversion;
};

/// PNG or JPEG, chosen by signature. FormatError on anything else or on
/// corrupt data.
Decoded decode_image(std::span<const std::uint8_t> bytes);
Decoded read_image_file(const std::filesystem::path &path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path &path);
void write_file_bytes(const std::filesystem::path &path, std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png_rgb(const Image8 &image);
std::vector<std::uint8_t> encode_png_gray(std::size_t width, std::size_t height, std::span<const std::uint8_t> gray);
std::vector<std::uint8_t> encode_jpeg_rgb(const Image8 &image, int quality = 90);

/// 1 x H x W x 3 float tensor holding the 8-bit values unchanged.
Tensor image_to_tensor(const Image8 &image);
/// Rounds and clamps to [0, 255]; batch entry 0.
Image8 tensor_to_image(const Tensor &tensor);

/// Single-channel float grid, row-major.
struct Grid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;

  float at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
  float &at(std::size_t y, std::size_t x) { return values[y * width + x]; }
};

/// Half-pixel-centre bilinear resampling with edge clamping. Computed as
/// a + (b - a) * t so constant regions stay exact.
Tensor resize_bilinear(const Tensor &images, std::size_t height, std::size_t width);
Grid resize_bilinear(const Grid &grid, std::size_t height, std::size_t width);

/// Jet colormap of a value in [0, 1].
std::array<std::uint8_t, 3> jet(float value);

/// (1 - alpha) * base + alpha * jet(heat); the grid must match the image extent.
Image8 overlay_heatmap(const Image8 &base, const Grid &heat, float alpha = 0.4f);

std::string base64_encode(std::span<const std::uint8_t> bytes);

} // namespace pd36
