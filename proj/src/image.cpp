#include "pd36/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <jpeglib.h>
#include <png.h>

#include "pd36/error.hpp"

namespace pd36 {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw InputError("failed reading " + path.string());
  }
  return bytes;
}

void write_file_bytes(const std::filesystem::path &path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error("failed writing " + path.string());
  }
}

namespace {

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) { return b.size() >= 3 && b[0] == 0xff && b[1] == 0xd8 && b[2] == 0xff; }

Decoded decode_png(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw FormatError("invalid PNG: " + msg);
  }
  Decoded out;
  out.format = "png";
  const png_uint_32 native = img.format;
  std::vector<std::string> notes;
  if ((native & PNG_FORMAT_FLAG_COLOR) == 0) {
    notes.push_back("gray -> rgb");
  }
  if ((native & PNG_FORMAT_FLAG_ALPHA) != 0) {
    notes.push_back("alpha dropped");
  }
  if ((native & PNG_FORMAT_FLAG_LINEAR) != 0) {
    notes.push_back("16-bit -> 8-bit");
  }
  if ((native & PNG_FORMAT_FLAG_COLORMAP) != 0) {
    notes.push_back("palette -> rgb");
  }
  for (const std::string &n : notes) {
    out.conversion += (out.conversion.empty() ? "" : ", ") + n;
  }
  img.format = PNG_FORMAT_RGB;
  out.image.width = img.width;
  out.image.height = img.height;
  out.image.rgb.resize(PNG_IMAGE_SIZE(img));
  // Alpha is composited onto black by the simplified API when background is null.
  if (!png_image_finish_read(&img, nullptr, out.image.rgb.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw FormatError("corrupt PNG: " + msg);
  }
  if (img.warning_or_error != 0 && (img.warning_or_error & PNG_IMAGE_ERROR) != 0) {
    throw FormatError(std::string("corrupt PNG: ") + img.message);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto *err = reinterpret_cast<JpegErrorManager *>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr, int) {}

Decoded decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_silent;
  err.message[0] = '\0';

  Decoded out;
  out.format = "jpeg";
  std::vector<std::uint8_t> row;
  if (setjmp(err.jump) != 0) {
    jpeg_destroy_decompress(&cinfo);
    throw FormatError(std::string("corrupt JPEG: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  const bool cmyk = cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK;
  if (cinfo.jpeg_color_space == JCS_GRAYSCALE) {
    out.conversion = "gray -> rgb";
  } else if (cmyk) {
    out.conversion = "cmyk -> rgb";
  }
  cinfo.out_color_space = cmyk ? JCS_CMYK : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t w = cinfo.output_width;
  const std::size_t h = cinfo.output_height;
  const std::size_t comps = static_cast<std::size_t>(cinfo.output_components);
  out.image.width = w;
  out.image.height = h;
  out.image.rgb.resize(w * h * 3);
  row.resize(w * comps);
  while (cinfo.output_scanline < cinfo.output_height) {
    const std::size_t y = cinfo.output_scanline;
    JSAMPROW ptr = row.data();
    jpeg_read_scanlines(&cinfo, &ptr, 1);
    std::uint8_t *dst = out.image.rgb.data() + y * w * 3;
    for (std::size_t x = 0; x < w; ++x) {
      if (cmyk) {
        // Adobe writes inverted CMYK.
        const unsigned k = row[x * 4 + 3];
        for (std::size_t c = 0; c < 3; ++c) {
          dst[x * 3 + c] = static_cast<std::uint8_t>((row[x * 4 + c] * k + 127) / 255);
        }
      } else {
        std::memcpy(dst + x * 3, row.data() + x * 3, 3);
      }
    }
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

} // namespace

Decoded decode_image(std::span<const std::uint8_t> bytes) {
  Decoded d;
  if (is_png(bytes)) {
    d = decode_png(bytes);
  } else if (is_jpeg(bytes)) {
    d = decode_jpeg(bytes);
  } else {
    throw FormatError("unrecognized image data (expected PNG or JPEG)");
  }
  if (d.image.width == 0 || d.image.height == 0) {
    throw FormatError("image has zero extent");
  }
  return d;
}

Decoded read_image_file(const std::filesystem::path &path) {
  try {
    return decode_image(read_file_bytes(path));
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

namespace {

std::vector<std::uint8_t> encode_png(std::size_t width, std::size_t height, png_uint_32 format,
                                     std::span<const std::uint8_t> pixels) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  if (pixels.size() != PNG_IMAGE_SIZE(img)) {
    throw ShapeError("PNG encode: pixel buffer does not match " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw Error(std::string("PNG encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw Error(std::string("PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

} // namespace

std::vector<std::uint8_t> encode_png_rgb(const Image8 &image) {
  return encode_png(image.width, image.height, PNG_FORMAT_RGB, image.rgb);
}

std::vector<std::uint8_t> encode_png_gray(std::size_t width, std::size_t height, std::span<const std::uint8_t> gray) {
  return encode_png(width, height, PNG_FORMAT_GRAY, gray);
}

std::vector<std::uint8_t> encode_jpeg_rgb(const Image8 &image, int quality) {
  if (image.rgb.size() != image.width * image.height * 3 || image.width == 0 || image.height == 0) {
    throw ShapeError("JPEG encode: RGB buffer does not match the image extent");
  }
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_silent;
  unsigned char *buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump) != 0) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw Error(std::string("JPEG encode failed: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width);
  cinfo.image_height = static_cast<JDIMENSION>(image.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto *row = const_cast<JSAMPLE *>(image.rgb.data() + cinfo.next_scanline * image.width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  return out;
}

Tensor image_to_tensor(const Image8 &image) {
  if (image.rgb.size() != image.width * image.height * 3) {
    throw ShapeError("RGB buffer does not match the image extent");
  }
  Tensor t(Shape{1, image.height, image.width, 3});
  std::transform(image.rgb.begin(), image.rgb.end(), t.data(), [](std::uint8_t v) { return static_cast<float>(v); });
  return t;
}

Image8 tensor_to_image(const Tensor &tensor) {
  const Shape s = tensor.shape();
  if (s.n < 1 || s.c != 3) {
    throw ShapeError("expected an RGB tensor, got " + s.to_string());
  }
  Image8 img;
  img.width = s.w;
  img.height = s.h;
  img.rgb.resize(s.image_size());
  const float *src = tensor.image(0);
  for (std::size_t i = 0; i < img.rgb.size(); ++i) {
    img.rgb[i] = static_cast<std::uint8_t>(std::clamp(std::lround(src[i]), 0L, 255L));
  }
  return img;
}

namespace {

struct Tap {
  std::size_t i0;
  std::size_t i1;
  float t;
};

std::vector<Tap> taps(std::size_t in, std::size_t out) {
  std::vector<Tap> result(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto i0 = static_cast<std::size_t>(std::floor(src));
    const std::size_t i1 = std::min(i0 + 1, in - 1);
    result[o] = {i0, i1, static_cast<float>(src - static_cast<double>(i0))};
  }
  return result;
}

} // namespace

Tensor resize_bilinear(const Tensor &images, std::size_t height, std::size_t width) {
  const Shape s = images.shape();
  if (height == 0 || width == 0 || s.h == 0 || s.w == 0) {
    throw ShapeError("bilinear resize needs non-empty extents, got " + s.to_string() + " -> " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  const std::vector<Tap> ys = taps(s.h, height);
  const std::vector<Tap> xs = taps(s.w, width);
  Tensor out(Shape{s.n, height, width, s.c});
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t y = 0; y < height; ++y) {
      const Tap &ty = ys[y];
      for (std::size_t x = 0; x < width; ++x) {
        const Tap &tx = xs[x];
        for (std::size_t c = 0; c < s.c; ++c) {
          const float a = images(n, ty.i0, tx.i0, c);
          const float b = images(n, ty.i0, tx.i1, c);
          const float d = images(n, ty.i1, tx.i0, c);
          const float e = images(n, ty.i1, tx.i1, c);
          const float top = a + (b - a) * tx.t;
          const float bottom = d + (e - d) * tx.t;
          out(n, y, x, c) = top + (bottom - top) * ty.t;
        }
      }
    }
  }
  return out;
}

Grid resize_bilinear(const Grid &grid, std::size_t height, std::size_t width) {
  const Tensor in(Shape{1, grid.height, grid.width, 1}, grid.values);
  const Tensor out = resize_bilinear(in, height, width);
  return Grid{height, width, out.storage()};
}

std::array<std::uint8_t, 3> jet(float value) {
  const float v = std::clamp(value, 0.0f, 1.0f);
  const auto channel = [v](float centre) {
    const float x = 1.5f - std::abs(4.0f * v - centre);
    return static_cast<std::uint8_t>(std::lround(255.0f * std::clamp(x, 0.0f, 1.0f)));
  };
  return {channel(3.0f), channel(2.0f), channel(1.0f)};
}

Image8 overlay_heatmap(const Image8 &base, const Grid &heat, float alpha) {
  if (heat.height != base.height || heat.width != base.width) {
    throw ShapeError("heatmap " + std::to_string(heat.height) + "x" + std::to_string(heat.width) +
                     " does not match image " + std::to_string(base.height) + "x" + std::to_string(base.width));
  }
  Image8 out = base;
  for (std::size_t i = 0; i < heat.values.size(); ++i) {
    const auto colour = jet(heat.values[i]);
    for (std::size_t c = 0; c < 3; ++c) {
      const float mixed = (1.0f - alpha) * static_cast<float>(base.rgb[i * 3 + c]) + alpha * colour[c];
      out.rgb[i * 3 + c] = static_cast<std::uint8_t>(std::clamp(std::lround(mixed), 0L, 255L));
    }
  }
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += table[(v >> 18) & 63];
    out += table[(v >> 12) & 63];
    out += table[(v >> 6) & 63];
    out += table[v & 63];
  }
  if (i < bytes.size()) {
    std::uint32_t v = bytes[i] << 16;
    if (i + 1 < bytes.size()) {
      v |= bytes[i + 1] << 8;
    }
    out += table[(v >> 18) & 63];
    out += table[(v >> 12) & 63];
    out += i + 1 < bytes.size() ? table[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

} // namespace pd36
