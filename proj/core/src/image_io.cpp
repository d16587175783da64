// Copyright 2026 The mimicsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>

#include "mimicsr/error.hpp"
#include "mimicsr/image.hpp"

namespace mimicsr {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw DataError("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_error_fn(png_structp, png_const_charp msg) { throw DataError(std::string("libpng: ") + msg); }
void png_warning_fn(png_structp, png_const_charp) {}

void write_rgb8(const std::filesystem::path& path, int height, int width, const std::vector<unsigned char>& rgb) {
  auto f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  if (!png) throw DataError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<size_t>(y) * width * 3));
  }
  png_write_end(png, nullptr);
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
  auto f = open_file(path, "rb");
  std::array<unsigned char, 8> sig{};
  if (std::fread(sig.data(), 1, 8, f.get()) != 8 || png_sig_cmp(sig.data(), 0, 8) != 0) {
    throw DataError(path.string() + " is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  if (!png) throw DataError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  const bool sixteen = bit_depth == 16;
  if (sixteen) png_set_swap(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> buf(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = buf.data() + rowbytes * y;
  png_read_image(png, rows.data());

  Image img(height, width);
  const float scale = sixteen ? 1.f / 65535.f : 1.f / 255.f;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        unsigned v;
        if (sixteen) {
          const unsigned char* p = rows[y] + (x * 3 + c) * 2;
          v = p[0] | (p[1] << 8);
        } else {
          v = rows[y][x * 3 + c];
        }
        img.at(c, y, x) = static_cast<float>(v) * scale;
      }
    }
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  std::vector<unsigned char> rgb(img.plane_size() * 3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(img.at(c, y, x), 0.f, 1.f);
        rgb[(static_cast<size_t>(y) * img.width() + x) * 3 + c] = static_cast<unsigned char>(std::lround(v * 255.f));
      }
  write_rgb8(path, img.height(), img.width(), rgb);
}

void write_heatmap_png(const std::filesystem::path& path, const Plane& map, float vmax) {
  // Piecewise-linear approximation of viridis.
  static constexpr std::array<std::array<float, 3>, 5> kStops{{{0.267f, 0.005f, 0.329f},
                                                               {0.229f, 0.322f, 0.546f},
                                                               {0.128f, 0.567f, 0.551f},
                                                               {0.369f, 0.789f, 0.383f},
                                                               {0.993f, 0.906f, 0.144f}}};
  std::vector<unsigned char> rgb(map.size() * 3);
  const float inv = vmax > 0.f ? 1.f / vmax : 0.f;
  for (size_t i = 0; i < map.size(); ++i) {
    const float t = std::clamp(map.values[i] * inv, 0.f, 1.f) * 4.f;
    const int k = std::min(3, static_cast<int>(t));
    const float f = t - static_cast<float>(k);
    for (int c = 0; c < 3; ++c) {
      const float v = kStops[k][c] * (1.f - f) + kStops[k + 1][c] * f;
      rgb[i * 3 + c] = static_cast<unsigned char>(std::lround(v * 255.f));
    }
  }
  write_rgb8(path, map.height, map.width, rgb);
}

}  // namespace mimicsr
