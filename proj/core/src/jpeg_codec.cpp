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

#include "mimicsr/jpeg_codec.hpp"

// clang-format off
#include <cstdio>
#include <jpeglib.h>
// clang-format on

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "mimicsr/error.hpp"

namespace mimicsr {
namespace {

[[noreturn]] void error_exit(j_common_ptr cinfo) {
  char buffer[JMSG_LENGTH_MAX];
  (*cinfo->err->format_message)(cinfo, buffer);
  throw DataError(std::string("libjpeg: ") + buffer);
}

void silent(j_common_ptr, int) {}

}  // namespace

Image jpeg_roundtrip(const Image& img, int quality) {
  MIMICSR_CHECK(quality >= 1 && quality <= 100, "jpeg_roundtrip: quality must be in [1, 100]");
  const int h = img.height(), w = img.width();
  std::vector<unsigned char> rgb(static_cast<size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        rgb[(static_cast<size_t>(y) * w + x) * 3 + c] =
            static_cast<unsigned char>(std::lround(std::clamp(img.at(c, y, x), 0.f, 1.f) * 255.f));

  unsigned char* encoded = nullptr;
  unsigned long encoded_size = 0;
  {
    jpeg_compress_struct cinfo{};
    jpeg_error_mgr jerr{};
    cinfo.err = jpeg_std_error(&jerr);
    jerr.error_exit = error_exit;
    jerr.emit_message = silent;
    jpeg_create_compress(&cinfo);
    try {
      jpeg_mem_dest(&cinfo, &encoded, &encoded_size);
      cinfo.image_width = static_cast<JDIMENSION>(w);
      cinfo.image_height = static_cast<JDIMENSION>(h);
      cinfo.input_components = 3;
      cinfo.in_color_space = JCS_RGB;
      jpeg_set_defaults(&cinfo);
      jpeg_set_quality(&cinfo, quality, TRUE);
      jpeg_start_compress(&cinfo, TRUE);
      while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = rgb.data() + static_cast<size_t>(cinfo.next_scanline) * w * 3;
        jpeg_write_scanlines(&cinfo, &row, 1);
      }
      jpeg_finish_compress(&cinfo);
    } catch (...) {
      jpeg_destroy_compress(&cinfo);
      std::free(encoded);
      throw;
    }
    jpeg_destroy_compress(&cinfo);
  }

  Image out(h, w);
  jpeg_decompress_struct dinfo{};
  jpeg_error_mgr jerr{};
  dinfo.err = jpeg_std_error(&jerr);
  jerr.error_exit = error_exit;
  jerr.emit_message = silent;
  jpeg_create_decompress(&dinfo);
  try {
    jpeg_mem_src(&dinfo, encoded, encoded_size);
    jpeg_read_header(&dinfo, TRUE);
    dinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&dinfo);
    std::vector<unsigned char> row(static_cast<size_t>(w) * 3);
    while (dinfo.output_scanline < dinfo.output_height) {
      const int y = static_cast<int>(dinfo.output_scanline);
      JSAMPROW ptr = row.data();
      jpeg_read_scanlines(&dinfo, &ptr, 1);
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c) out.at(c, y, x) = static_cast<float>(row[x * 3 + c]) / 255.f;
    }
    jpeg_finish_decompress(&dinfo);
  } catch (...) {
    jpeg_destroy_decompress(&dinfo);
    std::free(encoded);
    throw;
  }
  jpeg_destroy_decompress(&dinfo);
  std::free(encoded);
  return out;
}

}  // namespace mimicsr
