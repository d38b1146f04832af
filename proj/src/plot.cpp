// Copyright 2026 The STMD Tracker Authors
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

#include "stmd/plot.hpp"

#include "stmd/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace stmd {

namespace {

constexpr int kMargin = 40;
constexpr std::uint32_t kAxis = 0x000000;
constexpr std::uint32_t kGrid = 0xdddddd;

void line(Image& img, int x0, int y0, int x1, int y1, std::uint32_t c) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    img.set(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

}  // namespace

Image::Image(int w, int h, std::uint32_t fill) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
  if (w <= 0 || h <= 0) throw ArgumentError("image size must be positive");
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) set(x, y, fill);
  }
}

void Image::set(int x, int y, std::uint32_t color) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  auto* p = &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
  p[0] = static_cast<std::uint8_t>(color >> 16);
  p[1] = static_cast<std::uint8_t>(color >> 8);
  p[2] = static_cast<std::uint8_t>(color);
}

std::uint32_t Image::get(int x, int y) const {
  const auto* p = &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
  return (std::uint32_t{p[0]} << 16) | (std::uint32_t{p[1]} << 8) | p[2];
}

std::pair<int, int> chart_pixel(const ChartSpec& spec, double x, double y) {
  const double fx = (x - spec.x_min) / (spec.x_max - spec.x_min);
  const double fy = (y - spec.y_min) / (spec.y_max - spec.y_min);
  const int w = spec.width - 2 * kMargin;
  const int h = spec.height - 2 * kMargin;
  return {kMargin + static_cast<int>(std::lround(fx * w)), spec.height - kMargin - static_cast<int>(std::lround(fy * h))};
}

Image render_chart(const ChartSpec& spec, const std::vector<Series>& series) {
  if (spec.width <= 2 * kMargin || spec.height <= 2 * kMargin) throw ArgumentError("chart too small");
  if (!(spec.x_max > spec.x_min && spec.y_max > spec.y_min)) throw ArgumentError("chart range is empty");
  Image img(spec.width, spec.height);
  for (int i = 0; i <= spec.x_ticks; ++i) {
    const double x = spec.x_min + (spec.x_max - spec.x_min) * i / spec.x_ticks;
    const auto [px0, py0] = chart_pixel(spec, x, spec.y_min);
    const auto [px1, py1] = chart_pixel(spec, x, spec.y_max);
    line(img, px0, py0, px1, py1, kGrid);
    line(img, px0, py0, px0, py0 + 5, kAxis);
  }
  for (int i = 0; i <= spec.y_ticks; ++i) {
    const double y = spec.y_min + (spec.y_max - spec.y_min) * i / spec.y_ticks;
    const auto [px0, py0] = chart_pixel(spec, spec.x_min, y);
    const auto [px1, py1] = chart_pixel(spec, spec.x_max, y);
    line(img, px0, py0, px1, py1, kGrid);
    line(img, px0 - 5, py0, px0, py0, kAxis);
  }
  const auto [ox, oy] = chart_pixel(spec, spec.x_min, spec.y_min);
  const auto [ex, ey] = chart_pixel(spec, spec.x_max, spec.y_max);
  line(img, ox, oy, ex, oy, kAxis);
  line(img, ox, oy, ox, ey, kAxis);

  for (const Series& s : series) {
    if (s.x.size() != s.y.size()) throw ArgumentError("series x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const auto [px, py] = chart_pixel(spec, s.x[i], std::clamp(s.y[i], spec.y_min, spec.y_max));
      if (i == 0) {
        img.set(px, py, s.rgb);
      } else {
        const auto [qx, qy] =
            chart_pixel(spec, s.x[i - 1], std::clamp(s.y[i - 1], spec.y_min, spec.y_max));
        line(img, qx, qy, px, py, s.rgb);
      }
    }
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(&img.rgb[static_cast<std::size_t>(y) * img.width * 3]));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::filesystem::path& path) {
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&pi, path.c_str())) {
    throw FormatError(path.string() + ": " + pi.message);
  }
  pi.format = PNG_FORMAT_RGB;
  Image img(static_cast<int>(pi.width), static_cast<int>(pi.height));
  if (!png_image_finish_read(&pi, nullptr, img.rgb.data(), 0, nullptr)) {
    png_image_free(&pi);
    throw FormatError(path.string() + ": " + pi.message);
  }
  return img;
}

}  // namespace stmd
