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

#pragma once

// Static PNG line charts for Success/Precision curves and per-frame traces.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stmd {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::uint32_t rgb = 0x1f77b4;
};

struct ChartSpec {
  int width = 640;
  int height = 480;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  int x_ticks = 5;
  int y_ticks = 5;
};

/// RGB8 raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image(int w, int h, std::uint32_t fill = 0xffffff);
  void set(int x, int y, std::uint32_t color);
  std::uint32_t get(int x, int y) const;
};

/// Axes, grid and polylines; plot area inset by a fixed margin.
Image render_chart(const ChartSpec& spec, const std::vector<Series>& series);

/// Pixel of a data point inside the plot area of `spec`.
std::pair<int, int> chart_pixel(const ChartSpec& spec, double x, double y);

void write_png(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);

}  // namespace stmd
