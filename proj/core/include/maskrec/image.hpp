#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace maskrec {

// Dense H x W x 3 float image, values nominally in [0,1], HWC layout.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> data;  // size = height * width * 3

  Image() = default;
  Image(int h, int w, float fill = 0.f)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {}

  float& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::size_t size() const { return data.size(); }
};

struct Point {
  float x = 0.f;
  float y = 0.f;
};

inline constexpr int kNumLandmarks = 68;
using Landmarks = std::array<Point, kNumLandmarks>;

// Bilinear resample with half-pixel centers; clamps source coordinates.
Image resize_bilinear(const Image& src, int out_h, int out_w);

// 3x3 box blur (replicated border), used by the unsharp-mask perturbation.
Image box_blur3(const Image& src);

void clamp01(Image& img);

// Binary PPM (P6, 8-bit). Values are quantized to round(v * 255); loading
// yields k / 255. Writing is byte-deterministic.
void save_ppm(const Image& img, const std::filesystem::path& path);
Image load_ppm(const std::filesystem::path& path);

}  // namespace maskrec
