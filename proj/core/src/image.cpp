#include "maskrec/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "maskrec/errors.hpp"

namespace maskrec {

Image resize_bilinear(const Image& src, int out_h, int out_w) {
  if (src.height <= 0 || src.width <= 0) throw ArgumentError("resize_bilinear: empty source");
  Image dst(out_h, out_w);
  const float sy = static_cast<float>(src.height) / out_h;
  const float sx = static_cast<float>(src.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    float fy = (y + 0.5f) * sy - 0.5f;
    fy = std::clamp(fy, 0.f, static_cast<float>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const float wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      float fx = (x + 0.5f) * sx - 0.5f;
      fx = std::clamp(fx, 0.f, static_cast<float>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const float wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const float top = src.at(y0, x0, c) * (1.f - wx) + src.at(y0, x1, c) * wx;
        const float bot = src.at(y1, x0, c) * (1.f - wx) + src.at(y1, x1, c) * wx;
        dst.at(y, x, c) = top * (1.f - wy) + bot * wy;
      }
    }
  }
  return dst;
}

Image box_blur3(const Image& src) {
  Image dst(src.height, src.width);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        float acc = 0.f;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = std::clamp(y + dy, 0, src.height - 1);
            const int xx = std::clamp(x + dx, 0, src.width - 1);
            acc += src.at(yy, xx, c);
          }
        }
        dst.at(y, x, c) = acc / 9.f;
      }
    }
  }
  return dst;
}

void clamp01(Image& img) {
  for (float& v : img.data) v = std::clamp(v, 0.f, 1.f);
}

void save_ppm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path.string());
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(img.at(y, x, c), 0.f, 1.f);
        row[static_cast<std::size_t>(x) * 3 + c] =
            static_cast<unsigned char>(std::lround(v * 255.f));
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("short write: " + path.string());
}

Image load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6") throw ParseError("not a P6 ppm: " + path.string());
  int w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  if (!in || w <= 0 || h <= 0 || maxval != 255)
    throw ParseError("bad ppm header: " + path.string());
  in.get();  // single whitespace after maxval
  Image img(h, w);
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw ParseError("truncated ppm: " + path.string());
  for (std::size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i] / 255.f;
  return img;
}

}  // namespace maskrec
