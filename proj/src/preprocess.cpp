#include "fishid/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "fishid/error.hpp"

namespace fishid {

namespace {

constexpr const char* kStage = "preprocess";

struct Moments {
  double count = 0;
  double cx = 0;
  double cy = 0;
  double mu20 = 0;
  double mu02 = 0;
  double mu11 = 0;
};

Moments foreground_moments(const RgbImage& img, Rgb background) {
  Moments m;
  double sx = 0, sy = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.at(x, y) == background) continue;
      m.count += 1;
      sx += x;
      sy += y;
    }
  }
  if (m.count == 0) throw Error(ErrorKind::EmptyForeground, kStage, "no pixel differs from the background color");
  m.cx = sx / m.count;
  m.cy = sy / m.count;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.at(x, y) == background) continue;
      const double dx = x - m.cx;
      const double dy = y - m.cy;
      m.mu20 += dx * dx;
      m.mu02 += dy * dy;
      m.mu11 += dx * dy;
    }
  }
  return m;
}

}  // namespace

void validate(const PreprocessConfig& cfg) {
  if (!(cfg.background_tolerance >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kStage, "background tolerance must be >= 0");
  }
  if (cfg.median_radius < 0 || cfg.median_radius > 2) {
    throw Error(ErrorKind::InvalidArgument, kStage, "median radius must be 0, 1 or 2");
  }
}

namespace {

// 3x3 median over whole rows at once. Each channel is a padded plane; the nine
// shifted rows go through a fixed exchange network (Paeth's arrangement) with
// elementwise min/max, which the compiler turns into vector code.
RgbImage median3x3(const RgbImage& img) {
  const int w = img.width, h = img.height, pw = w + 2;
  std::array<std::vector<std::uint8_t>, 3> plane;
  for (auto& p : plane) p.resize(std::size_t(pw) * std::size_t(h + 2));
  for (int y = 0; y < h + 2; ++y) {
    const Rgb* src = &img.pixels[std::size_t(std::clamp(y - 1, 0, h - 1)) * w];
    for (int x = 0; x < pw; ++x) {
      const Rgb px = src[std::clamp(x - 1, 0, w - 1)];
      const std::size_t at = std::size_t(y) * pw + x;
      plane[0][at] = px.r;
      plane[1][at] = px.g;
      plane[2][at] = px.b;
    }
  }

  RgbImage out(w, h);
  std::array<std::vector<std::uint8_t>, 9> v;
  for (auto& row : v) row.resize(std::size_t(w));
  std::array<std::vector<std::uint8_t>, 3> med;
  for (auto& row : med) row.resize(std::size_t(w));
  const auto sort2 = [&](int a, int b) {
    std::uint8_t* pa = v[std::size_t(a)].data();
    std::uint8_t* pb = v[std::size_t(b)].data();
    for (int x = 0; x < w; ++x) {
      const std::uint8_t lo = std::min(pa[x], pb[x]);
      pb[x] = std::max(pa[x], pb[x]);
      pa[x] = lo;
    }
  };
  for (int y = 0; y < h; ++y) {
    Rgb* dst = &out.pixels[std::size_t(y) * w];
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < 9; ++k) {
        const std::uint8_t* src = &plane[std::size_t(c)][std::size_t(y + k / 3) * pw + std::size_t(k % 3)];
        std::copy(src, src + w, v[std::size_t(k)].begin());
      }
      sort2(1, 2); sort2(4, 5); sort2(7, 8); sort2(0, 1); sort2(3, 4); sort2(6, 7);
      sort2(1, 2); sort2(4, 5); sort2(7, 8); sort2(0, 3); sort2(5, 8); sort2(4, 7);
      sort2(3, 6); sort2(1, 4); sort2(2, 5); sort2(4, 7); sort2(4, 2); sort2(6, 4);
      sort2(4, 2);
      med[std::size_t(c)].swap(v[4]);
    }
    for (int x = 0; x < w; ++x) dst[x] = {med[0][std::size_t(x)], med[1][std::size_t(x)], med[2][std::size_t(x)]};
  }
  return out;
}

}  // namespace

RgbImage median_filter(const RgbImage& img, int radius) {
  if (radius < 0 || radius > 2) throw Error(ErrorKind::InvalidArgument, kStage, "median radius must be 0, 1 or 2");
  if (radius == 0) return img;
  if (radius == 1) return median3x3(img);

  // Copy with `radius` replicated pixels on every side, which is the same as
  // clamping coordinates. Pixels are packed into one word so that the common
  // all-equal window is a handful of integer compares.
  const auto pack = [](Rgb p) { return std::uint32_t(p.r) | std::uint32_t(p.g) << 8 | std::uint32_t(p.b) << 16; };
  const int pw = img.width + 2 * radius, ph = img.height + 2 * radius;
  std::vector<std::uint32_t> pad(std::size_t(pw) * std::size_t(ph));
  for (int y = 0; y < ph; ++y) {
    const int sy = std::clamp(y - radius, 0, img.height - 1);
    std::uint32_t* row = &pad[std::size_t(y) * pw];
    const Rgb* src = &img.pixels[std::size_t(sy) * img.width];
    for (int x = 0; x < radius; ++x) row[x] = pack(src[0]);
    for (int x = 0; x < img.width; ++x) row[x + radius] = pack(src[x]);
    for (int x = 0; x < radius; ++x) row[img.width + radius + x] = pack(src[img.width - 1]);
  }

  RgbImage out(img.width, img.height);
  const int side = 2 * radius + 1;
  const std::size_t n = std::size_t(side * side);
  const std::size_t mid = n / 2;
  std::array<std::uint8_t, 25> r{}, g{}, b{};
  for (int y = 0; y < img.height; ++y) {
    Rgb* dst = &out.pixels[std::size_t(y) * img.width];
    for (int x = 0; x < img.width; ++x) {
      const std::uint32_t centre = pad[std::size_t(y + radius) * pw + x + radius];
      std::uint32_t diff = 0;
      for (int dy = 0; dy < side; ++dy) {
        const std::uint32_t* row = &pad[std::size_t(y + dy) * pw + x];
        for (int dx = 0; dx < side; ++dx) diff |= row[dx] ^ centre;
      }
      if (diff == 0) {
        dst[x] = img.pixels[std::size_t(y) * img.width + x];
        continue;
      }
      std::size_t k = 0;
      for (int dy = 0; dy < side; ++dy) {
        const std::uint32_t* row = &pad[std::size_t(y + dy) * pw + x];
        for (int dx = 0; dx < side; ++dx, ++k) {
          r[k] = std::uint8_t(row[dx]);
          g[k] = std::uint8_t(row[dx] >> 8);
          b[k] = std::uint8_t(row[dx] >> 16);
        }
      }
      std::nth_element(r.begin(), r.begin() + mid, r.begin() + n);
      std::nth_element(g.begin(), g.begin() + mid, g.begin() + n);
      std::nth_element(b.begin(), b.begin() + mid, b.begin() + n);
      dst[x] = {r[mid], g[mid], b[mid]};
    }
  }
  return out;
}

UnifiedBackground unify_background(const RgbImage& img, const PreprocessConfig& cfg) {
  validate(cfg);
  if (img.width < 3 || img.height < 3) throw Error(ErrorKind::ImageTooSmall, kStage, "image must be at least 3x3");

  std::map<Rgb, std::size_t> border;
  for (int x = 0; x < img.width; ++x) {
    ++border[img.at(x, 0)];
    ++border[img.at(x, img.height - 1)];
  }
  for (int y = 1; y + 1 < img.height; ++y) {
    ++border[img.at(0, y)];
    ++border[img.at(img.width - 1, y)];
  }
  // std::map iterates in ascending color order, so the first maximum wins ties.
  Rgb background = border.begin()->first;
  std::size_t best = 0;
  for (const auto& [color, count] : border) {
    if (count > best) {
      best = count;
      background = color;
    }
  }

  UnifiedBackground out{img, background};
  const int beyond = squared_threshold_above(cfg.background_tolerance);
  for (Rgb& p : out.image.pixels) {
    if (squared_color_distance(p, background) < beyond) p = background;
  }
  return out;
}

double foreground_orientation(const RgbImage& img, Rgb background) {
  const Moments m = foreground_moments(img, background);
  return 0.5 * std::atan2(2.0 * m.mu11, m.mu20 - m.mu02);
}

RgbImage normalize_rotation(const RgbImage& img, Rgb background) {
  const Moments m = foreground_moments(img, background);
  const double theta = 0.5 * std::atan2(2.0 * m.mu11, m.mu20 - m.mu02);
  if (std::abs(theta) < kRotationSkipRadians) return img;

  const double c = std::cos(theta);
  const double s = std::sin(theta);
  RgbImage out(img.width, img.height, background);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double vx = x - m.cx;
      const double vy = y - m.cy;
      const auto sx = long(std::floor(m.cx + c * vx - s * vy + 0.5));
      const auto sy = long(std::floor(m.cy + s * vx + c * vy + 0.5));
      if (sx < 0 || sy < 0 || sx >= img.width || sy >= img.height) continue;
      out.at(x, y) = img.at(int(sx), int(sy));
    }
  }
  return out;
}

}  // namespace fishid
