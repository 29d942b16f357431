#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace fishid {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend auto operator<=>(const Rgb&, const Rgb&) = default;
};

// Largest Euclidean distance between two 8-bit colors, sqrt(3 * 255^2).
inline constexpr double kMaxColorDistance = 441.6729559300637;

inline double color_distance(Rgb a, Rgb b) noexcept {
  const double dr = double(a.r) - double(b.r);
  const double dg = double(a.g) - double(b.g);
  const double db = double(a.b) - double(b.b);
  return std::sqrt(dr * dr + dg * dg + db * db);
}

inline int squared_color_distance(Rgb a, Rgb b) noexcept {
  const int dr = int(a.r) - int(b.r);
  const int dg = int(a.g) - int(b.g);
  const int db = int(a.b) - int(b.b);
  return dr * dr + dg * dg + db * db;
}

// Smallest integer d2 with sqrt(d2) > tol, so that for any two colors
// color_distance(a, b) > tol  <=>  squared_color_distance(a, b) >= result.
inline int squared_threshold_above(double tol) noexcept {
  if (!(tol >= 0.0)) return 0;
  if (tol >= kMaxColorDistance) return 3 * 255 * 255 + 1;
  int t = int(std::floor(tol * tol));
  while (t > 0 && std::sqrt(double(t - 1)) > tol) --t;
  while (!(std::sqrt(double(t)) > tol)) ++t;
  return t;
}

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;  // row-major

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {})
      : width(w), height(h), pixels(std::size_t(w) * std::size_t(h), fill) {}

  std::size_t size() const noexcept { return pixels.size(); }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }
  Rgb& at(int x, int y) { return pixels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
  const Rgb& at(int x, int y) const { return pixels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// 0 = black ... 255 = white intensity category per pixel.
struct IndexedImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> index;

  std::uint8_t at(int x, int y) const { return index[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }

  friend bool operator==(const IndexedImage&, const IndexedImage&) = default;
};

}  // namespace fishid
