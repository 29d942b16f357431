#pragma once

#include <cstdint>
#include <vector>

#include "fishid/image.hpp"

namespace fishid {

struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Point {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Largest 4-connected foreground component of an image.
struct FishMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0 or 1
  BoundingBox bbox;
  double cx = 0;  // centroid, image coordinates
  double cy = 0;
  std::size_t area = 0;

  bool test(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width && y < height && bits[std::size_t(y) * std::size_t(width) + std::size_t(x)] != 0;
  }
  // Foreground pixel with at least one background 4-neighbour, or on the image edge.
  bool is_boundary(int x, int y) const noexcept;
};

// Builds a FishMask (bbox, centroid, area) from raw bits; no connectivity filtering.
FishMask make_mask(int width, int height, std::vector<std::uint8_t> bits);

FishMask extract_mask(const RgbImage& img, Rgb background, double foreground_tolerance);

struct Contour {
  std::vector<Point> points;  // closed: last is an 8-neighbour of first
  double perimeter = 0;
};

// Moore-neighbour trace, clockwise on screen, from the first row-major pixel.
Contour trace_contour(const FishMask& mask);

struct Band {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;
  double mean_r = 0;
  double mean_g = 0;
  double mean_b = 0;
  std::size_t count = 0;
};

std::vector<Band> divide_segments(const FishMask& mask, const RgbImage& img, int k);

struct ColorGroups {
  std::size_t group_count = 0;
  std::vector<int> group_of;  // per image pixel; -1 outside the mask
  struct Mean {
    double r = 0, g = 0, b = 0;
  };
  std::vector<Mean> mean_color;
};

// Region growing: 4-adjacent foreground pixels within `tolerance` of each
// other share a group; groups are the maximal such connected sets.
ColorGroups group_by_color(const FishMask& mask, const RgbImage& img, double tolerance);

}  // namespace fishid
