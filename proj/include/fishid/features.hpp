#pragma once

#include <array>
#include <cstddef>

#include "fishid/image.hpp"
#include "fishid/segment.hpp"

namespace fishid {

inline constexpr std::size_t kFeatureCount = 47;

// Frozen layout; serialized models depend on it.
inline constexpr int kFeatureLayoutVersion = 1;
inline constexpr std::size_t kSizeBegin = 0;
inline constexpr std::size_t kShapeBegin = 6;
inline constexpr std::size_t kColorBegin = 24;
inline constexpr std::size_t kGeometryBegin = 36;

// Every value is finite and lies in [0, 1].
using FeatureVector = std::array<double, kFeatureCount>;

enum class HeadSide { Left, Right };

// The bbox half holding more foreground pixels (ties go left). For odd
// widths the middle column belongs to neither half.
HeadSide find_head_side(const FishMask& mask);

struct TrianglePair {
  Point x_min, x_max, y_min, y_max;
  double area_up = 0;    // (x_min, x_max, y_min)
  double area_down = 0;  // (x_min, x_max, y_max)
  // Midpoint of the tied run along the other coordinate, per extreme.
  double x_min_mid = 0, x_max_mid = 0, y_min_mid = 0, y_max_mid = 0;
};

// Extreme contour points. Several points can share an extreme coordinate;
// the median of them by the other coordinate is taken.
TrianglePair contour_triangles(const Contour& contour);

double triangle_area(Point a, Point b, Point c) noexcept;

struct Vertex {
  double x = 0;
  double y = 0;
};

// Extreme points moved to the outer edge of their pixel (left edge of the
// leftmost pixel, top edge of the topmost, ...) and centred on their tied
// run. Spans measured between these scale with the shape instead of lagging
// by one pixel.
struct TriangleVertices {
  Vertex left, right, top, bottom;
};

TriangleVertices outer_vertices(const TrianglePair& t) noexcept;
double triangle_area(Vertex a, Vertex b, Vertex c) noexcept;
// min/max of the two areas; 1 when both are zero.
double triangle_similarity(double area_up, double area_down) noexcept;
// Interior angle at `apex`, radians; 0 for a degenerate triangle.
double apex_angle(Vertex apex, Vertex a, Vertex b) noexcept;

// Index layout:
//   0-5   size: area, width, height, perimeter, aspect, compactness
//   6-13  radial signature over eight 45 degree sectors
//   14-18 solidity, extent, eccentricity, tail fill, edge density
//   19-22 intensity std per bbox quadrant (TL, TR, BL, BR)
//   23    orientation
//   24-29 mean dorsum RGB, mean ventral RGB
//   30-32 dorsum/ventral contrast per channel
//   33-35 mean intensity, intensity std, color group count
//   36-42 triangle vertices (top, bottom), areas and similarity
//   43-46 eye position, mouth size, apex angle of the upper triangle
FeatureVector extract_features(const RgbImage& img, const IndexedImage& idx, const FishMask& mask,
                               const Contour& contour, const ColorGroups& groups);

}  // namespace fishid
