#pragma once

#include <utility>

#include "fishid/image.hpp"

namespace fishid {

struct PreprocessConfig {
  double background_tolerance = 30.0;  // Euclidean RGB distance, 0..441
  int median_radius = 1;               // 0, 1 or 2

  friend bool operator==(const PreprocessConfig&, const PreprocessConfig&) = default;
};

void validate(const PreprocessConfig& cfg);

// Per-channel median over a (2r+1)^2 window with clamped coordinates.
RgbImage median_filter(const RgbImage& img, int radius);

struct UnifiedBackground {
  RgbImage image;
  Rgb background;
};

// Background is the most frequent color on the 1-pixel border (ties go to
// the lexicographically smallest color); every pixel within the tolerance of
// it is snapped to it exactly.
UnifiedBackground unify_background(const RgbImage& img, const PreprocessConfig& cfg);

// Principal-axis angle of the pixels that differ from `background`, in
// radians, from second-order central moments.
double foreground_orientation(const RgbImage& img, Rgb background);

inline constexpr double kRotationSkipRadians = 0.5 * 3.14159265358979323846 / 180.0;

// Rotates the foreground about its centroid so its principal axis is
// horizontal. Nearest-neighbour sampling; holes are filled with background.
RgbImage normalize_rotation(const RgbImage& img, Rgb background);

}  // namespace fishid
