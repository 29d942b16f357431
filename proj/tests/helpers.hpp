#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "fishid/image.hpp"
#include "fishid/segment.hpp"

namespace testutil {

inline constexpr fishid::Rgb kBlue{0, 0, 255};
inline constexpr fishid::Rgb kRed{255, 0, 0};
inline constexpr fishid::Rgb kWhite{255, 255, 255};

inline void fill_rect(fishid::RgbImage& img, int x0, int y0, int w, int h, fishid::Rgb c) {
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) img.at(x, y) = c;
}

// Pixel centres inside the circle.
inline void fill_disk(fishid::RgbImage& img, double cx, double cy, double r, fishid::Rgb c) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (std::hypot(x + 0.5 - cx, y + 0.5 - cy) <= r) img.at(x, y) = c;
}

// Pixel centres inside the ellipse rotated by `angle` radians.
inline void fill_ellipse(fishid::RgbImage& img, double cx, double cy, double a, double b, double angle,
                         fishid::Rgb c) {
  const double cs = std::cos(angle), sn = std::sin(angle);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      const double u = (dx * cs + dy * sn) / a, v = (-dx * sn + dy * cs) / b;
      if (u * u + v * v <= 1.0) img.at(x, y) = c;
    }
  }
}

inline fishid::FishMask mask_of(const fishid::RgbImage& img, fishid::Rgb bg = kBlue) {
  return fishid::extract_mask(img, bg, 50.0);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("fishid_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
