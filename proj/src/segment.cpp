#include "fishid/segment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "fishid/error.hpp"

namespace fishid {

namespace {

constexpr const char* kStage = "segment";

// Clockwise on screen (y grows downward), starting west.
constexpr std::array<Point, 8> kRing = {{{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

int ring_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i) {
    if (kRing[std::size_t(i)].x == dx && kRing[std::size_t(i)].y == dy) return i;
  }
  return -1;
}

std::size_t flat(int x, int y, int width) { return std::size_t(y) * std::size_t(width) + std::size_t(x); }

}  // namespace

bool FishMask::is_boundary(int x, int y) const noexcept {
  if (!test(x, y)) return false;
  if (x == 0 || y == 0 || x == width - 1 || y == height - 1) return true;
  return !test(x - 1, y) || !test(x + 1, y) || !test(x, y - 1) || !test(x, y + 1);
}

FishMask make_mask(int width, int height, std::vector<std::uint8_t> bits) {
  FishMask m;
  m.width = width;
  m.height = height;
  m.bits = std::move(bits);
  int x_min = width, y_min = height, x_max = -1, y_max = -1;
  std::uint64_t sx = 0, sy = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (!m.bits[flat(x, y, width)]) continue;
      ++m.area;
      sx += std::uint64_t(x);
      sy += std::uint64_t(y);
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (m.area == 0) throw Error(ErrorKind::EmptyForeground, kStage, "mask has no foreground pixels");
  m.bbox = {x_min, y_min, x_max - x_min + 1, y_max - y_min + 1};
  m.cx = double(sx) / double(m.area);
  m.cy = double(sy) / double(m.area);
  return m;
}

FishMask extract_mask(const RgbImage& img, Rgb background, double foreground_tolerance) {
  if (!(foreground_tolerance > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kStage, "foreground tolerance must be > 0");
  }
  const std::size_t n = img.size();
  std::vector<std::uint8_t> fg(n, 0);
  const int beyond = squared_threshold_above(foreground_tolerance);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    fg[i] = squared_color_distance(img.pixels[i], background) >= beyond;
    any = any || fg[i];
  }
  if (!any) throw Error(ErrorKind::EmptyForeground, kStage, "no pixel is farther than the tolerance from the background");

  // Components are labelled in row-major order of their first pixel, so a
  // strict '>' keeps the earliest component among equal-sized ones.
  std::vector<int> label(n, -1);
  std::vector<Point> stack;
  int best_label = -1;
  std::size_t best_size = 0;
  int next_label = 0;
  const int w = img.width, h = img.height;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!fg[seed] || label[seed] >= 0) continue;
    const int current = next_label++;
    std::size_t size = 0;
    label[seed] = current;
    stack.push_back({int(seed % std::size_t(w)), int(seed / std::size_t(w))});
    while (!stack.empty()) {
      const Point p = stack.back();
      stack.pop_back();
      ++size;
      const auto visit = [&](int nx, int ny) {
        const std::size_t j = flat(nx, ny, w);
        if (fg[j] && label[j] < 0) {
          label[j] = current;
          stack.push_back({nx, ny});
        }
      };
      if (p.x > 0) visit(p.x - 1, p.y);
      if (p.x + 1 < w) visit(p.x + 1, p.y);
      if (p.y > 0) visit(p.x, p.y - 1);
      if (p.y + 1 < h) visit(p.x, p.y + 1);
    }
    if (size > best_size) {
      best_size = size;
      best_label = current;
    }
  }

  std::vector<std::uint8_t> bits(n, 0);
  for (std::size_t i = 0; i < n; ++i) bits[i] = label[i] == best_label ? 1 : 0;
  return make_mask(img.width, img.height, std::move(bits));
}

Contour trace_contour(const FishMask& mask) {
  if (mask.area == 0) throw Error(ErrorKind::EmptyForeground, kStage, "cannot trace an empty mask");

  Point start{-1, -1};
  for (int y = mask.bbox.y0; y < mask.bbox.y0 + mask.bbox.h && start.x < 0; ++y) {
    for (int x = mask.bbox.x0; x < mask.bbox.x0 + mask.bbox.w; ++x) {
      if (mask.test(x, y)) {
        start = {x, y};
        break;
      }
    }
  }

  Contour contour;
  contour.points.push_back(start);
  Point cur = start;
  int backtrack = 0;  // west of the first row-major pixel is always background
  bool have_first = false;
  Point first_step{};
  const std::size_t guard = 4 * mask.area + 16;
  for (std::size_t iter = 0; iter < guard; ++iter) {
    bool found = false;
    Point next{};
    int next_backtrack = 0;
    for (int i = 1; i <= 8; ++i) {
      const int d = (backtrack + i) % 8;
      const Point q{cur.x + kRing[std::size_t(d)].x, cur.y + kRing[std::size_t(d)].y};
      if (!mask.test(q.x, q.y)) continue;
      const int prev = (backtrack + i - 1) % 8;
      const Point b{cur.x + kRing[std::size_t(prev)].x, cur.y + kRing[std::size_t(prev)].y};
      next = q;
      next_backtrack = ring_index(b.x - q.x, b.y - q.y);
      found = true;
      break;
    }
    if (!found) break;  // isolated pixel
    if (!have_first) {
      have_first = true;
      first_step = next;
    } else if (cur == start && next == first_step) {
      contour.points.pop_back();  // `start` was appended again on return
      break;
    }
    cur = next;
    backtrack = next_backtrack;
    contour.points.push_back(cur);
  }

  const std::size_t m = contour.points.size();
  if (m > 1) {
    for (std::size_t i = 0; i < m; ++i) {
      const Point a = contour.points[i];
      const Point b = contour.points[(i + 1) % m];
      const bool diagonal = a.x != b.x && a.y != b.y;
      contour.perimeter += diagonal ? std::sqrt(2.0) : 1.0;
    }
  }
  return contour;
}

std::vector<Band> divide_segments(const FishMask& mask, const RgbImage& img, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, kStage, "segment count must be >= 1");
  if (img.width != mask.width || img.height != mask.height) {
    throw Error(ErrorKind::InconsistentInputs, kStage, "image and mask dimensions differ");
  }
  const int w = mask.bbox.w;
  const int base = std::max(1, w / k);
  std::vector<Band> bands(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const int start = std::min(i * base, w);
    const int width = i == k - 1 ? w - start : std::min(base, w - start);
    Band& band = bands[std::size_t(i)];
    band.x0 = mask.bbox.x0 + start;
    band.y0 = mask.bbox.y0;
    band.w = width;
    band.h = mask.bbox.h;
    double r = 0, g = 0, b = 0;
    for (int y = band.y0; y < band.y0 + band.h; ++y) {
      for (int x = band.x0; x < band.x0 + band.w; ++x) {
        if (!mask.test(x, y)) continue;
        const Rgb p = img.at(x, y);
        r += p.r;
        g += p.g;
        b += p.b;
        ++band.count;
      }
    }
    if (band.count > 0) {
      band.mean_r = r / double(band.count);
      band.mean_g = g / double(band.count);
      band.mean_b = b / double(band.count);
    }
  }
  return bands;
}

ColorGroups group_by_color(const FishMask& mask, const RgbImage& img, double tolerance) {
  if (!(tolerance >= 0.0)) throw Error(ErrorKind::InvalidArgument, kStage, "color tolerance must be >= 0");
  if (img.width != mask.width || img.height != mask.height) {
    throw Error(ErrorKind::InconsistentInputs, kStage, "image and mask dimensions differ");
  }
  ColorGroups groups;
  groups.group_of.assign(img.size(), -1);
  struct Sum {
    double r = 0, g = 0, b = 0;
    std::size_t n = 0;
  };
  std::vector<Sum> sums;
  std::vector<Point> stack;
  const int beyond = squared_threshold_above(tolerance);
  const int w = img.width, h = img.height;
  for (std::size_t seed = 0; seed < img.size(); ++seed) {
    if (!mask.bits[seed] || groups.group_of[seed] >= 0) continue;
    const int id = int(sums.size());
    Sum s;
    groups.group_of[seed] = id;
    stack.push_back({int(seed % std::size_t(w)), int(seed / std::size_t(w))});
    while (!stack.empty()) {
      const Point q = stack.back();
      stack.pop_back();
      const Rgb p = img.pixels[flat(q.x, q.y, w)];
      s.r += p.r;
      s.g += p.g;
      s.b += p.b;
      ++s.n;
      const auto visit = [&](int nx, int ny) {
        const std::size_t j = flat(nx, ny, w);
        if (!mask.bits[j] || groups.group_of[j] >= 0) return;
        if (squared_color_distance(p, img.pixels[j]) >= beyond) return;
        groups.group_of[j] = id;
        stack.push_back({nx, ny});
      };
      if (q.x > 0) visit(q.x - 1, q.y);
      if (q.x + 1 < w) visit(q.x + 1, q.y);
      if (q.y > 0) visit(q.x, q.y - 1);
      if (q.y + 1 < h) visit(q.x, q.y + 1);
    }
    sums.push_back(s);
  }
  groups.group_count = sums.size();
  groups.mean_color.reserve(sums.size());
  for (const Sum& s : sums) {
    groups.mean_color.push_back({s.r / double(s.n), s.g / double(s.n), s.b / double(s.n)});
  }
  return groups;
}

}  // namespace fishid
