#include "fishid/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fishid/error.hpp"

namespace fishid {

namespace {

constexpr const char* kStage = "features";

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double cross(Point o, Point a, Point b) {
  return double(a.x - o.x) * double(b.y - o.y) - double(a.y - o.y) * double(b.x - o.x);
}

// Area of the convex hull of the unit squares of the given pixels.
double pixel_hull_area(const std::vector<Point>& pixels) {
  std::vector<Point> corners;
  corners.reserve(pixels.size() * 4);
  for (const Point p : pixels) {
    corners.push_back({p.x, p.y});
    corners.push_back({p.x + 1, p.y});
    corners.push_back({p.x, p.y + 1});
    corners.push_back({p.x + 1, p.y + 1});
  }
  std::sort(corners.begin(), corners.end(), [](Point a, Point b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  corners.erase(std::unique(corners.begin(), corners.end()), corners.end());
  if (corners.size() < 3) return 0.0;

  std::vector<Point> hull(2 * corners.size());
  std::size_t k = 0;
  for (const Point p : corners) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = corners.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], corners[i]) <= 0) --k;
    hull[k++] = corners[i];
  }
  hull.resize(k - 1);
  double twice = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point a = hull[i];
    const Point b = hull[(i + 1) % hull.size()];
    twice += double(a.x) * double(b.y) - double(b.x) * double(a.y);
  }
  return std::abs(twice) / 2.0;
}

// Picks among points sharing an extreme coordinate the median by the other one.
template <typename Key, typename Other>
Point extreme(const std::vector<Point>& pts, Key key, bool want_min, Other other, double& mid) {
  int best = key(pts.front());
  for (const Point p : pts) best = want_min ? std::min(best, key(p)) : std::max(best, key(p));
  std::vector<Point> tied;
  for (const Point p : pts) {
    if (key(p) == best) tied.push_back(p);
  }
  std::sort(tied.begin(), tied.end(), [&](Point a, Point b) { return other(a) < other(b); });
  tied.erase(std::unique(tied.begin(), tied.end()), tied.end());
  mid = 0.5 * (other(tied.front()) + other(tied.back()));
  return tied[(tied.size() - 1) / 2];
}

struct Stats {
  double sum = 0;
  double sum_sq = 0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / double(n) : 0.0; }
  double stddev() const {
    if (n == 0) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, sum_sq / double(n) - m * m));
  }
};

int fraction_columns(int w, double fraction) { return std::max(1, int(std::lround(fraction * w))); }

}  // namespace

HeadSide find_head_side(const FishMask& mask) {
  const BoundingBox& b = mask.bbox;
  const int left_end = b.x0 + b.w / 2;
  const int right_begin = b.x0 + (b.w + 1) / 2;
  std::size_t left = 0, right = 0;
  for (int y = b.y0; y < b.y0 + b.h; ++y) {
    for (int x = b.x0; x < b.x0 + b.w; ++x) {
      if (!mask.test(x, y)) continue;
      if (x < left_end) ++left;
      if (x >= right_begin) ++right;
    }
  }
  return right > left ? HeadSide::Right : HeadSide::Left;
}

double triangle_area(Point a, Point b, Point c) noexcept { return std::abs(cross(a, b, c)) / 2.0; }

double triangle_area(Vertex a, Vertex b, Vertex c) noexcept {
  return std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)) / 2.0;
}

double triangle_similarity(double area_up, double area_down) noexcept {
  const double big = std::max(area_up, area_down);
  return big > 0 ? std::min(area_up, area_down) / big : 1.0;
}

double apex_angle(Vertex apex, Vertex a, Vertex b) noexcept {
  const double ux = a.x - apex.x, uy = a.y - apex.y;
  const double vx = b.x - apex.x, vy = b.y - apex.y;
  const double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
  if (nu == 0 || nv == 0) return 0.0;
  return std::acos(std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0));
}

TriangleVertices outer_vertices(const TrianglePair& t) noexcept {
  return {{double(t.x_min.x), t.x_min_mid + 0.5},
          {t.x_max.x + 1.0, t.x_max_mid + 0.5},
          {t.y_min_mid + 0.5, double(t.y_min.y)},
          {t.y_max_mid + 0.5, t.y_max.y + 1.0}};
}

TrianglePair contour_triangles(const Contour& contour) {
  const auto& pts = contour.points;
  const auto px = [](Point p) { return p.x; };
  const auto py = [](Point p) { return p.y; };
  TrianglePair t;
  t.x_min = extreme(pts, px, true, py, t.x_min_mid);
  t.x_max = extreme(pts, px, false, py, t.x_max_mid);
  t.y_min = extreme(pts, py, true, px, t.y_min_mid);
  t.y_max = extreme(pts, py, false, px, t.y_max_mid);
  t.area_up = triangle_area(t.x_min, t.x_max, t.y_min);
  t.area_down = triangle_area(t.x_min, t.x_max, t.y_max);
  return t;
}

FeatureVector extract_features(const RgbImage& img, const IndexedImage& idx, const FishMask& mask,
                               const Contour& contour, const ColorGroups& groups) {
  if (img.width != mask.width || img.height != mask.height || idx.width != img.width || idx.height != img.height ||
      idx.index.size() != img.size() || mask.bits.size() != img.size() || groups.group_of.size() != img.size()) {
    throw Error(ErrorKind::InconsistentInputs, kStage, "image, indexed image, mask and groups must share dimensions");
  }
  if (mask.area == 0 || contour.points.empty()) {
    throw Error(ErrorKind::InconsistentInputs, kStage, "mask and contour must be nonempty");
  }

  using std::numbers::pi;
  FeatureVector f{};
  const BoundingBox& bb = mask.bbox;
  const double W = img.width, H = img.height;
  const double w = bb.w, h = bb.h;
  const double A = double(mask.area);
  const double P = contour.perimeter;

  // All geometry below uses bbox-local integer coordinates, which makes the
  // result bit-identical under translation.
  std::vector<Point> fg;
  fg.reserve(mask.area);
  for (int y = 0; y < bb.h; ++y) {
    for (int x = 0; x < bb.w; ++x) {
      if (mask.test(bb.x0 + x, bb.y0 + y)) fg.push_back({x, y});
    }
  }
  std::vector<Point> boundary;
  boundary.reserve(contour.points.size());
  for (const Point p : contour.points) boundary.push_back({p.x - bb.x0, p.y - bb.y0});

  std::int64_t sx = 0, sy = 0;
  for (const Point p : fg) {
    sx += p.x;
    sy += p.y;
  }
  const double cx = double(sx) / A;
  const double cy = double(sy) / A;
  double mu20 = 0, mu02 = 0, mu11 = 0;
  for (const Point p : fg) {
    const double dx = p.x - cx, dy = p.y - cy;
    mu20 += dx * dx;
    mu02 += dy * dy;
    mu11 += dx * dy;
  }
  mu20 /= A;
  mu02 /= A;
  mu11 /= A;

  // Size.
  f[0] = A / (W * H);
  f[1] = w / W;
  f[2] = h / H;
  f[3] = P / (2.0 * (W + H));
  f[4] = w / (w + h);
  f[5] = P > 0 ? 4.0 * pi * A / (P * P) : 1.0;

  // Radial signature.
  std::array<double, 8> sector{};
  double max_radius = 0;
  for (const Point p : boundary) {
    const double dx = p.x - cx, dy = cy - p.y;
    const double r = std::hypot(dx, dy);
    double angle = std::atan2(dy, dx);
    if (angle < 0) angle += 2.0 * pi;
    const auto s = std::min<std::size_t>(7, std::size_t(angle / (pi / 4.0)));
    sector[s] = std::max(sector[s], r);
    max_radius = std::max(max_radius, r);
  }
  for (std::size_t s = 0; s < 8; ++s) f[6 + s] = max_radius > 0 ? sector[s] / max_radius : 0.0;

  const double hull = pixel_hull_area(boundary);
  f[14] = hull > 0 ? A / hull : 1.0;
  f[15] = A / (w * h);

  const double half_trace = (mu20 + mu02) / 2.0;
  const double spread = std::sqrt(((mu20 - mu02) / 2.0) * ((mu20 - mu02) / 2.0) + mu11 * mu11);
  const double lambda1 = half_trace + spread;
  const double lambda2 = half_trace - spread;
  f[16] = lambda1 > 0 ? std::sqrt(std::max(0.0, 1.0 - lambda2 / lambda1)) : 0.0;

  const HeadSide head = find_head_side(mask);
  const auto in_head_cols = [&](int x, int n) { return head == HeadSide::Left ? x < n : x >= bb.w - n; };
  const auto in_rear_cols = [&](int x, int n) { return head == HeadSide::Left ? x >= bb.w - n : x < n; };

  const int tail_cols = fraction_columns(bb.w, 0.2);
  std::size_t tail_fill = 0;
  for (const Point p : fg) tail_fill += in_rear_cols(p.x, tail_cols) ? 1 : 0;
  f[17] = double(tail_fill) / (double(tail_cols) * h);

  std::size_t edge = 0;
  for (const Point p : fg) edge += mask.is_boundary(bb.x0 + p.x, bb.y0 + p.y) ? 1 : 0;
  f[18] = double(edge) / A;

  const auto intensity = [&](Point p) { return double(idx.at(bb.x0 + p.x, bb.y0 + p.y)); };
  std::array<Stats, 4> quadrant;
  Stats all_intensity;
  for (const Point p : fg) {
    const std::size_t q = (p.y < bb.h / 2 ? 0 : 2) + (p.x < bb.w / 2 ? 0 : 1);
    quadrant[q].add(intensity(p));
    all_intensity.add(intensity(p));
  }
  for (std::size_t q = 0; q < 4; ++q) f[19 + q] = quadrant[q].stddev() / 128.0;

  const double theta = 0.5 * std::atan2(2.0 * mu11, mu20 - mu02);
  f[23] = (theta + pi / 2.0) / pi;

  // Color signature.
  std::array<Stats, 3> dorsum, ventral;
  for (const Point p : fg) {
    const Rgb c = img.at(bb.x0 + p.x, bb.y0 + p.y);
    auto& region = p.y < cy ? dorsum : ventral;
    region[0].add(c.r / 255.0);
    region[1].add(c.g / 255.0);
    region[2].add(c.b / 255.0);
  }
  for (std::size_t c = 0; c < 3; ++c) {
    f[24 + c] = dorsum[c].mean();
    f[27 + c] = ventral[c].mean();
    f[30 + c] = (f[24 + c] - f[27 + c] + 1.0) / 2.0;
  }
  f[33] = all_intensity.mean() / 255.0;
  f[34] = all_intensity.stddev() / 128.0;
  f[35] = double(std::min<std::size_t>(groups.group_count, 32)) / 32.0;

  // Geometry.
  const TrianglePair tri = contour_triangles(Contour{boundary, P});
  const TriangleVertices v = outer_vertices(tri);
  f[36] = v.top.x / w;
  f[37] = v.top.y / h;
  f[38] = triangle_area(v.left, v.right, v.top) / (w * h);
  f[39] = v.bottom.x / w;
  f[40] = v.bottom.y / h;
  f[41] = triangle_area(v.left, v.right, v.bottom) / (w * h);
  f[42] = triangle_similarity(triangle_area(v.left, v.right, v.top), triangle_area(v.left, v.right, v.bottom));

  const int head_cols = fraction_columns(bb.w, 0.25);
  struct Dark {
    std::uint8_t value;
    Point p;
  };
  std::vector<Dark> band;
  for (const Point p : fg) {
    if (in_head_cols(p.x, head_cols)) band.push_back({idx.at(bb.x0 + p.x, bb.y0 + p.y), p});
  }
  if (!band.empty()) {
    // fg is row-major already, so a stable sort keeps row-major order among equal intensities.
    std::stable_sort(band.begin(), band.end(), [](const Dark& a, const Dark& b) { return a.value < b.value; });
    const std::size_t take = (band.size() + 9) / 10;
    double ex = 0, ey = 0;
    for (std::size_t i = 0; i < take; ++i) {
      ex += band[i].p.x;
      ey += band[i].p.y;
    }
    f[43] = (ex / double(take) + 0.5) / w;
    f[44] = (ey / double(take) + 0.5) / h;
  }

  const int mouth_cols = fraction_columns(bb.w, 0.05);
  int top = bb.h, bottom = -1;
  for (const Point p : fg) {
    if (!in_head_cols(p.x, mouth_cols)) continue;
    top = std::min(top, p.y);
    bottom = std::max(bottom, p.y);
  }
  f[45] = bottom >= top ? double(bottom - top + 1) / h : 0.0;

  f[46] = apex_angle(v.top, v.left, v.right) / pi;

  for (double& x : f) {
    if (!std::isfinite(x)) x = 0.0;
    x = clamp01(x);
  }
  return f;
}

}  // namespace fishid
