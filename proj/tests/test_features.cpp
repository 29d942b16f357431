#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fishid/error.hpp"
#include "fishid/features.hpp"
#include "fishid/imageio.hpp"
#include "fishid/pipeline.hpp"
#include "fishid/synthgen.hpp"
#include "helpers.hpp"

using namespace fishid;
using testutil::kBlue;
using testutil::kRed;

namespace {

FeatureVector features_of(const RgbImage& img, Rgb bg = kBlue) {
  const FishMask m = extract_mask(img, bg, 50);
  return extract_features(img, to_indexed(img), m, trace_contour(m), group_by_color(m, img, 20));
}

RgbImage embed(const RgbImage& img, int dx, int dy, Rgb bg) {
  RgbImage out{img.width + 20, img.height + 20, bg};
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(x + dx, y + dy) = img.at(x, y);
  return out;
}

}  // namespace

TEST_CASE("layout constants") {
  CHECK(kFeatureCount == 47);
  CHECK(kSizeBegin == 0);
  CHECK(kShapeBegin == 6);
  CHECK(kColorBegin == 24);
  CHECK(kGeometryBegin == 36);
}

TEST_CASE("uniform rectangle: full extent and zero contrast") {
  RgbImage img{60, 40, kBlue};
  testutil::fill_rect(img, 10, 8, 30, 20, kRed);
  const FeatureVector f = features_of(img);
  CHECK(f[15] == 1.0);
  CHECK(f[14] == doctest::Approx(1.0));
  for (int i = 30; i <= 32; ++i) CHECK(f[i] == 0.5);
  CHECK(f[0] == doctest::Approx(600.0 / 2400.0));
  CHECK(f[1] == doctest::Approx(30.0 / 60.0));
  CHECK(f[2] == doctest::Approx(20.0 / 40.0));
  CHECK(f[4] == doctest::Approx(30.0 / 50.0));
  CHECK(f[35] == doctest::Approx(1.0 / 32.0));
  CHECK(f[24] == 1.0);
  CHECK(f[25] == 0.0);
}

TEST_CASE("disk compactness stays high despite the digitized perimeter") {
  RgbImage img{130, 130, kBlue};
  testutil::fill_disk(img, 65, 65, 50, kRed);
  const FeatureVector f = features_of(img);
  CHECK(f[5] >= 0.85);
  CHECK(f[16] < 0.1);
  for (int s = 6; s < 14; ++s) CHECK(f[s] > 0.95);
}

TEST_CASE("single pixel: compactness is 1 and everything stays in range") {
  RgbImage img{9, 9, kBlue};
  img.at(4, 4) = kRed;
  const FeatureVector f = features_of(img);
  CHECK(f[5] == 1.0);
  for (double v : f) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("upper triangle of a known layout") {
  const Point xmin{0, 5}, xmax{10, 5}, ymin{5, 0};
  CHECK(triangle_area(xmin, xmax, ymin) == 25.0);
  CHECK(triangle_area(xmin, xmax, ymin) / (10.0 * 10.0) == 0.25);
  CHECK(triangle_area(Vertex{0, 5}, Vertex{10, 5}, Vertex{5, 0}) == 25.0);
  CHECK(triangle_similarity(25.0, 50.0) == 0.5);
  CHECK(triangle_similarity(0.0, 0.0) == 1.0);
  CHECK(apex_angle({5, 0}, {0, 5}, {10, 5}) == doctest::Approx(std::numbers::pi / 2));
  CHECK(apex_angle({0, 0}, {0, 0}, {1, 1}) == 0.0);
}

TEST_CASE("contour extremes take the median of ties") {
  Contour c;
  c.points = {{2, 0}, {3, 0}, {4, 0}, {5, 1}, {5, 2}, {4, 3}, {3, 3}, {1, 2}, {1, 1}};
  const TrianglePair t = contour_triangles(c);
  CHECK(t.y_min == Point{3, 0});
  CHECK(t.x_max == Point{5, 1});
  CHECK(t.x_min == Point{1, 1});
  CHECK(t.y_max == Point{3, 3});
  CHECK(t.area_up >= 0.0);
  CHECK(t.area_down >= 0.0);
}

TEST_CASE("head side") {
  SUBCASE("denser left half") {
    RgbImage img{40, 30, kBlue};
    testutil::fill_rect(img, 5, 5, 10, 20, kRed);
    testutil::fill_rect(img, 15, 12, 10, 6, kRed);
    CHECK(find_head_side(testutil::mask_of(img)) == HeadSide::Left);
  }
  SUBCASE("denser right half") {
    RgbImage img{40, 30, kBlue};
    testutil::fill_rect(img, 5, 12, 10, 6, kRed);
    testutil::fill_rect(img, 15, 5, 10, 20, kRed);
    CHECK(find_head_side(testutil::mask_of(img)) == HeadSide::Right);
  }
  SUBCASE("symmetric shape ties to the left") {
    RgbImage img{40, 30, kBlue};
    testutil::fill_rect(img, 5, 5, 21, 9, kRed);
    CHECK(find_head_side(testutil::mask_of(img)) == HeadSide::Left);
  }
}

TEST_CASE("generated fish: head side matches the drawn side") {
  const auto specs = default_families();
  const auto cfg = default_synth_config();
  int agree = 0;
  const int n = 200;
  for (int s = 0; s < n; ++s) {
    const RenderedFish fish = render_fish_detailed(specs[s % specs.size()], 500 + s, cfg);
    const ImageAnalysis a = analyze_image(fish.image, PipelineConfig{});
    agree += (find_head_side(a.mask) == HeadSide::Right) == fish.head_right ? 1 : 0;
  }
  CHECK(agree >= 190);
}

TEST_CASE("generated fish stay in range and are translation invariant") {
  const auto specs = default_families();
  const auto cfg = default_synth_config();
  for (int s = 0; s < 21; ++s) {
    const RgbImage img = render_fish(specs[s % specs.size()], 77 + s, cfg);
    const FeatureVector f = image_features(img, PipelineConfig{});
    for (double v : f) {
      REQUIRE(std::isfinite(v));
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
    const FeatureVector a = image_features(embed(img, 0, 0, cfg.background), PipelineConfig{});
    const FeatureVector b = image_features(embed(img, 13, 7, cfg.background), PipelineConfig{});
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      INFO("feature " << i);
      REQUIRE(a[i] == b[i]);
    }
  }
}

TEST_CASE("dimension mismatch is reported") {
  RgbImage img{20, 20, kBlue};
  testutil::fill_rect(img, 5, 5, 5, 5, kRed);
  const FishMask m = testutil::mask_of(img);
  const RgbImage other{21, 20, kBlue};
  try {
    extract_features(other, to_indexed(other), m, trace_contour(m), group_by_color(m, img, 20));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InconsistentInputs);
    CHECK(e.stage() == "features");
  }
}
