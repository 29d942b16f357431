#include <cstdint>
#include <fstream>
#include <random>
#include <vector>

#include "doctest.h"
#include "fishid/error.hpp"
#include "fishid/imageio.hpp"
#include "helpers.hpp"

using namespace fishid;

namespace {

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

ErrorKind decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_image(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("decode succeeded");
  return ErrorKind::IoFailure;
}

ErrorKind manifest_error(std::string_view text) {
  try {
    parse_manifest(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("parse succeeded");
  return ErrorKind::IoFailure;
}

RgbImage random_image(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> dim(1, 40), byte(0, 255);
  RgbImage img{dim(gen), dim(gen)};
  for (Rgb& p : img.pixels) p = {std::uint8_t(byte(gen)), std::uint8_t(byte(gen)), std::uint8_t(byte(gen))};
  return img;
}

}  // namespace

TEST_CASE("P6 two-pixel image decodes in order") {
  auto bytes = bytes_of("P6 2 1 255\n");
  for (int v : {255, 0, 0, 0, 0, 255}) bytes.push_back(std::uint8_t(v));
  const RgbImage img = decode_image(bytes);
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.at(0, 0) == Rgb{255, 0, 0});
  CHECK(img.at(1, 0) == Rgb{0, 0, 255});
}

TEST_CASE("P6 header comments are skipped") {
  auto bytes = bytes_of("P6\n# made by hand\n1 1\n# another\n255\n");
  for (int v : {1, 2, 3}) bytes.push_back(std::uint8_t(v));
  CHECK(decode_image(bytes).at(0, 0) == Rgb{1, 2, 3});
}

TEST_CASE("decode rejects bad input") {
  CHECK(decode_error(bytes_of("P6 0 0 255\n")) == ErrorKind::UnsupportedFormat);
  CHECK(decode_error(bytes_of("P6 1 1 65535\n")) == ErrorKind::UnsupportedFormat);
  CHECK(decode_error(bytes_of("P3 1 1 255\n0 0 0")) == ErrorKind::UnsupportedFormat);
  CHECK(decode_error(bytes_of("GIF89a")) == ErrorKind::UnsupportedFormat);
  CHECK(decode_error(bytes_of("P6 2 2 255\nabc")) == ErrorKind::TruncatedData);
  CHECK(decode_error({}) == ErrorKind::UnsupportedFormat);
}

TEST_CASE("PPM round trip is bit exact on 100 random images") {
  std::mt19937_64 gen(2024);
  for (int i = 0; i < 100; ++i) {
    const RgbImage img = random_image(gen);
    REQUIRE(decode_image(encode_ppm(img)) == img);
  }
}

TEST_CASE("BMP round trip covers every row padding") {
  std::mt19937_64 gen(99);
  for (int i = 0; i < 40; ++i) {
    const RgbImage img = random_image(gen);
    REQUIRE(decode_image(encode_bmp(img)) == img);
  }
}

TEST_CASE("856x804 white BMP decodes with its dimensions") {
  const RgbImage white{856, 804, testutil::kWhite};
  const auto bytes = encode_bmp(white);
  // 856 * 3 = 2568 bytes per row, already a multiple of four.
  CHECK(bytes.size() == 54u + 2568u * 804u);
  const RgbImage back = decode_image(bytes);
  CHECK(back.width == 856);
  CHECK(back.height == 804);
  CHECK(back == white);
}

TEST_CASE("BMP top-down storage and unsupported variants") {
  RgbImage img{3, 2};
  img.at(0, 0) = {10, 20, 30};
  img.at(2, 1) = {40, 50, 60};
  auto bytes = encode_bmp(img);
  const auto put32 = [&](std::size_t at, std::int32_t v) {
    for (int k = 0; k < 4; ++k) bytes[at + k] = std::uint8_t(std::uint32_t(v) >> (8 * k));
  };
  // Flip to a negative height and swap the two stored rows.
  auto flipped = bytes;
  const std::size_t stride = 12;
  std::copy(bytes.begin() + 54, bytes.begin() + 54 + stride, flipped.begin() + 54 + stride);
  std::copy(bytes.begin() + 54 + stride, bytes.begin() + 54 + 2 * stride, flipped.begin() + 54);
  std::swap(bytes, flipped);
  put32(22, -2);
  CHECK(decode_image(bytes) == img);

  auto compressed = encode_bmp(img);
  compressed[30] = 1;
  CHECK(decode_error(compressed) == ErrorKind::UnsupportedFormat);
  auto depth = encode_bmp(img);
  depth[28] = 32;
  CHECK(decode_error(depth) == ErrorKind::UnsupportedFormat);
  auto shortened = encode_bmp(img);
  shortened.resize(shortened.size() - 5);
  CHECK(decode_error(shortened) == ErrorKind::TruncatedData);
}

TEST_CASE("to_indexed uses luminance weights") {
  RgbImage img{4, 1};
  img.at(0, 0) = {0, 0, 0};
  img.at(1, 0) = {255, 255, 255};
  img.at(2, 0) = {255, 0, 0};
  img.at(3, 0) = {128, 128, 128};
  const IndexedImage idx = to_indexed(img);
  CHECK(idx.width == 4);
  CHECK(idx.at(0, 0) == 0);
  CHECK(idx.at(1, 0) == 255);
  CHECK(idx.at(2, 0) == 76);
  CHECK(idx.at(3, 0) == 128);
}

TEST_CASE("gray levels map to themselves") {
  RgbImage img{256, 1};
  for (int v = 0; v < 256; ++v) img.at(v, 0) = {std::uint8_t(v), std::uint8_t(v), std::uint8_t(v)};
  const IndexedImage idx = to_indexed(img);
  for (int v = 0; v < 256; ++v) REQUIRE(idx.at(v, 0) == v);
}

TEST_CASE("manifest row parsing") {
  const auto rows = parse_manifest(
      "path,family,poison,cluster,split\n"
      "imgs/a.ppm,Istiophoridae,0,billfish,train\n"
      "imgs/b.ppm,Poison fish,1,poison,test\r\n",
      "/data");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].family == "Istiophoridae");
  CHECK_FALSE(rows[0].poison);
  CHECK(rows[0].cluster == "billfish");
  CHECK(rows[0].split == Split::Train);
  CHECK(rows[0].path == (std::filesystem::path("/data") / "imgs/a.ppm").string());
  CHECK(rows[1].poison);
  CHECK(rows[1].split == Split::Test);
  CHECK(rows[1].family == "Poison fish");
}

TEST_CASE("manifest errors") {
  const std::string h = "path,family,poison,cluster,split\n";
  CHECK(manifest_error(h) == ErrorKind::EmptyManifest);
  CHECK(manifest_error("") == ErrorKind::MalformedRow);
  CHECK(manifest_error("path,family\n") == ErrorKind::MalformedRow);
  CHECK(manifest_error(h + "a.ppm,X,0,c\n") == ErrorKind::MalformedRow);
  CHECK(manifest_error(h + "a.ppm,X,2,c,train\n") == ErrorKind::MalformedRow);
  CHECK(manifest_error(h + "a.ppm,X,0,c,validation\n") == ErrorKind::MalformedRow);
  CHECK(manifest_error(h + "a.ppm,,0,c,train\n") == ErrorKind::MalformedRow);
  CHECK(manifest_error(h + "a.ppm,X,0,c,train\nb.ppm,X,1,c,train\n") == ErrorKind::InconsistentHierarchy);
  CHECK(manifest_error(h + "a.ppm,X,0,c,train\nb.ppm,X,0,d,train\n") == ErrorKind::InconsistentHierarchy);
}

TEST_CASE("manifest format and parse agree") {
  const std::vector<ManifestEntry> entries{
      {"a.ppm", "Scombridae", false, "mackerel", Split::Train},
      {"b.ppm", "Poison fish", true, "poison", Split::Test},
  };
  CHECK(parse_manifest(format_manifest(entries)) == entries);
}

TEST_CASE("load_manifest resolves paths next to the manifest") {
  testutil::TempDir dir("manifest");
  const auto file = dir.path() / "m.csv";
  write_file_atomic(file, std::string_view("path,family,poison,cluster,split\nx.ppm,A,0,c,train\n"));
  const auto rows = load_manifest(file);
  REQUIRE(rows.size() == 1);
  CHECK(std::filesystem::path(rows[0].path) == dir.path() / "x.ppm");
  CHECK_FALSE(std::filesystem::exists(dir.path() / "m.csv.tmp"));
}

TEST_CASE("missing files raise IoFailure") {
  try {
    read_file("/nonexistent/fishid/none.ppm");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoFailure);
    CHECK(e.stage() == "io");
  }
}
