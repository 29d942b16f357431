#include "fishid/imageio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <utility>

#include "fishid/error.hpp"

namespace fishid {

namespace {

constexpr const char* kDecode = "decode";
constexpr const char* kIo = "io";
constexpr const char* kManifest = "manifest";

[[noreturn]] void unsupported(const std::string& why) { throw Error(ErrorKind::UnsupportedFormat, kDecode, why); }
[[noreturn]] void truncated(const std::string& why) { throw Error(ErrorKind::TruncatedData, kDecode, why); }

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Reads one ASCII header integer, skipping whitespace and '#' comments.
long read_header_int(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= bytes.size()) truncated("PPM header ends early");
  if (bytes[pos] < '0' || bytes[pos] > '9') unsupported("PPM header field is not a decimal integer");
  long value = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    value = value * 10 + (bytes[pos] - '0');
    if (value > (1L << 30)) unsupported("PPM header value out of range");
    ++pos;
  }
  return value;
}

RgbImage decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  const long width = read_header_int(bytes, pos);
  const long height = read_header_int(bytes, pos);
  const long maxval = read_header_int(bytes, pos);
  if (width <= 0 || height <= 0) unsupported("PPM dimensions must be positive");
  if (maxval != 255) unsupported("PPM maxval must be 255");
  if (pos >= bytes.size()) truncated("PPM header ends early");
  if (!is_space(bytes[pos])) unsupported("PPM header must end with a single whitespace byte");
  ++pos;

  const std::size_t count = std::size_t(width) * std::size_t(height);
  if (bytes.size() - pos < count * 3) truncated("PPM payload shorter than header promises");
  RgbImage img{int(width), int(height)};
  for (std::size_t i = 0; i < count; ++i, pos += 3) {
    img.pixels[i] = {bytes[pos], bytes[pos + 1], bytes[pos + 2]};
  }
  return img;
}

std::uint32_t le_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint32_t(b[at]) | std::uint32_t(b[at + 1]) << 8 | std::uint32_t(b[at + 2]) << 16 |
         std::uint32_t(b[at + 3]) << 24;
}
std::uint16_t le_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint16_t(b[at] | b[at + 1] << 8);
}

RgbImage decode_bmp(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 54) truncated("BMP headers incomplete");
  const std::uint32_t data_offset = le_u32(bytes, 10);
  const std::uint32_t info_size = le_u32(bytes, 14);
  if (info_size < 40) unsupported("only BITMAPINFOHEADER or later is supported");
  const auto raw_width = std::int32_t(le_u32(bytes, 18));
  const auto raw_height = std::int32_t(le_u32(bytes, 22));
  const std::uint16_t bit_count = le_u16(bytes, 28);
  const std::uint32_t compression = le_u32(bytes, 30);
  if (bit_count != 24) unsupported("BMP bit depth must be 24");
  if (compression != 0) unsupported("compressed BMP is not supported");
  if (raw_width <= 0 || raw_height == 0 || raw_height == INT32_MIN) unsupported("BMP dimensions must be positive");

  const bool top_down = raw_height < 0;
  const int width = raw_width;
  const int height = top_down ? -raw_height : raw_height;
  const std::size_t stride = (std::size_t(width) * 3 + 3) & ~std::size_t(3);
  const std::size_t needed = std::size_t(data_offset) + stride * std::size_t(height - 1) + std::size_t(width) * 3;
  if (data_offset < 54 || bytes.size() < needed) truncated("BMP payload shorter than header promises");

  RgbImage img(width, height);
  for (int row = 0; row < height; ++row) {
    const int y = top_down ? row : height - 1 - row;
    std::size_t at = data_offset + stride * std::size_t(row);
    for (int x = 0; x < width; ++x, at += 3) img.at(x, y) = {bytes[at + 2], bytes[at + 1], bytes[at]};
  }
  return img;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v));
  out.push_back(std::uint8_t(v >> 8));
}

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error(ErrorKind::MalformedRow, kManifest, "line " + std::to_string(line) + ": " + why);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) return fields;
    start = comma + 1;
  }
}

}  // namespace

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) unsupported("input too short to carry a magic number");
  if (bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
  if (bytes[0] == 'B' && bytes[1] == 'M') return decode_bmp(bytes);
  unsupported("unknown magic number");
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.size() * 3);
  for (const Rgb& p : img.pixels) {
    out.push_back(p.r);
    out.push_back(p.g);
    out.push_back(p.b);
  }
  return out;
}

std::vector<std::uint8_t> encode_bmp(const RgbImage& img) {
  const std::size_t stride = (std::size_t(img.width) * 3 + 3) & ~std::size_t(3);
  const std::size_t image_size = stride * std::size_t(img.height);
  std::vector<std::uint8_t> out;
  out.reserve(54 + image_size);
  out.push_back('B');
  out.push_back('M');
  put_u32(out, std::uint32_t(54 + image_size));
  put_u32(out, 0);
  put_u32(out, 54);
  put_u32(out, 40);
  put_u32(out, std::uint32_t(img.width));
  put_u32(out, std::uint32_t(img.height));
  put_u16(out, 1);
  put_u16(out, 24);
  put_u32(out, 0);
  put_u32(out, std::uint32_t(image_size));
  put_u32(out, 2835);  // 72 dpi
  put_u32(out, 2835);
  put_u32(out, 0);
  put_u32(out, 0);
  for (int y = img.height - 1; y >= 0; --y) {
    for (int x = 0; x < img.width; ++x) {
      const Rgb p = img.at(x, y);
      out.push_back(p.b);
      out.push_back(p.g);
      out.push_back(p.r);
    }
    for (std::size_t pad = std::size_t(img.width) * 3; pad < stride; ++pad) out.push_back(0);
  }
  return out;
}

IndexedImage to_indexed(const RgbImage& img) {
  IndexedImage out{img.width, img.height, std::vector<std::uint8_t>(img.size())};
  std::transform(img.pixels.begin(), img.pixels.end(), out.index.begin(), [](Rgb p) {
    const double y = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    // y >= 0 and y - trunc(y) is exact, so this is round-half-away like lround.
    int i = int(y);
    if (y - i >= 0.5) ++i;
    return std::uint8_t(std::min(i, 255));
  });
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw Error(ErrorKind::IoFailure, kIo, "read failed for " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, kIo, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorKind::IoFailure, kIo, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::IoFailure, kIo, "cannot move output into place at " + path.string());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

RgbImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_image(bytes);
}

std::string_view to_string(Split split) noexcept { return split == Split::Train ? "train" : "test"; }

std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  std::vector<ManifestEntry> entries;
  std::map<std::string, std::pair<bool, std::string>, std::less<>> hierarchy;
  std::size_t line_no = 0;
  bool saw_header = false;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!saw_header) {
      if (line != kManifestHeader) malformed(line_no, "header must be \"" + std::string(kManifestHeader) + "\"");
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;

    const auto fields = split_commas(line);
    if (fields.size() != 5) malformed(line_no, "expected 5 columns, found " + std::to_string(fields.size()));
    ManifestEntry e;
    if (fields[0].empty()) malformed(line_no, "empty path");
    if (fields[1].empty()) malformed(line_no, "empty family");
    if (fields[2] == "0") {
      e.poison = false;
    } else if (fields[2] == "1") {
      e.poison = true;
    } else {
      malformed(line_no, "poison must be 0 or 1");
    }
    if (fields[4] == "train") {
      e.split = Split::Train;
    } else if (fields[4] == "test") {
      e.split = Split::Test;
    } else {
      malformed(line_no, "split must be train or test");
    }
    std::filesystem::path p{std::string(fields[0])};
    e.path = (p.is_relative() && !base_dir.empty()) ? (base_dir / p).string() : p.string();
    e.family = std::string(fields[1]);
    e.cluster = std::string(fields[3]);

    const auto [it, inserted] = hierarchy.try_emplace(e.family, e.poison, e.cluster);
    if (!inserted && (it->second.first != e.poison || it->second.second != e.cluster)) {
      throw Error(ErrorKind::InconsistentHierarchy, kManifest,
                  "family " + e.family + " has conflicting poison/cluster labels (line " + std::to_string(line_no) + ")");
    }
    entries.push_back(std::move(e));
  }
  if (!saw_header) malformed(1, "missing header");
  if (entries.empty()) throw Error(ErrorKind::EmptyManifest, kManifest, "manifest has no data rows");
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  return parse_manifest(text, path.parent_path());
}

std::string format_manifest(std::span<const ManifestEntry> entries) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& e : entries) {
    out += e.path + ',' + e.family + ',' + (e.poison ? '1' : '0') + ',' + e.cluster + ',' + std::string(to_string(e.split)) + '\n';
  }
  return out;
}

}  // namespace fishid
