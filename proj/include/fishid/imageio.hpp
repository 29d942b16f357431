#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fishid/image.hpp"

namespace fishid {

// Decodes binary PPM ("P6", maxval 255) or 24-bit uncompressed BMP.
// BMP rows are returned top-down regardless of storage order.
RgbImage decode_image(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_ppm(const RgbImage& img);
// Bottom-up rows, BITMAPINFOHEADER, zero row padding.
std::vector<std::uint8_t> encode_bmp(const RgbImage& img);

IndexedImage to_indexed(const RgbImage& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

RgbImage load_image(const std::filesystem::path& path);

enum class Split { Train, Test };

std::string_view to_string(Split split) noexcept;

struct ManifestEntry {
  std::string path;  // resolved against the manifest's directory when loaded from disk
  std::string family;
  bool poison = false;
  std::string cluster;
  Split split = Split::Train;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline constexpr std::string_view kManifestHeader = "path,family,poison,cluster,split";

// Relative paths are joined onto base_dir (empty keeps them as written).
std::vector<ManifestEntry> parse_manifest(std::string_view text,
                                          const std::filesystem::path& base_dir = {});
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
std::string format_manifest(std::span<const ManifestEntry> entries);

}  // namespace fishid
