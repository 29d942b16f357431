#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fishid/image.hpp"
#include "fishid/imageio.hpp"

namespace fishid {

struct Range {
  double lo = 0;
  double hi = 0;
};

struct ColorRange {
  Rgb lo;
  Rgb hi;
};

// Appearance envelope of one terminal class.
struct FamilySpec {
  std::string name;
  std::string cluster;
  bool poison = false;
  Range aspect;         // body length / body height
  ColorRange dorsum;
  ColorRange ventral;
  Range tail_length;    // fraction of body length
  Range fin_height;     // dorsal fin height, fraction of body height
  bool spot_pattern = false;
};

struct SynthConfig {
  int width = 320;
  int height = 240;
  Rgb background{0, 0, 255};
  std::uint64_t seed = 1;
  // Multiplies every geometric length; used to render the same fish larger.
  double scale = 1.0;
  // Uniform per-channel noise added to fish pixels, +/- this many levels.
  int noise = 6;
  // Per family, in the order of the family list handed to generate_corpus.
  std::vector<int> train_counts;
  std::vector<int> test_counts;
};

// Six reference families plus the poison class.
std::vector<FamilySpec> default_families();

// Default train/test sizes matching default_families().
SynthConfig default_synth_config();

struct RenderedFish {
  RgbImage image;
  bool head_right = false;
};

RenderedFish render_fish_detailed(const FamilySpec& spec, std::uint64_t seed, const SynthConfig& cfg);
RgbImage render_fish(const FamilySpec& spec, std::uint64_t seed, const SynthConfig& cfg);

// Per-image seed derived from the corpus seed and the image's slot.
std::uint64_t image_seed(std::uint64_t corpus_seed, std::size_t family, Split split, int k);

// File-name form of a family name: anything outside [A-Za-z0-9_-] becomes '_'.
std::string file_stem(std::string_view family);

struct Corpus {
  std::vector<ManifestEntry> entries;  // paths relative to the output directory
  std::filesystem::path manifest;
};

inline constexpr const char* kManifestFileName = "manifest.csv";

// Writes <family>_<split>_<k>.ppm images and manifest.csv into out_dir.
Corpus generate_corpus(const SynthConfig& cfg, std::span<const FamilySpec> specs, const std::filesystem::path& out_dir);

}  // namespace fishid
