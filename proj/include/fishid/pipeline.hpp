#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fishid/dtree.hpp"
#include "fishid/features.hpp"
#include "fishid/imageio.hpp"
#include "fishid/mlp.hpp"
#include "fishid/preprocess.hpp"
#include "fishid/segment.hpp"

namespace fishid {

inline constexpr int kModelVersion = 1;

struct PipelineConfig {
  PreprocessConfig preprocess;
  double foreground_tolerance = 60.0;
  double group_tolerance = 20.0;
  int segments = 4;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Every intermediate of the image-analysis half of the pipeline.
struct ImageAnalysis {
  RgbImage image;  // after filtering, background unification and rotation
  Rgb background;
  IndexedImage indexed;
  FishMask mask;
  Contour contour;
  ColorGroups groups;
  std::vector<Band> bands;
  FeatureVector features{};
};

ImageAnalysis analyze_image(const RgbImage& img, const PipelineConfig& cfg);
FeatureVector image_features(const RgbImage& img, const PipelineConfig& cfg);

struct TrainedBundle {
  MlpModel mlp;
  DecisionTree tree;
  LabelRegistry registry;
  int feature_layout_version = kFeatureLayoutVersion;
  PipelineConfig config;
};

struct HyperParams {
  TrainConfig train;
  std::size_t hidden = 24;
  TreeParams tree;
};

// Terminal classes from the manifest, sorted by name; the sort order fixes
// the output neuron of each class.
LabelRegistry build_registry(std::span<const ManifestEntry> entries);

struct Classification {
  std::size_t class_index = 0;
  HierarchicalLabel label;
  std::vector<double> scores;
};

// MLP forward pass, then the tree over the raw output activations.
Classification classify_features(const TrainedBundle& bundle, std::span<const double> features);

struct PipelineResult {
  Classification classification;
  FeatureVector features{};
};

PipelineResult run_pipeline(const std::filesystem::path& image_path, const TrainedBundle& bundle);
PipelineResult run_pipeline(const RgbImage& img, const TrainedBundle& bundle);

struct LabeledFeatures {
  FeatureVector features{};
  const ManifestEntry* entry = nullptr;
};

std::vector<LabeledFeatures> extract_split(std::span<const ManifestEntry> entries, Split split, const PipelineConfig& cfg);

struct TrainOutcome {
  TrainedBundle bundle;
  TrainReport report;
  std::vector<std::string> warnings;
  double training_accuracy = 0;  // of the full MLP + tree chain on the train split
};

TrainOutcome train_bundle(std::span<const ManifestEntry> entries, const HyperParams& params, const PipelineConfig& cfg);

struct EvalReport {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> confusion;  // [actual][predicted]
  double accuracy = 0;
  std::vector<double> precision;  // 0 when a class is never predicted
  std::vector<double> recall;     // 0 when a class has no test rows
  std::optional<double> poison_recall;  // absent without poison test rows
  std::size_t total = 0;
};

EvalReport evaluate(const TrainedBundle& bundle, std::span<const ManifestEntry> entries);

// Builds the report from (actual, predicted) class-index pairs.
EvalReport make_report(const LabelRegistry& registry, std::span<const std::pair<std::size_t, std::size_t>> outcomes);

std::string format_report(const EvalReport& report);
std::string report_json(const EvalReport& report);

// Canonical JSON: sorted keys, shortest round-trip doubles.
std::string serialize_bundle(const TrainedBundle& bundle);
TrainedBundle parse_bundle(std::string_view text);
void save_bundle(const TrainedBundle& bundle, const std::filesystem::path& path);
TrainedBundle load_bundle(const std::filesystem::path& path);

std::string features_csv_header();
std::string features_csv_row(const FeatureVector& f, const ManifestEntry& entry);

// Features of every manifest row as CSV. Nothing is written unless every
// image was processed.
void export_features(std::span<const ManifestEntry> entries, const PipelineConfig& cfg, const std::filesystem::path& out);

}  // namespace fishid
