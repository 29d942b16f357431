#include "fishid/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "fishid/error.hpp"
#include "json.hpp"

namespace fishid {

namespace {

constexpr const char* kStage = "pipeline";
constexpr const char* kModelStage = "model";

using nlohmann::json;

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorKind::CorruptModel, kModelStage, why); }

json config_json(const PipelineConfig& c) {
  return {{"background_tolerance", c.preprocess.background_tolerance},
          {"median_radius", c.preprocess.median_radius},
          {"foreground_tolerance", c.foreground_tolerance},
          {"group_tolerance", c.group_tolerance},
          {"segments", c.segments}};
}

}  // namespace

ImageAnalysis analyze_image(const RgbImage& img, const PipelineConfig& cfg) {
  ImageAnalysis a;
  auto unified = unify_background(median_filter(img, cfg.preprocess.median_radius), cfg.preprocess);
  a.background = unified.background;
  // Nothing but background is a segmentation failure, not a rotation one.
  if (std::all_of(unified.image.pixels.begin(), unified.image.pixels.end(), [&](Rgb p) { return p == a.background; })) {
    throw Error(ErrorKind::EmptyForeground, "segment", "image contains only background");
  }
  a.image = normalize_rotation(unified.image, a.background);
  a.indexed = to_indexed(a.image);
  a.mask = extract_mask(a.image, a.background, cfg.foreground_tolerance);
  a.contour = trace_contour(a.mask);
  a.groups = group_by_color(a.mask, a.image, cfg.group_tolerance);
  a.bands = divide_segments(a.mask, a.image, cfg.segments);
  a.features = extract_features(a.image, a.indexed, a.mask, a.contour, a.groups);
  return a;
}

FeatureVector image_features(const RgbImage& img, const PipelineConfig& cfg) { return analyze_image(img, cfg).features; }

LabelRegistry build_registry(std::span<const ManifestEntry> entries) {
  std::map<std::string, ClassInfo> by_name;
  for (const ManifestEntry& e : entries) {
    const auto [it, inserted] = by_name.try_emplace(e.family, ClassInfo{e.family, e.cluster, e.poison});
    if (!inserted && (it->second.cluster != e.cluster || it->second.poison != e.poison)) {
      throw Error(ErrorKind::InconsistentHierarchy, kStage, "family " + e.family + " has conflicting labels");
    }
  }
  LabelRegistry registry;
  for (auto& [name, info] : by_name) registry.classes.push_back(std::move(info));
  return registry;
}

Classification classify_features(const TrainedBundle& bundle, std::span<const double> features) {
  Classification c;
  c.scores = forward(bundle.mlp, features);
  c.class_index = predict_class(bundle.tree, c.scores);
  c.label = expand_label(bundle.registry, c.class_index);
  return c;
}

PipelineResult run_pipeline(const RgbImage& img, const TrainedBundle& bundle) {
  PipelineResult r;
  r.features = image_features(img, bundle.config);
  r.classification = classify_features(bundle, r.features);
  return r;
}

PipelineResult run_pipeline(const std::filesystem::path& image_path, const TrainedBundle& bundle) {
  return run_pipeline(load_image(image_path), bundle);
}

std::vector<LabeledFeatures> extract_split(std::span<const ManifestEntry> entries, Split split, const PipelineConfig& cfg) {
  std::vector<LabeledFeatures> out;
  for (const ManifestEntry& e : entries) {
    if (e.split != split) continue;
    out.push_back({image_features(load_image(e.path), cfg), &e});
  }
  return out;
}

TrainOutcome train_bundle(std::span<const ManifestEntry> entries, const HyperParams& params, const PipelineConfig& cfg) {
  validate(params.train);
  validate(cfg.preprocess);
  TrainOutcome out;
  TrainedBundle& bundle = out.bundle;
  bundle.config = cfg;
  bundle.registry = build_registry(entries);

  std::vector<std::size_t> per_class(bundle.registry.size(), 0);
  for (const ManifestEntry& e : entries) {
    if (e.split == Split::Train) ++per_class[bundle.registry.find(e.family)];
  }
  if (std::all_of(per_class.begin(), per_class.end(), [](std::size_t n) { return n == 0; })) {
    throw Error(ErrorKind::EmptyTrainingSet, kStage, "manifest has no train rows");
  }
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c] == 0) {
      throw Error(ErrorKind::ClassMissing, kStage, "class " + bundle.registry.classes[c].name + " has no train rows");
    }
  }

  const auto train_rows = extract_split(entries, Split::Train, cfg);
  const std::size_t classes = bundle.registry.size();
  std::vector<TrainingSample> samples;
  std::vector<std::size_t> labels;
  for (const LabeledFeatures& row : train_rows) {
    const std::size_t label = bundle.registry.find(row.entry->family);
    TrainingSample s{{row.features.begin(), row.features.end()}, std::vector<double>(classes, 0.0)};
    s.target[label] = 1.0;
    samples.push_back(std::move(s));
    labels.push_back(label);
  }

  const std::vector<std::size_t> sizes{kFeatureCount, params.hidden, classes};
  out.warnings = architecture_warnings(sizes);
  bundle.mlp = init_mlp(sizes, params.train);
  out.report = train(bundle.mlp, samples, params.train);

  std::vector<TreeRow> tree_rows;
  for (std::size_t i = 0; i < samples.size(); ++i) tree_rows.push_back({forward(bundle.mlp, samples[i].x), labels[i]});
  bundle.tree = fit_tree(tree_rows, params.tree);
  // The tree must accept every output neuron, even ones it never splits on.
  bundle.tree.input_size = classes;

  std::size_t correct = 0;
  for (std::size_t i = 0; i < tree_rows.size(); ++i) correct += predict_class(bundle.tree, tree_rows[i].x) == labels[i];
  out.training_accuracy = double(correct) / double(tree_rows.size());
  return out;
}

EvalReport make_report(const LabelRegistry& registry, std::span<const std::pair<std::size_t, std::size_t>> outcomes) {
  const std::size_t c = registry.size();
  EvalReport r;
  for (const ClassInfo& info : registry.classes) r.classes.push_back(info.name);
  r.confusion.assign(c, std::vector<std::size_t>(c, 0));
  for (const auto& [actual, predicted] : outcomes) {
    if (actual >= c || predicted >= c) throw Error(ErrorKind::UnknownClass, kStage, "outcome refers to an unknown class");
    ++r.confusion[actual][predicted];
  }
  r.total = outcomes.size();
  std::size_t trace = 0, poison_total = 0, poison_hit = 0;
  r.precision.assign(c, 0.0);
  r.recall.assign(c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    trace += r.confusion[i][i];
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < c; ++j) {
      row += r.confusion[i][j];
      col += r.confusion[j][i];
    }
    if (row > 0) r.recall[i] = double(r.confusion[i][i]) / double(row);
    if (col > 0) r.precision[i] = double(r.confusion[i][i]) / double(col);
    if (registry.classes[i].poison) {
      poison_total += row;
      for (std::size_t j = 0; j < c; ++j) {
        if (registry.classes[j].poison) poison_hit += r.confusion[i][j];
      }
    }
  }
  r.accuracy = r.total ? double(trace) / double(r.total) : 0.0;
  if (poison_total > 0) r.poison_recall = double(poison_hit) / double(poison_total);
  return r;
}

EvalReport evaluate(const TrainedBundle& bundle, std::span<const ManifestEntry> entries) {
  std::vector<std::pair<std::size_t, std::size_t>> outcomes;
  for (const ManifestEntry& e : entries) {
    if (e.split != Split::Test) continue;
    const std::size_t actual = bundle.registry.find(e.family);
    if (actual == bundle.registry.size()) {
      throw Error(ErrorKind::UnknownClass, kStage, "test family " + e.family + " is not in the model");
    }
    outcomes.emplace_back(actual, run_pipeline(std::filesystem::path(e.path), bundle).classification.class_index);
  }
  if (outcomes.empty()) throw Error(ErrorKind::EmptyTestSet, kStage, "manifest has no test rows");
  return make_report(bundle.registry, outcomes);
}

std::string format_report(const EvalReport& r) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof buf, "accuracy: %.4f (%zu images)\n", r.accuracy, r.total);
  out += buf;
  if (r.poison_recall) {
    std::snprintf(buf, sizeof buf, "poison recall: %.4f\n", *r.poison_recall);
    out += buf;
  }
  std::size_t width = 6;
  for (const auto& name : r.classes) width = std::max(width, name.size());
  out += "confusion matrix (rows = actual, columns = predicted index)\n";
  out += std::string(width, ' ');
  for (std::size_t j = 0; j < r.classes.size(); ++j) {
    std::snprintf(buf, sizeof buf, " %5zu", j);
    out += buf;
  }
  out += "   precision  recall\n";
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    out += r.classes[i] + std::string(width - r.classes[i].size(), ' ');
    for (std::size_t j = 0; j < r.classes.size(); ++j) {
      std::snprintf(buf, sizeof buf, " %5zu", r.confusion[i][j]);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "   %9.4f  %6.4f\n", r.precision[i], r.recall[i]);
    out += buf;
  }
  return out;
}

std::string report_json(const EvalReport& r) {
  json j;
  j["accuracy"] = r.accuracy;
  j["classes"] = r.classes;
  j["confusion"] = r.confusion;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["poison_recall"] = r.poison_recall ? json(*r.poison_recall) : json(nullptr);
  j["total"] = r.total;
  return j.dump(2) + "\n";
}

std::string serialize_bundle(const TrainedBundle& b) {
  json doc;
  doc["version"] = kModelVersion;
  doc["feature_layout_version"] = b.feature_layout_version;
  json classes = json::array();
  json hierarchy = json::object();
  for (const ClassInfo& c : b.registry.classes) {
    classes.push_back(c.name);
    hierarchy[c.name] = {{"cluster", c.cluster}, {"poison", c.poison}, {"family", c.poison ? "" : c.name}};
  }
  doc["classes"] = classes;
  doc["hierarchy"] = hierarchy;

  json weights = json::array();
  for (const Matrix& w : b.mlp.weights) weights.push_back(w.data);
  doc["mlp"] = {{"layer_sizes", b.mlp.layer_sizes}, {"weights", weights}, {"activation", "sigmoid"}};

  json nodes = json::array();
  for (const TreeNode& n : b.tree.nodes) {
    if (n.leaf) {
      nodes.push_back({{"leaf", n.label}});
    } else {
      nodes.push_back({{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}});
    }
  }
  doc["tree"] = {{"input_size", b.tree.input_size}, {"nodes", nodes}};
  doc["preprocess"] = config_json(b.config);
  return doc.dump(2) + "\n";
}

TrainedBundle parse_bundle(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    corrupt(std::string("not a valid model document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer()) corrupt("missing version");
  if (doc["version"].get<int>() != kModelVersion) {
    throw Error(ErrorKind::VersionMismatch, kModelStage,
                "model version " + std::to_string(doc["version"].get<int>()) + " is not supported");
  }

  TrainedBundle b;
  try {
    b.feature_layout_version = doc.at("feature_layout_version").get<int>();
    if (b.feature_layout_version != kFeatureLayoutVersion) {
      throw Error(ErrorKind::VersionMismatch, kModelStage, "feature layout version is not supported");
    }
    const json& hierarchy = doc.at("hierarchy");
    for (const json& name : doc.at("classes")) {
      const json& h = hierarchy.at(name.get<std::string>());
      b.registry.classes.push_back({name.get<std::string>(), h.at("cluster").get<std::string>(), h.at("poison").get<bool>()});
    }

    const json& mlp = doc.at("mlp");
    if (mlp.at("activation").get<std::string>() != "sigmoid") corrupt("unsupported activation");
    b.mlp.layer_sizes = mlp.at("layer_sizes").get<std::vector<std::size_t>>();
    const json& weights = mlp.at("weights");
    if (b.mlp.layer_sizes.size() < 2 || weights.size() + 1 != b.mlp.layer_sizes.size()) corrupt("layer count mismatch");
    for (std::size_t l = 0; l + 1 < b.mlp.layer_sizes.size(); ++l) {
      Matrix w(b.mlp.layer_sizes[l + 1], b.mlp.layer_sizes[l] + 1);
      w.data = weights[l].get<std::vector<double>>();
      if (w.data.size() != w.rows * w.cols) corrupt("weight matrix " + std::to_string(l) + " has the wrong size");
      for (const double v : w.data) {
        if (!std::isfinite(v)) corrupt("non-finite weight");
      }
      b.mlp.momentum.emplace_back(w.rows, w.cols, 0.0);
      b.mlp.weights.push_back(std::move(w));
    }

    const json& tree = doc.at("tree");
    b.tree.input_size = tree.at("input_size").get<std::size_t>();
    for (const json& n : tree.at("nodes")) {
      TreeNode node;
      if (n.contains("leaf")) {
        node.leaf = true;
        node.label = n.at("leaf").get<std::size_t>();
      } else {
        node.leaf = false;
        node.feature = n.at("f").get<std::size_t>();
        node.threshold = n.at("t").get<double>();
        node.left = n.at("l").get<std::size_t>();
        node.right = n.at("r").get<std::size_t>();
      }
      b.tree.nodes.push_back(node);
    }

    const json& pre = doc.at("preprocess");
    b.config.preprocess.background_tolerance = pre.at("background_tolerance").get<double>();
    b.config.preprocess.median_radius = pre.at("median_radius").get<int>();
    b.config.foreground_tolerance = pre.at("foreground_tolerance").get<double>();
    b.config.group_tolerance = pre.at("group_tolerance").get<double>();
    b.config.segments = pre.at("segments").get<int>();
  } catch (const json::exception& e) {
    corrupt(std::string("malformed model document: ") + e.what());
  }

  if (b.mlp.layer_sizes.front() != kFeatureCount) corrupt("MLP input size must be 47");
  if (b.mlp.output_size() != b.registry.size()) corrupt("MLP output size differs from the class count");
  if (b.tree.input_size != b.mlp.output_size()) corrupt("tree input size differs from the MLP output size");
  validate(b.tree);
  for (const TreeNode& n : b.tree.nodes) {
    if (n.leaf && n.label >= b.registry.size()) corrupt("tree leaf refers to an unknown class");
  }
  std::set<std::string> names;
  for (const ClassInfo& c : b.registry.classes) {
    if (!names.insert(c.name).second) corrupt("duplicate class " + c.name);
  }
  try {
    validate(b.config.preprocess);
  } catch (const Error& e) {
    corrupt(e.what());
  }
  return b;
}

void save_bundle(const TrainedBundle& bundle, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_bundle(bundle));
}

TrainedBundle load_bundle(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_bundle(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string features_csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) out += "f" + std::to_string(i) + ",";
  return out + "family,poison,cluster,split";
}

std::string features_csv_row(const FeatureVector& f, const ManifestEntry& entry) {
  std::string out;
  char buf[32];
  for (const double v : f) {
    std::snprintf(buf, sizeof buf, "%.9g,", v);
    out += buf;
  }
  return out + entry.family + "," + (entry.poison ? "1" : "0") + "," + entry.cluster + "," + std::string(to_string(entry.split));
}

void export_features(std::span<const ManifestEntry> entries, const PipelineConfig& cfg, const std::filesystem::path& out) {
  std::string csv = features_csv_header() + "\n";
  for (const ManifestEntry& e : entries) csv += features_csv_row(image_features(load_image(e.path), cfg), e) + "\n";
  write_file_atomic(out, csv);
}

}  // namespace fishid
