// fishid command line: gen-synth, extract, train, evaluate, classify.
//
// Any subcommand accepts --config FILE with key=value lines, one per option
// (key is the long option name without dashes). Options given on the command
// line take precedence over the file.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fishid/error.hpp"
#include "fishid/pipeline.hpp"
#include "fishid/synthgen.hpp"

using namespace fishid;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "io", "cannot read config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::MalformedRow, "io", path + ":" + std::to_string(n) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

// Appends --key value for every config entry whose option is not already on
// the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (config.empty()) return args;
  const auto given = [&](const std::string& key) {
    for (const std::string& a : args) {
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    }
    return false;
  };
  for (const auto& [key, value] : read_config(config)) {
    if (key == "config" || given(key)) continue;
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

void add_pipeline_options(CLI::App* app, PipelineConfig& cfg) {
  app->add_option("--background-tolerance", cfg.preprocess.background_tolerance,
                  "RGB distance merged into the background")
      ->capture_default_str();
  app->add_option("--median-radius", cfg.preprocess.median_radius, "median filter radius (0, 1 or 2)")
      ->capture_default_str();
  app->add_option("--foreground-tolerance", cfg.foreground_tolerance, "RGB distance that counts as fish")
      ->capture_default_str();
  app->add_option("--group-tolerance", cfg.group_tolerance, "RGB distance within one color group")
      ->capture_default_str();
}

void add_config_option(CLI::App* app) {
  // Consumed by merge_config before parsing; declared so it is accepted.
  app->add_option("--config", "key=value file with default option values");
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fish family identification from images"};
  app.require_subcommand(1);

  // gen-synth
  SynthConfig synth = default_synth_config();
  std::string synth_out;
  auto* gen = app.add_subcommand("gen-synth", "render a labelled synthetic corpus");
  gen->add_option("--out", synth_out, "output directory")->required();
  gen->add_option("--seed", synth.seed, "corpus seed")->capture_default_str();
  gen->add_option("--width", synth.width, "canvas width")->capture_default_str();
  gen->add_option("--height", synth.height, "canvas height")->capture_default_str();
  gen->add_option("--noise", synth.noise, "per-channel pixel noise")->capture_default_str();
  gen->add_option("--train-counts", synth.train_counts, "images per family for training, comma separated")
      ->delimiter(',')
      ->expected(7);
  gen->add_option("--test-counts", synth.test_counts, "images per family for testing, comma separated")
      ->delimiter(',')
      ->expected(7);
  add_config_option(gen);

  // extract
  PipelineConfig extract_cfg;
  std::string extract_manifest, extract_out;
  auto* extract = app.add_subcommand("extract", "write the feature vector of every manifest image as CSV");
  extract->add_option("--manifest", extract_manifest, "manifest CSV")->required();
  extract->add_option("--out", extract_out, "output CSV")->required();
  add_pipeline_options(extract, extract_cfg);
  add_config_option(extract);

  // train
  PipelineConfig train_cfg;
  HyperParams hp;
  std::string train_manifest, train_model;
  int tree_depth = hp.tree.max_depth;
  auto* tr = app.add_subcommand("train", "train the network and tree on the train split");
  tr->add_option("--manifest", train_manifest, "manifest CSV")->required();
  tr->add_option("--model", train_model, "model file to write")->required();
  tr->add_option("--hidden", hp.hidden, "hidden neurons")->capture_default_str();
  tr->add_option("--eta", hp.train.learning_rate, "learning rate")->capture_default_str();
  tr->add_option("--alpha", hp.train.momentum, "momentum")->capture_default_str();
  tr->add_option("--epsilon", hp.train.epsilon, "stop when the epoch error changes by less")->capture_default_str();
  tr->add_option("--max-epochs", hp.train.max_epochs, "epoch limit")->capture_default_str();
  tr->add_option("--seed", hp.train.seed, "weight initialisation seed")->capture_default_str();
  tr->add_option("--tree-depth", tree_depth, "decision tree depth limit")->capture_default_str();
  add_pipeline_options(tr, train_cfg);
  add_config_option(tr);

  // evaluate
  std::string eval_model, eval_manifest, eval_report;
  auto* ev = app.add_subcommand("evaluate", "score a model on the test split");
  ev->add_option("--model", eval_model, "model file")->required();
  ev->add_option("--manifest", eval_manifest, "manifest CSV")->required();
  ev->add_option("--report", eval_report, "also write the report as JSON");
  add_config_option(ev);

  // classify
  std::string cls_model;
  std::vector<std::string> cls_images;
  auto* cls = app.add_subcommand("classify", "classify image files");
  cls->add_option("--model", cls_model, "model file")->required();
  cls->add_option("images", cls_images, "PPM or BMP images")->required();
  add_config_option(cls);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "fishid: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*gen) {
      const Corpus c = generate_corpus(synth, default_families(), synth_out);
      std::cout << "wrote " << c.entries.size() << " images and " << c.manifest.string() << "\n";
    } else if (*extract) {
      const auto entries = load_manifest(extract_manifest);
      export_features(entries, extract_cfg, extract_out);
      std::cout << "wrote " << entries.size() << " feature rows to " << extract_out << "\n";
    } else if (*tr) {
      hp.tree.max_depth = tree_depth;
      const auto entries = load_manifest(train_manifest);
      const TrainOutcome out = train_bundle(entries, hp, train_cfg);
      for (const std::string& w : out.warnings) std::cerr << "warning: " << w << "\n";
      save_bundle(out.bundle, train_model);
      std::ostringstream arch;
      for (std::size_t i = 0; i < out.bundle.mlp.layer_sizes.size(); ++i) {
        arch << (i ? "-" : "") << out.bundle.mlp.layer_sizes[i];
      }
      std::printf("network %s, %d epochs, final error %.6g, training accuracy %.4f\n", arch.str().c_str(),
                  out.report.epochs, out.report.final_error, out.training_accuracy);
      std::cout << "model written to " << train_model << "\n";
    } else if (*ev) {
      const TrainedBundle bundle = load_bundle(eval_model);
      const EvalReport r = evaluate(bundle, load_manifest(eval_manifest));
      std::cout << format_report(r);
      if (!eval_report.empty()) write_file_atomic(eval_report, report_json(r));
    } else if (*cls) {
      const TrainedBundle bundle = load_bundle(cls_model);
      for (const std::string& path : cls_images) {
        const PipelineResult res = run_pipeline(std::filesystem::path(path), bundle);
        const Classification& c = res.classification;
        std::cout << path << ": " << bundle.registry.classes[c.class_index].name << " (cluster "
                  << c.label.cluster << ", poison " << yes_no(c.label.poison) << ") scores";
        for (const double s : c.scores) std::printf(" %.4f", s);
        std::cout << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "fishid: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fishid: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
