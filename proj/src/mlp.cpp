#include "fishid/mlp.hpp"

#include <cmath>
#include <numeric>

#include "fishid/error.hpp"
#include "fishid/rng.hpp"

namespace fishid {

namespace {

constexpr const char* kStage = "mlp";

[[noreturn]] void mismatch(const std::string& what) { throw Error(ErrorKind::DimensionMismatch, kStage, what); }

// Activations of every layer, input first.
std::vector<std::vector<double>> forward_all(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.input_size()) {
    mismatch("input has " + std::to_string(x.size()) + " values, network expects " + std::to_string(model.input_size()));
  }
  std::vector<std::vector<double>> acts;
  acts.reserve(model.layer_sizes.size());
  acts.emplace_back(x.begin(), x.end());
  for (const Matrix& w : model.weights) {
    const std::vector<double>& in = acts.back();
    std::vector<double> out(w.rows);
    for (std::size_t j = 0; j < w.rows; ++j) {
      const double* row = &w.data[j * w.cols];
      double z = row[w.cols - 1];
      for (std::size_t i = 0; i < in.size(); ++i) z += row[i] * in[i];
      out[j] = sigmoid(z);
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

void check_shapes(const MlpModel& model, const Gradient& g) {
  if (g.size() != model.weights.size()) mismatch("gradient layer count differs from the model");
  for (std::size_t l = 0; l < g.size(); ++l) {
    if (g[l].rows != model.weights[l].rows || g[l].cols != model.weights[l].cols) {
      mismatch("gradient shape differs from the model at layer " + std::to_string(l));
    }
  }
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw Error(ErrorKind::InvalidArgument, kStage, "learning rate must be > 0");
  }
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, kStage, "momentum must be in [0, 1)");
  }
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, kStage, "epsilon must be > 0");
  if (cfg.max_epochs <= 0) throw Error(ErrorKind::InvalidArgument, kStage, "max_epochs must be > 0");
  if (!(cfg.init_scale > 0.0)) throw Error(ErrorKind::InvalidArgument, kStage, "init_scale must be > 0");
}

double sigmoid(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<std::string> architecture_warnings(std::span<const std::size_t> layer_sizes) {
  std::vector<std::string> warnings;
  for (std::size_t l = 0; l + 2 < layer_sizes.size(); ++l) {
    if (layer_sizes[l + 1] > 3 * layer_sizes[l]) {
      warnings.push_back("level " + std::to_string(l + 2) + " has " + std::to_string(layer_sizes[l + 1]) +
                         " nodes, more than three times the " + std::to_string(layer_sizes[l]) + " of level " +
                         std::to_string(l + 1));
    }
  }
  return warnings;
}

MlpModel init_mlp(std::span<const std::size_t> layer_sizes, const TrainConfig& cfg) {
  if (layer_sizes.size() < 2) throw Error(ErrorKind::BadArchitecture, kStage, "need at least input and output levels");
  for (const std::size_t n : layer_sizes) {
    if (n == 0) throw Error(ErrorKind::BadArchitecture, kStage, "every level needs at least one node");
  }
  if (!(cfg.init_scale > 0.0)) throw Error(ErrorKind::InvalidArgument, kStage, "init_scale must be > 0");

  MlpModel model;
  model.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  Rng rng(cfg.seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    Matrix w(layer_sizes[l + 1], layer_sizes[l] + 1);
    for (double& v : w.data) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
    model.momentum.emplace_back(w.rows, w.cols, 0.0);
    model.weights.push_back(std::move(w));
  }
  return model;
}

std::vector<double> forward(const MlpModel& model, std::span<const double> x) {
  return std::move(forward_all(model, x).back());
}

double sample_error(std::span<const double> target, std::span<const double> output) {
  if (target.size() != output.size()) mismatch("target and output lengths differ");
  double sum = 0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double d = target[k] - output[k];
    sum += d * d;
  }
  return 0.5 * sum;
}

Gradient backward(const MlpModel& model, const TrainingSample& sample) {
  if (sample.target.size() != model.output_size()) mismatch("target length differs from the output level");
  const auto acts = forward_all(model, sample.x);
  const std::size_t layers = model.weights.size();

  Gradient grad;
  grad.reserve(layers);
  for (const Matrix& w : model.weights) grad.emplace_back(w.rows, w.cols, 0.0);

  std::vector<double> delta(model.output_size());
  const std::vector<double>& y = acts.back();
  for (std::size_t k = 0; k < delta.size(); ++k) delta[k] = (y[k] - sample.target[k]) * y[k] * (1.0 - y[k]);

  for (std::size_t l = layers; l-- > 0;) {
    const std::vector<double>& in = acts[l];
    Matrix& g = grad[l];
    for (std::size_t j = 0; j < g.rows; ++j) {
      for (std::size_t i = 0; i < in.size(); ++i) g(j, i) = delta[j] * in[i];
      g(j, in.size()) = delta[j];
    }
    if (l == 0) break;
    const Matrix& w = model.weights[l];
    std::vector<double> prev(in.size(), 0.0);
    for (std::size_t i = 0; i < in.size(); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < w.rows; ++j) s += w(j, i) * delta[j];
      prev[i] = s * in[i] * (1.0 - in[i]);
    }
    delta = std::move(prev);
  }
  return grad;
}

void update_weights(MlpModel& model, const Gradient& gradient, const TrainConfig& cfg) {
  check_shapes(model, gradient);
  for (std::size_t l = 0; l < gradient.size(); ++l) {
    std::vector<double>& w = model.weights[l].data;
    std::vector<double>& m = model.momentum[l].data;
    const std::vector<double>& g = gradient[l].data;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double change = -cfg.learning_rate * g[i] + cfg.momentum * m[i];
      w[i] += change;
      m[i] = change;
    }
  }
}

TrainReport train(MlpModel& model, std::span<const TrainingSample> samples, const TrainConfig& cfg) {
  validate(cfg);
  if (samples.empty()) throw Error(ErrorKind::EmptyTrainingSet, kStage, "no training samples");
  for (const TrainingSample& s : samples) {
    if (s.x.size() != model.input_size() || s.target.size() != model.output_size()) {
      mismatch("training sample dimensions do not match the network");
    }
  }

  // Shuffling draws from its own stream so it does not alias the init stream.
  Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double total = 0;
    for (const std::size_t i : order) {
      const TrainingSample& s = samples[i];
      const double e = sample_error(s.target, forward(model, s.x));
      if (!std::isfinite(e)) {
        throw Error(ErrorKind::NonFiniteError, kStage, "sample error became non-finite in epoch " + std::to_string(epoch + 1));
      }
      total += e;
      update_weights(model, backward(model, s), cfg);
    }
    const double mean = total / double(samples.size());
    report.error_trace.push_back(mean);
    report.epochs = epoch + 1;
    report.final_error = mean;
    const std::size_t n = report.error_trace.size();
    if (n >= 2 && std::abs(report.error_trace[n - 1] - report.error_trace[n - 2]) < cfg.epsilon) break;
  }
  return report;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Prediction predict(const MlpModel& model, std::span<const double> x) {
  Prediction p;
  p.scores = forward(model, x);
  p.index = argmax(p.scores);
  return p;
}

}  // namespace fishid
