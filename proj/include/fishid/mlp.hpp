#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fishid {

// Dense row-major matrix. In a weight matrix row j holds the weights into
// neuron j of the next layer; the last column is the bias.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct TrainConfig {
  double learning_rate = 0.3;  // eta
  double momentum = 0.9;       // alpha, in [0, 1)
  double epsilon = 1e-6;       // stop when consecutive epoch-mean errors differ by less
  int max_epochs = 500;
  std::uint64_t seed = 7;
  double init_scale = 0.5;
};

void validate(const TrainConfig& cfg);

// Fully connected sigmoid network: layer_sizes = {inputs, hidden..., outputs}.
struct MlpModel {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;   // weights[l] is (sizes[l+1]) x (sizes[l] + 1)
  std::vector<Matrix> momentum;  // previous weight change, same shapes

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
};

using Gradient = std::vector<Matrix>;

struct TrainingSample {
  std::vector<double> x;
  std::vector<double> target;
};

struct TrainReport {
  int epochs = 0;
  double final_error = 0;
  std::vector<double> error_trace;  // epoch mean of the per-sample error

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

struct Prediction {
  std::vector<double> scores;
  std::size_t index = 0;
};

double sigmoid(double z) noexcept;

// Lippmann's sizing guidance: a level feeding another hidden level should
// not be outgrown more than threefold. Returns one message per violation.
std::vector<std::string> architecture_warnings(std::span<const std::size_t> layer_sizes);

MlpModel init_mlp(std::span<const std::size_t> layer_sizes, const TrainConfig& cfg);

std::vector<double> forward(const MlpModel& model, std::span<const double> x);

// Half the squared error summed over output neurons.
double sample_error(std::span<const double> target, std::span<const double> output);

Gradient backward(const MlpModel& model, const TrainingSample& sample);

// Generalized delta rule with momentum:
//   dw(t+1) = -eta * grad + alpha * dw(t);  w += dw(t+1)
void update_weights(MlpModel& model, const Gradient& gradient, const TrainConfig& cfg);

// Online training with per-epoch shuffling.
TrainReport train(MlpModel& model, std::span<const TrainingSample> samples, const TrainConfig& cfg);

Prediction predict(const MlpModel& model, std::span<const double> x);

std::size_t argmax(std::span<const double> values);

}  // namespace fishid
