#pragma once

#include <cstdint>
#include <vector>

#include "usdbf/neural/layers.hpp"

namespace usdbf::nn {

// Conv stack: every layer is conv3x3 + batch norm + ReLU except the last,
// which is a plain 1x1 conv contracting to the two I/Q output channels.
// The raw input is concatenated onto the features entering the layer at
// skip_concat_at (default: the final 1x1), realizing the contracting path.
struct NetworkConfig {
  int num_conv_layers = 29;
  int hidden_channels = 64;
  int input_channels = 64;  // Rx channels as network channels
  int input_rows = 3;       // depth rows per window
  int output_channels = 2;  // I and Q
  int skip_concat_at = 28;
  double batchnorm_epsilon = 1e-5;
  bool conv_only = false;  // diagnostic: no BN/ReLU anywhere

  // Reduced geometry that trains in minutes on a CPU.
  static NetworkConfig desk_preset();
  // Full 29-layer geometry.
  static NetworkConfig paper_preset();

  void validate() const;
  int conv_in_channels(int layer) const;
  int conv_out_channels(int layer) const;
  int conv_kernel(int layer) const;
  bool layer_has_bn_relu(int layer) const;
};

struct Layer {
  ConvParams conv;
  bool has_bn_relu = false;
  BatchNormParams bn;
};

struct Network {
  NetworkConfig config;
  Mode mode = Mode::kTrain;
  std::vector<Layer> layers;

  std::size_t parameter_count() const;
};

// Conv weights ~ N(0, 2/(fan_in+fan_out)), biases 0, batch-norm scale 1,
// shift 0, running stats (0, 1). Deterministic per seed.
Network xavier_init(const NetworkConfig& config, std::uint64_t seed);

struct ForwardCache {
  std::vector<Tensor> inputs;   // conv input per layer (after any concat)
  std::vector<Tensor> outputs;  // post-activation output per layer
  std::vector<BatchNormCache> bn;
};

// Runs the stack on a (batch, input_channels, rows, width) tensor and
// returns (batch, output_channels, rows, width). Pass a cache to enable
// backward. Running stats update only in train mode with update_running.
Tensor forward(Network& net, const Tensor& input, ForwardCache* cache = nullptr,
               bool update_running = true);

struct LayerGrads {
  std::vector<float> w, b, gamma, beta;
};

struct NetworkGrads {
  std::vector<LayerGrads> layers;
};

// Parameter gradients for the forward pass recorded in cache.
NetworkGrads backward(const Network& net, const ForwardCache& cache,
                      const Tensor& grad_output);

// p -= lr * (g + weight_decay * p) for conv weights; biases and batch-norm
// parameters take no decay. Throws NumericError on non-finite gradients
// without touching any parameter.
void sgd_step(Network& net, const NetworkGrads& grads, double lr,
              double weight_decay);

}  // namespace usdbf::nn
