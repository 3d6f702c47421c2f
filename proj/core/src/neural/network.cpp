#include "usdbf/neural/network.hpp"

#include <cmath>

#include "usdbf/errors.hpp"
#include "usdbf/util/rng.hpp"

namespace usdbf::nn {

NetworkConfig NetworkConfig::desk_preset() {
  NetworkConfig c;
  c.num_conv_layers = 7;
  c.hidden_channels = 32;
  c.skip_concat_at = 6;
  return c;
}

NetworkConfig NetworkConfig::paper_preset() {
  NetworkConfig c;
  c.num_conv_layers = 29;
  c.hidden_channels = 64;
  c.skip_concat_at = 28;
  return c;
}

void NetworkConfig::validate() const {
  if (num_conv_layers < 2)
    throw ConfigError("network: need at least two conv layers");
  if (hidden_channels < 1 || input_channels < 1 || output_channels < 1)
    throw ConfigError("network: channel counts must be positive");
  if (input_rows < 1) throw ConfigError("network: input rows must be positive");
  if (skip_concat_at < 1 || skip_concat_at >= num_conv_layers)
    throw ConfigError("network: skip_concat_at must be in [1, layers)");
  if (batchnorm_epsilon <= 0.0)
    throw ConfigError("network: batchnorm epsilon must be positive");
}

int NetworkConfig::conv_in_channels(int layer) const {
  int c = layer == 0 ? input_channels : hidden_channels;
  if (layer == skip_concat_at) c += input_channels;
  return c;
}

int NetworkConfig::conv_out_channels(int layer) const {
  return layer == num_conv_layers - 1 ? output_channels : hidden_channels;
}

int NetworkConfig::conv_kernel(int layer) const {
  return layer == num_conv_layers - 1 ? 1 : 3;
}

bool NetworkConfig::layer_has_bn_relu(int layer) const {
  return !conv_only && layer != num_conv_layers - 1;
}

std::size_t Network::parameter_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers) {
    count += layer.conv.w.size() + layer.conv.b.size();
    if (layer.has_bn_relu)
      count += layer.bn.gamma.size() + layer.bn.beta.size();
  }
  return count;
}

Network xavier_init(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Network net;
  net.config = config;
  net.layers.resize(static_cast<std::size_t>(config.num_conv_layers));
  for (int i = 0; i < config.num_conv_layers; ++i) {
    Layer& layer = net.layers[static_cast<std::size_t>(i)];
    layer.conv.in_c = config.conv_in_channels(i);
    layer.conv.out_c = config.conv_out_channels(i);
    layer.conv.kernel = config.conv_kernel(i);
    layer.conv.allocate();

    const double fan_in =
        static_cast<double>(layer.conv.in_c) * layer.conv.kernel * layer.conv.kernel;
    const double fan_out =
        static_cast<double>(layer.conv.out_c) * layer.conv.kernel * layer.conv.kernel;
    const double stddev = std::sqrt(2.0 / (fan_in + fan_out));
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    for (auto& wv : layer.conv.w)
      wv = static_cast<float>(stddev * rng.normal());

    layer.has_bn_relu = config.layer_has_bn_relu(i);
    if (layer.has_bn_relu) {
      layer.bn.channels = layer.conv.out_c;
      layer.bn.epsilon = config.batchnorm_epsilon;
      layer.bn.allocate();
    }
  }
  return net;
}

namespace {

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  Tensor out(a.n, a.c + b.c, a.h, a.w);
  for (int in = 0; in < a.n; ++in) {
    for (int c = 0; c < a.c; ++c) {
      const float* src = a.plane(in, c);
      std::copy(src, src + a.plane_size(), out.plane(in, c));
    }
    for (int c = 0; c < b.c; ++c) {
      const float* src = b.plane(in, c);
      std::copy(src, src + b.plane_size(), out.plane(in, a.c + c));
    }
  }
  return out;
}

}  // namespace

Tensor forward(Network& net, const Tensor& input, ForwardCache* cache,
               bool update_running) {
  const NetworkConfig& cfg = net.config;
  if (input.c != cfg.input_channels)
    throw DimensionError("forward: input channel count mismatch");
  if (input.n < 1 || input.h < 1 || input.w < 1)
    throw DimensionError("forward: empty input");

  const int depth = cfg.num_conv_layers;
  if (cache) {
    cache->inputs.assign(static_cast<std::size_t>(depth), Tensor());
    cache->outputs.assign(static_cast<std::size_t>(depth), Tensor());
    cache->bn.assign(static_cast<std::size_t>(depth), BatchNormCache());
  }

  Tensor features = input;
  for (int i = 0; i < depth; ++i) {
    Layer& layer = net.layers[static_cast<std::size_t>(i)];
    Tensor conv_in = (i == cfg.skip_concat_at)
                         ? concat_channels(features, input)
                         : std::move(features);
    Tensor conv_out;
    conv2d_forward(layer.conv, conv_in, conv_out);
    Tensor out;
    if (layer.has_bn_relu) {
      Tensor bn_out;
      batchnorm_forward(layer.bn, conv_out, bn_out, net.mode,
                        cache ? &cache->bn[static_cast<std::size_t>(i)] : nullptr,
                        update_running && net.mode == Mode::kTrain);
      relu_forward(bn_out, out);
    } else {
      out = std::move(conv_out);
    }
    if (cache) {
      cache->inputs[static_cast<std::size_t>(i)] = std::move(conv_in);
      cache->outputs[static_cast<std::size_t>(i)] = out;
    }
    features = std::move(out);
  }
  return features;
}

NetworkGrads backward(const Network& net, const ForwardCache& cache,
                      const Tensor& grad_output) {
  const NetworkConfig& cfg = net.config;
  const int depth = cfg.num_conv_layers;
  if (static_cast<int>(cache.inputs.size()) != depth)
    throw DimensionError("backward: cache does not match network");

  NetworkGrads grads;
  grads.layers.resize(static_cast<std::size_t>(depth));

  Tensor g = grad_output;
  for (int i = depth - 1; i >= 0; --i) {
    const Layer& layer = net.layers[static_cast<std::size_t>(i)];
    LayerGrads& lg = grads.layers[static_cast<std::size_t>(i)];

    if (layer.has_bn_relu) {
      Tensor g_relu;
      relu_backward(cache.outputs[static_cast<std::size_t>(i)], g, g_relu);
      Tensor g_bn;
      batchnorm_backward(layer.bn, cache.bn[static_cast<std::size_t>(i)],
                         g_relu, g_bn, lg.gamma, lg.beta);
      g = std::move(g_bn);
    }

    Tensor gx;
    const bool need_gx = i > 0;
    conv2d_backward(layer.conv, cache.inputs[static_cast<std::size_t>(i)], g,
                    need_gx ? &gx : nullptr, &lg.w, &lg.b);
    if (!need_gx) break;

    if (i == cfg.skip_concat_at) {
      // Only the feature half of the concatenated gradient flows back;
      // the raw-input half ends at the network boundary.
      Tensor trimmed(gx.n, gx.c - cfg.input_channels, gx.h, gx.w);
      for (int in = 0; in < gx.n; ++in)
        for (int c = 0; c < trimmed.c; ++c) {
          const float* src = gx.plane(in, c);
          std::copy(src, src + gx.plane_size(), trimmed.plane(in, c));
        }
      g = std::move(trimmed);
    } else {
      g = std::move(gx);
    }
  }
  return grads;
}

void sgd_step(Network& net, const NetworkGrads& grads, double lr,
              double weight_decay) {
  if (grads.layers.size() != net.layers.size())
    throw DimensionError("sgd: gradient layout mismatch");

  // Validate before mutating anything so a bad step leaves the network
  // untouched.
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerGrads& lg = grads.layers[i];
    const Layer& layer = net.layers[i];
    if (lg.w.size() != layer.conv.w.size() ||
        lg.b.size() != layer.conv.b.size())
      throw DimensionError("sgd: gradient shape mismatch");
    auto check = [](const std::vector<float>& v) {
      for (float x : v)
        if (!std::isfinite(x))
          throw NumericError("sgd: non-finite gradient, step aborted");
    };
    check(lg.w);
    check(lg.b);
    if (layer.has_bn_relu) {
      if (lg.gamma.size() != layer.bn.gamma.size() ||
          lg.beta.size() != layer.bn.beta.size())
        throw DimensionError("sgd: gradient shape mismatch");
      check(lg.gamma);
      check(lg.beta);
    }
  }

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    Layer& layer = net.layers[i];
    const LayerGrads& lg = grads.layers[i];
    for (std::size_t k = 0; k < layer.conv.w.size(); ++k)
      layer.conv.w[k] = static_cast<float>(
          layer.conv.w[k] -
          lr * (lg.w[k] + weight_decay * layer.conv.w[k]));
    for (std::size_t k = 0; k < layer.conv.b.size(); ++k)
      layer.conv.b[k] = static_cast<float>(layer.conv.b[k] - lr * lg.b[k]);
    if (layer.has_bn_relu) {
      for (std::size_t k = 0; k < layer.bn.gamma.size(); ++k)
        layer.bn.gamma[k] =
            static_cast<float>(layer.bn.gamma[k] - lr * lg.gamma[k]);
      for (std::size_t k = 0; k < layer.bn.beta.size(); ++k)
        layer.bn.beta[k] =
            static_cast<float>(layer.bn.beta[k] - lr * lg.beta[k]);
    }
  }
}

}  // namespace usdbf::nn
