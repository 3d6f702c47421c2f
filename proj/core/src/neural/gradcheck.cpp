#include "usdbf/neural/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "usdbf/errors.hpp"
#include "usdbf/util/rng.hpp"

namespace usdbf::nn {

namespace {

double loss_at(Network net, const Tensor& input, const Tensor& target) {
  net.mode = Mode::kTrain;
  const Tensor pred = forward(net, input, nullptr, false);
  return mse_loss(pred, target, nullptr);
}

struct ParamSlot {
  int layer;
  int kind;  // 0 = conv w, 1 = conv b, 2 = bn gamma, 3 = bn beta
  std::size_t offset;
};

std::vector<float>& param_vec(Network& net, const ParamSlot& s) {
  Layer& layer = net.layers[static_cast<std::size_t>(s.layer)];
  switch (s.kind) {
    case 0: return layer.conv.w;
    case 1: return layer.conv.b;
    case 2: return layer.bn.gamma;
    default: return layer.bn.beta;
  }
}

const std::vector<float>& grad_vec(const NetworkGrads& grads,
                                   const ParamSlot& s) {
  const LayerGrads& lg = grads.layers[static_cast<std::size_t>(s.layer)];
  switch (s.kind) {
    case 0: return lg.w;
    case 1: return lg.b;
    case 2: return lg.gamma;
    default: return lg.beta;
  }
}

}  // namespace

double gradient_check(const Network& net, const Tensor& input,
                      const Tensor& target, double eps) {
  if (!(eps > 0.0)) throw ConfigError("gradient_check: eps must be positive");

  // Analytic gradients from one train-mode pass.
  Network work = net;
  work.mode = Mode::kTrain;
  ForwardCache cache;
  const Tensor pred = forward(work, input, &cache, false);
  Tensor grad_out;
  mse_loss(pred, target, &grad_out);
  const NetworkGrads grads = backward(work, cache, grad_out);

  std::vector<ParamSlot> slots;
  for (int i = 0; i < net.config.num_conv_layers; ++i) {
    const Layer& layer = net.layers[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < layer.conv.w.size(); ++k)
      slots.push_back({i, 0, k});
    for (std::size_t k = 0; k < layer.conv.b.size(); ++k)
      slots.push_back({i, 1, k});
    if (layer.has_bn_relu) {
      for (std::size_t k = 0; k < layer.bn.gamma.size(); ++k)
        slots.push_back({i, 2, k});
      for (std::size_t k = 0; k < layer.bn.beta.size(); ++k)
        slots.push_back({i, 3, k});
    }
  }

  double worst = 0.0;
  for (const auto& slot : slots) {
    Network plus = net;
    Network minus = net;
    float& pv = param_vec(plus, slot)[slot.offset];
    float& mv = param_vec(minus, slot)[slot.offset];
    const double p0 = pv;
    pv = static_cast<float>(p0 + eps);
    mv = static_cast<float>(p0 - eps);
    const double step = static_cast<double>(pv) - static_cast<double>(mv);
    const double fd =
        (loss_at(std::move(plus), input, target) -
         loss_at(std::move(minus), input, target)) / step;
    const double ga = grad_vec(grads, slot)[slot.offset];
    const double denom = std::max({std::abs(ga), std::abs(fd), 1e-3});
    worst = std::max(worst, std::abs(ga - fd) / denom);
  }
  return worst;
}

double gradient_check(const Network& net, double eps, std::uint64_t seed,
                      int batch, int rows, int width) {
  Rng rng(derive_seed(seed, 0x67726164));
  Tensor input(batch, net.config.input_channels, rows, width);
  for (auto& x : input.v) x = static_cast<float>(rng.normal());
  Tensor target(batch, net.config.output_channels, rows, width);
  for (auto& x : target.v) x = static_cast<float>(rng.normal());
  return gradient_check(net, input, target, eps);
}

}  // namespace usdbf::nn
