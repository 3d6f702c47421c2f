#pragma once

#include <cstdint>
#include <vector>

#include "usdbf/neural/tensor.hpp"

namespace usdbf::nn {

enum class Mode { kTrain, kEval };

// 2-D convolution (cross-correlation), stride 1, zero padding (k-1)/2 so the
// spatial size is preserved. Kernels are 3x3 except the network's final 1x1.
struct ConvParams {
  int in_c = 0, out_c = 0, kernel = 3;
  std::vector<float> w;  // [out_c][in_c][k][k]
  std::vector<float> b;  // [out_c]

  int pad() const { return (kernel - 1) / 2; }
  std::size_t weight_index(int oc, int ic, int ky, int kx) const {
    return ((static_cast<std::size_t>(oc) * in_c + ic) * kernel + ky) * kernel +
           kx;
  }
  void allocate() {
    w.assign(static_cast<std::size_t>(out_c) * in_c * kernel * kernel, 0.0f);
    b.assign(static_cast<std::size_t>(out_c), 0.0f);
  }
};

void conv2d_forward(const ConvParams& p, const Tensor& x, Tensor& y);

// Exact gradients of the forward map. Any of the outputs may be null.
void conv2d_backward(const ConvParams& p, const Tensor& x, const Tensor& gy,
                     Tensor* gx, std::vector<float>* gw,
                     std::vector<float>* gb);

// Per-channel batch normalization over (batch, height, width).
struct BatchNormParams {
  int channels = 0;
  double epsilon = 1e-5;
  double momentum = 0.9;  // running <- momentum * running + (1-m) * batch
  std::vector<float> gamma, beta;
  std::vector<float> running_mean, running_var;

  void allocate() {
    gamma.assign(static_cast<std::size_t>(channels), 1.0f);
    beta.assign(static_cast<std::size_t>(channels), 0.0f);
    running_mean.assign(static_cast<std::size_t>(channels), 0.0f);
    running_var.assign(static_cast<std::size_t>(channels), 1.0f);
  }
};

struct BatchNormCache {
  std::vector<double> inv_std;  // per channel, 1/sqrt(var + eps)
  Tensor xhat;
};

// Train mode normalizes by batch statistics (population variance) and, when
// update_running is set, folds them into the running estimates. Eval mode
// normalizes by the running estimates.
void batchnorm_forward(BatchNormParams& p, const Tensor& x, Tensor& y,
                       Mode mode, BatchNormCache* cache,
                       bool update_running = true);

// Backward through a train-mode forward (batch statistics).
void batchnorm_backward(const BatchNormParams& p, const BatchNormCache& cache,
                        const Tensor& gy, Tensor& gx,
                        std::vector<float>& ggamma, std::vector<float>& gbeta);

void relu_forward(const Tensor& x, Tensor& y);
// The mask is recovered from the forward output (y > 0).
void relu_backward(const Tensor& y, const Tensor& gy, Tensor& gx);

// Mean squared error over all elements; optionally writes
// d(loss)/d(pred) = 2 (pred - target) / count.
double mse_loss(const Tensor& pred, const Tensor& target, Tensor* grad);

}  // namespace usdbf::nn
