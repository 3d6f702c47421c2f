#include "usdbf/neural/layers.hpp"

#include <algorithm>
#include <cmath>

#include "usdbf/errors.hpp"
#include "usdbf/util/parallel.hpp"

namespace usdbf::nn {

void conv2d_forward(const ConvParams& p, const Tensor& x, Tensor& y) {
  if (x.c != p.in_c) throw DimensionError("conv: input channel mismatch");
  if (!(p.kernel == 1 || p.kernel == 3))
    throw DimensionError("conv: kernel must be 1 or 3");
  y = Tensor(x.n, p.out_c, x.h, x.w);

  const int H = x.h, W = x.w, K = p.kernel, P = p.pad();
  parallel_for(0, static_cast<std::int64_t>(x.n) * p.out_c,
               [&](std::int64_t idx) {
    const int in = static_cast<int>(idx / p.out_c);
    const int oc = static_cast<int>(idx % p.out_c);
    std::vector<double> acc(static_cast<std::size_t>(H) * W,
                            static_cast<double>(p.b[oc]));
    for (int ic = 0; ic < p.in_c; ++ic) {
      const float* in_plane = x.plane(in, ic);
      for (int ky = 0; ky < K; ++ky)
        for (int kx = 0; kx < K; ++kx) {
          const double wv = p.w[p.weight_index(oc, ic, ky, kx)];
          if (wv == 0.0) continue;
          const int dy = ky - P, dx = kx - P;
          const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
          const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
          for (int yy = y0; yy < y1; ++yy) {
            double* arow = &acc[static_cast<std::size_t>(yy) * W];
            const float* irow = in_plane + static_cast<std::size_t>(yy + dy) * W + dx;
            for (int xx = x0; xx < x1; ++xx) arow[xx] += wv * irow[xx];
          }
        }
    }
    float* out = y.plane(in, oc);
    for (int k = 0; k < H * W; ++k) out[k] = static_cast<float>(acc[k]);
  });
}

void conv2d_backward(const ConvParams& p, const Tensor& x, const Tensor& gy,
                     Tensor* gx, std::vector<float>* gw,
                     std::vector<float>* gb) {
  if (x.c != p.in_c || gy.c != p.out_c || gy.n != x.n || gy.h != x.h ||
      gy.w != x.w)
    throw DimensionError("conv backward: shape mismatch");

  const int H = x.h, W = x.w, K = p.kernel, P = p.pad();

  if (gb) {
    gb->assign(static_cast<std::size_t>(p.out_c), 0.0f);
    for (int oc = 0; oc < p.out_c; ++oc) {
      double acc = 0.0;
      for (int in = 0; in < x.n; ++in) {
        const float* g = gy.plane(in, oc);
        for (int k = 0; k < H * W; ++k) acc += g[k];
      }
      (*gb)[oc] = static_cast<float>(acc);
    }
  }

  if (gw) {
    gw->assign(p.w.size(), 0.0f);
    // Disjoint gw slices per output channel.
    parallel_for(0, p.out_c, [&](std::int64_t oc) {
      std::vector<double> acc(static_cast<std::size_t>(p.in_c) * K * K, 0.0);
      for (int in = 0; in < x.n; ++in) {
        const float* g = gy.plane(in, static_cast<int>(oc));
        for (int ic = 0; ic < p.in_c; ++ic) {
          const float* in_plane = x.plane(in, ic);
          for (int ky = 0; ky < K; ++ky)
            for (int kx = 0; kx < K; ++kx) {
              const int dy = ky - P, dx = kx - P;
              const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
              const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
              double s = 0.0;
              for (int yy = y0; yy < y1; ++yy) {
                const float* grow = g + static_cast<std::size_t>(yy) * W;
                const float* irow =
                    in_plane + static_cast<std::size_t>(yy + dy) * W + dx;
                for (int xx = x0; xx < x1; ++xx) s += grow[xx] * irow[xx];
              }
              acc[(static_cast<std::size_t>(ic) * K + ky) * K + kx] += s;
            }
        }
      }
      for (int ic = 0; ic < p.in_c; ++ic)
        for (int ky = 0; ky < K; ++ky)
          for (int kx = 0; kx < K; ++kx)
            (*gw)[p.weight_index(static_cast<int>(oc), ic, ky, kx)] =
                static_cast<float>(
                    acc[(static_cast<std::size_t>(ic) * K + ky) * K + kx]);
    });
  }

  if (gx) {
    *gx = Tensor(x.n, x.c, H, W);
    // Full correlation with the flipped kernel; disjoint slices per (n, ic).
    parallel_for(0, static_cast<std::int64_t>(x.n) * p.in_c,
                 [&](std::int64_t idx) {
      const int in = static_cast<int>(idx / p.in_c);
      const int ic = static_cast<int>(idx % p.in_c);
      std::vector<double> acc(static_cast<std::size_t>(H) * W, 0.0);
      for (int oc = 0; oc < p.out_c; ++oc) {
        const float* g = gy.plane(in, oc);
        for (int ky = 0; ky < K; ++ky)
          for (int kx = 0; kx < K; ++kx) {
            const double wv = p.w[p.weight_index(oc, ic, ky, kx)];
            if (wv == 0.0) continue;
            // gx[iy][ix] += w[ky][kx] * gy[iy - ky + P][ix - kx + P]
            const int dy = P - ky, dx = P - kx;
            const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
            const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
            for (int yy = y0; yy < y1; ++yy) {
              double* arow = &acc[static_cast<std::size_t>(yy) * W];
              const float* grow = g + static_cast<std::size_t>(yy + dy) * W + dx;
              for (int xx = x0; xx < x1; ++xx) arow[xx] += wv * grow[xx];
            }
          }
      }
      float* out = gx->plane(in, ic);
      for (int k = 0; k < H * W; ++k) out[k] = static_cast<float>(acc[k]);
    });
  }
}

void batchnorm_forward(BatchNormParams& p, const Tensor& x, Tensor& y,
                       Mode mode, BatchNormCache* cache, bool update_running) {
  if (x.c != p.channels) throw DimensionError("batchnorm: channel mismatch");
  const std::int64_t m = static_cast<std::int64_t>(x.n) * x.h * x.w;
  if (m < 1) throw DimensionError("batchnorm: empty feature map");

  y = Tensor(x.n, x.c, x.h, x.w);
  if (cache) {
    cache->inv_std.assign(static_cast<std::size_t>(p.channels), 0.0);
    cache->xhat = Tensor(x.n, x.c, x.h, x.w);
  }

  std::vector<double> mean(static_cast<std::size_t>(p.channels));
  std::vector<double> var(static_cast<std::size_t>(p.channels));

  if (mode == Mode::kTrain) {
    parallel_for(0, p.channels, [&](std::int64_t ci) {
      const int c = static_cast<int>(ci);
      double s = 0.0;
      for (int in = 0; in < x.n; ++in) {
        const float* plane = x.plane(in, c);
        for (int k = 0; k < x.plane_size(); ++k) s += plane[k];
      }
      const double mu = s / static_cast<double>(m);
      double ss = 0.0;
      for (int in = 0; in < x.n; ++in) {
        const float* plane = x.plane(in, c);
        for (int k = 0; k < x.plane_size(); ++k) {
          const double d = plane[k] - mu;
          ss += d * d;
        }
      }
      mean[c] = mu;
      var[c] = ss / static_cast<double>(m);  // population variance
    });
    if (update_running) {
      for (int c = 0; c < p.channels; ++c) {
        p.running_mean[c] = static_cast<float>(
            p.momentum * p.running_mean[c] + (1.0 - p.momentum) * mean[c]);
        p.running_var[c] = static_cast<float>(
            p.momentum * p.running_var[c] + (1.0 - p.momentum) * var[c]);
      }
    }
  } else {
    for (int c = 0; c < p.channels; ++c) {
      mean[c] = p.running_mean[c];
      var[c] = p.running_var[c];
    }
  }

  parallel_for(0, static_cast<std::int64_t>(x.n) * p.channels,
               [&](std::int64_t idx) {
    const int in = static_cast<int>(idx / p.channels);
    const int c = static_cast<int>(idx % p.channels);
    const double inv = 1.0 / std::sqrt(var[c] + p.epsilon);
    const double g = p.gamma[c], b = p.beta[c], mu = mean[c];
    const float* src = x.plane(in, c);
    float* dst = y.plane(in, c);
    float* xh = cache ? cache->xhat.plane(in, c) : nullptr;
    for (int k = 0; k < x.plane_size(); ++k) {
      const double xhat = (src[k] - mu) * inv;
      if (xh) xh[k] = static_cast<float>(xhat);
      dst[k] = static_cast<float>(g * xhat + b);
    }
    if (cache && in == 0) cache->inv_std[c] = inv;
  });
}

void batchnorm_backward(const BatchNormParams& p, const BatchNormCache& cache,
                        const Tensor& gy, Tensor& gx,
                        std::vector<float>& ggamma, std::vector<float>& gbeta) {
  if (gy.c != p.channels || !gy.same_shape(cache.xhat))
    throw DimensionError("batchnorm backward: shape mismatch");
  const double m = static_cast<double>(gy.n) * gy.h * gy.w;

  gx = Tensor(gy.n, gy.c, gy.h, gy.w);
  ggamma.assign(static_cast<std::size_t>(p.channels), 0.0f);
  gbeta.assign(static_cast<std::size_t>(p.channels), 0.0f);

  parallel_for(0, p.channels, [&](std::int64_t ci) {
    const int c = static_cast<int>(ci);
    double sum_g = 0.0, sum_gx = 0.0;
    for (int in = 0; in < gy.n; ++in) {
      const float* g = gy.plane(in, c);
      const float* xh = cache.xhat.plane(in, c);
      for (int k = 0; k < gy.plane_size(); ++k) {
        sum_g += g[k];
        sum_gx += static_cast<double>(g[k]) * xh[k];
      }
    }
    ggamma[c] = static_cast<float>(sum_gx);
    gbeta[c] = static_cast<float>(sum_g);

    // dx = (gamma * inv_std / m) * (m*gy - sum(gy) - xhat * sum(gy*xhat))
    const double scale = p.gamma[c] * cache.inv_std[c] / m;
    for (int in = 0; in < gy.n; ++in) {
      const float* g = gy.plane(in, c);
      const float* xh = cache.xhat.plane(in, c);
      float* out = gx.plane(in, c);
      for (int k = 0; k < gy.plane_size(); ++k) {
        out[k] = static_cast<float>(
            scale * (m * g[k] - sum_g - xh[k] * sum_gx));
      }
    }
  });
}

void relu_forward(const Tensor& x, Tensor& y) {
  y = Tensor(x.n, x.c, x.h, x.w);
  for (std::size_t k = 0; k < x.size(); ++k)
    y.v[k] = x.v[k] > 0.0f ? x.v[k] : 0.0f;
}

void relu_backward(const Tensor& y, const Tensor& gy, Tensor& gx) {
  if (!y.same_shape(gy)) throw DimensionError("relu backward: shape mismatch");
  gx = Tensor(y.n, y.c, y.h, y.w);
  for (std::size_t k = 0; k < y.size(); ++k)
    gx.v[k] = y.v[k] > 0.0f ? gy.v[k] : 0.0f;
}

double mse_loss(const Tensor& pred, const Tensor& target, Tensor* grad) {
  if (!pred.same_shape(target)) throw DimensionError("mse: shape mismatch");
  const double count = static_cast<double>(pred.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double d = static_cast<double>(pred.v[k]) - target.v[k];
    acc += d * d;
  }
  if (grad) {
    *grad = Tensor(pred.n, pred.c, pred.h, pred.w);
    const double s = 2.0 / count;
    for (std::size_t k = 0; k < pred.size(); ++k)
      grad->v[k] = static_cast<float>(
          s * (static_cast<double>(pred.v[k]) - target.v[k]));
  }
  return acc / count;
}

}  // namespace usdbf::nn
