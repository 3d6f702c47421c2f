#pragma once

#include <cstddef>
#include <vector>

namespace usdbf::nn {

// Dense NCHW float32 tensor. Single samples use n = 1.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<float> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(n_) * c_ * h_ * w_) {}

  std::size_t size() const { return v.size(); }
  int plane_size() const { return h * w; }

  std::size_t index(int in, int ic, int iy, int ix) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix;
  }
  float& at(int in, int ic, int iy, int ix) { return v[index(in, ic, iy, ix)]; }
  float at(int in, int ic, int iy, int ix) const {
    return v[index(in, ic, iy, ix)];
  }

  float* plane(int in, int ic) {
    return &v[(static_cast<std::size_t>(in) * c + ic) * plane_size()];
  }
  const float* plane(int in, int ic) const {
    return &v[(static_cast<std::size_t>(in) * c + ic) * plane_size()];
  }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  void zero() { std::fill(v.begin(), v.end(), 0.0f); }
};

}  // namespace usdbf::nn
