#include "usdbf/neural/infer.hpp"

#include <algorithm>
#include <cmath>

#include "usdbf/errors.hpp"

namespace usdbf::nn {

double frame_scale(const TimeAlignedCube& cube) {
  double ss = 0.0;
  std::int64_t count = 0;
  for (float x : cube.data) {
    if (x != 0.0f) {
      ss += static_cast<double>(x) * x;
      ++count;
    }
  }
  if (count == 0 || ss == 0.0) return 1.0;
  return 1.0 / std::sqrt(ss / static_cast<double>(count));
}

void fill_input_window(const TimeAlignedCube& cube, int n0, double scale,
                       Tensor& out, int slot) {
  const int J = cube.rx_channels, L = cube.scan_lines;
  const int rows = out.h;
  if (out.c != J || out.w != L || n0 < 0 ||
      n0 + rows > cube.depth_samples)
    throw DimensionError("infer: window does not fit cube");
  for (int j = 0; j < J; ++j)
    for (int r = 0; r < rows; ++r) {
      float* dst = out.plane(slot, j) + static_cast<std::size_t>(r) * L;
      for (int l = 0; l < L; ++l)
        dst[l] = static_cast<float>(scale * cube.at(l, j, n0 + r));
    }
}

std::vector<int> window_starts(int depth_samples, int rows) {
  std::vector<int> starts;
  for (int n = 0; n + rows <= depth_samples; n += rows) starts.push_back(n);
  const int covered = starts.empty() ? 0 : starts.back() + rows;
  if (covered < depth_samples) starts.push_back(depth_samples - rows);
  return starts;
}

IQImage infer_frame(Network& net, const TimeAlignedCube& masked_cube) {
  const int L = masked_cube.scan_lines;
  const int N = masked_cube.depth_samples;
  const int rows = net.config.input_rows;
  if (N < rows) throw DataError("infer: cube shallower than the network window");
  if (masked_cube.rx_channels != net.config.input_channels)
    throw DimensionError("infer: channel count mismatch");

  const double scale = frame_scale(masked_cube);
  const double inv_scale = 1.0 / scale;
  const auto starts = window_starts(N, rows);

  net.mode = Mode::kEval;
  IQImage iq(L, N);

  // Batch windows for throughput; eval-mode samples are independent.
  constexpr int kChunk = 32;
  for (std::size_t c0 = 0; c0 < starts.size();
       c0 += static_cast<std::size_t>(kChunk)) {
    const std::size_t c1 = std::min(starts.size(), c0 + kChunk);
    Tensor input(static_cast<int>(c1 - c0), net.config.input_channels, rows, L);
    for (std::size_t k = c0; k < c1; ++k)
      fill_input_window(masked_cube, starts[k], scale, input,
                        static_cast<int>(k - c0));
    const Tensor out = forward(net, input, nullptr, false);
    for (std::size_t k = c0; k < c1; ++k) {
      const int n0 = starts[k];
      const int slot = static_cast<int>(k - c0);
      for (int r = 0; r < rows; ++r)
        for (int l = 0; l < L; ++l) {
          const std::size_t idx = iq.index(l, n0 + r);
          iq.i[idx] = inv_scale * out.at(slot, 0, r, l);
          iq.q[idx] = inv_scale * out.at(slot, 1, r, l);
        }
    }
  }
  return iq;
}

}  // namespace usdbf::nn
