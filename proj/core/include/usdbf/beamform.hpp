#pragma once

#include <cstdint>
#include <vector>

#include "usdbf/acquire.hpp"

namespace usdbf {

// Time-reversed channel data y[l][j][n] = x[l][j][n - tau_j[n]]; reads that
// fall before the start of the trace are zero.
struct TimeAlignedCube {
  int scan_lines = 0;     // L
  int rx_channels = 0;    // J
  int depth_samples = 0;  // N
  std::vector<float> data;

  TimeAlignedCube() = default;
  TimeAlignedCube(int l, int j, int n)
      : scan_lines(l),
        rx_channels(j),
        depth_samples(n),
        data(static_cast<std::size_t>(l) * j * n) {}

  float& at(int l, int j, int n) {
    return data[(static_cast<std::size_t>(l) * rx_channels + j) *
                    depth_samples +
                n];
  }
  float at(int l, int j, int n) const {
    return data[(static_cast<std::size_t>(l) * rx_channels + j) *
                    depth_samples +
                n];
  }
  float* trace(int l, int j) {
    return &data[(static_cast<std::size_t>(l) * rx_channels + j) *
                 depth_samples];
  }
  const float* trace(int l, int j) const {
    return &data[(static_cast<std::size_t>(l) * rx_channels + j) *
                 depth_samples];
  }
};

// Beamformed RF per scan line, z[l][n], before envelope detection.
struct ScanlineImage {
  int scan_lines = 0;
  int depth_samples = 0;
  std::vector<float> z;

  ScanlineImage() = default;
  ScanlineImage(int l, int n)
      : scan_lines(l), depth_samples(n),
        z(static_cast<std::size_t>(l) * n) {}

  float& at(int l, int n) {
    return z[static_cast<std::size_t>(l) * depth_samples + n];
  }
  float at(int l, int n) const {
    return z[static_cast<std::size_t>(l) * depth_samples + n];
  }
  float* line(int l) { return &z[static_cast<std::size_t>(l) * depth_samples]; }
  const float* line(int l) const {
    return &z[static_cast<std::size_t>(l) * depth_samples];
  }
};

// Small dense symmetric matrix, row major.
struct Matrix {
  int n = 0;
  std::vector<double> a;

  Matrix() = default;
  explicit Matrix(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim) {}
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const {
    return a[static_cast<std::size_t>(i) * n + j];
  }
};

// Minimum-variance beamformer parameters. The steering vector is all ones
// because the input cube is already temporally aligned.
struct MVParams {
  int subaperture_len = 0;     // K; 0 picks J/2 at run time
  int temporal_halfwidth = 1;  // depth window half-width for covariance
  double loading_factor = 1e-2;

  void validate(int rx_channels) const;
  int effective_subaperture(int rx_channels) const;
};

struct MVDiagnostics {
  std::int64_t solved = 0;
  std::int64_t fallbacks = 0;  // factorization failures -> uniform weights
};

TimeAlignedCube time_align(const RFFrame& frame, const DelayTable& delays);

// Delay-and-sum with uniform weights 1/J.
ScanlineImage das(const TimeAlignedCube& cube);
// DAS with static tapered weights (length J).
ScanlineImage das(const TimeAlignedCube& cube, const std::vector<float>& w);
// DAS with per-(l, n) adaptive weights, laid out [l][n][j].
ScanlineImage das_adaptive(const TimeAlignedCube& cube,
                           const std::vector<float>& w);

// Spatially smoothed, depth-averaged, diagonally loaded covariance estimate
// for one (l, n): mean over the clipped depth window of
// Y_l[m] Y_l[m]^T / (J - K + 1), then R += loading * (trace(R)/K) * I.
Matrix mv_covariance(const TimeAlignedCube& cube, int l, int n,
                     const MVParams& params);

// w = R^{-1} a / (a^T R^{-1} a) with the all-ones steering vector, solved by
// Cholesky factorization. ok is cleared (and uniform weights returned) when
// the factorization fails.
std::vector<double> capon_weights(const Matrix& covariance, bool& ok);

// Capon weights w = R^{-1} a / (a^T R^{-1} a) for one (l, n). Falls back to
// uniform 1/K when the factorization fails and reports it in diag.
std::vector<double> mv_weights(const TimeAlignedCube& cube, int l, int n,
                               const MVParams& params,
                               MVDiagnostics* diag = nullptr);

// Full minimum-variance image; the output averages w^T ybar_m over all
// J - K + 1 subaperture snapshots.
ScanlineImage mv_beamform(const TimeAlignedCube& cube, const MVParams& params,
                          MVDiagnostics* diag = nullptr);

}  // namespace usdbf
