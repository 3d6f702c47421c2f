#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "usdbf/beamform.hpp"

namespace usdbf {

// In-phase / quadrature image z_a[l][n] = z[l][n] + i * H(z_l)[n].
struct IQImage {
  int scan_lines = 0;
  int depth_samples = 0;
  std::vector<double> i;
  std::vector<double> q;

  IQImage() = default;
  IQImage(int l, int n)
      : scan_lines(l), depth_samples(n),
        i(static_cast<std::size_t>(l) * n),
        q(static_cast<std::size_t>(l) * n) {}

  std::size_t index(int l, int n) const {
    return static_cast<std::size_t>(l) * depth_samples + n;
  }
};

// Log-compressed 8-bit B-mode image, scan line major like ScanlineImage.
struct BModeImage {
  int scan_lines = 0;
  int depth_samples = 0;
  double dynamic_range_db = 60.0;
  std::vector<std::uint8_t> pixels;

  BModeImage() = default;
  BModeImage(int l, int n, double dr)
      : scan_lines(l), depth_samples(n), dynamic_range_db(dr),
        pixels(static_cast<std::size_t>(l) * n) {}

  std::uint8_t at(int l, int n) const {
    return pixels[static_cast<std::size_t>(l) * depth_samples + n];
  }
};

// Analytic signal per scan line along depth, via the spectral mask: keep DC
// (and Nyquist for even N), double the positive bins, zero the negative
// bins. The I channel reproduces the input.
IQImage hilbert_analytic(const ScanlineImage& z);

std::vector<double> envelope(const IQImage& iq);

// db = 20*log10(max(env, eps*env_max)/env_max), eps = 10^(-dr/20) * 1e-2;
// pixel = round(255 * clamp(1 + db/dr, 0, 1)). Throws NumericError when the
// envelope is identically zero (no reference level).
BModeImage log_compress(const std::vector<double>& env, int scan_lines,
                        int depth_samples, double dynamic_range_db);

// Binary PGM (P5), maxval 255, one row per depth sample: N rows, L columns.
void write_pgm(const BModeImage& img, const std::string& path);
BModeImage read_pgm(const std::string& path);

}  // namespace usdbf
