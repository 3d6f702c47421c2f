#pragma once

#include <vector>

#include "usdbf/postproc.hpp"

namespace usdbf {

// Real-valued image for metric computation, scan line major like BModeImage.
struct RealImage {
  int scan_lines = 0;
  int depth_samples = 0;
  std::vector<double> v;

  RealImage() = default;
  RealImage(int l, int n)
      : scan_lines(l), depth_samples(n),
        v(static_cast<std::size_t>(l) * n) {}

  double& at(int l, int n) {
    return v[static_cast<std::size_t>(l) * depth_samples + n];
  }
  double at(int l, int n) const {
    return v[static_cast<std::size_t>(l) * depth_samples + n];
  }
};

RealImage to_real(const BModeImage& img);

// Region of interest: rectangle (inclusive index bounds) or disk in index
// space. Roles are background (B) and anechoic structure (aS).
struct Region {
  enum class Shape { kRect, kDisk } shape = Shape::kRect;
  // Rect bounds, inclusive.
  int l0 = 0, n0 = 0, l1 = 0, n1 = 0;
  // Disk.
  double center_l = 0, center_n = 0, radius = 0;

  static Region rect(int l0, int n0, int l1, int n1);
  static Region disk(double center_l, double center_n, double radius);

  // Pixel indices inside the region, validated against the image bounds.
  std::vector<double> pixels(const RealImage& img) const;
};

struct SSIMParams {
  double k1 = 0.01;
  double k2 = 0.03;
  int window_radius = 50;
  double r_max = 255.0;

  double c1() const { return (k1 * r_max) * (k1 * r_max); }
  double c2() const { return (k2 * r_max) * (k2 * r_max); }
};

// |mu_B - mu_aS| / sqrt(sigma^2_B + sigma^2_aS) with population variances.
double cnr(const RealImage& img, const Region& background,
           const Region& structure);

// 1 - sum_bin min(p_B, p_aS) over shared equal-width bins spanning the
// joint min..max of both regions.
double gcnr(const RealImage& img, const Region& background,
            const Region& structure, int bins = 256);

// 10*log10(n1*n2*R^2 / ||F - F~||_F^2); +infinity for identical images.
double psnr(const RealImage& ref, const RealImage& test, double r_max = 255.0);

// Mean over pixels of the local SSIM index, uniform square window of
// half-width window_radius clipped at the borders.
double ssim(const RealImage& ref, const RealImage& test,
            const SSIMParams& params = {});

}  // namespace usdbf
