#include "usdbf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "usdbf/errors.hpp"

namespace usdbf {

RealImage to_real(const BModeImage& img) {
  RealImage out(img.scan_lines, img.depth_samples);
  for (std::size_t k = 0; k < img.pixels.size(); ++k)
    out.v[k] = static_cast<double>(img.pixels[k]);
  return out;
}

Region Region::rect(int l0, int n0, int l1, int n1) {
  Region r;
  r.shape = Shape::kRect;
  r.l0 = l0;
  r.n0 = n0;
  r.l1 = l1;
  r.n1 = n1;
  return r;
}

Region Region::disk(double cl, double cn, double radius) {
  Region r;
  r.shape = Shape::kDisk;
  r.center_l = cl;
  r.center_n = cn;
  r.radius = radius;
  return r;
}

std::vector<double> Region::pixels(const RealImage& img) const {
  std::vector<double> out;
  if (shape == Shape::kRect) {
    if (l0 < 0 || n0 < 0 || l1 >= img.scan_lines || n1 >= img.depth_samples ||
        l0 > l1 || n0 > n1)
      throw DataError("region: rectangle out of image bounds");
    out.reserve(static_cast<std::size_t>(l1 - l0 + 1) * (n1 - n0 + 1));
    for (int l = l0; l <= l1; ++l)
      for (int n = n0; n <= n1; ++n) out.push_back(img.at(l, n));
  } else {
    const double r2 = radius * radius;
    for (int l = 0; l < img.scan_lines; ++l)
      for (int n = 0; n < img.depth_samples; ++n) {
        const double dl = l - center_l, dn = n - center_n;
        if (dl * dl + dn * dn <= r2) out.push_back(img.at(l, n));
      }
  }
  if (out.empty()) throw DataError("region: empty region");
  return out;
}

namespace {

void mean_var(const std::vector<double>& v, double& mean, double& var) {
  double s = 0.0;
  for (double x : v) s += x;
  mean = s / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  var = ss / static_cast<double>(v.size());  // population variance
}

}  // namespace

double cnr(const RealImage& img, const Region& background,
           const Region& structure) {
  const auto b = background.pixels(img);
  const auto s = structure.pixels(img);
  double mu_b, var_b, mu_s, var_s;
  mean_var(b, mu_b, var_b);
  mean_var(s, mu_s, var_s);
  const double denom2 = var_b + var_s;
  if (denom2 == 0.0) {
    if (mu_b == mu_s) return 0.0;
    throw NumericError("cnr: zero variance with distinct means");
  }
  return std::abs(mu_b - mu_s) / std::sqrt(denom2);
}

double gcnr(const RealImage& img, const Region& background,
            const Region& structure, int bins) {
  if (bins < 1) throw ConfigError("gcnr: need at least one bin");
  const auto b = background.pixels(img);
  const auto s = structure.pixels(img);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : b) { lo = std::min(lo, x); hi = std::max(hi, x); }
  for (double x : s) { lo = std::min(lo, x); hi = std::max(hi, x); }
  if (hi <= lo) return 0.0;  // all pixels identical: full overlap

  std::vector<double> pb(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> ps(static_cast<std::size_t>(bins), 0.0);
  const double scale = bins / (hi - lo);
  auto bin_of = [&](double x) {
    return std::min(bins - 1, static_cast<int>((x - lo) * scale));
  };
  for (double x : b) pb[bin_of(x)] += 1.0 / static_cast<double>(b.size());
  for (double x : s) ps[bin_of(x)] += 1.0 / static_cast<double>(s.size());

  double overlap = 0.0;
  for (int k = 0; k < bins; ++k) overlap += std::min(pb[k], ps[k]);
  return 1.0 - overlap;
}

double psnr(const RealImage& ref, const RealImage& test, double r_max) {
  if (ref.scan_lines != test.scan_lines ||
      ref.depth_samples != test.depth_samples)
    throw DimensionError("psnr: image dimensions differ");
  double err2 = 0.0;
  for (std::size_t k = 0; k < ref.v.size(); ++k) {
    const double d = ref.v[k] - test.v[k];
    err2 += d * d;
  }
  if (err2 == 0.0) return std::numeric_limits<double>::infinity();
  const double total = static_cast<double>(ref.v.size()) * r_max * r_max;
  return 10.0 * std::log10(total / err2);
}

namespace {

// Summed-area table with one extra row/column of zeros.
struct Integral {
  int rows, cols;  // rows = depth, cols = scan lines
  std::vector<double> s;

  Integral(const RealImage& a, const RealImage& b, int which)
      : rows(a.depth_samples), cols(a.scan_lines),
        s(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0) {
    for (int n = 0; n < rows; ++n)
      for (int l = 0; l < cols; ++l) {
        double v = 0.0;
        switch (which) {
          case 0: v = a.at(l, n); break;
          case 1: v = b.at(l, n); break;
          case 2: v = a.at(l, n) * a.at(l, n); break;
          case 3: v = b.at(l, n) * b.at(l, n); break;
          case 4: v = a.at(l, n) * b.at(l, n); break;
        }
        at(n + 1, l + 1) = v + at(n, l + 1) + at(n + 1, l) - at(n, l);
      }
  }

  double& at(int r, int c) { return s[static_cast<std::size_t>(r) * (cols + 1) + c]; }
  double at(int r, int c) const {
    return s[static_cast<std::size_t>(r) * (cols + 1) + c];
  }

  // Sum over rows [r0, r1] x cols [c0, c1], inclusive.
  double sum(int r0, int c0, int r1, int c1) const {
    return at(r1 + 1, c1 + 1) - at(r0, c1 + 1) - at(r1 + 1, c0) + at(r0, c0);
  }
};

}  // namespace

double ssim(const RealImage& ref, const RealImage& test,
            const SSIMParams& params) {
  if (ref.scan_lines != test.scan_lines ||
      ref.depth_samples != test.depth_samples)
    throw DimensionError("ssim: image dimensions differ");
  if (params.window_radius < 1)
    throw ConfigError("ssim: window radius must be >= 1");

  const int L = ref.scan_lines, N = ref.depth_samples;
  const int r = params.window_radius;
  const double c1 = params.c1(), c2 = params.c2();

  const Integral sx(ref, test, 0), sy(ref, test, 1), sxx(ref, test, 2),
      syy(ref, test, 3), sxy(ref, test, 4);

  double total = 0.0;
  for (int n = 0; n < N; ++n) {
    const int n0 = std::max(0, n - r), n1 = std::min(N - 1, n + r);
    for (int l = 0; l < L; ++l) {
      const int l0 = std::max(0, l - r), l1 = std::min(L - 1, l + r);
      const double count = static_cast<double>(n1 - n0 + 1) * (l1 - l0 + 1);
      const double mx = sx.sum(n0, l0, n1, l1) / count;
      const double my = sy.sum(n0, l0, n1, l1) / count;
      const double vx = sxx.sum(n0, l0, n1, l1) / count - mx * mx;
      const double vy = syy.sum(n0, l0, n1, l1) / count - my * my;
      const double cov = sxy.sum(n0, l0, n1, l1) / count - mx * my;
      const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
      const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
      total += num / den;
    }
  }
  return total / (static_cast<double>(L) * N);
}

}  // namespace usdbf
