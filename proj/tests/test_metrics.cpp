#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "usdbf/errors.hpp"
#include "usdbf/metrics.hpp"
#include "usdbf/util/rng.hpp"

using namespace usdbf;

namespace {

RealImage image_from(const std::vector<double>& v, int L, int N) {
  RealImage img(L, N);
  img.v = v;
  return img;
}

RealImage random_image(int L, int N, std::uint64_t seed, double lo = 0.0,
                       double hi = 255.0) {
  RealImage img(L, N);
  Rng rng(seed);
  for (auto& x : img.v) x = lo + rng.uniform() * (hi - lo);
  return img;
}

// Brute-force SSIM oracle: direct per-pixel local statistics, O(n * w^2).
double ssim_oracle(const RealImage& a, const RealImage& b,
                   const SSIMParams& p) {
  const int L = a.scan_lines, N = a.depth_samples, r = p.window_radius;
  double total = 0.0;
  for (int l = 0; l < L; ++l)
    for (int n = 0; n < N; ++n) {
      const int l0 = std::max(0, l - r), l1 = std::min(L - 1, l + r);
      const int n0 = std::max(0, n - r), n1 = std::min(N - 1, n + r);
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      int count = 0;
      for (int ll = l0; ll <= l1; ++ll)
        for (int nn = n0; nn <= n1; ++nn) {
          const double x = a.at(ll, nn), y = b.at(ll, nn);
          sx += x;
          sy += y;
          sxx += x * x;
          syy += y * y;
          sxy += x * y;
          ++count;
        }
      const double mx = sx / count, my = sy / count;
      const double vx = sxx / count - mx * mx;
      const double vy = syy / count - my * my;
      const double cov = sxy / count - mx * my;
      total += ((2 * mx * my + p.c1()) * (2 * cov + p.c2())) /
               ((mx * mx + my * my + p.c1()) * (vx + vy + p.c2()));
    }
  return total / (static_cast<double>(L) * N);
}

// Independent CNR/GCNR/PSNR oracles with their own summation styles.
double cnr_oracle(const std::vector<double>& b, const std::vector<double>& s) {
  auto stats = [](const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x / static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - m) * (x - m) / static_cast<double>(v.size());
    return std::pair<double, double>(m, var);
  };
  const auto [mb, vb] = stats(b);
  const auto [ms, vs] = stats(s);
  return std::abs(mb - ms) / std::sqrt(vb + vs);
}

double psnr_oracle(const RealImage& r, const RealImage& t, double rmax) {
  long double mse = 0.0L;
  for (std::size_t k = 0; k < r.v.size(); ++k) {
    const long double d = r.v[k] - t.v[k];
    mse += d * d;
  }
  mse /= static_cast<long double>(r.v.size());
  if (mse == 0.0L) return std::numeric_limits<double>::infinity();
  return static_cast<double>(10.0L * std::log10(rmax * rmax / mse));
}

}  // namespace

TEST_CASE("cnr matches the documented hand computation") {
  const RealImage img =
      image_from({90, 100, 110, 100, 30, 40, 50, 40}, 8, 1);
  const Region b = Region::rect(0, 0, 3, 0);
  const Region s = Region::rect(4, 0, 7, 0);
  CHECK(cnr(img, b, s) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("cnr of identical regions is zero and scaling leaves it fixed") {
  auto img = random_image(16, 16, 3);
  const Region b = Region::rect(0, 0, 7, 15);
  const Region s = Region::rect(8, 0, 15, 15);
  const Region same = Region::rect(0, 0, 7, 15);
  CHECK(cnr(img, b, same) == 0.0);

  const double base = cnr(img, b, s);
  RealImage scaled = img;
  for (auto& x : scaled.v) x *= 3.5;
  CHECK(cnr(scaled, b, s) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("cnr degenerate cases") {
  RealImage img(4, 1);
  img.v = {5, 5, 5, 5};
  const Region a = Region::rect(0, 0, 1, 0);
  const Region b = Region::rect(2, 0, 3, 0);
  CHECK(cnr(img, a, b) == 0.0);  // equal means, zero variance
  img.v = {5, 5, 7, 7};
  CHECK_THROWS_AS(cnr(img, a, b), NumericError);
}

TEST_CASE("cnr is symmetric and matches an independent oracle") {
  const auto img = random_image(32, 32, 5);
  const Region b = Region::rect(0, 0, 15, 31);
  const Region s = Region::rect(16, 0, 31, 31);
  CHECK(cnr(img, b, s) == doctest::Approx(cnr(img, s, b)).epsilon(1e-12));
  CHECK(cnr(img, b, s) ==
        doctest::Approx(cnr_oracle(b.pixels(img), s.pixels(img)))
            .epsilon(1e-9));
}

TEST_CASE("gcnr of identical multisets is zero") {
  RealImage img(8, 1);
  img.v = {1, 2, 3, 4, 1, 2, 3, 4};
  const Region a = Region::rect(0, 0, 3, 0);
  const Region b = Region::rect(4, 0, 7, 0);
  CHECK(gcnr(img, a, b) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gcnr of disjoint ranges is one") {
  auto img = random_image(16, 16, 9, 0.0, 100.0);
  for (int l = 8; l < 16; ++l)
    for (int n = 0; n < 16; ++n) img.at(l, n) += 150.0;
  const Region b = Region::rect(0, 0, 7, 15);
  const Region s = Region::rect(8, 0, 15, 15);
  CHECK(gcnr(img, b, s) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gcnr matches the documented overlap case") {
  RealImage img(8, 1);
  img.v = {0, 0, 1, 1, 0, 0, 2, 2};
  const Region b = Region::rect(0, 0, 3, 0);
  const Region s = Region::rect(4, 0, 7, 0);
  CHECK(gcnr(img, b, s) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gcnr stays in [0,1] and is invariant under affine remapping") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto img = random_image(24, 24, seed);
    const Region b = Region::rect(0, 0, 11, 23);
    const Region s = Region::rect(12, 0, 23, 23);
    const double g = gcnr(img, b, s);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
    RealImage mapped = img;
    for (auto& x : mapped.v) x = 2.0 * x + 17.0;
    CHECK(gcnr(mapped, b, s) == doctest::Approx(g).epsilon(1e-12));
  }
}

TEST_CASE("psnr matches the documented levels") {
  RealImage ref(8, 8);
  std::fill(ref.v.begin(), ref.v.end(), 255.0);
  CHECK(psnr(ref, ref) == std::numeric_limits<double>::infinity());

  RealImage test = ref;
  for (auto& x : test.v) x = 0.0;  // |diff| = 255 everywhere
  CHECK(psnr(ref, test) == doctest::Approx(0.0).epsilon(1e-12));

  for (auto& x : test.v) x = 255.0 - 25.5;  // |diff| = 25.5
  CHECK(psnr(ref, test) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("psnr decreases with noise amplitude") {
  const auto ref = random_image(32, 32, 21);
  double last = std::numeric_limits<double>::infinity();
  Rng rng(5);
  for (double amp : {5.0, 15.0, 45.0}) {
    RealImage noisy = ref;
    Rng local(rng.next_u64());
    for (auto& x : noisy.v) x += amp * (local.uniform() - 0.5);
    const double p = psnr(ref, noisy);
    CHECK(p < last);
    last = p;
  }
}

TEST_CASE("psnr requires matching dimensions") {
  CHECK_THROWS_AS(psnr(RealImage(4, 4), RealImage(4, 5)), DimensionError);
}

TEST_CASE("ssim of an image with itself is exactly one") {
  const auto img = random_image(40, 40, 31);
  CHECK(ssim(img, img) == 1.0);
}

TEST_CASE("ssim is symmetric") {
  const auto a = random_image(32, 32, 41);
  const auto b = random_image(32, 32, 42);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
}

TEST_CASE("ssim of an inverted high-variance image is small") {
  const auto a = random_image(64, 64, 51);
  RealImage inv = a;
  for (auto& x : inv.v) x = 255.0 - x;
  CHECK(ssim(a, inv) < 0.1);
}

TEST_CASE("windowed ssim matches the brute-force oracle") {
  const auto a = random_image(64, 64, 61);
  const auto b = random_image(64, 64, 62);
  const SSIMParams params;
  CHECK(std::abs(ssim(a, b) - ssim_oracle(a, b, params)) < 1e-6);
  CHECK(std::abs(ssim(a, a) - ssim_oracle(a, a, params)) < 1e-6);
}

TEST_CASE("metric oracles agree on random images") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const auto a = random_image(64, 64, seed);
    const auto b = random_image(64, 64, seed + 1000);
    CHECK(std::abs(psnr(a, b) - psnr_oracle(a, b, 255.0)) < 1e-6);
    const SSIMParams params;
    CHECK(std::abs(ssim(a, b) - ssim_oracle(a, b, params)) < 1e-4);
  }
}

TEST_CASE("regions are validated against image bounds") {
  const auto img = random_image(8, 8, 71);
  CHECK_THROWS_AS(cnr(img, Region::rect(0, 0, 8, 7), Region::rect(0, 0, 1, 1)),
                  DataError);
  CHECK_THROWS_AS(
      cnr(img, Region::disk(-20, -20, 2), Region::rect(0, 0, 1, 1)),
      DataError);
}

TEST_CASE("disk regions pick the expected pixel count") {
  RealImage img(9, 9);
  std::fill(img.v.begin(), img.v.end(), 1.0);
  const auto pixels = Region::disk(4, 4, 1.0).pixels(img);
  CHECK(pixels.size() == 5);  // center plus 4-neighborhood
}
