#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "usdbf/errors.hpp"
#include "usdbf/postproc.hpp"
#include "usdbf/util/rng.hpp"

using namespace usdbf;

namespace {

ScanlineImage tone(int L, int N, int k, double phase) {
  ScanlineImage z(L, N);
  for (int l = 0; l < L; ++l)
    for (int n = 0; n < N; ++n)
      z.at(l, n) = static_cast<float>(
          std::cos(2.0 * M_PI * k * n / N + phase));
  return z;
}

}  // namespace

TEST_CASE("analytic signal of an integer-bin tone has unit envelope") {
  for (int N : {256, 255}) {
    const auto z = tone(2, N, 19, 0.0);
    const auto iq = hilbert_analytic(z);
    const auto env = envelope(iq);
    for (double e : env) CHECK(e == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("the I channel reproduces the input") {
  Rng rng(4);
  ScanlineImage z(3, 128);
  for (auto& v : z.z) v = static_cast<float>(rng.normal());
  const auto iq = hilbert_analytic(z);
  for (int l = 0; l < 3; ++l)
    for (int n = 0; n < 128; ++n)
      CHECK(iq.i[iq.index(l, n)] ==
            doctest::Approx(z.at(l, n)).epsilon(1e-5));
}

TEST_CASE("analytic signal of zero is zero") {
  const ScanlineImage z(2, 64);
  const auto iq = hilbert_analytic(z);
  for (double v : iq.i) CHECK(v == 0.0);
  for (double v : iq.q) CHECK(v == 0.0);
}

TEST_CASE("hilbert rejects degenerate depth") {
  CHECK_THROWS_AS(hilbert_analytic(ScanlineImage(2, 1)), DataError);
}

TEST_CASE("hilbert of the I channel is a projection") {
  Rng rng(8);
  ScanlineImage z(2, 200);
  for (auto& v : z.z) v = static_cast<float>(rng.normal());
  const auto iq1 = hilbert_analytic(z);
  ScanlineImage zi(2, 200);
  for (int l = 0; l < 2; ++l)
    for (int n = 0; n < 200; ++n)
      zi.at(l, n) = static_cast<float>(iq1.i[iq1.index(l, n)]);
  const auto iq2 = hilbert_analytic(zi);
  for (std::size_t k = 0; k < iq1.q.size(); ++k) {
    CHECK(iq2.i[k] == doctest::Approx(iq1.i[k]).epsilon(1e-4));
    CHECK(iq2.q[k] == doctest::Approx(iq1.q[k]).epsilon(1e-4));
  }
}

TEST_CASE("envelope is the pointwise magnitude") {
  IQImage iq(1, 2);
  iq.i = {3.0, -1.0};
  iq.q = {4.0, 0.0};
  const auto env = envelope(iq);
  CHECK(env[0] == doctest::Approx(5.0));
  CHECK(env[1] == doctest::Approx(1.0));
}

TEST_CASE("envelope is invariant to carrier phase away from the edges") {
  const int N = 256, guard = 8;
  const auto ref = envelope(hilbert_analytic(tone(1, N, 19, 0.0)));
  for (double phase : {0.4, 1.1, 2.7}) {
    const auto env = envelope(hilbert_analytic(tone(1, N, 19, phase)));
    for (int n = guard; n < N - guard; ++n)
      CHECK(env[static_cast<std::size_t>(n)] ==
            doctest::Approx(ref[static_cast<std::size_t>(n)]).epsilon(0.01));
  }
}

TEST_CASE("log compression maps the documented levels") {
  // env/env_max of 1 (0 dB), 10^-3 (-60 dB) and 10^-1.5 (-30 dB) at 60 dB.
  std::vector<double> env = {1.0, 1e-3, std::pow(10.0, -1.5)};
  const auto img = log_compress(env, 3, 1, 60.0);
  CHECK(img.pixels[0] == 255);
  CHECK(img.pixels[1] == 0);
  CHECK(img.pixels[2] == 128);
}

TEST_CASE("log compression preserves envelope ordering") {
  Rng rng(12);
  std::vector<double> env(512);
  for (auto& e : env) e = std::abs(rng.normal());
  const auto img = log_compress(env, 512, 1, 60.0);
  for (std::size_t a = 0; a < env.size(); a += 7)
    for (std::size_t b = 0; b < env.size(); b += 13) {
      if (env[a] <= env[b]) CHECK(img.pixels[a] <= img.pixels[b]);
    }
}

TEST_CASE("log compression rejects an all-zero envelope") {
  std::vector<double> env(16, 0.0);
  CHECK_THROWS_AS(log_compress(env, 4, 4, 60.0), NumericError);
}

TEST_CASE("pgm round trip") {
  BModeImage img(5, 9, 60.0);
  for (std::size_t k = 0; k < img.pixels.size(); ++k)
    img.pixels[k] = static_cast<std::uint8_t>((k * 37) % 256);
  const auto path =
      (std::filesystem::temp_directory_path() / "usdbf_test.pgm").string();
  write_pgm(img, path);
  const auto back = read_pgm(path);
  CHECK(back.scan_lines == 5);
  CHECK(back.depth_samples == 9);
  CHECK(back.pixels == img.pixels);
  std::filesystem::remove(path);
}
