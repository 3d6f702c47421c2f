#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstring>

#include "usdbf/beamform.hpp"
#include "usdbf/errors.hpp"
#include "usdbf/util/rng.hpp"

using namespace usdbf;

namespace {

TimeAlignedCube random_cube(int L, int J, int N, std::uint64_t seed) {
  TimeAlignedCube cube(L, J, N);
  Rng rng(seed);
  for (auto& x : cube.data) x = static_cast<float>(rng.normal());
  return cube;
}

TimeAlignedCube constant_cube(int L, int J, int N, float value) {
  TimeAlignedCube cube(L, J, N);
  std::fill(cube.data.begin(), cube.data.end(), value);
  return cube;
}

DelayTable zero_delays(int J, int N) {
  DelayTable t;
  t.rx_channels = J;
  t.depth_samples = N;
  t.tau.assign(static_cast<std::size_t>(J) * N, 0);
  return t;
}

RFFrame frame_from_cube(const TimeAlignedCube& cube) {
  ProbeConfig p;
  p.num_te_events = cube.scan_lines;
  p.num_rx_active = cube.rx_channels;
  p.num_depth_samples = cube.depth_samples;
  RFFrame frame(p);
  frame.data = cube.data;
  return frame;
}

}  // namespace

TEST_CASE("time alignment with zero delays is the identity") {
  const auto cube = random_cube(3, 4, 32, 5);
  const auto frame = frame_from_cube(cube);
  const auto aligned = time_align(frame, zero_delays(4, 32));
  CHECK(std::memcmp(aligned.data.data(), frame.data.data(),
                    frame.data.size() * sizeof(float)) == 0);
}

TEST_CASE("time alignment undoes a constant shift") {
  const int J = 2, N = 64, n0 = 20;
  DelayTable t = zero_delays(J, N);
  for (int j = 0; j < J; ++j)
    for (int n = 0; n < N; ++n) t.tau[static_cast<std::size_t>(j) * N + n] = 3;
  ProbeConfig p;
  p.num_te_events = 1;
  p.num_rx_active = J;
  p.num_depth_samples = N;
  RFFrame frame(p);
  frame.at(0, 0, n0 + 3) = 1.0f;
  frame.at(0, 1, n0 + 3) = 2.0f;
  const auto aligned = time_align(frame, t);
  CHECK(aligned.at(0, 0, n0) == 1.0f);
  CHECK(aligned.at(0, 1, n0) == 2.0f);
  // Out-of-range source reads are zero.
  CHECK(aligned.at(0, 0, 0) == 0.0f);
  CHECK(aligned.at(0, 0, 1) == 0.0f);
}

TEST_CASE("das of ones is one and of channel indices is their mean") {
  const int J = 64;
  auto cube = constant_cube(2, J, 16, 1.0f);
  auto img = das(cube);
  for (float v : img.z) CHECK(v == doctest::Approx(1.0f));

  for (int l = 0; l < 2; ++l)
    for (int j = 0; j < J; ++j)
      for (int n = 0; n < 16; ++n) cube.at(l, j, n) = static_cast<float>(j);
  img = das(cube);
  for (float v : img.z) CHECK(v == doctest::Approx(31.5f));
}

TEST_CASE("das with a one-hot weight selects a channel") {
  const auto cube = random_cube(2, 8, 16, 11);
  std::vector<float> w(8, 0.0f);
  w[5] = 1.0f;
  const auto img = das(cube, w);
  for (int l = 0; l < 2; ++l)
    for (int n = 0; n < 16; ++n)
      CHECK(img.at(l, n) == doctest::Approx(cube.at(l, 5, n)));
}

TEST_CASE("das rejects bad weights") {
  const auto cube = random_cube(1, 4, 8, 3);
  CHECK_THROWS_AS(das(cube, std::vector<float>(3, 0.25f)), DimensionError);
  std::vector<float> w(4, 0.25f);
  w[2] = std::nanf("");
  CHECK_THROWS_AS(das(cube, w), NumericError);
}

TEST_CASE("das adaptive weights match static broadcast") {
  const auto cube = random_cube(2, 4, 8, 17);
  std::vector<float> w = {0.1f, 0.2f, 0.3f, 0.4f};
  std::vector<float> adaptive;
  for (int l = 0; l < 2; ++l)
    for (int n = 0; n < 8; ++n)
      adaptive.insert(adaptive.end(), w.begin(), w.end());
  const auto a = das(cube, w);
  const auto b = das_adaptive(cube, adaptive);
  for (std::size_t k = 0; k < a.z.size(); ++k)
    CHECK(a.z[k] == doctest::Approx(b.z[k]).epsilon(1e-6));
}

TEST_CASE("das is linear") {
  const auto y1 = random_cube(3, 16, 24, 21);
  const auto y2 = random_cube(3, 16, 24, 22);
  const float alpha = 0.7f, beta = -1.3f;
  TimeAlignedCube mix(3, 16, 24);
  for (std::size_t k = 0; k < mix.data.size(); ++k)
    mix.data[k] = alpha * y1.data[k] + beta * y2.data[k];
  const auto lhs = das(mix);
  const auto a = das(y1);
  const auto b = das(y2);
  for (std::size_t k = 0; k < lhs.z.size(); ++k) {
    const double rhs = alpha * static_cast<double>(a.z[k]) +
                       beta * static_cast<double>(b.z[k]);
    CHECK(lhs.z[k] == doctest::Approx(rhs).epsilon(1e-6));
  }
}

TEST_CASE("covariance of a constant cube is c^2 times all-ones") {
  const float c = 2.5f;
  const auto cube = constant_cube(1, 8, 8, c);
  MVParams params{4, 0, 0.0};
  const Matrix r = mv_covariance(cube, 0, 3, params);
  REQUIRE(r.n == 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(r.at(i, j) == doctest::Approx(c * c).epsilon(1e-9));
}

TEST_CASE("covariance of a zero cube is zero") {
  const auto cube = constant_cube(1, 8, 8, 0.0f);
  MVParams params{4, 1, 0.0};
  const Matrix r = mv_covariance(cube, 0, 3, params);
  for (double v : r.a) CHECK(v == 0.0);
}

TEST_CASE("diagonal loading bounds the smallest eigenvalue") {
  const auto cube = random_cube(1, 16, 32, 31);
  MVParams unloaded{8, 1, 0.0};
  MVParams loaded{8, 1, 1e-2};
  const Matrix r0 = mv_covariance(cube, 0, 16, unloaded);
  const Matrix r1 = mv_covariance(cube, 0, 16, loaded);

  Eigen::Map<const Eigen::MatrixXd> m0(r0.a.data(), 8, 8);
  Eigen::Map<const Eigen::MatrixXd> m1(r1.a.data(), 8, 8);
  const double floor = 1e-2 * m0.trace() / 8.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m1);
  for (int i = 0; i < 8; ++i) CHECK(es.eigenvalues()(i) >= floor - 1e-12);
}

TEST_CASE("capon weights for identity and diagonal covariances") {
  Matrix eye(3);
  for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  bool ok = false;
  auto w = capon_weights(eye, ok);
  CHECK(ok);
  for (double v : w) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  Matrix diag(2);
  diag.at(0, 0) = 1.0;
  diag.at(1, 1) = 2.0;
  w = capon_weights(diag, ok);
  CHECK(ok);
  CHECK(w[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("capon weights fall back to uniform on a singular covariance") {
  Matrix bad(2);
  bad.at(0, 0) = 1.0;
  bad.at(0, 1) = 2.0;
  bad.at(1, 0) = 2.0;
  bad.at(1, 1) = 1.0;  // indefinite
  bool ok = true;
  const auto w = capon_weights(bad, ok);
  CHECK_FALSE(ok);
  CHECK(w[0] == doctest::Approx(0.5));
  CHECK(w[1] == doctest::Approx(0.5));
}

TEST_CASE("mv equals das on a perfectly coherent cube") {
  // 4-channel, K=2 instance with explicit loading.
  const auto cube = constant_cube(2, 4, 12, 1.0f);
  MVParams params{2, 1, 1e-2};
  const auto mv = mv_beamform(cube, params);
  const auto ds = das(cube);
  for (std::size_t k = 0; k < mv.z.size(); ++k) {
    CHECK(mv.z[k] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(mv.z[k] == doctest::Approx(ds.z[k]).epsilon(1e-6));
  }
}

TEST_CASE("mv with K=1 reduces to uniform das") {
  const auto cube = random_cube(2, 8, 24, 77);
  MVParams params{1, 1, 1e-2};
  const auto mv = mv_beamform(cube, params);
  const auto ds = das(cube);
  for (std::size_t k = 0; k < mv.z.size(); ++k)
    CHECK(mv.z[k] == doctest::Approx(ds.z[k]).epsilon(1e-6));
}

TEST_CASE("mv weights satisfy the unit gain constraint") {
  const auto cube = random_cube(2, 16, 32, 13);
  MVParams params{8, 1, 1e-2};
  MVDiagnostics diag;
  for (int l = 0; l < 2; ++l)
    for (int n = 0; n < 32; n += 5) {
      const auto w = mv_weights(cube, l, n, params, &diag);
      double sum = 0.0;
      for (double v : w) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
  CHECK(diag.solved > 0);
}

TEST_CASE("mv output is deterministic") {
  const auto cube = random_cube(2, 16, 40, 55);
  MVParams params{8, 1, 1e-2};
  const auto a = mv_beamform(cube, params);
  const auto b = mv_beamform(cube, params);
  CHECK(std::memcmp(a.z.data(), b.z.data(), a.z.size() * sizeof(float)) == 0);
}

TEST_CASE("mv rejects an oversized subaperture") {
  const auto cube = random_cube(1, 8, 8, 9);
  MVParams params{5, 1, 1e-2};  // K > J/2
  CHECK_THROWS_AS(mv_beamform(cube, params), ConfigError);
}

TEST_CASE("time alignment requires matching dimensions") {
  const auto cube = random_cube(2, 4, 16, 3);
  const auto frame = frame_from_cube(cube);
  CHECK_THROWS_AS(time_align(frame, zero_delays(5, 16)), DimensionError);
}
