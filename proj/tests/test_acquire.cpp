#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "usdbf/acquire.hpp"
#include "usdbf/errors.hpp"
#include "usdbf/util/rng.hpp"

using namespace usdbf;

namespace {

ProbeConfig small_probe() {
  ProbeConfig p;
  p.carrier_freq_hz = 5e6;
  p.sampling_freq_hz = 20e6;
  p.num_elements = 64;
  p.num_tx_elements = 64;
  p.num_te_events = 5;
  p.num_rx_active = 8;
  p.num_depth_samples = 600;
  return p;
}

}  // namespace

TEST_CASE("delay formula evaluated at the documented point") {
  // Closed form at fs=40 MHz, c=1540 m/s, d=10 mm, x=3.2 mm.
  const double d = 0.010, x = 0.0032;
  const double tau = 40e6 / 1540.0 * (std::sqrt(d * d + x * x) - d);
  CHECK(std::llround(tau) == 13);
}

TEST_CASE("delay table matches the closed form per entry") {
  ProbeConfig p = small_probe();
  const DelayTable table = compute_delay_table(p);
  for (int j = 0; j < p.num_rx_active; ++j) {
    const double xj = p.rx_lateral_offset(j);
    for (int n = 0; n < p.num_depth_samples; n += 37) {
      const double d = p.depth_of_sample(n);
      const long expected = std::llround(
          p.sampling_freq_hz / p.sound_speed_m_s *
          (std::sqrt(d * d + xj * xj) - d));
      CHECK(table.at(j, n) == expected);
    }
  }
}

TEST_CASE("delay is zero on the scanline axis") {
  ProbeConfig p = small_probe();
  p.num_rx_active = 5;  // odd count puts element 2 exactly on the axis
  const DelayTable table = compute_delay_table(p);
  for (int n = 0; n < p.num_depth_samples; ++n) CHECK(table.at(2, n) == 0);
}

TEST_CASE("delay table symmetry and monotonicity") {
  ProbeConfig p = small_probe();
  const DelayTable table = compute_delay_table(p);
  const int J = p.num_rx_active, N = p.num_depth_samples;
  for (int j = 0; j < J; ++j)
    for (int n = 0; n < N; ++n) {
      CHECK(table.at(j, n) == table.at(J - 1 - j, n));
      CHECK(table.at(j, n) >= 0);
      if (n > 0) CHECK(table.at(j, n) <= table.at(j, n - 1));
    }
  // Far-field limit: the outermost channel's delay approaches zero.
  CHECK(table.at(0, N - 1) <= 2);
}

TEST_CASE("empty phantom simulates to all-zero frame") {
  const RFFrame frame = simulate_rf(small_probe(), Phantom{}, 0.0, 1);
  for (float x : frame.data) CHECK(x == 0.0f);
}

TEST_CASE("on-axis scatterer peaks at the two-way time of flight") {
  ProbeConfig p = small_probe();
  p.num_te_events = 3;
  p.num_depth_samples = 800;
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const double depth = 5e-3 + rng.uniform() * 20e-3;
    const int l0 = 1;
    Phantom phantom;
    phantom.scatterers.push_back({p.scanline_lateral(l0), depth, 1.0});
    const RFFrame frame = simulate_rf(p, phantom, 0.0, 1);

    const int j_center = p.num_rx_active / 2;
    const float* trace = frame.trace(l0, j_center);
    int argmax = 0;
    float best = 0.0f;
    for (int n = 0; n < p.num_depth_samples; ++n) {
      if (std::abs(trace[n]) > best) {
        best = std::abs(trace[n]);
        argmax = n;
      }
    }
    const long expected = std::lround(2.0 * depth * p.sampling_freq_hz /
                                      p.sound_speed_m_s);
    CHECK(std::abs(argmax - expected) <= 2);
  }
}

TEST_CASE("mirrored scatterers give mirrored channel data") {
  ProbeConfig p = small_probe();
  const int l0 = 2;  // axis exactly at lateral 0 for odd L
  REQUIRE(p.scanline_lateral(l0) == 0.0);
  Phantom phantom;
  phantom.scatterers.push_back({+0.8e-3, 12e-3, 1.0});
  phantom.scatterers.push_back({-0.8e-3, 12e-3, 1.0});
  const RFFrame frame = simulate_rf(p, phantom, 0.0, 1);
  const int J = p.num_rx_active, N = p.num_depth_samples;
  for (int j = 0; j < J; ++j)
    for (int n = 0; n < N; ++n)
      CHECK(frame.at(l0, j, n) ==
            doctest::Approx(frame.at(l0, J - 1 - j, n)).epsilon(1e-6));
}

TEST_CASE("simulation is deterministic per seed") {
  ProbeConfig p = small_probe();
  Phantom phantom;
  phantom.scatterers.push_back({1e-3, 8e-3, 1.0});
  const RFFrame a = simulate_rf(p, phantom, 0.1, 99);
  const RFFrame b = simulate_rf(p, phantom, 0.1, 99);
  CHECK(std::memcmp(a.data.data(), b.data.data(),
                    a.data.size() * sizeof(float)) == 0);
  const RFFrame c = simulate_rf(p, phantom, 0.1, 100);
  CHECK(std::memcmp(a.data.data(), c.data.data(),
                    a.data.size() * sizeof(float)) != 0);
}

TEST_CASE("scatterer behind the array is rejected") {
  Phantom phantom;
  phantom.scatterers.push_back({0.0, -1e-3, 1.0});
  CHECK_THROWS_AS(simulate_rf(small_probe(), phantom, 0.0, 1), DataError);
}

TEST_CASE("usrf round trip is the identity") {
  ProbeConfig p = small_probe();
  Phantom phantom;
  phantom.scatterers.push_back({0.5e-3, 9e-3, 2.0});
  const RFFrame frame = simulate_rf(p, phantom, 0.05, 7);

  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  write_rf(frame, ss);
  const RFFrame back = read_rf(ss);
  CHECK(back.probe.num_te_events == p.num_te_events);
  CHECK(back.probe.carrier_freq_hz == p.carrier_freq_hz);
  CHECK(std::memcmp(frame.data.data(), back.data.data(),
                    frame.data.size() * sizeof(float)) == 0);
}

TEST_CASE("usrf rejects bad magic") {
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  ss.write("XXXX", 4);
  ss.write("\0\0\0\0\0\0\0\0", 8);
  CHECK_THROWS_AS(read_rf(ss), BadMagicError);
}

TEST_CASE("usrf rejects truncated payload") {
  ProbeConfig p = small_probe();
  const RFFrame frame(p);
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  write_rf(frame, ss);
  std::string bytes = ss.str();
  bytes.resize(bytes.size() / 2);
  std::stringstream cut(bytes, std::ios::in | std::ios::binary);
  CHECK_THROWS_AS(read_rf(cut), TruncatedError);
}

TEST_CASE("usrf rejects dimension overflow") {
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  ss.write("USRF", 4);
  ss.put(1).put(0);  // version 1 little endian
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) ss.put(static_cast<char>(v >> (8 * i)));
  };
  put_u32(0xffffffffu);  // L
  put_u32(0xffffffffu);  // J
  put_u32(0xffffffffu);  // N
  for (int i = 0; i < 10; ++i)
    for (int k = 0; k < 8; ++k) ss.put('\0');
  CHECK_THROWS_AS(read_rf(ss), DimensionError);
}
