#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "usdbf/probe.hpp"

namespace usdbf {

struct Scatterer {
  double lateral_m = 0.0;
  double depth_m = 0.0;
  double amplitude = 1.0;
};

// Point-scatterer phantom; all scatterers must lie in front of the array.
struct Phantom {
  std::vector<Scatterer> scatterers;

  void validate() const;
};

// Raw per-transmit-event channel data x[l][j][n], stored contiguously with
// the depth index fastest.
struct RFFrame {
  ProbeConfig probe;
  std::vector<float> data;

  RFFrame() = default;
  explicit RFFrame(const ProbeConfig& p)
      : probe(p),
        data(static_cast<std::size_t>(p.num_te_events) * p.num_rx_active *
             p.num_depth_samples) {}

  float& at(int l, int j, int n) {
    return data[(static_cast<std::size_t>(l) * probe.num_rx_active + j) *
                    probe.num_depth_samples +
                n];
  }
  float at(int l, int j, int n) const {
    return data[(static_cast<std::size_t>(l) * probe.num_rx_active + j) *
                    probe.num_depth_samples +
                n];
  }
  float* trace(int l, int j) {
    return &data[(static_cast<std::size_t>(l) * probe.num_rx_active + j) *
                 probe.num_depth_samples];
  }
  const float* trace(int l, int j) const {
    return &data[(static_cast<std::size_t>(l) * probe.num_rx_active + j) *
                 probe.num_depth_samples];
  }
};

// Dynamic receive-focusing delays in whole samples, tau[j][n] >= 0.
// The table is shared by all scan lines of a linear array.
struct DelayTable {
  int rx_channels = 0;
  int depth_samples = 0;
  std::vector<std::int32_t> tau;

  std::int32_t at(int j, int n) const {
    return tau[static_cast<std::size_t>(j) * depth_samples + n];
  }
};

// tau_j[n] = round((fs/c) * (sqrt(d_n^2 + x_j^2) - d_n)) with d_n the depth
// of sample n and x_j the lateral offset of channel j from the line axis.
DelayTable compute_delay_table(const ProbeConfig& probe);

// Synthesizes one frame of RF channel data from a point-scatterer phantom.
// Transmit is modeled as a point source at the scan line's center element;
// each scatterer contributes a Gaussian-enveloped carrier pulse (0.6
// fractional bandwidth at -6 dB) at the two-way time of flight, scaled by
// amplitude / (d_tx * d_rx). White Gaussian noise with the given standard
// deviation is added from one independent stream per (l, j), so the result
// is bit-identical for any thread count.
RFFrame simulate_rf(const ProbeConfig& probe, const Phantom& phantom,
                    double noise_std, std::uint64_t seed);

// "USRF" container: magic, format version, L/J/N, probe scalars, then the
// sample payload as little-endian float32 in [l][j][n] order.
void write_rf(const RFFrame& frame, std::ostream& os);
void write_rf(const RFFrame& frame, const std::string& path);
RFFrame read_rf(std::istream& is);
RFFrame read_rf(const std::string& path);

}  // namespace usdbf
