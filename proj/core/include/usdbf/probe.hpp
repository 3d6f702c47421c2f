#pragma once

#include <cstdint>

#include "usdbf/errors.hpp"

namespace usdbf {

// Linear-array probe and scan geometry. Defaults follow the L3-12H probe:
// 8.48 MHz carrier sampled at 40 MHz, 192 elements at 0.2 mm pitch,
// 96 transmit events with 64 active receive channels each.
struct ProbeConfig {
  double carrier_freq_hz = 8.48e6;
  double sampling_freq_hz = 40e6;
  int num_elements = 192;
  int num_tx_elements = 128;
  int num_te_events = 96;   // L, one scan line per transmit event
  int num_rx_active = 64;   // J
  double pitch_m = 0.2e-3;
  double element_width_m = 0.14e-3;
  double sound_speed_m_s = 1540.0;
  int num_depth_samples = 2048;  // N

  int scan_lines() const { return num_te_events; }
  int rx_channels() const { return num_rx_active; }
  int depth_samples() const { return num_depth_samples; }

  // Depth of sample n on the two-way path, d_n = n * c / (2 * fs).
  double depth_of_sample(int n) const {
    return static_cast<double>(n) * sound_speed_m_s / (2.0 * sampling_freq_hz);
  }

  // Lateral offset of active receive element j from the scan line axis.
  double rx_lateral_offset(int j) const {
    return (static_cast<double>(j) - (num_rx_active - 1) / 2.0) * pitch_m;
  }

  // Lateral position of the scan line axis for transmit event l,
  // centered on the array.
  double scanline_lateral(int l) const {
    return (static_cast<double>(l) - (num_te_events - 1) / 2.0) * pitch_m;
  }

  void validate() const {
    if (carrier_freq_hz <= 0 || sampling_freq_hz <= 0 || pitch_m <= 0 ||
        element_width_m <= 0 || sound_speed_m_s <= 0)
      throw ConfigError("probe: frequencies and lengths must be positive");
    if (num_te_events < 1)
      throw ConfigError("probe: need at least one transmit event");
    if (num_rx_active < 1 || num_rx_active > num_elements)
      throw ConfigError("probe: active receive count exceeds element count");
    if (num_depth_samples < 1)
      throw ConfigError("probe: depth sample count must be positive");
  }
};

}  // namespace usdbf
