#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "usdbf/beamform.hpp"

namespace usdbf {

enum class SamplingScheme { kVariable, kFixed };

const char* to_string(SamplingScheme s);
SamplingScheme sampling_scheme_from_string(const std::string& s);

// Per-depth Rx keep pattern. Every depth plane keeps exactly n_keep
// channels and always includes the two center channels J/2-1 and J/2.
// The fixed scheme stores one row broadcast over depth.
struct SamplingMask {
  SamplingScheme scheme = SamplingScheme::kVariable;
  int rx_channels = 0;    // J
  int depth_samples = 0;  // N
  int n_keep = 0;
  std::vector<std::uint8_t> rows;  // [n][j] for variable, [j] for fixed

  bool keep(int n, int j) const {
    return scheme == SamplingScheme::kFixed
               ? rows[static_cast<std::size_t>(j)] != 0
               : rows[static_cast<std::size_t>(n) * rx_channels + j] != 0;
  }
};

SamplingMask make_mask(SamplingScheme scheme, int n_keep, int rx_channels,
                       int depth_samples, std::uint64_t seed);

// Zero-fills masked-out channels in place of removing them, keeping the
// fixed J-channel layout required by the universal network input.
TimeAlignedCube apply_mask(const TimeAlignedCube& cube,
                           const SamplingMask& mask);

// Audit format: one line of J '0'/'1' characters per depth plane.
void write_mask_text(const SamplingMask& mask, const std::string& path);

}  // namespace usdbf
