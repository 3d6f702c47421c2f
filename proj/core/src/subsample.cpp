#include "usdbf/subsample.hpp"

#include <fstream>
#include <numeric>

#include "usdbf/errors.hpp"
#include "usdbf/util/rng.hpp"

namespace usdbf {

const char* to_string(SamplingScheme s) {
  return s == SamplingScheme::kVariable ? "variable" : "fixed";
}

SamplingScheme sampling_scheme_from_string(const std::string& s) {
  if (s == "variable") return SamplingScheme::kVariable;
  if (s == "fixed") return SamplingScheme::kFixed;
  throw ConfigError("unknown sampling scheme: " + s);
}

namespace {

// Fills one depth plane: center pair always on, the remaining n_keep - 2
// drawn without replacement from the other J - 2 channels.
void fill_plane(std::uint8_t* row, int J, int n_keep, Rng& rng) {
  const int c0 = J / 2 - 1;
  const int c1 = J / 2;
  for (int j = 0; j < J; ++j) row[j] = 0;
  row[c0] = 1;
  row[c1] = 1;

  std::vector<int> others;
  others.reserve(static_cast<std::size_t>(J) - 2);
  for (int j = 0; j < J; ++j)
    if (j != c0 && j != c1) others.push_back(j);

  // Partial Fisher-Yates: the first n_keep - 2 entries become the draw.
  const int want = n_keep - 2;
  const int m = static_cast<int>(others.size());
  for (int i = 0; i < want; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - i)));
    std::swap(others[i], others[j]);
    row[others[i]] = 1;
  }
}

}  // namespace

SamplingMask make_mask(SamplingScheme scheme, int n_keep, int rx_channels,
                       int depth_samples, std::uint64_t seed) {
  if (rx_channels < 2) throw ConfigError("mask: need at least two channels");
  if (n_keep < 2 || n_keep > rx_channels)
    throw ConfigError("mask: n_keep must satisfy 2 <= n_keep <= J");
  if (depth_samples < 1) throw ConfigError("mask: need at least one depth");

  SamplingMask mask;
  mask.scheme = scheme;
  mask.rx_channels = rx_channels;
  mask.depth_samples = depth_samples;
  mask.n_keep = n_keep;

  if (scheme == SamplingScheme::kFixed) {
    mask.rows.resize(static_cast<std::size_t>(rx_channels));
    Rng rng(derive_seed(seed, 0));
    fill_plane(mask.rows.data(), rx_channels, n_keep, rng);
  } else {
    mask.rows.resize(static_cast<std::size_t>(depth_samples) * rx_channels);
    for (int n = 0; n < depth_samples; ++n) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(n) + 1));
      fill_plane(&mask.rows[static_cast<std::size_t>(n) * rx_channels],
                 rx_channels, n_keep, rng);
    }
  }
  return mask;
}

TimeAlignedCube apply_mask(const TimeAlignedCube& cube,
                           const SamplingMask& mask) {
  if (mask.rx_channels != cube.rx_channels ||
      mask.depth_samples != cube.depth_samples)
    throw DimensionError("mask: dimensions do not match cube");

  TimeAlignedCube out = cube;
  for (int l = 0; l < cube.scan_lines; ++l)
    for (int j = 0; j < cube.rx_channels; ++j) {
      float* trace = out.trace(l, j);
      for (int n = 0; n < cube.depth_samples; ++n)
        if (!mask.keep(n, j)) trace[n] = 0.0f;
    }
  return out;
}

void write_mask_text(const SamplingMask& mask, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("mask: cannot open for writing: " + path);
  for (int n = 0; n < mask.depth_samples; ++n) {
    for (int j = 0; j < mask.rx_channels; ++j)
      os.put(mask.keep(n, j) ? '1' : '0');
    os.put('\n');
  }
  if (!os) throw DataError("mask: write failed: " + path);
}

}  // namespace usdbf
