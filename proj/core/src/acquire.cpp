#include "usdbf/acquire.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "usdbf/errors.hpp"
#include "usdbf/util/binio.hpp"
#include "usdbf/util/parallel.hpp"
#include "usdbf/util/rng.hpp"

namespace usdbf {

void Phantom::validate() const {
  for (const auto& s : scatterers) {
    if (!(s.depth_m > 0.0))
      throw DataError("phantom: scatterer depth must be positive");
    if (!std::isfinite(s.lateral_m) || !std::isfinite(s.amplitude))
      throw DataError("phantom: non-finite scatterer");
  }
}

DelayTable compute_delay_table(const ProbeConfig& probe) {
  probe.validate();
  const int J = probe.num_rx_active;
  const int N = probe.num_depth_samples;
  DelayTable table;
  table.rx_channels = J;
  table.depth_samples = N;
  table.tau.resize(static_cast<std::size_t>(J) * N);
  const double fs_over_c = probe.sampling_freq_hz / probe.sound_speed_m_s;
  for (int j = 0; j < J; ++j) {
    const double xj = probe.rx_lateral_offset(j);
    for (int n = 0; n < N; ++n) {
      const double d = probe.depth_of_sample(n);
      const double path = std::sqrt(d * d + xj * xj) - d;
      table.tau[static_cast<std::size_t>(j) * N + n] =
          static_cast<std::int32_t>(std::llround(fs_over_c * path));
    }
  }
  return table;
}

namespace {

// Gaussian-enveloped carrier pulse, tabulated at 16x the sampling rate and
// evaluated by linear interpolation. sigma_t realizes a 0.6 fractional
// bandwidth at -6 dB: sigma_t = sqrt(ln 2 / 2) / (pi * 0.3 * f0).
struct PulseTable {
  static constexpr int kOversample = 16;
  double sample_rate;  // table samples per second
  double half_width_s; // truncation at 4 sigma
  std::vector<double> values;

  PulseTable(double carrier_hz, double fs_hz) {
    const double sigma =
        std::sqrt(std::log(2.0) / 2.0) / (M_PI * 0.3 * carrier_hz);
    half_width_s = 4.0 * sigma;
    sample_rate = fs_hz * kOversample;
    const int half_n = static_cast<int>(std::ceil(half_width_s * sample_rate));
    values.resize(2 * half_n + 1);
    for (int k = -half_n; k <= half_n; ++k) {
      const double t = k / sample_rate;
      values[k + half_n] = std::cos(2.0 * M_PI * carrier_hz * t) *
                           std::exp(-t * t / (2.0 * sigma * sigma));
    }
  }

  // t relative to the pulse center, in seconds.
  double eval(double t) const {
    const double pos = t * sample_rate + (values.size() - 1) / 2.0;
    if (pos <= 0.0 || pos >= static_cast<double>(values.size() - 1)) return 0.0;
    const int i0 = static_cast<int>(pos);
    const double frac = pos - i0;
    return values[i0] + frac * (values[i0 + 1] - values[i0]);
  }
};

}  // namespace

RFFrame simulate_rf(const ProbeConfig& probe, const Phantom& phantom,
                    double noise_std, std::uint64_t seed) {
  probe.validate();
  phantom.validate();
  if (noise_std < 0.0) throw ConfigError("simulate: noise_std must be >= 0");

  const int L = probe.num_te_events;
  const int J = probe.num_rx_active;
  const int N = probe.num_depth_samples;
  RFFrame frame(probe);

  const PulseTable pulse(probe.carrier_freq_hz, probe.sampling_freq_hz);
  const double fs = probe.sampling_freq_hz;
  const double c = probe.sound_speed_m_s;

  parallel_for(0, L, [&](std::int64_t l) {
    const double line_x = probe.scanline_lateral(static_cast<int>(l));
    for (const auto& s : phantom.scatterers) {
      const double dxt = s.lateral_m - line_x;
      const double d_tx = std::sqrt(dxt * dxt + s.depth_m * s.depth_m);
      for (int j = 0; j < J; ++j) {
        const double rx_x = line_x + probe.rx_lateral_offset(j);
        const double dxr = s.lateral_m - rx_x;
        const double d_rx = std::sqrt(dxr * dxr + s.depth_m * s.depth_m);
        const double t_flight = (d_tx + d_rx) / c;
        const double gain = s.amplitude / (d_tx * d_rx);
        const double center = t_flight * fs;  // in samples
        const int n0 = std::max(0, static_cast<int>(
                                       std::ceil(center - pulse.half_width_s * fs)));
        const int n1 = std::min(N - 1, static_cast<int>(std::floor(
                                           center + pulse.half_width_s * fs)));
        float* out = frame.trace(static_cast<int>(l), j);
        for (int n = n0; n <= n1; ++n) {
          out[n] += static_cast<float>(gain * pulse.eval(n / fs - t_flight));
        }
      }
    }
    if (noise_std > 0.0) {
      for (int j = 0; j < J; ++j) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(l),
                            static_cast<std::uint64_t>(j)));
        float* out = frame.trace(static_cast<int>(l), j);
        for (int n = 0; n < N; ++n)
          out[n] += static_cast<float>(noise_std * rng.normal());
      }
    }
  });
  return frame;
}

namespace {

constexpr char kRfMagic[4] = {'U', 'S', 'R', 'F'};
constexpr std::uint16_t kRfVersion = 1;

}  // namespace

void write_rf(const RFFrame& frame, std::ostream& os) {
  const ProbeConfig& p = frame.probe;
  binio::put_bytes(os, kRfMagic, 4);
  binio::put_u16le(os, kRfVersion);
  binio::put_u32le(os, static_cast<std::uint32_t>(p.num_te_events));
  binio::put_u32le(os, static_cast<std::uint32_t>(p.num_rx_active));
  binio::put_u32le(os, static_cast<std::uint32_t>(p.num_depth_samples));
  // Probe scalars as float64, in declaration order.
  binio::put_f64le(os, p.carrier_freq_hz);
  binio::put_f64le(os, p.sampling_freq_hz);
  binio::put_f64le(os, static_cast<double>(p.num_elements));
  binio::put_f64le(os, static_cast<double>(p.num_tx_elements));
  binio::put_f64le(os, static_cast<double>(p.num_te_events));
  binio::put_f64le(os, static_cast<double>(p.num_rx_active));
  binio::put_f64le(os, p.pitch_m);
  binio::put_f64le(os, p.element_width_m);
  binio::put_f64le(os, p.sound_speed_m_s);
  binio::put_f64le(os, static_cast<double>(p.num_depth_samples));
  binio::put_f32le_array(os, frame.data);
  if (!os) throw DataError("usrf: write failed");
}

void write_rf(const RFFrame& frame, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("usrf: cannot open for writing: " + path);
  write_rf(frame, os);
}

RFFrame read_rf(std::istream& is) {
  char magic[4];
  binio::get_bytes(is, magic, 4);
  if (std::memcmp(magic, kRfMagic, 4) != 0)
    throw BadMagicError("usrf: bad magic bytes");
  const std::uint16_t version = binio::get_u16le(is);
  if (version != kRfVersion)
    throw BadMagicError("usrf: unsupported format version");
  const std::uint32_t L = binio::get_u32le(is);
  const std::uint32_t J = binio::get_u32le(is);
  const std::uint32_t N = binio::get_u32le(is);

  ProbeConfig p;
  p.carrier_freq_hz = binio::get_f64le(is);
  p.sampling_freq_hz = binio::get_f64le(is);
  p.num_elements = static_cast<int>(binio::get_f64le(is));
  p.num_tx_elements = static_cast<int>(binio::get_f64le(is));
  p.num_te_events = static_cast<int>(binio::get_f64le(is));
  p.num_rx_active = static_cast<int>(binio::get_f64le(is));
  p.pitch_m = binio::get_f64le(is);
  p.element_width_m = binio::get_f64le(is);
  p.sound_speed_m_s = binio::get_f64le(is);
  p.num_depth_samples = static_cast<int>(binio::get_f64le(is));

  constexpr std::uint64_t kMaxSamples = 1ull << 33;  // 32 GiB of float32
  if (L == 0 || J == 0 || N == 0 ||
      L > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
      J > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
      N > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
    throw DimensionError("usrf: declared dimensions out of range");
  const std::uint64_t lj = static_cast<std::uint64_t>(L) * J;
  if (lj > kMaxSamples || lj * N / N != lj || lj * N > kMaxSamples)
    throw DimensionError("usrf: declared dimensions out of range");
  if (static_cast<std::uint32_t>(p.num_te_events) != L ||
      static_cast<std::uint32_t>(p.num_rx_active) != J ||
      static_cast<std::uint32_t>(p.num_depth_samples) != N)
    throw DimensionError("usrf: header dimensions disagree with probe");
  p.validate();

  RFFrame frame(p);
  binio::get_f32le_array(is, frame.data);
  return frame;
}

RFFrame read_rf(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("usrf: cannot open: " + path);
  return read_rf(is);
}

}  // namespace usdbf
