#include "usdbf/neural/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "usdbf/errors.hpp"
#include "usdbf/util/binio.hpp"

namespace usdbf::nn {

namespace {
constexpr char kMagic[4] = {'U', 'D', 'B', 'F'};
constexpr std::uint16_t kVersion = 1;
}  // namespace

void save_checkpoint(const Network& net,
                     const std::vector<double>& epoch_losses,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("checkpoint: cannot open for writing: " + path);

  const NetworkConfig& c = net.config;
  binio::put_bytes(os, kMagic, 4);
  binio::put_u16le(os, kVersion);
  binio::put_u32le(os, static_cast<std::uint32_t>(c.num_conv_layers));
  binio::put_u32le(os, static_cast<std::uint32_t>(c.hidden_channels));
  binio::put_u32le(os, static_cast<std::uint32_t>(c.input_channels));
  binio::put_u32le(os, static_cast<std::uint32_t>(c.input_rows));
  binio::put_u32le(os, static_cast<std::uint32_t>(c.output_channels));
  binio::put_u32le(os, static_cast<std::uint32_t>(c.skip_concat_at));
  os.put(c.conv_only ? 1 : 0);
  binio::put_f64le(os, c.batchnorm_epsilon);

  binio::put_u32le(os, static_cast<std::uint32_t>(epoch_losses.size()));
  for (double x : epoch_losses) binio::put_f64le(os, x);

  for (const auto& layer : net.layers) {
    binio::put_u32le(os, static_cast<std::uint32_t>(layer.conv.in_c));
    binio::put_u32le(os, static_cast<std::uint32_t>(layer.conv.out_c));
    binio::put_u32le(os, static_cast<std::uint32_t>(layer.conv.kernel));
    binio::put_f32le_array(os, layer.conv.w);
    binio::put_f32le_array(os, layer.conv.b);
    if (layer.has_bn_relu) {
      binio::put_f32le_array(os, layer.bn.gamma);
      binio::put_f32le_array(os, layer.bn.beta);
      binio::put_f32le_array(os, layer.bn.running_mean);
      binio::put_f32le_array(os, layer.bn.running_var);
    }
  }
  if (!os) throw DataError("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open: " + path);

  char magic[4];
  binio::get_bytes(is, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw BadMagicError("checkpoint: bad magic bytes");
  if (binio::get_u16le(is) != kVersion)
    throw BadMagicError("checkpoint: unsupported version");

  NetworkConfig c;
  c.num_conv_layers = static_cast<int>(binio::get_u32le(is));
  c.hidden_channels = static_cast<int>(binio::get_u32le(is));
  c.input_channels = static_cast<int>(binio::get_u32le(is));
  c.input_rows = static_cast<int>(binio::get_u32le(is));
  c.output_channels = static_cast<int>(binio::get_u32le(is));
  c.skip_concat_at = static_cast<int>(binio::get_u32le(is));
  c.conv_only = is.get() != 0;
  c.batchnorm_epsilon = binio::get_f64le(is);
  if (c.num_conv_layers < 2 || c.num_conv_layers > 1024)
    throw DimensionError("checkpoint: implausible layer count");
  c.validate();

  Checkpoint ckpt;
  const std::uint32_t n_losses = binio::get_u32le(is);
  if (n_losses > (1u << 24))
    throw DimensionError("checkpoint: implausible loss log length");
  ckpt.epoch_losses.resize(n_losses);
  for (auto& x : ckpt.epoch_losses) x = binio::get_f64le(is);

  Network net;
  net.config = c;
  net.mode = Mode::kEval;
  net.layers.resize(static_cast<std::size_t>(c.num_conv_layers));
  for (int i = 0; i < c.num_conv_layers; ++i) {
    Layer& layer = net.layers[static_cast<std::size_t>(i)];
    layer.conv.in_c = static_cast<int>(binio::get_u32le(is));
    layer.conv.out_c = static_cast<int>(binio::get_u32le(is));
    layer.conv.kernel = static_cast<int>(binio::get_u32le(is));
    if (layer.conv.in_c != c.conv_in_channels(i) ||
        layer.conv.out_c != c.conv_out_channels(i) ||
        layer.conv.kernel != c.conv_kernel(i))
      throw DimensionError("checkpoint: layer shape disagrees with config");
    layer.conv.allocate();
    binio::get_f32le_array(is, layer.conv.w);
    binio::get_f32le_array(is, layer.conv.b);
    layer.has_bn_relu = c.layer_has_bn_relu(i);
    if (layer.has_bn_relu) {
      layer.bn.channels = layer.conv.out_c;
      layer.bn.epsilon = c.batchnorm_epsilon;
      layer.bn.allocate();
      binio::get_f32le_array(is, layer.bn.gamma);
      binio::get_f32le_array(is, layer.bn.beta);
      binio::get_f32le_array(is, layer.bn.running_mean);
      binio::get_f32le_array(is, layer.bn.running_var);
      for (float v : layer.bn.running_var)
        if (!(v > 0.0f) || !std::isfinite(v))
          throw DataError("checkpoint: running variance must be positive");
    }
  }
  ckpt.net = std::move(net);
  return ckpt;
}

}  // namespace usdbf::nn
