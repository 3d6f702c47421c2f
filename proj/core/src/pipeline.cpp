#include "usdbf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "usdbf/errors.hpp"
#include "usdbf/util/binio.hpp"
#include "usdbf/util/parallel.hpp"
#include "usdbf/util/rng.hpp"

namespace usdbf {

using nlohmann::json;

Phantom PhantomSpec::realize(std::uint64_t seed) const {
  Phantom phantom;
  if (type == Type::kPoints) {
    phantom.scatterers = points;
    return phantom;
  }
  Rng rng(derive_seed(seed, 0x70686101));
  phantom.scatterers.reserve(static_cast<std::size_t>(num_scatterers));
  const double r2 = cyst_radius_m * cyst_radius_m;
  for (int i = 0; i < num_scatterers; ++i) {
    Scatterer s;
    s.lateral_m = (rng.uniform() - 0.5) * lateral_span_m;
    s.depth_m = depth_min_m + rng.uniform() * (depth_max_m - depth_min_m);
    s.amplitude = amplitude * rng.normal();
    const double dl = s.lateral_m - cyst_lateral_m;
    const double dd = s.depth_m - cyst_depth_m;
    if (dl * dl + dd * dd <= r2) continue;  // anechoic interior
    phantom.scatterers.push_back(s);
  }
  return phantom;
}

void ExperimentConfig::apply_runtime() const {
  set_num_threads(reproducible ? 1 : threads);
}

namespace {

Region parse_region(const json& j) {
  if (j.contains("rect")) {
    const auto& r = j.at("rect");
    if (!r.is_array() || r.size() != 4)
      throw ConfigError("region: rect wants [l0, n0, l1, n1]");
    return Region::rect(r[0].get<int>(), r[1].get<int>(), r[2].get<int>(),
                        r[3].get<int>());
  }
  if (j.contains("disk")) {
    const auto& d = j.at("disk");
    if (!d.is_array() || d.size() != 3)
      throw ConfigError("region: disk wants [center_l, center_n, radius]");
    return Region::disk(d[0].get<double>(), d[1].get<double>(),
                        d[2].get<double>());
  }
  throw ConfigError("region: expected a rect or disk");
}

void parse_probe(const json& j, ProbeConfig& p) {
  p.carrier_freq_hz = j.value("carrier_freq_hz", p.carrier_freq_hz);
  p.sampling_freq_hz = j.value("sampling_freq_hz", p.sampling_freq_hz);
  p.num_elements = j.value("num_elements", p.num_elements);
  p.num_tx_elements = j.value("num_tx_elements", p.num_tx_elements);
  p.num_te_events = j.value("num_te_events", p.num_te_events);
  p.num_rx_active = j.value("num_rx_active", p.num_rx_active);
  p.pitch_m = j.value("pitch_m", p.pitch_m);
  p.element_width_m = j.value("element_width_m", p.element_width_m);
  p.sound_speed_m_s = j.value("sound_speed_m_s", p.sound_speed_m_s);
  p.num_depth_samples = j.value("num_depth_samples", p.num_depth_samples);
}

void parse_phantom(const json& j, PhantomSpec& ph) {
  const std::string type = j.value("type", std::string("points"));
  if (type == "points") {
    ph.type = PhantomSpec::Type::kPoints;
    ph.points.clear();
    for (const auto& p : j.value("points", json::array())) {
      Scatterer s;
      s.lateral_m = p.at("lateral_m").get<double>();
      s.depth_m = p.at("depth_m").get<double>();
      s.amplitude = p.value("amplitude", 1.0);
      ph.points.push_back(s);
    }
  } else if (type == "cyst") {
    ph.type = PhantomSpec::Type::kCyst;
    ph.cyst_lateral_m = j.value("center_lateral_m", ph.cyst_lateral_m);
    ph.cyst_depth_m = j.value("center_depth_m", ph.cyst_depth_m);
    ph.cyst_radius_m = j.value("radius_m", ph.cyst_radius_m);
    ph.num_scatterers = j.value("num_scatterers", ph.num_scatterers);
    ph.lateral_span_m = j.value("lateral_span_m", ph.lateral_span_m);
    ph.depth_min_m = j.value("depth_min_m", ph.depth_min_m);
    ph.depth_max_m = j.value("depth_max_m", ph.depth_max_m);
    ph.amplitude = j.value("amplitude", ph.amplitude);
  } else {
    throw ConfigError("phantom: unknown type: " + type);
  }
}

void parse_network(const json& j, nn::NetworkConfig& c) {
  const std::string preset = j.value("preset", std::string("desk"));
  if (preset == "desk") {
    c = nn::NetworkConfig::desk_preset();
  } else if (preset == "paper") {
    c = nn::NetworkConfig::paper_preset();
  } else {
    throw ConfigError("network: unknown preset: " + preset);
  }
  c.num_conv_layers = j.value("num_conv_layers", c.num_conv_layers);
  c.hidden_channels = j.value("hidden_channels", c.hidden_channels);
  c.input_channels = j.value("input_channels", c.input_channels);
  c.output_channels = j.value("output_channels", c.output_channels);
  c.skip_concat_at = j.value("skip_concat_at", c.num_conv_layers - 1);
  c.batchnorm_epsilon = j.value("batchnorm_epsilon", c.batchnorm_epsilon);
}

void parse_training(const json& j, nn::TrainConfig& t) {
  t.weight_decay = j.value("weight_decay", t.weight_decay);
  t.lr_initial = j.value("lr_initial", t.lr_initial);
  t.lr_final = j.value("lr_final", t.lr_final);
  t.epochs = j.value("epochs", t.epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.seed = j.value("seed", t.seed);
}

std::vector<SamplingScheme> parse_schemes(const json& j) {
  std::vector<SamplingScheme> out;
  for (const auto& s : j) out.push_back(sampling_scheme_from_string(s));
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    ExperimentConfig cfg;
    cfg.schema_version = j.value("schema_version", 1);
    if (cfg.schema_version != 1)
      throw ConfigError("config: unsupported schema_version");
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.reproducible = j.value("reproducible", cfg.reproducible);
    if (j.contains("probe")) parse_probe(j.at("probe"), cfg.probe);
    if (j.contains("phantom")) parse_phantom(j.at("phantom"), cfg.phantom);
    cfg.noise_std = j.value("noise_std", cfg.noise_std);
    cfg.frames = j.value("frames", cfg.frames);
    cfg.frame_prefix = j.value("frame_prefix", cfg.frame_prefix);

    if (j.contains("subsample")) {
      const auto& s = j.at("subsample");
      cfg.scheme = sampling_scheme_from_string(
          s.value("scheme", std::string(to_string(cfg.scheme))));
      cfg.n_keep = s.value("n_keep", cfg.n_keep);
      cfg.mask_seed = s.value("seed", cfg.mask_seed);
    }
    if (j.contains("beamform")) {
      const auto& b = j.at("beamform");
      cfg.method = b.value("method", cfg.method);
      cfg.dynamic_range_db = b.value("dynamic_range_db", cfg.dynamic_range_db);
      cfg.checkpoint = b.value("checkpoint", cfg.checkpoint);
      if (b.contains("mv")) {
        const auto& m = b.at("mv");
        cfg.mv.subaperture = m.value("subaperture", cfg.mv.subaperture);
        cfg.mv.temporal_halfwidth =
            m.value("temporal_halfwidth", cfg.mv.temporal_halfwidth);
        cfg.mv.loading_factor = m.value("loading_factor", cfg.mv.loading_factor);
      }
    }
    if (j.contains("network")) parse_network(j.at("network"), cfg.network);
    cfg.network_seed = j.value("network_seed", cfg.network_seed);
    if (j.contains("training")) {
      const auto& t = j.at("training");
      parse_training(t, cfg.training);
      cfg.windows_per_frame = t.value("windows_per_frame", cfg.windows_per_frame);
      cfg.train_rates = t.value("rates", cfg.train_rates);
      cfg.train_frame_begin = t.value("frame_begin", cfg.train_frame_begin);
      cfg.train_frame_end = t.value("frame_end", cfg.train_frame_end);
    }
    if (j.contains("evaluate")) {
      const auto& e = j.at("evaluate");
      cfg.eval_rates = e.value("rates", cfg.eval_rates);
      cfg.eval_methods = e.value("methods", cfg.eval_methods);
      if (e.contains("schemes")) cfg.eval_schemes = parse_schemes(e.at("schemes"));
      cfg.eval_frame_begin = e.value("frame_begin", cfg.eval_frame_begin);
      cfg.eval_frame_end = e.value("frame_end", cfg.eval_frame_end);
      if (e.contains("background"))
        cfg.background = parse_region(e.at("background"));
      if (e.contains("structure"))
        cfg.structure = parse_region(e.at("structure"));
    }
    for (int r : cfg.eval_rates)
      if (r < 2 || r > cfg.probe.num_rx_active)
        throw ConfigError("config: eval rate outside [2, J]");
    for (int r : cfg.train_rates)
      if (r < 2 || r > cfg.probe.num_rx_active)
        throw ConfigError("config: train rate outside [2, J]");
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

RFFrame simulate_frame(const ExperimentConfig& cfg, int frame_index) {
  const Phantom phantom = cfg.phantom.realize(
      derive_seed(cfg.seed, static_cast<std::uint64_t>(frame_index), 0x7068));
  return simulate_rf(cfg.probe, phantom, cfg.noise_std,
                     derive_seed(cfg.seed, static_cast<std::uint64_t>(frame_index),
                                 0x6e6f));
}

TimeAlignedCube aligned_cube(const RFFrame& frame) {
  return time_align(frame, compute_delay_table(frame.probe));
}

BModeImage das_bmode(const TimeAlignedCube& cube, double dynamic_range_db) {
  const ScanlineImage z = das(cube);
  return log_compress(envelope(hilbert_analytic(z)), cube.scan_lines,
                      cube.depth_samples, dynamic_range_db);
}

BModeImage mv_bmode(const TimeAlignedCube& cube, const MVParams& params,
                    double dynamic_range_db) {
  const ScanlineImage z = mv_beamform(cube, params);
  return log_compress(envelope(hilbert_analytic(z)), cube.scan_lines,
                      cube.depth_samples, dynamic_range_db);
}

BModeImage deepbf_bmode(nn::Network& net, const TimeAlignedCube& masked_cube,
                        double dynamic_range_db) {
  const IQImage iq = nn::infer_frame(net, masked_cube);
  return log_compress(envelope(iq), masked_cube.scan_lines,
                      masked_cube.depth_samples, dynamic_range_db);
}

std::vector<nn::Sample> build_samples(const TimeAlignedCube& cube,
                                      const std::vector<int>& rates,
                                      int windows, int rows,
                                      std::uint64_t seed) {
  if (rates.empty()) throw ConfigError("samples: need at least one rate");
  const int L = cube.scan_lines, J = cube.rx_channels, N = cube.depth_samples;
  if (N < rows) throw DataError("samples: cube shallower than window");

  // Full-aperture DAS + Hilbert target for the whole frame.
  const IQImage iq = hilbert_analytic(das(cube));

  std::vector<nn::Sample> samples;
  samples.reserve(static_cast<std::size_t>(windows));
  Rng rng(derive_seed(seed, 0x77696e));

  for (int wdx = 0; wdx < windows; ++wdx) {
    const int n0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(N - rows + 1)));
    const int rate =
        rates[static_cast<std::size_t>(rng.below(rates.size()))];
    const SamplingMask mask =
        make_mask(SamplingScheme::kVariable, rate, J, N,
                  derive_seed(seed, 0x6d61736b, static_cast<std::uint64_t>(wdx)));

    // Frame-level amplitude normalization from the masked cube, computed
    // without materializing the masked copy.
    double ss = 0.0;
    std::int64_t count = 0;
    for (int l = 0; l < L; ++l)
      for (int j = 0; j < J; ++j) {
        const float* trace = cube.trace(l, j);
        for (int n = 0; n < N; ++n) {
          if (trace[n] != 0.0f && mask.keep(n, j)) {
            ss += static_cast<double>(trace[n]) * trace[n];
            ++count;
          }
        }
      }
    const double scale =
        (count == 0 || ss == 0.0) ? 1.0
                                  : 1.0 / std::sqrt(ss / static_cast<double>(count));

    nn::Sample sample;
    sample.input = nn::Tensor(1, J, rows, L);
    for (int j = 0; j < J; ++j)
      for (int r = 0; r < rows; ++r) {
        float* dst = sample.input.plane(0, j) + static_cast<std::size_t>(r) * L;
        for (int l = 0; l < L; ++l)
          dst[l] = mask.keep(n0 + r, j)
                       ? static_cast<float>(scale * cube.at(l, j, n0 + r))
                       : 0.0f;
      }
    sample.target = nn::Tensor(1, 2, rows, L);
    for (int r = 0; r < rows; ++r)
      for (int l = 0; l < L; ++l) {
        const std::size_t idx = iq.index(l, n0 + r);
        sample.target.at(0, 0, r, l) = static_cast<float>(scale * iq.i[idx]);
        sample.target.at(0, 1, r, l) = static_cast<float>(scale * iq.q[idx]);
      }
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::string metrics_csv_header() {
  return "frame,scheme,n_keep,method,CNR,GCNR,PSNR,SSIM";
}

namespace {

std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string format_metrics_row(const MetricsRow& row) {
  std::ostringstream os;
  os << row.frame << ',' << row.scheme << ',' << row.n_keep << ','
     << row.method << ',' << format_metric(row.cnr) << ','
     << format_metric(row.gcnr) << ',' << format_metric(row.psnr) << ','
     << format_metric(row.ssim);
  return os.str();
}

void write_metrics_csv(const std::vector<MetricsRow>& rows,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("csv: cannot open for writing: " + path);
  os << metrics_csv_header() << '\n';
  for (const auto& row : rows) os << format_metrics_row(row) << '\n';
  if (!os) throw DataError("csv: write failed: " + path);
}

MetricsRow evaluate_image(const BModeImage& reference, const BModeImage& test,
                          const Region& background, const Region& structure) {
  const RealImage ref = to_real(reference);
  const RealImage img = to_real(test);
  MetricsRow row;
  row.cnr = cnr(img, background, structure);
  row.gcnr = gcnr(img, background, structure);
  row.psnr = psnr(ref, img);
  row.ssim = ssim(ref, img);
  return row;
}

std::string frame_path(const ExperimentConfig& cfg, int index) {
  char name[256];
  std::snprintf(name, sizeof(name), "%s_%04d.usrf", cfg.frame_prefix.c_str(),
                index);
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

void run_simulate(const ExperimentConfig& cfg) {
  cfg.apply_runtime();
  cfg.probe.validate();
  std::filesystem::create_directories(cfg.output_dir);
  for (int f = 0; f < cfg.frames; ++f) {
    const RFFrame frame = simulate_frame(cfg, f);
    write_rf(frame, frame_path(cfg, f));
  }
  std::printf("simulate: wrote %d frame(s), L=%d J=%d N=%d\n", cfg.frames,
              cfg.probe.num_te_events, cfg.probe.num_rx_active,
              cfg.probe.num_depth_samples);
}

void run_mask(const ExperimentConfig& cfg, const std::string& out_path) {
  cfg.apply_runtime();
  const SamplingMask mask =
      make_mask(cfg.scheme, cfg.n_keep, cfg.probe.num_rx_active,
                cfg.probe.num_depth_samples, cfg.mask_seed);
  write_mask_text(mask, out_path);
  std::printf("mask: %s scheme, %d of %d channels, %d depth planes -> %s\n",
              to_string(cfg.scheme), cfg.n_keep, cfg.probe.num_rx_active,
              cfg.probe.num_depth_samples, out_path.c_str());
}

namespace {

void write_iq(const IQImage& iq, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("iq: cannot open for writing: " + path);
  os.write("USIQ", 4);
  binio::put_u16le(os, 1);
  binio::put_u32le(os, static_cast<std::uint32_t>(iq.scan_lines));
  binio::put_u32le(os, static_cast<std::uint32_t>(iq.depth_samples));
  for (double v : iq.i) binio::put_f32le(os, static_cast<float>(v));
  for (double v : iq.q) binio::put_f32le(os, static_cast<float>(v));
  if (!os) throw DataError("iq: write failed: " + path);
}

}  // namespace

void run_beamform(const ExperimentConfig& cfg, const std::string& rf_path,
                  const std::string& pgm_path, const std::string& iq_path) {
  cfg.apply_runtime();
  const RFFrame frame = read_rf(rf_path);
  TimeAlignedCube cube = aligned_cube(frame);
  const int J = frame.probe.num_rx_active;
  if (cfg.n_keep < J) {
    const SamplingMask mask = make_mask(cfg.scheme, cfg.n_keep, J,
                                        frame.probe.num_depth_samples,
                                        cfg.mask_seed);
    cube = apply_mask(cube, mask);
  }

  BModeImage image;
  IQImage iq;
  if (cfg.method == "das") {
    iq = hilbert_analytic(das(cube));
  } else if (cfg.method == "mv") {
    iq = hilbert_analytic(mv_beamform(cube, cfg.mv.params()));
  } else if (cfg.method == "deepbf") {
    if (cfg.checkpoint.empty())
      throw ConfigError("beamform: deepbf requires a checkpoint");
    nn::Checkpoint ckpt = nn::load_checkpoint(cfg.checkpoint);
    iq = nn::infer_frame(ckpt.net, cube);
  } else {
    throw ConfigError("beamform: unknown method: " + cfg.method);
  }
  image = log_compress(envelope(iq), cube.scan_lines, cube.depth_samples,
                       cfg.dynamic_range_db);
  write_pgm(image, pgm_path);
  if (!iq_path.empty()) write_iq(iq, iq_path);
  std::printf("beamform: %s, %d/%d channels -> %s\n", cfg.method.c_str(),
              std::min(cfg.n_keep, J), J, pgm_path.c_str());
}

std::string run_train(const ExperimentConfig& cfg) {
  cfg.apply_runtime();
  if (cfg.train_frame_end <= cfg.train_frame_begin)
    throw ConfigError("train: empty frame range");
  std::filesystem::create_directories(cfg.output_dir);

  std::vector<nn::Sample> dataset;
  for (int f = cfg.train_frame_begin; f < cfg.train_frame_end; ++f) {
    const RFFrame frame = read_rf(frame_path(cfg, f));
    const TimeAlignedCube cube = aligned_cube(frame);
    auto samples = build_samples(
        cube, cfg.train_rates, cfg.windows_per_frame, cfg.network.input_rows,
        derive_seed(cfg.training.seed, static_cast<std::uint64_t>(f), 0x6473));
    for (auto& s : samples) dataset.push_back(std::move(s));
  }

  nn::Network net = nn::xavier_init(cfg.network, cfg.network_seed);
  const nn::TrainResult result = nn::train(net, dataset, cfg.training);

  const std::string ckpt_path =
      (std::filesystem::path(cfg.output_dir) / "deepbf.udbf").string();
  nn::save_checkpoint(net, result.epoch_losses, ckpt_path);

  const std::string loss_path =
      (std::filesystem::path(cfg.output_dir) / "train_loss.csv").string();
  std::ofstream os(loss_path);
  if (!os) throw DataError("train: cannot write loss log");
  os << "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu,%.9e\n", e, result.epoch_losses[e]);
    os << buf;
  }
  os.close();

  if (result.diverged)
    throw NumericError("train: diverged after epoch " +
                       std::to_string(result.completed_epochs) +
                       "; last good checkpoint kept at " + ckpt_path);
  std::printf("train: %d epochs over %zu samples -> %s\n",
              result.completed_epochs, dataset.size(), ckpt_path.c_str());
  return ckpt_path;
}

std::string run_evaluate(const ExperimentConfig& cfg) {
  cfg.apply_runtime();
  if (cfg.eval_frame_end <= cfg.eval_frame_begin)
    throw ConfigError("evaluate: empty frame range");
  std::filesystem::create_directories(cfg.output_dir);

  const bool wants_deepbf =
      std::find(cfg.eval_methods.begin(), cfg.eval_methods.end(), "deepbf") !=
      cfg.eval_methods.end();
  nn::Checkpoint ckpt;
  if (wants_deepbf) {
    if (cfg.checkpoint.empty())
      throw ConfigError("evaluate: deepbf requires a checkpoint");
    ckpt = nn::load_checkpoint(cfg.checkpoint);
  }

  std::vector<MetricsRow> rows;
  for (int f = cfg.eval_frame_begin; f < cfg.eval_frame_end; ++f) {
    const RFFrame frame = read_rf(frame_path(cfg, f));
    const TimeAlignedCube cube = aligned_cube(frame);
    const int J = frame.probe.num_rx_active;
    const BModeImage reference = das_bmode(cube, cfg.dynamic_range_db);

    for (const auto scheme : cfg.eval_schemes) {
      for (int rate : cfg.eval_rates) {
        const SamplingMask mask = make_mask(
            scheme, rate, J, frame.probe.num_depth_samples,
            derive_seed(cfg.mask_seed, static_cast<std::uint64_t>(f),
                        static_cast<std::uint64_t>(rate),
                        scheme == SamplingScheme::kFixed ? 1 : 0));
        const TimeAlignedCube masked =
            rate < J ? apply_mask(cube, mask) : cube;

        for (const auto& method : cfg.eval_methods) {
          BModeImage image;
          if (method == "das") {
            image = das_bmode(masked, cfg.dynamic_range_db);
          } else if (method == "mv") {
            image = mv_bmode(masked, cfg.mv.params(), cfg.dynamic_range_db);
          } else if (method == "deepbf") {
            image = deepbf_bmode(ckpt.net, masked, cfg.dynamic_range_db);
          } else {
            throw ConfigError("evaluate: unknown method: " + method);
          }
          MetricsRow row =
              evaluate_image(reference, image, cfg.background, cfg.structure);
          row.frame = f;
          row.scheme = to_string(scheme);
          row.n_keep = rate;
          row.method = method;
          rows.push_back(std::move(row));
        }
      }
    }
  }

  const std::string csv_path =
      (std::filesystem::path(cfg.output_dir) / "metrics.csv").string();
  write_metrics_csv(rows, csv_path);
  std::printf("evaluate: %zu rows -> %s\n", rows.size(), csv_path.c_str());
  return csv_path;
}

void run_report(const std::string& metrics_csv, const std::string& out_path) {
  std::ifstream is(metrics_csv);
  if (!is) throw DataError("report: cannot open: " + metrics_csv);
  std::string line;
  if (!std::getline(is, line)) throw DataError("report: empty CSV");
  if (line != metrics_csv_header())
    throw DataError("report: unexpected CSV header");

  struct Agg {
    int count = 0;
    double sum[4] = {0, 0, 0, 0};
    double sum2[4] = {0, 0, 0, 0};
  };
  std::map<std::string, Agg> groups;

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw DataError("report: malformed row: " + line);
    const std::string key = fields[1] + "," + fields[2] + "," + fields[3];
    Agg& agg = groups[key];
    ++agg.count;
    for (int m = 0; m < 4; ++m) {
      const double v = fields[4 + static_cast<std::size_t>(m)] == "inf"
                           ? std::numeric_limits<double>::infinity()
                           : std::stod(fields[4 + static_cast<std::size_t>(m)]);
      agg.sum[m] += v;
      agg.sum2[m] += v * v;
    }
  }

  std::ofstream os(out_path);
  if (!os) throw DataError("report: cannot open for writing: " + out_path);
  os << "scheme,n_keep,method,frames,CNR_mean,CNR_std,GCNR_mean,GCNR_std,"
        "PSNR_mean,PSNR_std,SSIM_mean,SSIM_std\n";
  for (const auto& [key, agg] : groups) {
    os << key << ',' << agg.count;
    for (int m = 0; m < 4; ++m) {
      const double mean = agg.sum[m] / agg.count;
      const double var =
          std::max(0.0, agg.sum2[m] / agg.count - mean * mean);
      os << ',' << format_metric(mean) << ',' << format_metric(std::sqrt(var));
    }
    os << '\n';
  }
  if (!os) throw DataError("report: write failed: " + out_path);
}

}  // namespace usdbf
