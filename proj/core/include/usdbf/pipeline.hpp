#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "usdbf/acquire.hpp"
#include "usdbf/beamform.hpp"
#include "usdbf/metrics.hpp"
#include "usdbf/neural/checkpoint.hpp"
#include "usdbf/neural/infer.hpp"
#include "usdbf/neural/train.hpp"
#include "usdbf/postproc.hpp"
#include "usdbf/subsample.hpp"

namespace usdbf {

// Scatterer-cloud description, realized into a Phantom per frame seed.
struct PhantomSpec {
  enum class Type { kPoints, kCyst } type = Type::kPoints;
  // kPoints: a fixed list.
  std::vector<Scatterer> points;
  // kCyst: uniform scatterer cloud with an anechoic disk carved out.
  double cyst_lateral_m = 0.0;
  double cyst_depth_m = 15e-3;
  double cyst_radius_m = 6e-3;
  int num_scatterers = 6000;
  double lateral_span_m = 20e-3;  // full width, centered on the array
  double depth_min_m = 2e-3;
  double depth_max_m = 25e-3;
  double amplitude = 1.0;

  Phantom realize(std::uint64_t seed) const;
};

struct MVConfig {
  int subaperture = 0;  // 0 = J/2
  int temporal_halfwidth = 1;
  double loading_factor = 1e-2;

  MVParams params() const {
    return MVParams{subaperture, temporal_halfwidth, loading_factor};
  }
};

// One structured config drives every subcommand; unset fields keep their
// defaults. schema_version must be 1.
struct ExperimentConfig {
  int schema_version = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int threads = 0;
  bool reproducible = false;

  ProbeConfig probe;
  PhantomSpec phantom;
  double noise_std = 0.0;
  int frames = 1;
  std::string frame_prefix = "frame";

  SamplingScheme scheme = SamplingScheme::kVariable;
  int n_keep = 64;
  std::uint64_t mask_seed = 1;

  std::string method = "das";
  MVConfig mv;
  double dynamic_range_db = 60.0;
  std::string checkpoint;  // input checkpoint for deepbf

  nn::NetworkConfig network = nn::NetworkConfig::desk_preset();
  std::uint64_t network_seed = 7;
  nn::TrainConfig training;
  int windows_per_frame = 12;
  std::vector<int> train_rates = {4, 8, 16, 24, 32, 64};
  int train_frame_begin = 0, train_frame_end = 0;
  int eval_frame_begin = 0, eval_frame_end = 0;

  std::vector<int> eval_rates = {4, 8, 16, 24, 32, 64};
  std::vector<std::string> eval_methods = {"das", "deepbf"};
  std::vector<SamplingScheme> eval_schemes = {SamplingScheme::kVariable};
  Region background = Region::rect(0, 0, 0, 0);
  Region structure = Region::rect(0, 0, 0, 0);

  void apply_runtime() const;  // thread count / reproducible mode
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// ---- In-memory building blocks ----

RFFrame simulate_frame(const ExperimentConfig& cfg, int frame_index);

TimeAlignedCube aligned_cube(const RFFrame& frame);

BModeImage das_bmode(const TimeAlignedCube& cube, double dynamic_range_db);
BModeImage mv_bmode(const TimeAlignedCube& cube, const MVParams& params,
                    double dynamic_range_db);
// DeepBF emits I/Q directly; envelope and log compression follow.
BModeImage deepbf_bmode(nn::Network& net, const TimeAlignedCube& masked_cube,
                        double dynamic_range_db);

// Training pairs from one frame: windows at random depths, each with an
// independently drawn rate and variable-scheme mask applied on the fly;
// targets come from the unmasked full-aperture DAS + Hilbert I/Q.
std::vector<nn::Sample> build_samples(const TimeAlignedCube& cube,
                                      const std::vector<int>& rates,
                                      int windows, int rows,
                                      std::uint64_t seed);

struct MetricsRow {
  int frame = 0;
  std::string scheme;
  int n_keep = 0;
  std::string method;
  double cnr = 0, gcnr = 0, psnr = 0, ssim = 0;
};

std::string metrics_csv_header();
std::string format_metrics_row(const MetricsRow& row);
void write_metrics_csv(const std::vector<MetricsRow>& rows,
                       const std::string& path);

MetricsRow evaluate_image(const BModeImage& reference, const BModeImage& test,
                          const Region& background, const Region& structure);

// ---- File-based runners behind the CLI subcommands ----

std::string frame_path(const ExperimentConfig& cfg, int index);

void run_simulate(const ExperimentConfig& cfg);
void run_mask(const ExperimentConfig& cfg, const std::string& out_path);
void run_beamform(const ExperimentConfig& cfg, const std::string& rf_path,
                  const std::string& pgm_path, const std::string& iq_path = "");
// Returns the checkpoint path it wrote.
std::string run_train(const ExperimentConfig& cfg);
// Returns the metrics CSV path it wrote.
std::string run_evaluate(const ExperimentConfig& cfg);
void run_report(const std::string& metrics_csv, const std::string& out_path);

}  // namespace usdbf
