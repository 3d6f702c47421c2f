// usdbf: focused B-mode ultrasound reconstruction toolkit.
//
// Subcommands: simulate, mask, beamform, train, evaluate, report.
// Every subcommand is driven by a JSON config (see README) with a handful
// of command line overrides. Exit codes: 0 success, 2 config error,
// 3 data error, 4 numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "usdbf/errors.hpp"
#include "usdbf/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  std::int64_t seed = -1;
  int threads = -1;
  bool reproducible = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("-c,--config", args.config_path,
                              "JSON experiment config");
  if (config_required) opt->required();
  cmd->add_option("--output-dir", args.output_dir,
                  "Override the config's output directory");
  cmd->add_option("--seed", args.seed, "Override the config's master seed");
  cmd->add_option("--threads", args.threads, "Worker thread count (0 = auto)");
  cmd->add_flag("--reproducible", args.reproducible,
                "Single-threaded deterministic mode");
}

usdbf::ExperimentConfig make_config(const CommonArgs& args) {
  usdbf::ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = usdbf::load_config(args.config_path);
  if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.threads >= 0) cfg.threads = args.threads;
  if (args.reproducible) cfg.reproducible = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Focused B-mode ultrasound reconstruction toolkit"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Synthesize RF frames (USRF)");
  add_common(sim, sim_args);
  int sim_frames = -1;
  sim->add_option("--frames", sim_frames, "Override the frame count");

  CommonArgs mask_args;
  auto* mask = app.add_subcommand("mask", "Write a sampling mask (text)");
  add_common(mask, mask_args, false);
  std::string mask_out = "mask.txt";
  std::string mask_scheme;
  int mask_keep = -1, mask_channels = -1, mask_depth = -1;
  std::int64_t mask_seed = -1;
  mask->add_option("-o,--out", mask_out, "Output path");
  mask->add_option("--scheme", mask_scheme, "variable or fixed");
  mask->add_option("--n-keep", mask_keep, "Channels to keep per depth plane");
  mask->add_option("--channels", mask_channels, "Total Rx channels J");
  mask->add_option("--depth", mask_depth, "Depth plane count N");
  mask->add_option("--mask-seed", mask_seed, "Mask generator seed");

  CommonArgs bf_args;
  auto* bf = app.add_subcommand("beamform", "Reconstruct one RF frame");
  add_common(bf, bf_args, false);
  std::string bf_rf, bf_out = "image.pgm", bf_iq, bf_method, bf_checkpoint;
  std::string bf_scheme;
  int bf_keep = -1;
  bf->add_option("--rf", bf_rf, "Input USRF frame")->required();
  bf->add_option("-o,--out", bf_out, "Output PGM path");
  bf->add_option("--iq", bf_iq, "Optional I/Q dump path");
  bf->add_option("--method", bf_method, "das, mv, or deepbf");
  bf->add_option("--checkpoint", bf_checkpoint, "Checkpoint for deepbf");
  bf->add_option("--n-keep", bf_keep, "Subsample to this many channels");
  bf->add_option("--scheme", bf_scheme, "Mask scheme for --n-keep");

  CommonArgs train_args;
  auto* train = app.add_subcommand("train", "Train the deep beamformer");
  add_common(train, train_args);
  int train_epochs = -1;
  train->add_option("--epochs", train_epochs, "Override epoch count");

  CommonArgs eval_args;
  auto* eval = app.add_subcommand("evaluate", "Metrics over held-out frames");
  add_common(eval, eval_args);
  std::string eval_checkpoint;
  eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint for deepbf");

  CommonArgs report_args;
  auto* report = app.add_subcommand("report", "Summarize a metrics CSV");
  std::string report_csv, report_out = "summary.csv";
  report->add_option("--csv", report_csv, "Metrics CSV from evaluate")
      ->required();
  report->add_option("-o,--out", report_out, "Summary CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      auto cfg = make_config(sim_args);
      if (sim_frames >= 0) cfg.frames = sim_frames;
      usdbf::run_simulate(cfg);
    } else if (mask->parsed()) {
      auto cfg = make_config(mask_args);
      if (!mask_scheme.empty())
        cfg.scheme = usdbf::sampling_scheme_from_string(mask_scheme);
      if (mask_keep >= 0) cfg.n_keep = mask_keep;
      if (mask_channels >= 0) cfg.probe.num_rx_active = mask_channels;
      if (mask_depth >= 0) cfg.probe.num_depth_samples = mask_depth;
      if (mask_seed >= 0) cfg.mask_seed = static_cast<std::uint64_t>(mask_seed);
      usdbf::run_mask(cfg, mask_out);
    } else if (bf->parsed()) {
      auto cfg = make_config(bf_args);
      if (!bf_method.empty()) cfg.method = bf_method;
      if (!bf_checkpoint.empty()) cfg.checkpoint = bf_checkpoint;
      if (bf_keep >= 0) cfg.n_keep = bf_keep;
      if (!bf_scheme.empty())
        cfg.scheme = usdbf::sampling_scheme_from_string(bf_scheme);
      usdbf::run_beamform(cfg, bf_rf, bf_out, bf_iq);
    } else if (train->parsed()) {
      auto cfg = make_config(train_args);
      if (train_epochs > 0) cfg.training.epochs = train_epochs;
      usdbf::run_train(cfg);
    } else if (eval->parsed()) {
      auto cfg = make_config(eval_args);
      if (!eval_checkpoint.empty()) cfg.checkpoint = eval_checkpoint;
      usdbf::run_evaluate(cfg);
    } else if (report->parsed()) {
      usdbf::run_report(report_csv, report_out);
    }
  } catch (const usdbf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const usdbf::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const usdbf::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
