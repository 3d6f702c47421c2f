#pragma once

#include <cstdint>
#include <vector>

#include "usdbf/neural/network.hpp"

namespace usdbf::nn {

// One training pair: three consecutive time-aligned, masked depth planes as
// input, the full-data DAS + Hilbert I/Q at the same depths as target.
struct Sample {
  Tensor input;   // 1 x input_channels x rows x width
  Tensor target;  // 1 x 2 x rows x width
};

struct TrainConfig {
  double weight_decay = 1e-4;
  double lr_initial = 1e-4;
  double lr_final = 1e-7;
  int epochs = 40;  // the full-scale recipe uses 200
  int batch_size = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

// Log-linear interpolation from lr_initial to lr_final across epochs.
double lr_at_epoch(const TrainConfig& tc, int epoch);

struct TrainResult {
  std::vector<double> epoch_losses;  // mean training loss per epoch
  bool diverged = false;
  int completed_epochs = 0;
};

// Shuffled mini-batch SGD. On divergence (non-finite loss or gradient) the
// network is restored to the last completed epoch and training stops.
TrainResult train(Network& net, const std::vector<Sample>& dataset,
                  const TrainConfig& tc);

}  // namespace usdbf::nn
