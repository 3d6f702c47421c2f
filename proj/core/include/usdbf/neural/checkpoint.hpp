#pragma once

#include <string>
#include <vector>

#include "usdbf/neural/network.hpp"

namespace usdbf::nn {

struct Checkpoint {
  Network net;
  std::vector<double> epoch_losses;
};

// "UDBF" container: magic, version, config block, per-epoch losses, then
// per layer the conv dims followed by weight/bias (and batch-norm
// scale/shift/running stats) blobs as little-endian float32.
void save_checkpoint(const Network& net,
                     const std::vector<double>& epoch_losses,
                     const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace usdbf::nn
