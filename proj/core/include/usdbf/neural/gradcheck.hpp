#pragma once

#include <cstdint>

#include "usdbf/neural/network.hpp"

namespace usdbf::nn {

// Compares analytic parameter gradients of the MSE loss against central
// finite differences on the given input/target pair. Returns the worst
// relative error over all parameters; eps is the nominal perturbation.
double gradient_check(const Network& net, const Tensor& input,
                      const Tensor& target, double eps);

// Convenience harness on a deterministic random input/target pair.
double gradient_check(const Network& net, double eps, std::uint64_t seed,
                      int batch = 2, int rows = 3, int width = 8);

}  // namespace usdbf::nn
