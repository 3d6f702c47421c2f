#pragma once

#include "usdbf/beamform.hpp"
#include "usdbf/neural/network.hpp"
#include "usdbf/postproc.hpp"

namespace usdbf::nn {

// Amplitude normalization shared by dataset construction and inference:
// 1 / rms over the nonzero entries of the (masked) aligned cube, 1 when
// the cube is all zero.
double frame_scale(const TimeAlignedCube& cube);

// Copies cube depth rows [n0, n0 + rows) into batch slot `slot` of `out`,
// scaled, with Rx channels mapped to network channels.
void fill_input_window(const TimeAlignedCube& cube, int n0, double scale,
                       Tensor& out, int slot);

// Window grid over depth: stride `rows`, plus one clamped trailing window
// when the grid falls short of the last sample.
std::vector<int> window_starts(int depth_samples, int rows);

// Slides a rows-deep window over depth with stride equal to the window
// height (last window clamped to the end, later windows overwrite overlap)
// and assembles the network outputs into a full I/Q image.
IQImage infer_frame(Network& net, const TimeAlignedCube& masked_cube);

}  // namespace usdbf::nn
