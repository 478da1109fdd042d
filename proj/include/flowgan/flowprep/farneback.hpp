#pragma once

#include "flowgan/flowprep/types.hpp"

namespace flowgan::flowprep {

// Two-frame motion estimation by polynomial expansion (Farneback). Each
// neighbourhood is approximated by a quadratic x'Ax + b'x + c fitted with Gaussian
// weights; the displacement follows from how b changes between the frames, pooled
// over a box window and refined coarse to fine.
struct PolyFlowParams {
    double pyr_scale = 0.5;
    int levels = 3;        // pyramid layers including full resolution
    int window = 15;       // box window for pooling the displacement equations
    int iterations = 3;    // refinements per layer
    int poly_n = 5;        // expansion neighbourhood half-width
    double poly_sigma = 1.2;
};

FlowField polynomial_expansion_flow(const RgbImage& a, const RgbImage& b, const PolyFlowParams& p = {});

} // namespace flowgan::flowprep
