#pragma once

#include "flowgan/flowprep/types.hpp"

#include <filesystem>
#include <optional>

namespace flowgan::flowprep {

// How flow magnitudes are normalized before coloring. An empty fixed_max means
// "auto": the largest per-pixel flow norm of the field being colored (1 if that
// norm is zero). A fixed value makes maps comparable across frames and videos.
struct MagnitudeMode {
    std::optional<double> fixed_max;

    static MagnitudeMode automatic() { return {}; }
    static MagnitudeMode fixed(double m) { return {m}; }
};

// Flow color wheel: hue = atan2(v, u) (0 deg = +u, red), saturation =
// min(|flow| / max_magnitude, 1), full value. Zero flow renders white.
FlowMapImage flow_to_color(const FlowField& field, MagnitudeMode mode = MagnitudeMode::automatic());

// Lossless PNG I/O (RGB order in memory).
void write_png(const RgbImage& img, const std::filesystem::path& path);
RgbImage read_png(const std::filesystem::path& path);

} // namespace flowgan::flowprep
