#pragma once

#include "flowgan/flowprep/color.hpp"
#include "flowgan/flowprep/flow.hpp"
#include "flowgan/flowprep/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace flowgan::flowprep {

// Sliding-window patches, row-major, partial windows at the borders dropped.
// Pixels are rescaled to [-1, 1] via x / 127.5 - 1. Throws SizeError when the
// image is smaller than the window.
PatchBatch extract_patches(const FlowMapImage& image, int window = 32, int stride = 32,
                           int frame_index = 0);

// Number of patches extract_patches produces for an H x W image.
std::size_t patch_count(int height, int width, int window, int stride);

// Settings shared by every stage that turns frames into flow maps.
struct PrepSettings {
    int fps = 30;
    std::string estimator = kDefaultEstimator;
    int window = 32;
    int stride = 32;
    MagnitudeMode magnitude = MagnitudeMode::fixed(4.0);

    void validate() const;
};

// One color-coded flow map per consecutive frame pair (N frames -> N - 1 maps).
std::vector<FlowMapImage> flow_maps(const FrameSequence& video, const PrepSettings& prep);

// Patches of every map, frame_index = map position.
PatchBatch patches_of(const std::vector<FlowMapImage>& maps, const PrepSettings& prep);

// Patch container: an array archive holding "patches" (N x w x w x 3, float32) and
// "origins" (N x 3, int32), plus a CSV sidecar frame_idx,row,col.
void save_patches(const PatchBatch& batch, const std::string& source_id,
                  const std::filesystem::path& container, const std::filesystem::path& sidecar_csv);
PatchBatch load_patches(const std::filesystem::path& container);

} // namespace flowgan::flowprep
