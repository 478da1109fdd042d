#pragma once

#include "flowgan/flowprep/types.hpp"

#include <cstddef>
#include <filesystem>
#include <vector>

namespace flowgan::flowprep {

// Source-frame indices kept when resampling n_source frames from source_fps down to
// target_fps: floor(k * source_fps / target_fps) for every k that stays in range.
std::vector<std::size_t> resample_indices(std::size_t n_source, double source_fps, int target_fps);

// Decodes a video and resamples it to target_fps. Throws DecodeError when the file
// cannot be read, InsufficientFramesError when fewer than two frames remain, and
// ConfigError when target_fps is not positive or exceeds the source rate.
FrameSequence extract_frames(const std::filesystem::path& video_path, int target_fps);

// Lossless (FFV1) writer, used for fixtures and synthetic data.
void write_video(const FrameSequence& seq, const std::filesystem::path& path);

} // namespace flowgan::flowprep
