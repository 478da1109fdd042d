#pragma once

#include "flowgan/gan/losses.hpp"
#include "flowgan/gan/model.hpp"

#include <cstdint>
#include <filesystem>

namespace flowgan::gan {

inline constexpr int kCheckpointFormat = 1;

struct Checkpoint {
    ArchitectureConfig arch;
    Models<float> models;
    std::uint64_t seed = 0;
    int epoch = 0;
    LossWeights loss_weights;
};

// One array per named parameter (BN running statistics included) plus a metadata
// record: format version, architecture, seed, epoch, loss weights.
void save_checkpoint(const std::filesystem::path& path, Models<float>& models, const ArchitectureConfig& arch,
                     int epoch, const LossWeights& w);
// Throws FormatError for a malformed or mismatched file, IoError if unreadable.
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace flowgan::gan
