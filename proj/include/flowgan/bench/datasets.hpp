#pragma once

#include "flowgan/flowprep/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace flowgan::bench {

// Labeled still images, NHWC, values in [-1, 1]. Deliberately not a PatchBatch:
// this type never reaches gan::train.
struct LabeledImages {
    int size = 32;  // square side
    int channels = 3;
    std::vector<float> pixels;
    std::vector<int> labels;

    std::size_t count() const { return labels.size(); }
    std::size_t image_elements() const { return static_cast<std::size_t>(size) * size * channels; }
    const float* image(std::size_t i) const { return pixels.data() + i * image_elements(); }
};

struct Dataset {
    std::string name;
    int num_classes = 0;
    LabeledImages train;  // official training split
    LabeledImages test;   // official test split
};

// Dataset cache root: $FLOWGAN_DATA_DIR, else ~/.cache/artifact-datasets.
std::filesystem::path data_dir();

std::vector<std::string> supported_datasets();

// MNIST from <root>/mnist/{train,t10k}-{images-idx3,labels-idx1}-ubyte; digits are
// zero-padded 28 -> 32 and replicated to three channels.
Dataset load_mnist(const std::filesystem::path& root = data_dir());
// CIFAR-10 binary release from <root>/cifar-10-batches-bin/.
Dataset load_cifar10(const std::filesystem::path& root = data_dir());
// Throws ConfigError for unknown names, DataError (naming the expected path) when
// files are missing.
Dataset load_dataset(const std::string& name, const std::filesystem::path& root = data_dir());

// Raw IDX parsing, exposed for tests.
struct IdxArray {
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> data;
};
IdxArray parse_idx(const std::string& bytes);

} // namespace flowgan::bench
