#pragma once

#include "flowgan/flowprep/types.hpp"
#include "flowgan/gan/nn.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace flowgan::gan {

// Encoder: stride-2 4x4 convolutions (BN + LeakyReLU) halving the input each stage,
// then a dense map to the latent code. Decoder mirrors it with a dense layer back
// to the smallest feature map and stride-2 transposed convolutions (BN + ReLU),
// ending in tanh. The discriminator repeats the encoder stack and ends in a single
// logit.
struct ArchitectureConfig {
    int input_size = 32;
    int input_channels = 3;
    std::vector<int> encoder_filters{64, 128, 256};
    int latent_dim = 100;
    std::vector<int> discriminator_filters{64, 128, 256};
    double leaky_slope = 0.2;

    static constexpr int kKernel = 4;
    static constexpr int kStride = 2;
    static constexpr int kPad = 1;

    // Throws ConfigError unless every stage divides cleanly and the decoder
    // reproduces the input shape.
    void validate() const;
    int bottleneck_size() const { return input_size >> encoder_filters.size(); }

    nlohmann::json to_json() const;
    static ArchitectureConfig from_json(const nlohmann::json& j);
    friend bool operator==(const ArchitectureConfig&, const ArchitectureConfig&) = default;
};

template <typename T>
class Generator {
public:
    explicit Generator(const ArchitectureConfig& arch);

    // x is (channels, N, size, size); output has the same shape, values in [-1, 1].
    FeatureMap<T> forward(const FeatureMap<T>& x, Mode mode);
    FeatureMap<T> encode(const FeatureMap<T>& x, Mode mode) { return encoder_.forward(x, mode); }
    // Backpropagates through the decoder and encoder of the last forward().
    FeatureMap<T> backward(const FeatureMap<T>& dy, bool param_grads = true);

    std::vector<Param<T>*> params();
    void zero_grad();
    void init(std::mt19937_64& rng);
    const ArchitectureConfig& arch() const { return arch_; }

private:
    ArchitectureConfig arch_;
    Sequential<T> encoder_;
    Sequential<T> decoder_;
};

template <typename T>
class Discriminator {
public:
    explicit Discriminator(const ArchitectureConfig& arch);

    // One logit per item: (1, N, 1, 1).
    FeatureMap<T> logits(const FeatureMap<T>& x, Mode mode);
    FeatureMap<T> backward(const FeatureMap<T>& dlogits, bool param_grads = true);

    std::vector<Param<T>*> params();
    void zero_grad();
    void init(std::mt19937_64& rng);
    const ArchitectureConfig& arch() const { return arch_; }

private:
    ArchitectureConfig arch_;
    Sequential<T> net_;
};

template <typename T>
struct Models {
    Generator<T> generator;
    Discriminator<T> discriminator;
    std::uint64_t seed = 0;
};

// Gaussian(0, 0.02) weights, unit BN scale, zero biases; deterministic in seed.
template <typename T>
Models<T> init_models(const ArchitectureConfig& arch, std::uint64_t seed);

// PatchBatch (N x w x w x 3, NHWC) -> (3, N, w, w) channel-major, items [first, first + count).
template <typename T>
FeatureMap<T> to_feature_map(const flowprep::PatchBatch& batch, std::size_t first, std::size_t count);
template <typename T>
FeatureMap<T> to_feature_map(const flowprep::PatchBatch& batch) {
    return to_feature_map<T>(batch, 0, batch.size());
}

// Inference helpers (eval mode). Shape mismatches throw ShapeError.
template <typename T>
FeatureMap<T> generator_forward(Generator<T>& g, const FeatureMap<T>& batch);
template <typename T>
std::vector<double> discriminator_forward(Discriminator<T>& d, const FeatureMap<T>& batch);

// logistic(x) squeezed into the open interval (0, 1).
double probability_from_logit(double logit);

} // namespace flowgan::gan
