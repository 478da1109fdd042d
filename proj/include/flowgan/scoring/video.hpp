#pragma once

#include "flowgan/flowprep/patches.hpp"
#include "flowgan/gan/model.hpp"
#include "flowgan/scoring/mmd.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace flowgan::scoring {

// Maps a batch of patches to one non-negative score per patch.
class PatchScorer {
public:
    virtual ~PatchScorer() = default;
    virtual std::vector<double> score_patches(const flowprep::PatchBatch& patches) = 0;
};

// Mean |x - G(x)| per patch, generator in eval mode. This is the default frame score.
class PixelScorer final : public PatchScorer {
public:
    explicit PixelScorer(gan::Generator<float>& g, std::size_t chunk = 256) : g_(g), chunk_(chunk) {}
    std::vector<double> score_patches(const flowprep::PatchBatch& patches) override;

private:
    gan::Generator<float>& g_;
    std::size_t chunk_;
};

// Mean |E(x) - E(G(x))| over latent units, reusing the generator's own encoder.
class LatentScorer final : public PatchScorer {
public:
    explicit LatentScorer(gan::Generator<float>& g, std::size_t chunk = 256) : g_(g), chunk_(chunk) {}
    std::vector<double> score_patches(const flowprep::PatchBatch& patches) override;

private:
    gan::Generator<float>& g_;
    std::size_t chunk_;
};

// Pixel score for an arbitrary reconstruction function; used with known
// reconstructors in tests.
class FunctionScorer final : public PatchScorer {
public:
    using Reconstruct = std::function<gan::FeatureMap<float>(const gan::FeatureMap<float>&)>;
    explicit FunctionScorer(Reconstruct f) : f_(std::move(f)) {}
    std::vector<double> score_patches(const flowprep::PatchBatch& patches) override;

private:
    Reconstruct f_;
};

enum class ScoreMode { pixel, latent };

// Mean of the per-patch scores over every patch of the map. Throws SizeError when
// the map is smaller than the window.
double frame_score(PatchScorer& scorer, const flowprep::FlowMapImage& map, int window = 32, int stride = 32);

// One score per consecutive-frame flow map, in order. Throws InsufficientFramesError
// for fewer than two frames.
ScoreDistribution video_distribution(PatchScorer& scorer, const flowprep::FrameSequence& video,
                                     const flowprep::PrepSettings& prep);
ScoreDistribution maps_distribution(PatchScorer& scorer, const std::vector<flowprep::FlowMapImage>& maps,
                                    const flowprep::PrepSettings& prep, const std::string& video_id);

struct MotionSettings {
    bool enabled = true;
    int n_pairs = 10;
    double epsilon = 2.0;  // 8-bit pixel units

    void validate() const;
};

struct MotionResult {
    bool has_motion = false;
    double mean_difference = 0.0;
};

// Mean absolute pixel difference over n_pairs seeded draws of consecutive map pairs
// (i, i + 1); motion iff that mean exceeds epsilon. Throws DataError for fewer
// than two maps, ShapeError for maps of different sizes.
MotionResult motion_judgment(const std::vector<flowprep::FlowMapImage>& maps, int n_pairs, double epsilon,
                             std::uint64_t seed);

} // namespace flowgan::scoring
