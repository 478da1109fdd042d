#include "flowgan/scoring/video.hpp"

#include "flowgan/error.hpp"
#include "flowgan/simd/kernels.hpp"

#include <cmath>
#include <random>

namespace flowgan::scoring {

namespace {

std::vector<double> per_item_l1(const gan::FeatureMap<float>& x, const gan::FeatureMap<float>& y) {
    if (!x.same_shape(y)) throw ShapeError("reconstruction shape differs from its input");
    const std::size_t n = static_cast<std::size_t>(x.batch), plane = x.plane();
    std::vector<double> out(n, 0.0);
    for (int c = 0; c < x.channels; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t off = (static_cast<std::size_t>(c) * n + i) * plane;
            out[i] += simd::abs_diff_sum(x.data.data() + off, y.data.data() + off, plane);
        }
    for (auto& v : out) v /= static_cast<double>(plane * x.channels);
    return out;
}

template <typename F>
std::vector<double> chunked(const flowprep::PatchBatch& patches, std::size_t chunk, F score) {
    std::vector<double> out;
    out.reserve(patches.size());
    for (std::size_t first = 0; first < patches.size(); first += chunk) {
        const std::size_t count = std::min(chunk, patches.size() - first);
        const auto x = gan::to_feature_map<float>(patches, first, count);
        for (double v : score(x)) out.push_back(v);
    }
    return out;
}

} // namespace

std::vector<double> PixelScorer::score_patches(const flowprep::PatchBatch& patches) {
    return chunked(patches, chunk_, [&](const auto& x) { return per_item_l1(x, gan::generator_forward(g_, x)); });
}

std::vector<double> LatentScorer::score_patches(const flowprep::PatchBatch& patches) {
    return chunked(patches, chunk_, [&](const auto& x) {
        const auto rec = gan::generator_forward(g_, x);
        return per_item_l1(g_.encode(x, gan::Mode::eval), g_.encode(rec, gan::Mode::eval));
    });
}

std::vector<double> FunctionScorer::score_patches(const flowprep::PatchBatch& patches) {
    const auto x = gan::to_feature_map<float>(patches);
    return per_item_l1(x, f_(x));
}

double frame_score(PatchScorer& scorer, const flowprep::FlowMapImage& map, int window, int stride) {
    const auto patches = flowprep::extract_patches(map, window, stride);
    const auto s = scorer.score_patches(patches);
    double sum = 0;
    for (double v : s) sum += v;
    return sum / static_cast<double>(s.size());
}

ScoreDistribution maps_distribution(PatchScorer& scorer, const std::vector<flowprep::FlowMapImage>& maps,
                                    const flowprep::PrepSettings& prep, const std::string& video_id) {
    if (maps.empty()) throw InsufficientFramesError("video '" + video_id + "' has no flow maps");
    ScoreDistribution d;
    d.video_id = video_id;
    for (const auto& m : maps) d.samples.push_back(frame_score(scorer, m, prep.window, prep.stride));
    return d;
}

ScoreDistribution video_distribution(PatchScorer& scorer, const flowprep::FrameSequence& video,
                                     const flowprep::PrepSettings& prep) {
    if (video.frames.size() < 2)
        throw InsufficientFramesError("video '" + video.source_id + "' has fewer than two frames");
    return maps_distribution(scorer, flowprep::flow_maps(video, prep), prep, video.source_id);
}

void MotionSettings::validate() const {
    if (n_pairs <= 0) throw ConfigError("motion.n_pairs must be positive");
    if (!(epsilon >= 0) || !std::isfinite(epsilon)) throw ConfigError("motion.epsilon must be non-negative");
}

MotionResult motion_judgment(const std::vector<flowprep::FlowMapImage>& maps, int n_pairs, double epsilon,
                             std::uint64_t seed) {
    if (maps.size() < 2) throw DataError("motion judgment needs at least two flow maps");
    if (n_pairs <= 0) throw ConfigError("motion judgment: n_pairs must be positive");
    if (!(epsilon >= 0)) throw ConfigError("motion judgment: epsilon must be non-negative");
    for (const auto& m : maps)
        if (!m.pixels.same_size(maps.front().pixels)) throw ShapeError("motion judgment: flow maps differ in size");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, maps.size() - 2);
    double total = 0;
    for (int p = 0; p < n_pairs; ++p) {
        const std::size_t i = pick(rng);
        const auto& a = maps[i].pixels.data;
        const auto& b = maps[i + 1].pixels.data;
        std::uint64_t s = 0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k] > b[k] ? a[k] - b[k] : b[k] - a[k];
        total += static_cast<double>(s) / static_cast<double>(a.size());
    }
    MotionResult r;
    r.mean_difference = total / n_pairs;
    r.has_motion = r.mean_difference > epsilon;
    return r;
}

} // namespace flowgan::scoring
