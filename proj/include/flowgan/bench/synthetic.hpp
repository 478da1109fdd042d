#pragma once

#include "flowgan/flowprep/types.hpp"
#include "flowgan/scoring/metrics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace flowgan::bench {

// live: smooth rigid drift whose direction turns slowly, plus a small smooth
// nonrigid jitter. spoof_fixed: a static frame with sensor noise only.
// spoof_hand: a rigid shake with an independent direction every frame, plus strong
// fresh noise every frame, Gaussian per pixel and blurred to a grain of a few pixels.
enum class MotionModel { live, spoof_fixed, spoof_hand };

std::string motion_model_name(MotionModel m);
MotionModel parse_motion_model(const std::string& s);

struct SyntheticVideoSpec {
    int n_frames = 16;
    int size = 64;
    MotionModel model = MotionModel::live;
    double drift_speed = 2.0;    // live, pixels per frame
    double jitter = 0.6;         // live nonrigid amplitude, pixels
    double shake = 1.5;          // spoof_hand rigid step, pixels per frame
    double noise_sigma = 20.0;   // spoof_hand texture noise, 8-bit units
    double noise_grain = 2.0;    // Gaussian blur sigma of that noise in pixels, 0 = independent pixels
    double sensor_noise = 1.0;   // every model, 8-bit units
    int fps = 30;
    std::uint64_t seed = 0;

    // Throws ConfigError for n_frames < 2, size < min_size or bad amplitudes.
    void validate(int min_size = 32) const;
};

struct SyntheticVideo {
    flowprep::FrameSequence video;
    scoring::Label label = scoring::Label::live;
    MotionModel model = MotionModel::live;
};

// Deterministic in the spec (seed included).
SyntheticVideo generate_synthetic_video(const SyntheticVideoSpec& spec);

// count videos of one model; video i uses seed derive_seed(seed, i) and is named
// "<model>-<i>".
std::vector<SyntheticVideo> synthetic_set(const SyntheticVideoSpec& base, MotionModel model, int count,
                                          std::uint64_t seed);

} // namespace flowgan::bench
