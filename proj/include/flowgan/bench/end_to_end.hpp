#pragma once

#include "flowgan/bench/synthetic.hpp"
#include "flowgan/flowprep/patches.hpp"
#include "flowgan/gan/train.hpp"
#include "flowgan/scoring/pipeline.hpp"

#include <cstdint>
#include <vector>

namespace flowgan::bench {

// Train on synthetic live videos only, calibrate on a labeled dev set, score a
// disjoint test set of live, spoof-hand and spoof-fixed videos.
struct EndToEndConfig {
    int n_train_live = 20;
    int n_dev_per_model = 10;
    int n_test_per_model = 10;
    SyntheticVideoSpec video;
    flowprep::PrepSettings prep;
    gan::ArchitectureConfig arch;
    gan::TrainingConfig train;
    scoring::MotionSettings motion;
    std::size_t reference_cap = 10000;
    std::uint64_t seed = 0;

    EndToEndConfig();
    void validate() const;
};

struct EndToEndVideo {
    std::string video_id;
    MotionModel model = MotionModel::live;
    scoring::Label truth = scoring::Label::live;
    scoring::VideoScore score;
    scoring::Label decision = scoring::Label::live;
    double mean_frame_score = 0.0;
};

struct EndToEndReport {
    scoring::CalibrationResult calibration;
    scoring::MetricsReport test;
    std::vector<EndToEndVideo> test_videos;
    gan::TrainingHistory history;
    double mean_frame_live = 0.0;
    double mean_frame_hand = 0.0;
    double mean_frame_fixed = 0.0;
};

EndToEndReport run_end_to_end(const EndToEndConfig& cfg);

} // namespace flowgan::bench
