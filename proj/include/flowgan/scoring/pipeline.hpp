#pragma once

#include "flowgan/scoring/metrics.hpp"
#include "flowgan/scoring/video.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace flowgan::scoring {

// Frame scores from a patch container: patches grouped by frame_index (ascending),
// each frame scored by the mean of its patch scores. Matches maps_distribution on
// the maps the container was cut from.
ScoreDistribution patches_distribution(PatchScorer& scorer, const flowprep::PatchBatch& patches,
                                       const std::string& video_id);

// Pooled live-training frame scores, capped by seeded subsampling.
ScoreDistribution pool_reference(const std::vector<ScoreDistribution>& videos, std::size_t cap, std::uint64_t seed);

// Frame scores CSV: video_id,frame_idx,score.
void save_frame_scores(const std::vector<ScoreDistribution>& videos, const std::filesystem::path& path);
std::vector<ScoreDistribution> load_frame_scores(const std::filesystem::path& path);

struct VideoScore {
    std::string video_id;
    double mmd_score = 0.0;
    MotionResult motion;
    bool motion_checked = false;

    // +inf when motion judgment ran and found no motion, so such videos land on
    // the spoof side of every finite threshold; otherwise mmd_score.
    double decision_score() const;
    Label decide(const CalibrationResult& cal) const;
};

// Motion judgment (when enabled) and the MMD between the video's frame scores and
// the reference under the given kernel.
VideoScore score_video(const ScoreDistribution& frames, const std::vector<flowprep::FlowMapImage>& maps,
                       const ScoreDistribution& reference, const KernelSpec& kernel, const MotionSettings& motion,
                       std::uint64_t seed);

} // namespace flowgan::scoring
