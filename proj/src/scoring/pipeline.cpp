#include "flowgan/scoring/pipeline.hpp"

#include "flowgan/error.hpp"
#include "flowgan/io.hpp"

#include <limits>
#include <map>

namespace flowgan::scoring {

ScoreDistribution patches_distribution(PatchScorer& scorer, const flowprep::PatchBatch& patches,
                                       const std::string& video_id) {
    if (patches.size() == 0) throw InsufficientFramesError("'" + video_id + "' holds no patches");
    const auto s = scorer.score_patches(patches);
    std::map<int, std::pair<double, std::size_t>> per_frame;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto& acc = per_frame[patches.origins[i].frame_index];
        acc.first += s[i];
        ++acc.second;
    }
    ScoreDistribution d;
    d.video_id = video_id;
    for (const auto& [frame, acc] : per_frame) d.samples.push_back(acc.first / static_cast<double>(acc.second));
    return d;
}

ScoreDistribution pool_reference(const std::vector<ScoreDistribution>& videos, std::size_t cap, std::uint64_t seed) {
    std::vector<double> pooled;
    for (const auto& v : videos) pooled.insert(pooled.end(), v.samples.begin(), v.samples.end());
    ScoreDistribution ref;
    ref.source = Source::reference;
    ref.video_id = "reference";
    ref.samples = cap_samples(pooled, cap, seed);
    ref.validate();
    return ref;
}

void save_frame_scores(const std::vector<ScoreDistribution>& videos, const std::filesystem::path& path) {
    io::CsvWriter csv({"video_id", "frame_idx", "score"});
    for (const auto& v : videos)
        for (std::size_t i = 0; i < v.samples.size(); ++i)
            csv.row({v.video_id, std::to_string(i), io::format_double(v.samples[i])});
    csv.save(path);
}

std::vector<ScoreDistribution> load_frame_scores(const std::filesystem::path& path) {
    const auto rows = io::read_csv(path);
    if (rows.empty() || rows[0] != std::vector<std::string>{"video_id", "frame_idx", "score"})
        throw FormatError(path.string() + ": expected header video_id,frame_idx,score");
    std::vector<ScoreDistribution> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 3) throw FormatError(path.string() + ": malformed row " + std::to_string(r));
        if (out.empty() || out.back().video_id != rows[r][0]) {
            out.emplace_back();
            out.back().video_id = rows[r][0];
        }
        try {
            out.back().samples.push_back(std::stod(rows[r][2]));
        } catch (const std::exception&) {
            throw FormatError(path.string() + ": bad score on row " + std::to_string(r));
        }
    }
    return out;
}

double VideoScore::decision_score() const {
    if (motion_checked && !motion.has_motion) return std::numeric_limits<double>::infinity();
    return mmd_score;
}

Label VideoScore::decide(const CalibrationResult& cal) const {
    if (motion_checked && !motion.has_motion) return Label::spoof;
    return classify_video(mmd_score, cal);
}

VideoScore score_video(const ScoreDistribution& frames, const std::vector<flowprep::FlowMapImage>& maps,
                       const ScoreDistribution& reference, const KernelSpec& kernel, const MotionSettings& motion,
                       std::uint64_t seed) {
    VideoScore out;
    out.video_id = frames.video_id;
    if (motion.enabled) {
        motion.validate();
        out.motion = motion_judgment(maps, motion.n_pairs, motion.epsilon, seed);
        out.motion_checked = true;
    } else {
        out.motion.has_motion = true;
    }
    out.mmd_score = mmd(reference, frames, kernel);
    return out;
}

} // namespace flowgan::scoring
