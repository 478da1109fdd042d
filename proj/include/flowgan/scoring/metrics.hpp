#pragma once

#include "flowgan/scoring/mmd.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

namespace flowgan::scoring {

enum class Label { live, spoof };
std::string label_name(Label l);
// Accepts "live"/"spoof" (also 0/1). Throws DataError otherwise.
Label parse_label(const std::string& s);

struct LabeledScore {
    double score = 0.0;
    Label label = Label::live;
};

struct CalibrationResult {
    double threshold = 0.0;
    double dev_far = 0.0;
    double dev_frr = 0.0;
    double dev_hter = 0.0;
    KernelSpec kernel;

    nlohmann::json to_json() const;
    static CalibrationResult from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    // Throws ConfigError when the file is missing, FormatError when malformed.
    static CalibrationResult load(const std::filesystem::path& path);
    friend bool operator==(const CalibrationResult&, const CalibrationResult&) = default;
};

struct MetricsReport {
    double far = 0.0;
    double frr = 0.0;
    double hter = 0.0;
    double auc = 0.0;
    std::size_t n_live = 0;
    std::size_t n_spoof = 0;
};

// Spoof iff score > threshold. Throws NumericError for a non-finite score.
Label classify_video(double score, const CalibrationResult& cal);
Label classify(double score, double threshold);

// Threshold minimizing HTER over {-inf, midpoints of adjacent distinct scores, +inf};
// the smallest such threshold wins ties. Scores may be +inf (always spoof at any
// finite threshold). Throws DataError unless both labels are present, NumericError
// for NaN scores.
CalibrationResult calibrate_threshold(std::span<const LabeledScore> dev);

// FAR = spoof accepted / n_spoof, FRR = live rejected / n_live, AUC = P(spoof
// score > live score) with ties counted one half.
MetricsReport compute_metrics(std::span<const LabeledScore> test, double threshold);
double auc(std::span<const LabeledScore> scores);

} // namespace flowgan::scoring
