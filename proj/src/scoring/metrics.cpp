#include "flowgan/scoring/metrics.hpp"

#include "flowgan/error.hpp"
#include "flowgan/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace flowgan::scoring {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Counts {
    std::size_t live = 0, spoof = 0;
};

Counts count_labels(std::span<const LabeledScore> s) {
    Counts c;
    for (const auto& x : s) {
        if (std::isnan(x.score)) throw NumericError("score is NaN");
        (x.label == Label::live ? c.live : c.spoof)++;
    }
    if (c.live == 0 || c.spoof == 0) throw DataError("both live and spoof samples are required");
    return c;
}

nlohmann::json encode_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double decode_real(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        throw FormatError("calibration: bad number '" + s + "'");
    }
    return j.get<double>();
}

} // namespace

std::string label_name(Label l) { return l == Label::live ? "live" : "spoof"; }

Label parse_label(const std::string& s) {
    if (s == "live" || s == "0") return Label::live;
    if (s == "spoof" || s == "1") return Label::spoof;
    throw DataError("unknown label '" + s + "' (expected live or spoof)");
}

Label classify(double score, double threshold) { return score > threshold ? Label::spoof : Label::live; }

Label classify_video(double score, const CalibrationResult& cal) {
    if (!std::isfinite(score)) throw NumericError("classify_video: non-finite score");
    return classify(score, cal.threshold);
}

CalibrationResult calibrate_threshold(std::span<const LabeledScore> dev) {
    const auto n = count_labels(dev);
    std::vector<LabeledScore> sorted(dev.begin(), dev.end());
    std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.score < b.score; });

    // Sweep thresholds upwards. With T below every score all live are rejected and
    // all spoof detected; passing a score moves it to the accepted side.
    // HTER * 2 * n_live * n_spoof = false_accept * n_live + false_reject * n_spoof,
    // compared in integers so equal rates tie exactly.
    std::size_t fa = 0, fr = n.live;
    auto cost = [&] { return static_cast<std::uint64_t>(fa) * n.live + static_cast<std::uint64_t>(fr) * n.spoof; };
    double best_t = -kInf;
    std::size_t best_fa = fa, best_fr = fr;
    std::uint64_t best = cost();
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].score == sorted[i].score) {
            if (sorted[j].label == Label::live) --fr;
            else ++fa;
            ++j;
        }
        if (std::isinf(sorted[i].score) && sorted[i].score > 0) break;  // +inf stays spoof for any finite T
        double t;
        if (j == sorted.size()) {
            t = kInf;
        } else {
            const double x = sorted[i].score, y = sorted[j].score;
            t = std::isinf(y) ? x : x + (y - x) / 2;
            if (!(t < y)) t = x;
        }
        if (cost() < best) {
            best = cost();
            best_t = t;
            best_fa = fa;
            best_fr = fr;
        }
        i = j;
    }
    CalibrationResult r;
    r.threshold = best_t;
    r.dev_far = static_cast<double>(best_fa) / n.spoof;
    r.dev_frr = static_cast<double>(best_fr) / n.live;
    r.dev_hter = (r.dev_far + r.dev_frr) / 2;
    return r;
}

double auc(std::span<const LabeledScore> scores) {
    const auto n = count_labels(scores);
    std::vector<LabeledScore> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.score < b.score; });
    // twice the number of (spoof > live) pairs plus once the tied pairs
    std::uint64_t twice = 0, live_below = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        std::uint64_t live_here = 0, spoof_here = 0;
        while (j < sorted.size() && sorted[j].score == sorted[i].score) {
            (sorted[j].label == Label::live ? live_here : spoof_here)++;
            ++j;
        }
        twice += spoof_here * (2 * live_below + live_here);
        live_below += live_here;
        i = j;
    }
    return static_cast<double>(twice) / (2.0 * static_cast<double>(n.live) * static_cast<double>(n.spoof));
}

MetricsReport compute_metrics(std::span<const LabeledScore> test, double threshold) {
    const auto n = count_labels(test);
    std::size_t fa = 0, fr = 0;
    for (const auto& s : test) {
        const Label got = classify(s.score, threshold);
        if (s.label == Label::spoof && got == Label::live) ++fa;
        if (s.label == Label::live && got == Label::spoof) ++fr;
    }
    MetricsReport m;
    m.n_live = n.live;
    m.n_spoof = n.spoof;
    m.far = static_cast<double>(fa) / n.spoof;
    m.frr = static_cast<double>(fr) / n.live;
    m.hter = (m.far + m.frr) / 2;
    m.auc = auc(test);
    return m;
}

nlohmann::json CalibrationResult::to_json() const {
    return {{"threshold", encode_real(threshold)},
            {"dev_far", dev_far},
            {"dev_frr", dev_frr},
            {"dev_hter", dev_hter},
            {"kernel", kernel.to_json()}};
}

CalibrationResult CalibrationResult::from_json(const nlohmann::json& j) {
    CalibrationResult r;
    try {
        r.threshold = decode_real(j.at("threshold"));
        r.dev_far = j.at("dev_far").get<double>();
        r.dev_frr = j.at("dev_frr").get<double>();
        r.dev_hter = j.at("dev_hter").get<double>();
        r.kernel = KernelSpec::from_json(j.at("kernel"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("calibration record: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("calibration record: ") + e.what());
    }
    if (std::isnan(r.threshold)) throw FormatError("calibration record: threshold is NaN");
    return r;
}

void CalibrationResult::save(const std::filesystem::path& path) const {
    io::write_file_atomic(path, to_json().dump(2) + "\n");
}

CalibrationResult CalibrationResult::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("calibration file not found: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("calibration file " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

} // namespace flowgan::scoring
