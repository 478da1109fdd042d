#include "flowgan/bench/synthetic.hpp"

#include "flowgan/error.hpp"
#include "flowgan/rng.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace flowgan::bench {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Band-limited colored texture, evaluated at continuous coordinates so that moved
// frames need no resampling.
struct Texture {
    struct Wave {
        double fx, fy, phase;
        double amp[3];
    };
    std::vector<Wave> waves;

    explicit Texture(std::mt19937_64& rng) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int k = 0; k < 8; ++k) {
            const double wavelength = 7.0 + 14.0 * unit(rng);
            const double angle = kTwoPi * unit(rng);
            Wave w{std::cos(angle) / wavelength, std::sin(angle) / wavelength, kTwoPi * unit(rng), {}};
            for (double& a : w.amp) a = 6.0 + 14.0 * unit(rng);
            waves.push_back(w);
        }
    }

    void eval(double x, double y, double out[3]) const {
        out[0] = out[1] = out[2] = 128.0;
        for (const auto& w : waves) {
            const double s = std::sin(kTwoPi * (w.fx * x + w.fy * y) + w.phase);
            for (int c = 0; c < 3; ++c) out[c] += w.amp[c] * s;
        }
    }
};

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

} // namespace

std::string motion_model_name(MotionModel m) {
    switch (m) {
    case MotionModel::live: return "live";
    case MotionModel::spoof_fixed: return "spoof-fixed";
    case MotionModel::spoof_hand: return "spoof-hand";
    }
    return "?";
}

MotionModel parse_motion_model(const std::string& s) {
    if (s == "live") return MotionModel::live;
    if (s == "spoof-fixed") return MotionModel::spoof_fixed;
    if (s == "spoof-hand") return MotionModel::spoof_hand;
    throw ConfigError("unknown motion model '" + s + "' (expected live, spoof-fixed or spoof-hand)");
}

void SyntheticVideoSpec::validate(int min_size) const {
    if (n_frames < 2) throw ConfigError("synthetic video needs at least two frames");
    if (size < min_size)
        throw ConfigError("synthetic video size " + std::to_string(size) + " is below " + std::to_string(min_size));
    if (fps <= 0) throw ConfigError("synthetic video fps must be positive");
    for (double v : {drift_speed, jitter, shake, noise_sigma, noise_grain, sensor_noise})
        if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("synthetic video amplitudes must be finite and >= 0");
}

SyntheticVideo generate_synthetic_video(const SyntheticVideoSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Texture tex(rng);

    // Rigid offset per frame.
    std::vector<double> dx(spec.n_frames, 0.0), dy(spec.n_frames, 0.0);
    double heading = kTwoPi * unit(rng);
    const double turn = (0.15 + 0.2 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
    for (int t = 1; t < spec.n_frames; ++t) {
        double sx = 0, sy = 0;
        if (spec.model == MotionModel::live) {
            sx = spec.drift_speed * std::cos(heading);
            sy = spec.drift_speed * std::sin(heading);
            heading += turn;
        } else if (spec.model == MotionModel::spoof_hand) {
            const double a = kTwoPi * unit(rng);
            sx = spec.shake * std::cos(a);
            sy = spec.shake * std::sin(a);
        }
        dx[t] = dx[t - 1] + sx;
        dy[t] = dy[t - 1] + sy;
    }
    const double jitter_wave = kTwoPi / 48.0;
    const double jp = kTwoPi * unit(rng), jq = kTwoPi * unit(rng);

    const double texture_noise = spec.model == MotionModel::spoof_hand ? spec.noise_sigma : 0.0;
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Gray noise field for one frame, blurred to the requested grain and rescaled to unit variance.
    auto grain_field = [&] {
        cv::Mat f(spec.size, spec.size, CV_64F);
        for (int y = 0; y < spec.size; ++y)
            for (int x = 0; x < spec.size; ++x) f.at<double>(y, x) = gauss(rng);
        if (spec.noise_grain > 0) {
            cv::GaussianBlur(f, f, cv::Size(0, 0), spec.noise_grain, spec.noise_grain, cv::BORDER_REFLECT);
            cv::Scalar mean, sd;
            cv::meanStdDev(f, mean, sd);
            if (sd[0] > 0) f = (f - mean[0]) / sd[0];
        }
        return f;
    };

    SyntheticVideo out;
    out.model = spec.model;
    out.label = spec.model == MotionModel::live ? scoring::Label::live : scoring::Label::spoof;
    out.video.fps = spec.fps;
    out.video.source_id = motion_model_name(spec.model);
    for (int t = 0; t < spec.n_frames; ++t) {
        flowprep::RgbImage img(spec.size, spec.size);
        const double jt = spec.model == MotionModel::live ? spec.jitter : 0.0;
        const cv::Mat grain = texture_noise > 0 ? grain_field() : cv::Mat::zeros(spec.size, spec.size, CV_64F);
        for (int y = 0; y < spec.size; ++y)
            for (int x = 0; x < spec.size; ++x) {
                const double jx = jt * std::sin(jitter_wave * y + jp + 0.7 * t);
                const double jy = jt * std::cos(jitter_wave * x + jq + 0.9 * t);
                double rgb[3];
                tex.eval(x - dx[t] - jx, y - dy[t] - jy, rgb);
                auto* px = img.at(y, x);
                const double shared = texture_noise * grain.at<double>(y, x);
                for (int c = 0; c < 3; ++c) px[c] = to_byte(rgb[c] + shared + spec.sensor_noise * gauss(rng));
            }
        out.video.frames.push_back(std::move(img));
    }
    return out;
}

std::vector<SyntheticVideo> synthetic_set(const SyntheticVideoSpec& base, MotionModel model, int count,
                                          std::uint64_t seed) {
    if (count < 0) throw ConfigError("synthetic set size must be non-negative");
    std::vector<SyntheticVideo> out;
    for (int i = 0; i < count; ++i) {
        auto spec = base;
        spec.model = model;
        spec.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        auto v = generate_synthetic_video(spec);
        v.video.source_id = motion_model_name(model) + "-" + std::to_string(i);
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace flowgan::bench
