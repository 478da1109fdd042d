#include "flowgan/flowprep/flow.hpp"

#include "flowgan/error.hpp"
#include "flowgan/flowprep/farneback.hpp"
#include "flowgan/io.hpp"

#include <opencv2/imgproc.hpp>
#include <opencv2/video/tracking.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace flowgan::flowprep {

bool FlowField::all_finite() const {
    auto finite = [](float x) { return std::isfinite(x); };
    return std::all_of(u.begin(), u.end(), finite) && std::all_of(v.begin(), v.end(), finite);
}

namespace {

cv::Mat to_gray(const RgbImage& img) {
    cv::Mat rgb(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.data.data()));
    cv::Mat gray;
    cv::cvtColor(rgb, gray, cv::COLOR_RGB2GRAY);
    return gray;
}

FlowField from_mat(const cv::Mat& flow) {
    FlowField f(flow.rows, flow.cols);
    for (int r = 0; r < flow.rows; ++r) {
        const auto* row = flow.ptr<cv::Vec2f>(r);
        for (int c = 0; c < flow.cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * flow.cols + c;
            f.u[i] = row[c][0];
            f.v[i] = row[c][1];
        }
    }
    return f;
}

FlowField opencv_farneback(const RgbImage& a, const RgbImage& b) {
    cv::Mat flow;
    cv::calcOpticalFlowFarneback(to_gray(a), to_gray(b), flow, 0.5, 3, 15, 3, 5, 1.2, 0);
    return from_mat(flow);
}

FlowField dis(const RgbImage& a, const RgbImage& b) {
    auto algo = cv::DISOpticalFlow::create(cv::DISOpticalFlow::PRESET_MEDIUM);
    cv::Mat flow;
    algo->calc(to_gray(a), to_gray(b), flow);
    return from_mat(flow);
}

} // namespace

FlowEstimatorRegistry::FlowEstimatorRegistry() {
    entries_.emplace_back("farneback", [](const RgbImage& a, const RgbImage& b) { return polynomial_expansion_flow(a, b); });
    entries_.emplace_back("opencv-farneback", opencv_farneback);
    entries_.emplace_back("dis", dis);
}

FlowEstimatorRegistry& FlowEstimatorRegistry::instance() {
    static FlowEstimatorRegistry reg;
    return reg;
}

void FlowEstimatorRegistry::add(const std::string& name, FlowEstimator fn) {
    if (name.empty() || !fn) throw ConfigError("flow estimator needs a name and a callable");
    for (auto& [n, f] : entries_) {
        if (n == name) {
            f = std::move(fn);
            return;
        }
    }
    entries_.emplace_back(name, std::move(fn));
}

bool FlowEstimatorRegistry::contains(const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == name; });
}

const FlowEstimator& FlowEstimatorRegistry::get(const std::string& name) const {
    for (const auto& [n, f] : entries_)
        if (n == name) return f;
    std::string known;
    for (const auto& e : entries_) known += (known.empty() ? "" : ", ") + e.first;
    throw ConfigError("unknown flow estimator '" + name + "' (known: " + known + ")");
}

std::vector<std::string> FlowEstimatorRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
}

FlowField estimate_flow(const RgbImage& frame_a, const RgbImage& frame_b, const std::string& estimator) {
    const auto& fn = FlowEstimatorRegistry::instance().get(estimator);
    if (!frame_a.same_size(frame_b))
        throw ShapeError("flow frames differ in size: " + std::to_string(frame_a.height) + "x"
                         + std::to_string(frame_a.width) + " vs " + std::to_string(frame_b.height) + "x"
                         + std::to_string(frame_b.width));
    if (frame_a.height <= 0 || frame_a.width <= 0) throw ShapeError("empty frame");
    FlowField f = fn(frame_a, frame_b);
    if (f.height != frame_a.height || f.width != frame_a.width)
        throw ShapeError("estimator '" + estimator + "' returned a field of the wrong size");
    return f;
}

// --- .flo -----------------------------------------------------------------

namespace {
constexpr float kFloMagic = 202021.25f;
}

std::string encode_flo(const FlowField& field) {
    if (!field.all_finite()) throw DataError("cannot write a non-finite flow field");
    if (field.u.size() != field.size() || field.v.size() != field.size()
        || field.size() != static_cast<std::size_t>(field.height) * field.width)
        throw ShapeError("flow field arrays do not match its dimensions");
    std::string out(12 + field.size() * 8, '\0');
    const std::int32_t w = field.width;
    const std::int32_t h = field.height;
    std::memcpy(out.data(), &kFloMagic, 4);
    std::memcpy(out.data() + 4, &w, 4);
    std::memcpy(out.data() + 8, &h, 4);
    char* p = out.data() + 12;
    for (std::size_t i = 0; i < field.size(); ++i) {
        std::memcpy(p, &field.u[i], 4);
        std::memcpy(p + 4, &field.v[i], 4);
        p += 8;
    }
    return out;
}

FlowField decode_flo(std::string_view bytes) {
    if (bytes.size() < 12) throw FormatError(".flo header truncated");
    float magic;
    std::int32_t w, h;
    std::memcpy(&magic, bytes.data(), 4);
    std::memcpy(&w, bytes.data() + 4, 4);
    std::memcpy(&h, bytes.data() + 8, 4);
    if (magic != kFloMagic) throw FormatError(".flo magic mismatch (expected 202021.25)");
    if (w <= 0 || h <= 0 || w > (1 << 16) || h > (1 << 16)) throw FormatError(".flo has implausible dimensions");
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (bytes.size() != 12 + n * 8) throw FormatError(".flo payload size does not match header");
    FlowField f(h, w);
    const char* p = bytes.data() + 12;
    for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(&f.u[i], p, 4);
        std::memcpy(&f.v[i], p + 4, 4);
        p += 8;
    }
    return f;
}

void write_flo(const FlowField& field, const std::filesystem::path& path) {
    io::write_file_atomic(path, encode_flo(field));
}

FlowField read_flo(const std::filesystem::path& path) { return decode_flo(io::read_file(path)); }

} // namespace flowgan::flowprep
