#include "flowgan/flowprep/color.hpp"

#include "flowgan/error.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flowgan::flowprep {

namespace {

std::uint8_t to_byte(double x) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
}

} // namespace

FlowMapImage flow_to_color(const FlowField& field, MagnitudeMode mode) {
    if (!field.all_finite()) throw DataError("flow field contains non-finite values");
    if (field.u.size() != field.v.size()) throw ShapeError("flow components differ in size");

    double max_mag;
    if (mode.fixed_max) {
        max_mag = *mode.fixed_max;
        if (!(max_mag > 0) || !std::isfinite(max_mag))
            throw ConfigError("max_magnitude must be a positive finite number");
    } else {
        max_mag = 0.0;
        for (std::size_t i = 0; i < field.size(); ++i)
            max_mag = std::max(max_mag, std::hypot(double(field.u[i]), double(field.v[i])));
        if (max_mag == 0.0) max_mag = 1.0;
    }

    FlowMapImage out{RgbImage(field.height, field.width), max_mag};
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double u = field.u[i];
        const double v = field.v[i];
        const double sat = std::min(std::hypot(u, v) / max_mag, 1.0);
        double hue = std::atan2(v, u) * 180.0 / std::numbers::pi;
        if (hue < 0) hue += 360.0;

        // HSV -> RGB with V = 1.
        const double h6 = hue / 60.0;
        const double x = 1.0 - std::abs(std::fmod(h6, 2.0) - 1.0);
        double r = 0, g = 0, b = 0;
        switch (static_cast<int>(h6) % 6) {
        case 0: r = 1; g = x; break;
        case 1: r = x; g = 1; break;
        case 2: g = 1; b = x; break;
        case 3: g = x; b = 1; break;
        case 4: r = x; b = 1; break;
        default: r = 1; b = x; break;
        }
        std::uint8_t* px = out.pixels.data.data() + i * 3;
        px[0] = to_byte(1.0 - sat * (1.0 - r));
        px[1] = to_byte(1.0 - sat * (1.0 - g));
        px[2] = to_byte(1.0 - sat * (1.0 - b));
    }
    return out;
}

void write_png(const RgbImage& img, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    cv::Mat rgb(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.data.data()));
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    auto tmp = path;
    tmp += ".tmp.png";
    if (!cv::imwrite(tmp.string(), bgr, {cv::IMWRITE_PNG_COMPRESSION, 6}))
        throw IoError("cannot write " + path.string());
    std::filesystem::rename(tmp, path);
}

RgbImage read_png(const std::filesystem::path& path) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw IoError("cannot read image " + path.string());
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    RgbImage img(rgb.rows, rgb.cols);
    for (int r = 0; r < rgb.rows; ++r)
        std::copy(rgb.ptr<std::uint8_t>(r), rgb.ptr<std::uint8_t>(r) + rgb.cols * 3, img.at(r, 0));
    return img;
}

} // namespace flowgan::flowprep
