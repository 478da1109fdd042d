#include "flowgan/bench/plots.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace flowgan::bench {

namespace {

constexpr int kW = 640, kH = 400, kLeft = 50, kRight = 20, kTop = 40, kBottom = 40;

// Pixels are stored RGB, so scalars are given as (r, g, b).
const cv::Scalar kBlue(40, 90, 200), kRed(210, 50, 40), kGreen(30, 150, 60), kGray(120, 120, 120);

cv::Mat canvas(const std::string& title) {
    cv::Mat m(kH, kW, CV_8UC3, cv::Scalar(255, 255, 255));
    cv::rectangle(m, {kLeft, kTop}, {kW - kRight, kH - kBottom}, kGray, 1);
    cv::putText(m, title, {kLeft, 25}, cv::FONT_HERSHEY_SIMPLEX, 0.55, cv::Scalar(0, 0, 0), 1, cv::LINE_AA);
    return m;
}

void label(cv::Mat& m, const std::string& text, int x, int y, const cv::Scalar& color) {
    cv::putText(m, text, {x, y}, cv::FONT_HERSHEY_SIMPLEX, 0.4, color, 1, cv::LINE_AA);
}

flowprep::RgbImage to_image(const cv::Mat& m) {
    flowprep::RgbImage img(m.rows, m.cols);
    for (int r = 0; r < m.rows; ++r) std::memcpy(img.at(r, 0), m.ptr(r), static_cast<std::size_t>(m.cols) * 3);
    return img;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace

flowprep::RgbImage score_histogram(const std::vector<double>& normal, const std::vector<double>& abnormal,
                                   const std::string& title, int bins) {
    auto m = canvas(title);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto* s : {&normal, &abnormal})
        for (double v : *s)
            if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    if (!(lo < hi)) {
        lo = std::isfinite(lo) ? lo - 0.5 : 0.0;
        hi = lo + 1.0;
    }
    bins = std::max(bins, 1);
    auto hist = [&](const std::vector<double>& s) {
        std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
        for (double v : s) {
            if (!std::isfinite(v)) continue;
            const int b = std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
            h[static_cast<std::size_t>(b)] += 1.0;
        }
        // Densities so that sets of different sizes are comparable.
        for (auto& x : h) x /= std::max<std::size_t>(s.size(), 1);
        return h;
    };
    const auto hn = hist(normal), ha = hist(abnormal);
    const double top = std::max(*std::max_element(hn.begin(), hn.end()), *std::max_element(ha.begin(), ha.end()));
    const double pw = static_cast<double>(kW - kLeft - kRight) / bins, ph = kH - kTop - kBottom;
    auto draw = [&](const std::vector<double>& h, const cv::Scalar& color) {
        for (int b = 0; b < bins; ++b) {
            const int x0 = kLeft + static_cast<int>(b * pw), x1 = kLeft + static_cast<int>((b + 1) * pw);
            const int y = kH - kBottom - static_cast<int>(top > 0 ? h[b] / top * ph : 0);
            cv::rectangle(m, {x0, y}, {x1, kH - kBottom}, color, 1);
        }
    };
    draw(hn, kBlue);
    draw(ha, kRed);
    label(m, fmt(lo), kLeft, kH - kBottom + 15, kGray);
    label(m, fmt(hi), kW - kRight - 40, kH - kBottom + 15, kGray);
    label(m, "normal", kW - 150, 25, kBlue);
    label(m, "abnormal", kW - 90, 25, kRed);
    return to_image(m);
}

flowprep::RgbImage loss_curves(const gan::TrainingHistory& history, const std::string& title) {
    auto m = canvas(title);
    const auto& e = history.epochs;
    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto draw = [&](auto get, const cv::Scalar& color, const char* name, int slot) {
        if (e.empty()) return;
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& r : e) lo = std::min(lo, get(r)), hi = std::max(hi, get(r));
        const double span = hi > lo ? hi - lo : 1.0;
        std::vector<cv::Point> pts;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const double fx = e.size() > 1 ? static_cast<double>(i) / (e.size() - 1) : 0.5;
            pts.emplace_back(kLeft + static_cast<int>(fx * pw),
                             kH - kBottom - static_cast<int>((get(e[i]) - lo) / span * ph));
        }
        cv::polylines(m, pts, false, color, 2, cv::LINE_AA);
        label(m, std::string(name) + " [" + fmt(lo) + ", " + fmt(hi) + "]", kLeft + 5 + 190 * slot,
              kH - kBottom + 15, color);
    };
    draw([](const gan::EpochRecord& r) { return r.recon_loss; }, kBlue, "recon", 0);
    draw([](const gan::EpochRecord& r) { return r.g_adv_loss; }, kRed, "g_adv", 1);
    draw([](const gan::EpochRecord& r) { return r.d_loss; }, kGreen, "d", 2);
    label(m, "epochs 1.." + std::to_string(e.size()), kW - 120, 25, kGray);
    return to_image(m);
}

} // namespace flowgan::bench
