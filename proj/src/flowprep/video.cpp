#include "flowgan/flowprep/video.hpp"

#include "flowgan/error.hpp"

#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include <cmath>

namespace flowgan::flowprep {

void FrameSequence::validate() const {
    if (fps <= 0) throw ConfigError("frame sequence fps must be positive");
    if (frames.size() < 2)
        throw InsufficientFramesError("frame sequence '" + source_id + "' has fewer than 2 frames");
    for (const auto& f : frames) {
        if (!f.same_size(frames.front()))
            throw ShapeError("frame sequence '" + source_id + "' mixes frame sizes");
        if (f.data.size() != static_cast<std::size_t>(f.height) * f.width * 3)
            throw ShapeError("frame buffer does not match its dimensions");
    }
}

std::vector<std::size_t> resample_indices(std::size_t n_source, double source_fps, int target_fps) {
    if (target_fps <= 0) throw ConfigError("target fps must be positive");
    if (!(source_fps > 0)) throw DecodeError("video reports a non-positive frame rate");
    std::vector<std::size_t> idx;
    // Nominal rates such as 29.97 vs 30 count as equal: keep every frame.
    if (std::lround(source_fps) <= target_fps) {
        if (std::lround(source_fps) < target_fps)
            throw ConfigError("target fps " + std::to_string(target_fps) + " exceeds source rate "
                              + std::to_string(source_fps));
        for (std::size_t i = 0; i < n_source; ++i) idx.push_back(i);
        return idx;
    }
    const double step = source_fps / target_fps;
    for (std::size_t k = 0;; ++k) {
        const auto i = static_cast<std::size_t>(std::floor(static_cast<double>(k) * step));
        if (i >= n_source) break;
        idx.push_back(i);
    }
    return idx;
}

FrameSequence extract_frames(const std::filesystem::path& video_path, int target_fps) {
    if (target_fps <= 0) throw ConfigError("target fps must be positive");
    if (!std::filesystem::exists(video_path))
        throw DecodeError("video not found: " + video_path.string());
    cv::VideoCapture cap(video_path.string(), cv::CAP_FFMPEG);
    if (!cap.isOpened()) throw DecodeError("cannot decode video: " + video_path.string());
    const double src_fps = cap.get(cv::CAP_PROP_FPS);

    std::vector<RgbImage> decoded;
    cv::Mat bgr;
    cv::Mat rgb;
    while (cap.read(bgr)) {
        if (bgr.empty()) break;
        cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
        RgbImage img(rgb.rows, rgb.cols);
        for (int r = 0; r < rgb.rows; ++r)
            std::copy(rgb.ptr<std::uint8_t>(r), rgb.ptr<std::uint8_t>(r) + rgb.cols * 3, img.at(r, 0));
        decoded.push_back(std::move(img));
    }
    if (decoded.empty()) throw DecodeError("no decodable frames in " + video_path.string());

    FrameSequence seq;
    seq.fps = target_fps;
    seq.source_id = video_path.stem().string();
    for (auto i : resample_indices(decoded.size(), src_fps, target_fps))
        seq.frames.push_back(std::move(decoded[i]));
    if (seq.frames.size() < 2)
        throw InsufficientFramesError(video_path.string() + " yields fewer than 2 frames at "
                                      + std::to_string(target_fps) + " fps");
    return seq;
}

void write_video(const FrameSequence& seq, const std::filesystem::path& path) {
    if (seq.frames.empty()) throw DataError("cannot write an empty video");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto& first = seq.frames.front();
    cv::VideoWriter writer(path.string(), cv::CAP_FFMPEG, cv::VideoWriter::fourcc('F', 'F', 'V', '1'),
                           seq.fps, cv::Size(first.width, first.height));
    if (!writer.isOpened()) throw IoError("cannot open video writer for " + path.string());
    cv::Mat bgr;
    for (const auto& f : seq.frames) {
        if (!f.same_size(first)) throw ShapeError("video frames differ in size");
        cv::Mat rgb(f.height, f.width, CV_8UC3, const_cast<std::uint8_t*>(f.data.data()));
        cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
        writer.write(bgr);
    }
}

} // namespace flowgan::flowprep
