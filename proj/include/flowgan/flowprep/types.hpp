#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace flowgan::flowprep {

// 8-bit RGB, row-major, channels interleaved.
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;

    RgbImage() = default;
    RgbImage(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {}

    std::uint8_t* at(int r, int c) { return data.data() + (static_cast<std::size_t>(r) * width + c) * 3; }
    const std::uint8_t* at(int r, int c) const {
        return data.data() + (static_cast<std::size_t>(r) * width + c) * 3;
    }
    bool same_size(const RgbImage& o) const { return height == o.height && width == o.width; }
    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

struct FrameSequence {
    std::vector<RgbImage> frames;
    int fps = 0;
    std::string source_id;

    // Throws DataError/ShapeError when the sequence violates its invariants.
    void validate() const;
};

struct FlowField {
    int height = 0;
    int width = 0;
    std::vector<float> u;  // horizontal displacement, pixels
    std::vector<float> v;  // vertical displacement, pixels (positive = down)

    FlowField() = default;
    FlowField(int h, int w)
        : height(h), width(w), u(static_cast<std::size_t>(h) * w, 0.f),
          v(static_cast<std::size_t>(h) * w, 0.f) {}

    std::size_t size() const { return u.size(); }
    bool all_finite() const;
};

struct FlowMapImage {
    RgbImage pixels;
    double max_magnitude = 1.0;
};

struct PatchOrigin {
    int frame_index = 0;
    int row = 0;
    int col = 0;
    friend auto operator<=>(const PatchOrigin&, const PatchOrigin&) = default;
};

// N x window x window x 3 values in [-1, 1], one origin per patch.
struct PatchBatch {
    int window = 32;
    std::vector<float> values;
    std::vector<PatchOrigin> origins;

    std::size_t size() const { return origins.size(); }
    std::size_t patch_elements() const { return static_cast<std::size_t>(window) * window * 3; }
    const float* patch(std::size_t i) const { return values.data() + i * patch_elements(); }

    void append(const PatchBatch& other);
};

} // namespace flowgan::flowprep
