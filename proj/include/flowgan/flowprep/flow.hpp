#pragma once

#include "flowgan/flowprep/types.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace flowgan::flowprep {

using FlowEstimator = std::function<FlowField(const RgbImage&, const RgbImage&)>;

inline constexpr const char* kDefaultEstimator = "farneback";

// Named dense-flow estimators. Built in: "farneback" (polynomial expansion, the
// default, see farneback.hpp), "opencv-farneback" (OpenCV's implementation of the
// same method) and "dis" (OpenCV dense inverse search). Registration is meant for startup;
// lookups are read-only.
class FlowEstimatorRegistry {
public:
    static FlowEstimatorRegistry& instance();

    void add(const std::string& name, FlowEstimator fn);
    bool contains(const std::string& name) const;
    // Throws ConfigError listing the registered names.
    const FlowEstimator& get(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    FlowEstimatorRegistry();
    std::vector<std::pair<std::string, FlowEstimator>> entries_;
};

// Dense flow from frame_a to frame_b: frame_a(y, x) ~ frame_b(y + v, x + u).
FlowField estimate_flow(const RgbImage& frame_a, const RgbImage& frame_b,
                        const std::string& estimator = kDefaultEstimator);

// Middlebury .flo interchange format.
void write_flo(const FlowField& field, const std::filesystem::path& path);
FlowField read_flo(const std::filesystem::path& path);
std::string encode_flo(const FlowField& field);
FlowField decode_flo(std::string_view bytes);

} // namespace flowgan::flowprep
