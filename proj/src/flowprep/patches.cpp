#include "flowgan/flowprep/patches.hpp"

#include "flowgan/error.hpp"
#include "flowgan/io.hpp"

namespace flowgan::flowprep {

void PatchBatch::append(const PatchBatch& other) {
    if (other.size() == 0) return;
    if (size() == 0) window = other.window;
    if (other.window != window) throw ShapeError("cannot append patches of a different window size");
    values.insert(values.end(), other.values.begin(), other.values.end());
    origins.insert(origins.end(), other.origins.begin(), other.origins.end());
}

std::size_t patch_count(int height, int width, int window, int stride) {
    if (window <= 0 || stride <= 0) throw ConfigError("window and stride must be positive");
    if (height < window || width < window) return 0;
    return static_cast<std::size_t>((height - window) / stride + 1) * ((width - window) / stride + 1);
}

PatchBatch extract_patches(const FlowMapImage& image, int window, int stride, int frame_index) {
    if (window <= 0 || stride <= 0) throw ConfigError("window and stride must be positive");
    const auto& img = image.pixels;
    if (img.height < window || img.width < window)
        throw SizeError("image " + std::to_string(img.height) + "x" + std::to_string(img.width)
                        + " is smaller than the " + std::to_string(window) + "px window");
    PatchBatch out;
    out.window = window;
    out.values.reserve(patch_count(img.height, img.width, window, stride) * out.patch_elements());
    for (int r = 0; r + window <= img.height; r += stride) {
        for (int c = 0; c + window <= img.width; c += stride) {
            for (int y = 0; y < window; ++y) {
                const std::uint8_t* src = img.at(r + y, c);
                for (int x = 0; x < window * 3; ++x) out.values.push_back(src[x] / 127.5f - 1.0f);
            }
            out.origins.push_back({frame_index, r, c});
        }
    }
    return out;
}

void PrepSettings::validate() const {
    if (fps <= 0) throw ConfigError("preprocess.fps must be positive");
    if (window <= 0) throw ConfigError("preprocess.window must be positive");
    if (stride <= 0) throw ConfigError("preprocess.stride must be positive");
    if (magnitude.fixed_max && !(*magnitude.fixed_max > 0))
        throw ConfigError("preprocess.max_magnitude must be positive");
    FlowEstimatorRegistry::instance().get(estimator);
}

std::vector<FlowMapImage> flow_maps(const FrameSequence& video, const PrepSettings& prep) {
    video.validate();
    std::vector<FlowMapImage> maps;
    maps.reserve(video.frames.size() - 1);
    for (std::size_t i = 0; i + 1 < video.frames.size(); ++i)
        maps.push_back(flow_to_color(estimate_flow(video.frames[i], video.frames[i + 1], prep.estimator),
                                     prep.magnitude));
    return maps;
}

PatchBatch patches_of(const std::vector<FlowMapImage>& maps, const PrepSettings& prep) {
    PatchBatch all;
    all.window = prep.window;
    for (std::size_t i = 0; i < maps.size(); ++i)
        all.append(extract_patches(maps[i], prep.window, prep.stride, static_cast<int>(i)));
    return all;
}

void save_patches(const PatchBatch& batch, const std::string& source_id,
                  const std::filesystem::path& container, const std::filesystem::path& sidecar_csv) {
    io::ArrayArchive ar;
    ar.metadata = {{"kind", "patch_batch"}, {"source_id", source_id}, {"window", batch.window},
                   {"count", batch.size()}};
    const std::uint64_t w = static_cast<std::uint64_t>(batch.window);
    ar.put("patches", std::span<const float>(batch.values), {batch.size(), w, w, 3});
    std::vector<std::int32_t> origins;
    io::CsvWriter csv({"frame_idx", "row", "col"});
    for (const auto& o : batch.origins) {
        origins.insert(origins.end(), {o.frame_index, o.row, o.col});
        csv.row({std::to_string(o.frame_index), std::to_string(o.row), std::to_string(o.col)});
    }
    ar.put("origins", std::span<const std::int32_t>(origins), {batch.size(), 3});
    ar.save(container);
    csv.save(sidecar_csv);
}

PatchBatch load_patches(const std::filesystem::path& container) {
    const auto ar = io::ArrayArchive::load(container);
    const auto& shape = ar.shape("patches");
    if (shape.size() != 4 || shape[1] != shape[2] || shape[3] != 3)
        throw FormatError(container.string() + ": patches array must be N x w x w x 3");
    PatchBatch b;
    b.window = static_cast<int>(shape[1]);
    b.values = ar.get_f32("patches");
    const auto origins = ar.get_i32("origins");
    if (origins.size() != shape[0] * 3) throw FormatError(container.string() + ": origins size mismatch");
    for (std::size_t i = 0; i < shape[0]; ++i)
        b.origins.push_back({origins[i * 3], origins[i * 3 + 1], origins[i * 3 + 2]});
    return b;
}

} // namespace flowgan::flowprep
