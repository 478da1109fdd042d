#include "flowgan/bench/datasets.hpp"

#include "flowgan/error.hpp"
#include "flowgan/io.hpp"

#include <cstdlib>

namespace flowgan::bench {

namespace fs = std::filesystem;

fs::path data_dir() {
    if (const char* env = std::getenv("FLOWGAN_DATA_DIR"); env && *env) return env;
    const char* home = std::getenv("HOME");
    return fs::path(home ? home : ".") / ".cache" / "artifact-datasets";
}

std::vector<std::string> supported_datasets() { return {"mnist", "cifar10"}; }

IdxArray parse_idx(const std::string& bytes) {
    auto u8 = [&](std::size_t i) { return static_cast<std::uint8_t>(bytes[i]); };
    if (bytes.size() < 4 || u8(0) != 0 || u8(1) != 0) throw FormatError("not an IDX file");
    if (u8(2) != 0x08) throw FormatError("IDX: only unsigned byte payloads are supported");
    const std::size_t rank = u8(3);
    if (bytes.size() < 4 + 4 * rank) throw FormatError("IDX: truncated header");
    IdxArray out;
    std::size_t total = 1;
    for (std::size_t d = 0; d < rank; ++d) {
        const std::size_t o = 4 + 4 * d;
        const std::uint32_t n = (std::uint32_t(u8(o)) << 24) | (std::uint32_t(u8(o + 1)) << 16)
                                | (std::uint32_t(u8(o + 2)) << 8) | u8(o + 3);
        out.dims.push_back(n);
        total *= n;
    }
    const std::size_t start = 4 + 4 * rank;
    if (bytes.size() != start + total) throw FormatError("IDX: payload size does not match header");
    out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end());
    return out;
}

namespace {

std::string read_required(const fs::path& p, const std::string& dataset) {
    if (!fs::exists(p))
        throw DataError(dataset + " is not available: expected " + p.string()
                        + " (set FLOWGAN_DATA_DIR to the dataset cache root)");
    return io::read_file(p);
}

LabeledImages mnist_split(const fs::path& dir, const std::string& prefix) {
    const auto images = parse_idx(read_required(dir / (prefix + "-images-idx3-ubyte"), "mnist"));
    const auto labels = parse_idx(read_required(dir / (prefix + "-labels-idx1-ubyte"), "mnist"));
    if (images.dims.size() != 3 || labels.dims.size() != 1 || images.dims[0] != labels.dims[0])
        throw FormatError("mnist: unexpected array shapes in " + dir.string());
    const int h = static_cast<int>(images.dims[1]), w = static_cast<int>(images.dims[2]);
    if (h > 32 || w > 32) throw FormatError("mnist: images larger than 32x32");
    const int top = (32 - h) / 2, left = (32 - w) / 2;
    LabeledImages out;
    const std::size_t n = labels.dims[0];
    out.pixels.assign(n * out.image_elements(), -1.0f);
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.labels[i] = labels.data[i];
        float* dst = out.pixels.data() + i * out.image_elements();
        const std::uint8_t* src = images.data.data() + i * h * w;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const float v = src[y * w + x] / 127.5f - 1.0f;
                float* px = dst + ((static_cast<std::size_t>(y + top) * 32) + x + left) * 3;
                px[0] = px[1] = px[2] = v;
            }
    }
    return out;
}

void append_cifar_batch(const std::string& bytes, LabeledImages& out) {
    constexpr std::size_t record = 1 + 3072;
    if (bytes.size() % record != 0) throw FormatError("cifar10: batch size is not a multiple of 3073 bytes");
    const std::size_t n = bytes.size() / record;
    const std::size_t base = out.pixels.size();
    out.pixels.resize(base + n * 3072);
    for (std::size_t i = 0; i < n; ++i) {
        const auto* r = reinterpret_cast<const std::uint8_t*>(bytes.data() + i * record);
        out.labels.push_back(r[0]);
        float* dst = out.pixels.data() + base + i * 3072;
        for (int c = 0; c < 3; ++c)
            for (int p = 0; p < 1024; ++p) dst[p * 3 + c] = r[1 + c * 1024 + p] / 127.5f - 1.0f;
    }
}

} // namespace

Dataset load_mnist(const fs::path& root) {
    const auto dir = root / "mnist";
    return {"mnist", 10, mnist_split(dir, "train"), mnist_split(dir, "t10k")};
}

Dataset load_cifar10(const fs::path& root) {
    const auto dir = root / "cifar-10-batches-bin";
    Dataset d{"cifar10", 10, {}, {}};
    for (int b = 1; b <= 5; ++b)
        append_cifar_batch(read_required(dir / ("data_batch_" + std::to_string(b) + ".bin"), "cifar10"), d.train);
    append_cifar_batch(read_required(dir / "test_batch.bin", "cifar10"), d.test);
    return d;
}

Dataset load_dataset(const std::string& name, const fs::path& root) {
    if (name == "mnist") return load_mnist(root);
    if (name == "cifar10") return load_cifar10(root);
    std::string known;
    for (const auto& s : supported_datasets()) known += (known.empty() ? "" : ", ") + s;
    throw ConfigError("unknown dataset '" + name + "' (supported: " + known + ")");
}

} // namespace flowgan::bench
