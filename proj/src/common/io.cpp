#include "flowgan/io.hpp"

#include "flowgan/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace flowgan::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

CsvWriter& CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw DataError("csv row width mismatch");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += fields[i];
    }
    buf_ += '\n';
    return *this;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

// --- ArrayArchive ---------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'F', 'L', 'O', 'W', 'G', 'A', 'N', 'A'};

std::size_t dtype_size(DType d) {
    switch (d) {
    case DType::f32: return 4;
    case DType::f64: return 8;
    case DType::u8: return 1;
    case DType::i32: return 4;
    }
    throw FormatError("unknown dtype tag");
}

template <typename T>
void append_pod(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::string_view b) : b_(b) {}
    template <typename T>
    T pod() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, b_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string_view take(std::size_t n) {
        need(n);
        auto s = b_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == b_.size(); }

private:
    void need(std::size_t n) const {
        if (b_.size() - pos_ < n) throw FormatError("archive truncated");
    }
    std::string_view b_;
    std::size_t pos_ = 0;
};

std::uint64_t element_count(const std::vector<std::uint64_t>& shape) {
    std::uint64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

} // namespace

void ArrayArchive::put_raw(const std::string& name, DType dt, const void* data, std::size_t nbytes,
                           std::vector<std::uint64_t> shape) {
    if (element_count(shape) * dtype_size(dt) != nbytes)
        throw ShapeError("array '" + name + "' size does not match its shape");
    Entry e{name, dt, std::move(shape), std::vector<std::byte>(nbytes)};
    if (nbytes) std::memcpy(e.bytes.data(), data, nbytes);
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& x) { return x.name == name; });
    if (it != entries_.end())
        *it = std::move(e);
    else
        entries_.push_back(std::move(e));
}

void ArrayArchive::put(const std::string& name, std::span<const float> data,
                       std::vector<std::uint64_t> shape) {
    put_raw(name, DType::f32, data.data(), data.size_bytes(), std::move(shape));
}

void ArrayArchive::put(const std::string& name, std::span<const double> data,
                       std::vector<std::uint64_t> shape) {
    put_raw(name, DType::f64, data.data(), data.size_bytes(), std::move(shape));
}

void ArrayArchive::put(const std::string& name, std::span<const std::int32_t> data,
                       std::vector<std::uint64_t> shape) {
    put_raw(name, DType::i32, data.data(), data.size_bytes(), std::move(shape));
}

const ArrayArchive::Entry& ArrayArchive::find(const std::string& name) const {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& x) { return x.name == name; });
    if (it == entries_.end()) throw FormatError("archive has no array named '" + name + "'");
    return *it;
}

bool ArrayArchive::contains(const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& x) { return x.name == name; });
}

const std::vector<std::uint64_t>& ArrayArchive::shape(const std::string& name) const {
    return find(name).shape;
}

DType ArrayArchive::dtype(const std::string& name) const { return find(name).dtype; }

std::vector<std::string> ArrayArchive::names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
}

namespace {
template <typename T>
std::vector<T> copy_out(const std::vector<std::byte>& bytes) {
    std::vector<T> v(bytes.size() / sizeof(T));
    if (!v.empty()) std::memcpy(v.data(), bytes.data(), bytes.size());
    return v;
}
} // namespace

std::vector<float> ArrayArchive::get_f32(const std::string& name) const {
    const auto& e = find(name);
    if (e.dtype != DType::f32) throw FormatError("array '" + name + "' is not float32");
    return copy_out<float>(e.bytes);
}

std::vector<double> ArrayArchive::get_f64(const std::string& name) const {
    const auto& e = find(name);
    if (e.dtype != DType::f64) throw FormatError("array '" + name + "' is not float64");
    return copy_out<double>(e.bytes);
}

std::vector<std::int32_t> ArrayArchive::get_i32(const std::string& name) const {
    const auto& e = find(name);
    if (e.dtype != DType::i32) throw FormatError("array '" + name + "' is not int32");
    return copy_out<std::int32_t>(e.bytes);
}

std::string ArrayArchive::serialize() const {
    std::string out(kMagic, sizeof(kMagic));
    append_pod<std::uint32_t>(out, kVersion);
    const std::string meta = metadata.dump();
    append_pod<std::uint64_t>(out, meta.size());
    out += meta;
    append_pod<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
    for (const auto& e : entries_) {
        append_pod<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
        out += e.name;
        append_pod<std::uint8_t>(out, static_cast<std::uint8_t>(e.dtype));
        append_pod<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
        for (auto d : e.shape) append_pod<std::uint64_t>(out, d);
        append_pod<std::uint64_t>(out, e.bytes.size());
        out.append(reinterpret_cast<const char*>(e.bytes.data()), e.bytes.size());
    }
    return out;
}

ArrayArchive ArrayArchive::deserialize(std::string_view bytes) {
    Reader r(bytes);
    if (r.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic)))
        throw FormatError("not an array archive (bad magic)");
    const auto version = r.pod<std::uint32_t>();
    if (version != kVersion) throw FormatError("unsupported archive version " + std::to_string(version));
    ArrayArchive a;
    const auto meta_len = r.pod<std::uint64_t>();
    try {
        a.metadata = nlohmann::json::parse(r.take(meta_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("archive metadata is not valid JSON: ") + e.what());
    }
    const auto count = r.pod<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
        Entry e;
        e.name = std::string(r.take(r.pod<std::uint32_t>()));
        e.dtype = static_cast<DType>(r.pod<std::uint8_t>());
        const auto rank = r.pod<std::uint32_t>();
        if (rank > 16) throw FormatError("implausible array rank");
        for (std::uint32_t d = 0; d < rank; ++d) e.shape.push_back(r.pod<std::uint64_t>());
        const auto nbytes = r.pod<std::uint64_t>();
        if (element_count(e.shape) * dtype_size(e.dtype) != nbytes)
            throw FormatError("array '" + e.name + "' payload does not match its shape");
        auto payload = r.take(nbytes);
        e.bytes.resize(nbytes);
        if (nbytes) std::memcpy(e.bytes.data(), payload.data(), nbytes);
        a.entries_.push_back(std::move(e));
    }
    if (!r.done()) throw FormatError("trailing bytes after archive entries");
    return a;
}

ArrayArchive ArrayArchive::load(const fs::path& path) { return deserialize(read_file(path)); }

} // namespace flowgan::io
