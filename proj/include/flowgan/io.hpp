#pragma once

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flowgan::io {

// Writes to a sibling temp file and renames it over `path`, so readers never see
// a partially written file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// Formats a double with enough digits to round-trip exactly.
std::string format_double(double v);

// Comma-separated, header row first, LF line endings.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    CsvWriter& row(const std::vector<std::string>& fields);
    const std::string& str() const { return buf_; }
    void save(const std::filesystem::path& path) const { write_file_atomic(path, buf_); }

private:
    std::size_t width_;
    std::string buf_;
};

// Parses a simple CSV (no quoting) into rows; the header row is returned first.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

enum class DType : std::uint8_t { f32 = 1, f64 = 2, u8 = 3, i32 = 4 };

// Container of named n-d arrays plus a JSON metadata record. Layout (little-endian):
//   "FLOWGANA" | u32 version | u64 meta_len | meta JSON | u32 count |
//   per entry: u32 name_len | name | u8 dtype | u32 rank | u64 dims[rank] | u64 nbytes | data
class ArrayArchive {
public:
    static constexpr std::uint32_t kVersion = 1;

    nlohmann::json metadata = nlohmann::json::object();

    void put(const std::string& name, std::span<const float> data, std::vector<std::uint64_t> shape);
    void put(const std::string& name, std::span<const double> data, std::vector<std::uint64_t> shape);
    void put(const std::string& name, std::span<const std::int32_t> data,
             std::vector<std::uint64_t> shape);

    bool contains(const std::string& name) const;
    const std::vector<std::uint64_t>& shape(const std::string& name) const;
    DType dtype(const std::string& name) const;
    std::vector<std::string> names() const;

    // Typed readers throw FormatError on a dtype mismatch or missing name.
    std::vector<float> get_f32(const std::string& name) const;
    std::vector<double> get_f64(const std::string& name) const;
    std::vector<std::int32_t> get_i32(const std::string& name) const;

    std::string serialize() const;
    static ArrayArchive deserialize(std::string_view bytes);

    void save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }
    static ArrayArchive load(const std::filesystem::path& path);

private:
    struct Entry {
        std::string name;
        DType dtype;
        std::vector<std::uint64_t> shape;
        std::vector<std::byte> bytes;
    };
    const Entry& find(const std::string& name) const;
    void put_raw(const std::string& name, DType dt, const void* data, std::size_t nbytes,
                 std::vector<std::uint64_t> shape);

    std::vector<Entry> entries_;
};

} // namespace flowgan::io
