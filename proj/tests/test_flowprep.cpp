#include "flowgan/error.hpp"
#include "flowgan/flowprep/color.hpp"
#include "flowgan/flowprep/flow.hpp"
#include "flowgan/flowprep/patches.hpp"
#include "flowgan/flowprep/video.hpp"
#include "flowgan/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <cstring>
#include <set>

using namespace flowgan;
using namespace flowgan::flowprep;
namespace fs = std::filesystem;

namespace {

// Smooth random texture: sum of a few random sinusoids per channel.
RgbImage texture(int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    RgbImage img(h, w);
    for (int c = 0; c < 3; ++c) {
        double fx[4], fy[4], ph[4];
        for (int k = 0; k < 4; ++k) {
            fx[k] = (1 + std::floor(u(rng) * 5)) * 2 * std::numbers::pi / w;
            fy[k] = (1 + std::floor(u(rng) * 5)) * 2 * std::numbers::pi / h;
            ph[k] = u(rng) * 6.28;
        }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double s = 0;
                for (int k = 0; k < 4; ++k) s += std::sin(fx[k] * x + ph[k]) * std::cos(fy[k] * y + ph[k] * 0.5);
                img.at(y, x)[c] = static_cast<std::uint8_t>(std::lround(127.5 + 30 * s));
            }
    }
    return img;
}

RgbImage shift_right(const RgbImage& a, int dx) {
    RgbImage b(a.height, a.width);
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) std::copy_n(a.at(y, x), 3, b.at(y, (x + dx) % a.width));
    return b;
}

double median(std::vector<float> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

// Hue in degrees of an 8-bit RGB triple.
double hue_of(const std::uint8_t* p) {
    const double r = p[0], g = p[1], b = p[2];
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b}), d = mx - mn;
    if (d == 0) return NAN;
    double h;
    if (mx == r) h = std::fmod((g - b) / d, 6.0);
    else if (mx == g) h = (b - r) / d + 2;
    else h = (r - g) / d + 4;
    h *= 60;
    return h < 0 ? h + 360 : h;
}

double angle_diff(double a, double b) {
    double d = std::fmod(a - b, 360.0);
    if (d > 180) d -= 360;
    if (d < -180) d += 360;
    return d;
}

fs::path temp_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_SUITE("flowprep") {

TEST_CASE("resampling indices") {
    auto all = resample_indices(30, 30, 30);
    CHECK(all.size() == 30);
    CHECK(all.back() == 29);
    auto half = resample_indices(60, 30, 15);
    REQUIRE(half.size() == 30);
    for (std::size_t k = 0; k < half.size(); ++k) CHECK(half[k] == 2 * k);
    auto odd = resample_indices(50, 25, 10);
    for (std::size_t k = 0; k < odd.size(); ++k) CHECK(odd[k] == static_cast<std::size_t>(std::floor(k * 25.0 / 10)));
    CHECK_THROWS_AS(resample_indices(30, 30, 60), ConfigError);
    CHECK_THROWS_AS(resample_indices(30, 30, 0), ConfigError);
}

TEST_CASE("video decode at source and reduced rates") {
    const auto dir = temp_dir("flowgan_video_test");
    FrameSequence seq;
    seq.fps = 30;
    seq.source_id = "clip";
    for (int i = 0; i < 60; ++i) seq.frames.push_back(shift_right(texture(48, 64, 1), i));
    write_video(seq, dir / "clip.mkv");

    auto full = extract_frames(dir / "clip.mkv", 30);
    REQUIRE(full.frames.size() == 60);
    CHECK(full.fps == 30);
    CHECK(full.frames[7] == seq.frames[7]);

    auto half = extract_frames(dir / "clip.mkv", 15);
    REQUIRE(half.frames.size() == 30);
    CHECK(half.frames[5] == seq.frames[10]);

    FrameSequence one{{texture(48, 64, 2)}, 30, "one"};
    write_video(one, dir / "one.mkv");
    CHECK_THROWS_AS(extract_frames(dir / "one.mkv", 30), InsufficientFramesError);
    CHECK_THROWS_AS(extract_frames(dir / "missing.mkv", 30), DecodeError);
    io::write_file_atomic(dir / "junk.mkv", "definitely not a video");
    CHECK_THROWS_AS(extract_frames(dir / "junk.mkv", 30), DecodeError);
    fs::remove_all(dir);
}

TEST_CASE("default flow: still frames and a known shift") {
    const auto a = texture(64, 64, 3);
    const auto still = estimate_flow(a, a);
    CHECK(still.height == 64);
    float worst = 0;
    for (std::size_t i = 0; i < still.size(); ++i) worst = std::max({worst, std::abs(still.u[i]), std::abs(still.v[i])});
    CHECK(worst <= 1e-6f);

    const auto moved = estimate_flow(a, shift_right(a, 3));
    CHECK(std::abs(median(moved.u) - 3.0) <= 0.5);
    CHECK(std::abs(median(moved.v)) <= 0.5);

    const auto again = estimate_flow(a, shift_right(a, 3));
    CHECK(again.u == moved.u);
    CHECK(again.v == moved.v);
}

TEST_CASE("flow estimator errors") {
    CHECK_THROWS_AS(estimate_flow(RgbImage(64, 64), RgbImage(32, 32)), ShapeError);
    CHECK_THROWS_AS(estimate_flow(RgbImage(8, 8), RgbImage(8, 8), "flownet"), ConfigError);
    CHECK(FlowEstimatorRegistry::instance().contains("dis"));
}

TEST_CASE(".flo format") {
    FlowField zero(2, 2);
    CHECK(encode_flo(zero).size() == 44);

    std::mt19937_64 rng(4);
    std::normal_distribution<float> n(0, 5);
    FlowField f(13, 17);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.u[i] = n(rng);
        f.v[i] = n(rng);
    }
    const auto dir = temp_dir("flowgan_flo_test");
    write_flo(f, dir / "f.flo");
    const auto g = read_flo(dir / "f.flo");
    CHECK(g.height == 13);
    CHECK(g.width == 17);
    CHECK(std::memcmp(g.u.data(), f.u.data(), f.size() * 4) == 0);
    CHECK(std::memcmp(g.v.data(), f.v.data(), f.size() * 4) == 0);
    CHECK(io::read_file(dir / "f.flo").substr(0, 4) == "PIEH");

    auto bytes = encode_flo(f);
    CHECK_THROWS_AS(decode_flo(bytes.substr(0, bytes.size() - 1)), FormatError);
    bytes[0] = 'X';
    CHECK_THROWS_AS(decode_flo(bytes), FormatError);
    f.u[3] = NAN;
    CHECK_THROWS_AS(encode_flo(f), DataError);
    fs::remove_all(dir);
}

TEST_CASE("color coding conventions") {
    FlowField zero(4, 5);
    auto white = flow_to_color(zero);
    CHECK(std::all_of(white.pixels.data.begin(), white.pixels.data.end(), [](auto b) { return b == 255; }));
    CHECK(white.max_magnitude == 1.0);

    FlowField one(1, 2);
    one.u[0] = 2.0f;
    auto m = flow_to_color(one, MagnitudeMode::fixed(2.0));
    CHECK(m.pixels.at(0, 0)[0] == 255);
    CHECK(m.pixels.at(0, 0)[1] == 0);
    CHECK(m.pixels.at(0, 0)[2] == 0);
    CHECK(m.pixels.at(0, 1)[1] == 255);  // zero flow pixel stays white

    auto automatic = flow_to_color(one);
    CHECK(automatic.max_magnitude == 2.0);

    FlowField twice = one;
    twice.u[0] = 4.0f;
    auto clipped = flow_to_color(twice, MagnitudeMode::fixed(2.0));
    CHECK(std::equal(clipped.pixels.at(0, 0), clipped.pixels.at(0, 0) + 3, m.pixels.at(0, 0)));

    CHECK_THROWS_AS(flow_to_color(one, MagnitudeMode::fixed(0)), ConfigError);
    one.v[1] = INFINITY;
    CHECK_THROWS_AS(flow_to_color(one), DataError);
}

TEST_CASE("color coding is hue-equivariant") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 30; ++trial) {
        const double theta = u(rng) * 2 * std::numbers::pi;
        FlowField f(16, 16), r(16, 16);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double ang = u(rng) * 2 * std::numbers::pi, mag = 1.5 + 2.5 * u(rng);
            f.u[i] = static_cast<float>(mag * std::cos(ang));
            f.v[i] = static_cast<float>(mag * std::sin(ang));
            r.u[i] = static_cast<float>(mag * std::cos(ang + theta));
            r.v[i] = static_cast<float>(mag * std::sin(ang + theta));
        }
        const auto a = flow_to_color(f, MagnitudeMode::fixed(4.0));
        const auto b = flow_to_color(r, MagnitudeMode::fixed(4.0));
        double worst = 0;
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                worst = std::max(worst, std::abs(angle_diff(hue_of(b.pixels.at(y, x)) - hue_of(a.pixels.at(y, x)),
                                                            theta * 180 / std::numbers::pi)));
        CHECK(worst <= 1.0);
    }
}

TEST_CASE("patch extraction") {
    auto map = [](int h, int w) { return FlowMapImage{RgbImage(h, w, 255), 1.0}; };
    CHECK(extract_patches(map(64, 64)).size() == 4);
    CHECK(extract_patches(map(32, 32)).size() == 1);
    CHECK(extract_patches(map(33, 33)).size() == 1);
    CHECK_THROWS_AS(extract_patches(map(31, 64)), SizeError);

    for (int h = 32; h < 100; h += 7)
        for (int w = 32; w < 100; w += 9)
            for (int stride : {8, 16, 32}) {
                const auto p = extract_patches(map(h, w), 32, stride, 3);
                CHECK(p.size() == static_cast<std::size_t>(((h - 32) / stride + 1) * ((w - 32) / stride + 1)));
                CHECK(p.size() == patch_count(h, w, 32, stride));
                std::set<PatchOrigin> seen(p.origins.begin(), p.origins.end());
                CHECK(seen.size() == p.size());
                for (auto& o : p.origins) {
                    CHECK(o.row + 32 <= h);
                    CHECK(o.col + 32 <= w);
                    CHECK(o.frame_index == 3);
                }
            }

    FlowMapImage ramp{RgbImage(32, 64), 1.0};
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 64; ++x) std::fill_n(ramp.pixels.at(y, x), 3, static_cast<std::uint8_t>(x * 4));
    auto p = extract_patches(ramp);
    REQUIRE(p.size() == 2);
    CHECK(p.origins[1].col == 32);
    CHECK(p.patch(0)[0] == -1.0f);
    CHECK(p.patch(1)[0] == 128 / 127.5f - 1.0f);
    CHECK(std::all_of(p.values.begin(), p.values.end(), [](float v) { return v >= -1 && v <= 1; }));
}

TEST_CASE("pipeline maps, patches and containers") {
    FrameSequence seq;
    seq.fps = 30;
    seq.source_id = "s";
    const auto base = texture(64, 64, 8);
    for (int i = 0; i < 5; ++i) seq.frames.push_back(shift_right(base, i));
    PrepSettings prep;
    const auto maps = flow_maps(seq, prep);
    REQUIRE(maps.size() == 4);
    CHECK(maps[0].max_magnitude == 4.0);
    const auto batch = patches_of(maps, prep);
    CHECK(batch.size() == 16);
    CHECK(batch.origins[15].frame_index == 3);

    const auto dir = temp_dir("flowgan_patch_test");
    save_patches(batch, "s", dir / "s.patches", dir / "s.csv");
    const auto back = load_patches(dir / "s.patches");
    CHECK(back.values == batch.values);
    CHECK(back.origins == batch.origins);
    const auto rows = io::read_csv(dir / "s.csv");
    CHECK(rows.front() == std::vector<std::string>{"frame_idx", "row", "col"});
    CHECK(rows.size() == 17);

    write_png(maps[1].pixels, dir / "m.png");
    CHECK(read_png(dir / "m.png") == maps[1].pixels);
    fs::remove_all(dir);

    PrepSettings bad;
    bad.window = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

}
