#include "flowgan/error.hpp"
#include "flowgan/io.hpp"
#include "flowgan/scoring/metrics.hpp"
#include "flowgan/scoring/mmd.hpp"
#include "flowgan/scoring/pipeline.hpp"
#include "flowgan/scoring/video.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

using namespace flowgan;
using namespace flowgan::scoring;

namespace {

std::vector<double> draw(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

std::vector<LabeledScore> random_labeled(std::mt19937_64& rng, std::size_t n, bool coarse) {
    std::vector<LabeledScore> s(n);
    std::uniform_real_distribution<double> u(0, 1);
    for (std::size_t i = 0; i < n; ++i) {
        s[i].label = i % 2 ? Label::spoof : Label::live;
        s[i].score = coarse ? std::floor(u(rng) * 8) / 8 : u(rng) + (s[i].label == Label::spoof ? 0.3 : 0);
    }
    std::shuffle(s.begin(), s.end(), rng);
    return s;
}

flowprep::FlowMapImage uniform_map(int h, int w, std::uint8_t v) { return {flowprep::RgbImage(h, w, v), 1.0}; }

} // namespace

TEST_SUITE("scoring") {

TEST_CASE("mmd closed forms") {
    std::vector<double> a{1.0}, b{4.0};
    CHECK(mmd(std::span<const double>(a), std::span<const double>(b), KernelSpec::linear()) == 3.0);
    std::vector<double> c{0.1, 0.7, 0.3};
    auto k = KernelSpec::rbf({0.5, 1, 2});
    CHECK(mmd(std::span<const double>(c), std::span<const double>(c), k) <= 1e-12);
    std::vector<double> empty;
    CHECK_THROWS_AS(mmd(std::span<const double>(empty), std::span<const double>(c), k), DataError);
    CHECK_THROWS_AS(mmd(std::span<const double>(c), std::span<const double>(c), KernelSpec{KernelFamily::rbf, {1}, {0.5}}),
                    ConfigError);
    CHECK_THROWS_AS((KernelSpec{KernelFamily::rbf, {-1}, {1}}.validate()), ConfigError);
}

TEST_CASE("mmd matches the double-loop oracle") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = draw(rng, 1 + rng() % 200, 0, 1 + trial % 3);
        const auto b = draw(rng, 1 + rng() % 200, 0.2, 1.5);
        const auto rbf = KernelSpec::rbf({0.1, 0.4, 1.6}, {0.2, 0.5, 0.3});
        CHECK(std::abs(mmd(std::span<const double>(a), std::span<const double>(b), rbf) - oracle::mmd(a, b, rbf)) <= 1e-10);
        const auto lin = KernelSpec::linear();
        CHECK(std::abs(mmd(std::span<const double>(a), std::span<const double>(b), lin) - oracle::mmd(a, b, lin)) <= 1e-10);
    }
}

TEST_CASE("mmd algebraic properties") {
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto a = draw(rng, 1 + rng() % 60, 0, 2);
        const auto b = draw(rng, 1 + rng() % 60, 0, 3);
        const auto k = KernelSpec::rbf({0.25 + (rng() % 4), 1.0});
        const std::span<const double> sa(a), sb(b);
        CHECK(mmd(sa, sa, k) <= 1e-12);
        CHECK(std::abs(mmd(sa, sb, k) - mmd(sb, sa, k)) <= 1e-12);
        CHECK(mmd(sa, sb, k) >= 0);

        double ma = 0, mb = 0;
        for (double x : a) ma += x;
        for (double x : b) mb += x;
        ma /= a.size();
        mb /= b.size();
        CHECK(std::abs(mmd(sa, sb, KernelSpec::linear()) - std::abs(ma - mb)) <= 1e-10);

        const double shift = std::uniform_real_distribution<double>(-5, 5)(rng);
        auto as = a, bs = b;
        for (auto& x : as) x += shift;
        for (auto& x : bs) x += shift;
        CHECK(std::abs(mmd(std::span<const double>(as), std::span<const double>(bs), k) - mmd(sa, sb, k)) <= 1e-10);
        CHECK(std::abs(mmd(std::span<const double>(as), std::span<const double>(bs), KernelSpec::linear())
                       - mmd(sa, sb, KernelSpec::linear())) <= 1e-10);
    }
}

TEST_CASE("median heuristic") {
    std::vector<double> x{0, 1, 3};  // distances 1, 2, 3
    CHECK(median_pairwise_distance(x, 0) == 2.0);
    std::vector<double> same(5, 0.4);
    CHECK(median_pairwise_distance(same, 0) == 1.0);
    auto k = median_heuristic_kernel(x, 0);
    CHECK(k.bandwidths == std::vector<double>{1, 2, 4, 8, 16});
    CHECK(k.weights.size() == 5);
    std::mt19937_64 rng(3);
    const auto big = draw(rng, 5000, 0, 1);
    CHECK(median_pairwise_distance(big, 9) == median_pairwise_distance(big, 9));
    CHECK(std::abs(median_pairwise_distance(big, 9) - (1 - std::sqrt(0.5))) < 0.02);
}

TEST_CASE("reference capping is seeded and order preserving") {
    std::vector<double> x(100);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
    auto a = cap_samples(x, 10, 4), b = cap_samples(x, 10, 4);
    CHECK(a == b);
    CHECK(a.size() == 10);
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(cap_samples(x, 200, 4) == x);
}

TEST_CASE("classify_video tie goes to live") {
    CalibrationResult cal;
    cal.threshold = 0.5;
    CHECK(classify_video(0.9, cal) == Label::spoof);
    CHECK(classify_video(0.5, cal) == Label::live);
    CHECK(classify_video(0.1, cal) == Label::live);
    CHECK_THROWS_AS(classify_video(std::numeric_limits<double>::infinity(), cal), NumericError);
    CHECK_THROWS_AS(classify_video(NAN, cal), NumericError);
}

TEST_CASE("calibration closed forms") {
    std::vector<LabeledScore> s{{0.1, Label::live}, {0.2, Label::live}, {0.8, Label::spoof}, {0.9, Label::spoof}};
    auto c = calibrate_threshold(s);
    CHECK(c.threshold == 0.5);
    CHECK(c.dev_hter == 0);

    std::vector<LabeledScore> same{{0.3, Label::live}, {0.3, Label::spoof}, {0.3, Label::live}, {0.3, Label::spoof}};
    CHECK(calibrate_threshold(same).dev_hter == 0.5);

    std::vector<LabeledScore> one{{0.3, Label::live}, {0.4, Label::live}};
    CHECK_THROWS_AS(calibrate_threshold(one), DataError);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<LabeledScore> with_inf{{0.1, Label::live}, {0.2, Label::live}, {inf, Label::spoof}, {0.15, Label::spoof}};
    auto ci = calibrate_threshold(with_inf);
    CHECK(ci.dev_hter == doctest::Approx(0.25));
    std::vector<LabeledScore> only_inf{{0.1, Label::live}, {0.2, Label::live}, {inf, Label::spoof}};
    auto co = calibrate_threshold(only_inf);
    CHECK(co.threshold == 0.2);
    CHECK(co.dev_hter == 0);
}

TEST_CASE("calibration reaches the exhaustive-sweep minimum") {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_labeled(rng, 2 + rng() % 199, trial % 3 == 0);
        const auto c = calibrate_threshold(s);
        CHECK(std::abs(c.dev_hter - oracle::min_hter(s)) <= 1e-12);
        CHECK(std::abs(c.dev_hter - (c.dev_far + c.dev_frr) / 2) <= 1e-12);
        // classifying the dev set at T reproduces the stored rates
        const auto m = compute_metrics(s, c.threshold);
        CHECK(m.far == c.dev_far);
        CHECK(m.frr == c.dev_frr);
        // no smaller candidate threshold does as well
        CHECK(oracle::hter_at(s, std::nextafter(c.threshold, -1e300)) >= c.dev_hter - 1e-12);
    }
}

TEST_CASE("metrics") {
    // 10 spoof of which 2 accepted, 10 live of which 1 rejected
    std::vector<LabeledScore> s;
    for (int i = 0; i < 10; ++i) s.push_back({i < 2 ? 0.1 : 0.9, Label::spoof});
    for (int i = 0; i < 10; ++i) s.push_back({i < 1 ? 0.9 : 0.1, Label::live});
    auto m = compute_metrics(s, 0.5);
    CHECK(m.far == doctest::Approx(0.2));
    CHECK(m.frr == doctest::Approx(0.1));
    CHECK(m.hter == doctest::Approx(0.15));
    CHECK(m.n_live == 10);

    std::vector<LabeledScore> sep{{0.1, Label::live}, {0.2, Label::live}, {0.8, Label::spoof}};
    CHECK(compute_metrics(sep, 0.5).auc == 1.0);
    CHECK(compute_metrics(sep, calibrate_threshold(sep).threshold).hter == 0.0);
}

TEST_CASE("auc matches the all-pairs oracle exactly") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = random_labeled(rng, 2 + rng() % 300, trial % 2 == 0);
        const double a = auc(s);
        CHECK(a == oracle::auc(s));
        // invariant under strictly increasing transforms
        auto t = s;
        for (auto& x : t) x.score = std::exp(3 * x.score) + 7;
        CHECK(auc(t) == a);
    }
}

TEST_CASE("calibration file round trip") {
    CalibrationResult c;
    c.threshold = 0.1 + 0.2;
    c.dev_far = 1.0 / 3;
    c.dev_frr = 0.1;
    c.dev_hter = (c.dev_far + c.dev_frr) / 2;
    c.kernel = KernelSpec::rbf({0.013, 0.026});
    const auto p = std::filesystem::temp_directory_path() / "flowgan_cal_test.json";
    c.save(p);
    CHECK(CalibrationResult::load(p) == c);
    c.threshold = -std::numeric_limits<double>::infinity();
    c.save(p);
    CHECK(CalibrationResult::load(p) == c);
    std::filesystem::remove(p);
    CHECK_THROWS_AS(CalibrationResult::load(p), ConfigError);
}

TEST_CASE("frame score with a perfect reconstructor is zero") {
    FunctionScorer identity([](const gan::FeatureMap<float>& x) { return x; });
    CHECK(frame_score(identity, uniform_map(64, 64, 90)) == 0.0);
    CHECK_THROWS_AS(frame_score(identity, uniform_map(20, 20, 0)), SizeError);
}

TEST_CASE("frame score equals the patch-loop oracle") {
    // reconstructor that halves every value
    FunctionScorer half([](const gan::FeatureMap<float>& x) {
        auto y = x;
        for (auto& v : y.data) v *= 0.5f;
        return y;
    });
    std::mt19937_64 rng(5);
    flowprep::FlowMapImage map{flowprep::RgbImage(70, 100), 1.0};
    for (auto& b : map.pixels.data) b = static_cast<std::uint8_t>(rng() % 256);
    double total = 0;
    int patches = 0;
    for (int r = 0; r + 32 <= 70; r += 32)
        for (int c = 0; c + 32 <= 100; c += 32) {
            double s = 0;
            for (int y = 0; y < 32; ++y)
                for (int x = 0; x < 32; ++x)
                    for (int ch = 0; ch < 3; ++ch) {
                        const double v = map.pixels.at(r + y, c + x)[ch] / 127.5f - 1.0f;
                        s += std::abs(v - static_cast<float>(v * 0.5f));
                    }
            total += s / (32 * 32 * 3);
            ++patches;
        }
    CHECK(std::abs(frame_score(half, map) - total / patches) <= 1e-12);
}

TEST_CASE("video distribution keeps order and concatenates") {
    FunctionScorer zeroing([](const gan::FeatureMap<float>& x) {
        auto y = x;
        std::fill(y.data.begin(), y.data.end(), 0.f);
        return y;
    });
    flowprep::PrepSettings prep;
    std::vector<flowprep::FlowMapImage> a, b;
    for (int i = 0; i < 5; ++i) a.push_back(uniform_map(32, 32, static_cast<std::uint8_t>(i * 40)));
    for (int i = 0; i < 3; ++i) b.push_back(uniform_map(32, 32, static_cast<std::uint8_t>(250 - i * 30)));
    auto da = maps_distribution(zeroing, a, prep, "a");
    auto db = maps_distribution(zeroing, b, prep, "b");
    auto all = a;
    all.insert(all.end(), b.begin(), b.end());
    auto dab = maps_distribution(zeroing, all, prep, "ab");
    auto joined = da.samples;
    joined.insert(joined.end(), db.samples.begin(), db.samples.end());
    CHECK(dab.samples == joined);
    CHECK(da.samples.size() == 5);
    for (double s : dab.samples) CHECK(s >= 0);

    flowprep::FrameSequence single{{flowprep::RgbImage(32, 32)}, 30, "one"};
    CHECK_THROWS_AS(video_distribution(zeroing, single, prep), InsufficientFramesError);
}

TEST_CASE("motion judgment") {
    std::vector<flowprep::FlowMapImage> still(6, uniform_map(16, 16, 255));
    auto r = motion_judgment(still, 10, 0.0, 1);
    CHECK_FALSE(r.has_motion);
    CHECK(r.mean_difference == 0);

    std::vector<flowprep::FlowMapImage> flicker;
    for (int i = 0; i < 6; ++i) flicker.push_back(uniform_map(16, 16, i % 2 ? 255 : 0));
    auto f = motion_judgment(flicker, 10, 254.9, 1);
    CHECK(f.has_motion);
    CHECK(f.mean_difference == 255);
    CHECK_FALSE(motion_judgment(flicker, 10, 255, 1).has_motion);

    std::mt19937_64 rng(8);
    std::vector<flowprep::FlowMapImage> noisy;
    for (int i = 0; i < 8; ++i) {
        auto m = uniform_map(16, 16, 0);
        for (auto& b : m.pixels.data) b = static_cast<std::uint8_t>(rng() % 6);
        noisy.push_back(m);
    }
    CHECK(motion_judgment(noisy, 10, 2.0, 42).mean_difference == motion_judgment(noisy, 10, 2.0, 42).mean_difference);

    CHECK_THROWS_AS(motion_judgment({uniform_map(8, 8, 0)}, 10, 2.0, 0), DataError);
    CHECK_THROWS_AS(motion_judgment({uniform_map(8, 8, 0), uniform_map(9, 8, 0)}, 10, 2.0, 0), ShapeError);
}

TEST_CASE("container frame scores match the map scores") {
    FunctionScorer half([](const gan::FeatureMap<float>& x) {
        auto y = x;
        for (auto& v : y.data) v *= 0.5f;
        return y;
    });
    std::mt19937_64 rng(21);
    flowprep::PrepSettings prep;
    std::vector<flowprep::FlowMapImage> maps;
    for (int i = 0; i < 4; ++i) {
        flowprep::FlowMapImage m{flowprep::RgbImage(64, 96), 1.0};
        for (auto& b : m.pixels.data) b = static_cast<std::uint8_t>(rng() % 256);
        maps.push_back(m);
    }
    const auto from_maps = maps_distribution(half, maps, prep, "v");
    const auto from_patches = patches_distribution(half, flowprep::patches_of(maps, prep), "v");
    REQUIRE(from_patches.samples.size() == from_maps.samples.size());
    for (std::size_t i = 0; i < from_maps.samples.size(); ++i)
        CHECK(std::abs(from_patches.samples[i] - from_maps.samples[i]) <= 1e-12);
    CHECK_THROWS_AS(patches_distribution(half, flowprep::PatchBatch{}, "empty"), InsufficientFramesError);
}

TEST_CASE("frame scores file round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "flowgan_frame_scores";
    std::filesystem::create_directories(dir);
    std::vector<ScoreDistribution> v(2);
    v[0].video_id = "a";
    v[0].samples = {0.1, 1.0 / 3.0, 2e-17};
    v[1].video_id = "b";
    v[1].samples = {7.25};
    save_frame_scores(v, dir / "f.csv");
    const auto back = load_frame_scores(dir / "f.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].video_id == "a");
    CHECK(back[0].samples == v[0].samples);
    CHECK(back[1].samples == v[1].samples);
    CHECK(io::read_file(dir / "f.csv").substr(0, 24) == "video_id,frame_idx,score");

    io::write_file_atomic(dir / "bad.csv", "video,frame,score\n");
    CHECK_THROWS_AS(load_frame_scores(dir / "bad.csv"), FormatError);
}

TEST_CASE("reference pooling caps with a seed") {
    std::vector<ScoreDistribution> v(3);
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 10; ++k) v[i].samples.push_back(i * 10 + k);
    CHECK(pool_reference(v, 100, 1).samples.size() == 30);
    const auto a = pool_reference(v, 12, 4), b = pool_reference(v, 12, 4);
    CHECK(a.samples.size() == 12);
    CHECK(a.samples == b.samples);
    CHECK(std::is_sorted(a.samples.begin(), a.samples.end()));
    CHECK(a.source == Source::reference);
}

TEST_CASE("videos without motion are spoof at any threshold") {
    std::vector<flowprep::FlowMapImage> still(5, uniform_map(32, 32, 255));
    ScoreDistribution frames;
    frames.video_id = "still";
    frames.samples = {0.2, 0.2, 0.2, 0.2, 0.2};
    ScoreDistribution ref;
    ref.source = Source::reference;
    ref.samples = {0.2, 0.2};
    const auto k = KernelSpec::linear();
    MotionSettings on;
    const auto s = score_video(frames, still, ref, k, on, 3);
    CHECK(s.motion_checked);
    CHECK_FALSE(s.motion.has_motion);
    CHECK(s.mmd_score == 0.0);
    CHECK(std::isinf(s.decision_score()));
    CalibrationResult cal;
    cal.threshold = 1e300;
    CHECK(s.decide(cal) == Label::spoof);

    MotionSettings off;
    off.enabled = false;
    const auto t = score_video(frames, still, ref, k, off, 3);
    CHECK_FALSE(t.motion_checked);
    CHECK(t.decision_score() == 0.0);
    CHECK(t.decide(cal) == Label::live);
}

}
