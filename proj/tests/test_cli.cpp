#include "flowgan/cli/app.hpp"
#include "flowgan/cli/commands.hpp"
#include "flowgan/cli/config.hpp"
#include "flowgan/error.hpp"
#include "flowgan/flowprep/patches.hpp"
#include "flowgan/io.hpp"
#include "flowgan/scoring/metrics.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

using namespace flowgan;
using namespace flowgan::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
    int rc;
    std::string out, err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int rc = run(args, out, err);
    return {rc, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / "flowgan_cli_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Small, fast model settings shared by the pipeline tests.
fs::path small_config(const fs::path& dir) {
    const auto path = dir / "small.json";
    io::write_file_atomic(path, R"({
  "train": {"architecture": {"encoder_filters": [8, 16, 16], "discriminator_filters": [8, 16, 16], "latent_dim": 8},
            "epochs": 4, "learning_rate": 0.002, "batch_size": 16}
})");
    return path;
}

// Synthetic videos written once per test binary run.
const fs::path& corpus() {
    static const fs::path root = [] {
        const auto r = scratch("corpus");
        const std::string out = r.string();
        REQUIRE(invoke({"--out", out, "synth", "--name", "train", "--models", "live", "--count", "3", "--frames", "8"}).rc == 0);
        REQUIRE(invoke({"--out", out, "synth", "--name", "dev", "--models", "live,spoof-hand,spoof-fixed", "--count",
                        "2", "--frames", "8"}).rc == 0);
        REQUIRE(invoke({"--out", out, "synth", "--name", "clip", "--models", "live", "--count", "1", "--frames", "30"})
                    .rc == 0);
        return r;
    }();
    return root;
}

std::vector<std::string> videos_of(const std::string& set) {
    std::vector<std::string> v;
    for (const auto& e : read_manifest(corpus() / "synth" / set / "manifest.csv")) v.push_back(e.path.string());
    return v;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// synth -> preprocess -> train -> calibrate -> score into out; returns the score result.
Result full_pipeline(const fs::path& out, const fs::path& config) {
    const std::vector<std::string> base{"--config", config.string(), "--out", out.string()};
    REQUIRE(invoke(concat(concat(base, {"preprocess"}), videos_of("train"))).rc == 0);
    std::vector<std::string> containers;
    for (const auto& v : videos_of("train"))
        containers.push_back((out / "preprocess" / fs::path(v).stem() / "patches.fga").string());
    REQUIRE(invoke(concat(concat(base, {"train"}), containers)).rc == 0);
    const auto ck = (out / "train" / "checkpoint.fgc").string();
    const auto manifest = (corpus() / "synth" / "dev" / "manifest.csv").string();
    REQUIRE(invoke(concat(base, {"calibrate", "--checkpoint", ck, "--videos", manifest})).rc == 0);
    return invoke(concat(base, {"score", "--checkpoint", ck, "--calibration",
                                (out / "calibrate" / "calibration.json").string(), "--videos", manifest}));
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("run config defaults validate and round-trip") {
    RunConfig c;
    c.validate();
    CHECK(c.train.training.epochs == 40);
    CHECK(c.preprocess.fps == 30);
    const auto j = c.to_json();
    CHECK(RunConfig::from_json(j).to_json() == j);

    c.seed = 17;
    c.score.kernel = scoring::KernelSpec::rbf({0.5, 2.0}, {0.25, 0.75});
    c.score.reference = "ref.csv";
    c.preprocess.magnitude = flowprep::MagnitudeMode::automatic();
    c.bench.classes = {3, 1};
    c.train.training.adversarial = gan::AdversarialForm::minimax;
    const auto k = c.to_json();
    CHECK(RunConfig::from_json(k).to_json() == k);
    CHECK(k["preprocess"]["max_magnitude"] == "auto");
    CHECK(k["bench"]["classes"] == nlohmann::json({3, 1}));
}

TEST_CASE("config file overlays defaults and flags overlay the file") {
    const auto dir = scratch("precedence");
    io::write_file_atomic(dir / "c.json", R"({"seed": 5, "train": {"epochs": 7, "learning_rate": 0.01}})");
    const auto c = RunConfig::load(dir / "c.json");
    CHECK(c.seed == 5);
    CHECK(c.train.training.epochs == 7);
    CHECK(c.train.training.learning_rate == 0.01);
    CHECK(c.train.training.batch_size == 64);  // default kept

    // the effective config is recorded with every run: flag beats file beats default
    const auto out = dir / "out";
    const auto r = invoke({"--config", (dir / "c.json").string(), "--out", out.string(), "--seed", "9", "train",
                           "--epochs", "2", "missing.fga"});
    CHECK(r.rc == kConfigError);
    const auto bench_out = dir / "bench_out";
    io::write_file_atomic(dir / "b.json", R"({"bench": {"dataset": "cifar10", "epochs": 3}})");
    setenv("FLOWGAN_DATA_DIR", dir.c_str(), 1);
    const auto b = invoke({"--config", (dir / "b.json").string(), "--out", bench_out.string(), "bench", "--dataset",
                           "mnist", "--epochs", "2"});
    unsetenv("FLOWGAN_DATA_DIR");
    CHECK(b.rc == kDataError);
    CHECK(b.err.find("mnist") != std::string::npos);
}

TEST_CASE("effective configuration is written with the outputs") {
    const auto dir = scratch("effective");
    io::write_file_atomic(dir / "c.json", R"({"seed": 5, "preprocess": {"stride": 16}})");
    const auto out = dir / "out";
    const auto r = invoke(concat({"--config", (dir / "c.json").string(), "--out", out.string(), "--seed", "11",
                                  "preprocess", "--fps", "15"},
                                 {videos_of("train")[0]}));
    REQUIRE(r.rc == 0);
    const auto j = nlohmann::json::parse(io::read_file(out / "preprocess" / "run_config.json"));
    CHECK(j["seed"] == 11);                    // flag over file
    CHECK(j["preprocess"]["stride"] == 16);    // file over default
    CHECK(j["preprocess"]["fps"] == 15);       // flag over default
    CHECK(j["preprocess"]["window"] == 32);    // default
}

TEST_CASE("config validation rejects bad values before any work") {
    const auto dir = scratch("validation");
    auto bad = [&](const std::string& text) {
        io::write_file_atomic(dir / "c.json", text);
        const auto out = dir / "out";
        const auto r = invoke({"--config", (dir / "c.json").string(), "--out", out.string(), "preprocess",
                               videos_of("train")[0]});
        CHECK(r.rc == kConfigError);
        CHECK_FALSE(fs::exists(out));
        return r.err;
    };
    CHECK(bad(R"({"train": {"epochs": 0}})").find("epochs") != std::string::npos);
    CHECK(bad(R"({"trian": {}})").find("unknown key 'trian'") != std::string::npos);
    CHECK(bad(R"({"preprocess": {"fps": "fast"}})").find("preprocess.fps") != std::string::npos);
    CHECK(bad(R"({"preprocess": {"window": 16}})").find("input_size") != std::string::npos);
    CHECK(bad(R"({"preprocess": {"estimator": "lucas"}})").find("farneback") != std::string::npos);
    CHECK(bad(R"({"score": {"motion": {"epsilon": -1}}})").find("epsilon") != std::string::npos);
    CHECK(bad(R"({"score": {"kernel": {"family": "rbf", "bandwidths": [1], "weights": [0.5]}}})") != "");
    CHECK(bad(R"({"bench": {"dataset": "svhn"}})").find("mnist, cifar10") != std::string::npos);
    CHECK(bad(R"({"workers": 0})").find("workers") != std::string::npos);
    CHECK(bad("{not json").find("parse") != std::string::npos);
    CHECK(invoke({"--out", (dir / "o").string(), "train", "--lr", "-1", "x.fga"}).rc == kConfigError);
    CHECK(invoke({"frobnicate"}).rc == kConfigError);
    CHECK(parse_classes("all").empty());
    CHECK(parse_classes("0,3") == std::vector<int>{0, 3});
    CHECK_THROWS_AS(parse_classes("0,x"), ConfigError);
}

TEST_CASE("preprocess writes one flow map per frame pair and isolates failures") {
    const auto out = scratch("preprocess");
    const auto clip = videos_of("clip")[0];
    const auto r = invoke({"--out", out.string(), "preprocess", clip, (out / "absent.mkv").string()});
    CHECK(r.rc == kPartialFailure);
    CHECK(r.err.find("absent.mkv") != std::string::npos);
    const auto dir = out / "preprocess" / fs::path(clip).stem();
    std::size_t pngs = 0;
    for (const auto& e : fs::directory_iterator(dir / "flow")) pngs += e.path().extension() == ".png";
    CHECK(pngs == 29);
    const auto patches = flowprep::load_patches(dir / "patches.fga");
    CHECK(patches.size() == 29 * 4);
    CHECK(count_lines(io::read_file(dir / "patches.csv")) == 29 * 4 + 1);

    const auto first = io::read_file(dir / "patches.fga");
    const auto png = io::read_file(dir / "flow" / "flow_0007.png");
    CHECK(invoke({"--out", out.string(), "preprocess", clip}).rc == 0);
    CHECK(io::read_file(dir / "patches.fga") == first);
    CHECK(io::read_file(dir / "flow" / "flow_0007.png") == png);

    CHECK(invoke({"--out", out.string(), "preprocess", clip, clip}).rc == kConfigError);
}

TEST_CASE("train with the default configuration") {
    const auto out = scratch("train_default");
    const auto video = videos_of("train")[0];
    REQUIRE(invoke({"--out", out.string(), "preprocess", video}).rc == 0);
    const auto container = out / "preprocess" / fs::path(video).stem() / "patches.fga";
    const auto r = invoke({"--out", out.string(), "train", container.string()});
    REQUIRE(r.rc == 0);
    const auto rows = io::read_csv(out / "train" / "history.csv");
    CHECK(rows.size() == 41);  // header + 40 epochs
    CHECK(fs::is_regular_file(out / "train" / "checkpoint.fgc"));
    const auto ref = io::read_csv(out / "train" / "reference.csv");
    CHECK(ref.size() == 8);  // header + 7 flow maps
    CHECK(ref[1][0] == fs::path(video).stem().string());
}

TEST_CASE("train failures map to exit codes") {
    const auto dir = scratch("train_errors");
    const auto cfg = small_config(dir);
    flowprep::PatchBatch b;
    b.window = 32;
    b.values.assign(4 * b.patch_elements(), 0.1f);
    b.values[5] = NAN;
    for (int i = 0; i < 4; ++i) b.origins.push_back({i, 0, 0});
    flowprep::save_patches(b, "nan", dir / "nan.fga", dir / "nan.csv");
    const auto r = invoke({"--config", cfg.string(), "--out", (dir / "o1").string(), "train", (dir / "nan.fga").string()});
    CHECK(r.rc == kNumericError);
    CHECK(r.err.find("epoch 1, batch") != std::string::npos);

    std::fill(b.values.begin(), b.values.end(), 0.1f);
    flowprep::save_patches(b, "ok", dir / "ok.fga", dir / "ok.csv");
    io::write_file_atomic(dir / "o2", "a file where the output directory should be");
    const auto io_fail = invoke({"--config", cfg.string(), "--out", (dir / "o2").string(), "train", (dir / "ok.fga").string()});
    CHECK(io_fail.rc == kIoError);

    io::write_file_atomic(dir / "junk.fga", "not an archive");
    CHECK(invoke({"--out", (dir / "o3").string(), "train", (dir / "junk.fga").string()}).rc == kFormatError);
    CHECK(invoke({"--out", (dir / "o4").string(), "train", (dir / "none.fga").string()}).rc == kConfigError);
}

TEST_CASE("calibrate and score on synthetic videos") {
    const auto dir = scratch("pipeline");
    const auto cfg = small_config(dir);
    const auto out = dir / "out";
    const auto r = full_pipeline(out, cfg);
    REQUIRE(r.rc == 0);

    const auto cal = scoring::CalibrationResult::load(out / "calibrate" / "calibration.json");
    cal.kernel.validate();
    cal.save(dir / "again.json");
    CHECK(io::read_file(dir / "again.json") == io::read_file(out / "calibrate" / "calibration.json"));
    CHECK(scoring::CalibrationResult::load(dir / "again.json") == cal);

    const auto rows = io::read_csv(out / "score" / "report.csv");
    REQUIRE(rows.size() == 7);
    CHECK(rows[0] == std::vector<std::string>{"video_id", "mmd_score", "has_motion", "label"});
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i][0].find("spoof-fixed") != std::string::npos) {
            CHECK(rows[i][2] == "0");
            CHECK(rows[i][3] == "spoof");
        }
    CHECK(fs::is_regular_file(out / "score" / "metrics.json"));
    CHECK(r.out.find("HTER=") != std::string::npos);

    // scoring again gives the same report
    const auto before = io::read_file(out / "score" / "report.csv");
    const auto manifest = (corpus() / "synth" / "dev" / "manifest.csv").string();
    const auto ck = (out / "train" / "checkpoint.fgc").string();
    const auto calp = (out / "calibrate" / "calibration.json").string();
    REQUIRE(invoke({"--config", cfg.string(), "--out", out.string(), "score", "--checkpoint", ck, "--calibration",
                    calp, "--videos", manifest}).rc == 0);
    CHECK(io::read_file(out / "score" / "report.csv") == before);

    // unlabeled input: no metrics
    const auto unl = dir / "unlabeled";
    REQUIRE(invoke({"--config", cfg.string(), "--out", unl.string(), "--workers", "2", "score", "--checkpoint", ck,
                    "--calibration", calp, "--reference", (out / "train" / "reference.csv").string(),
                    videos_of("dev")[0]}).rc == 0);
    CHECK_FALSE(fs::exists(unl / "score" / "metrics.json"));

    // a missing calibration file is a configuration error
    CHECK(invoke({"--config", cfg.string(), "--out", out.string(), "score", "--checkpoint", ck, "--calibration",
                  (dir / "nope.json").string(), "--videos", manifest}).rc == kConfigError);
    // a failing video is reported and the rest are still scored
    const auto part = invoke({"--config", cfg.string(), "--out", (dir / "partial").string(), "score", "--checkpoint",
                              ck, "--calibration", calp, "--reference", (out / "train" / "reference.csv").string(),
                              videos_of("dev")[0], (dir / "gone.mkv").string()});
    CHECK(part.rc == kPartialFailure);
    CHECK(count_lines(io::read_file(dir / "partial" / "score" / "report.csv")) == 2);
}

TEST_CASE("calibrate rejects a single-label dev set") {
    const auto dir = scratch("calibrate_single");
    io::CsvWriter m({"path", "label"});
    for (const auto& v : videos_of("train")) m.row({v, "live"});
    m.save(dir / "live_only.csv");
    io::write_file_atomic(dir / "ck.fgc", "unused");
    const auto r = invoke({"--out", (dir / "o").string(), "calibrate", "--checkpoint", (dir / "ck.fgc").string(),
                           "--videos", (dir / "live_only.csv").string()});
    CHECK(r.rc == kDataError);
    CHECK(r.err.find("both live and spoof") != std::string::npos);
}

TEST_CASE("calibration on shuffled labels sits near chance") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<scoring::LabeledScore> s(4000);
    for (auto& x : s) x = {u(rng), u(rng) < 0.5 ? scoring::Label::live : scoring::Label::spoof};
    const auto cal = scoring::calibrate_threshold(s);
    CHECK(cal.dev_hter > 0.45);
    CHECK(cal.dev_hter <= 0.5);
}

TEST_CASE("identical runs give byte-identical outputs") {
    const auto dir = scratch("determinism");
    const auto cfg = small_config(dir);
    REQUIRE(full_pipeline(dir / "a", cfg).rc == 0);
    REQUIRE(full_pipeline(dir / "b", cfg).rc == 0);
    for (const char* f : {"train/history.csv", "train/reference.csv", "train/checkpoint.fgc", "calibrate/dev_report.csv",
                          "calibrate/calibration.json", "score/report.csv", "score/frame_scores.csv"})
        CHECK_MESSAGE(io::read_file(dir / "a" / f) == io::read_file(dir / "b" / f), f);
}

TEST_CASE("bench errors name the problem") {
    const auto dir = scratch("bench");
    auto r = invoke({"--out", dir.string(), "bench", "--dataset", "imagenet"});
    CHECK(r.rc == kConfigError);
    CHECK(r.err.find("mnist, cifar10") != std::string::npos);

    setenv("FLOWGAN_DATA_DIR", (dir / "empty_cache").c_str(), 1);
    r = invoke({"--out", dir.string(), "bench", "--dataset", "mnist", "--classes", "0"});
    unsetenv("FLOWGAN_DATA_DIR");
    CHECK(r.rc == kDataError);
    CHECK(r.err.find((dir / "empty_cache").string()) != std::string::npos);
    CHECK(r.err.find("FLOWGAN_DATA_DIR") != std::string::npos);

    CHECK(invoke({"--out", dir.string(), "bench", "--classes", "12"}).rc == kConfigError);
}

TEST_CASE("manifest parsing") {
    const auto dir = scratch("manifest");
    io::write_file_atomic(dir / "m.csv", "path,label\na.mkv,live\n/abs/b.mkv,spoof\n");
    const auto m = read_manifest(dir / "m.csv");
    REQUIRE(m.size() == 2);
    CHECK(m[0].path == dir / "a.mkv");
    CHECK(m[1].path == fs::path("/abs/b.mkv"));
    CHECK(*m[1].label == scoring::Label::spoof);
    io::write_file_atomic(dir / "u.csv", "path\nc.mkv\n");
    CHECK_FALSE(read_manifest(dir / "u.csv")[0].label.has_value());
    io::write_file_atomic(dir / "bad.csv", "file,label\n");
    CHECK_THROWS_AS(read_manifest(dir / "bad.csv"), FormatError);
    io::write_file_atomic(dir / "lab.csv", "path,label\nx.mkv,fake\n");
    CHECK_THROWS_AS(read_manifest(dir / "lab.csv"), DataError);
}

}
