#pragma once

#include "flowgan/flowprep/patches.hpp"
#include "flowgan/gan/train.hpp"
#include "flowgan/scoring/mmd.hpp"
#include "flowgan/scoring/video.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace flowgan::cli {

struct TrainSection {
    gan::ArchitectureConfig architecture;
    gan::TrainingConfig training;
};

struct ScoreSection {
    std::optional<scoring::KernelSpec> kernel;  // unset: median heuristic on the reference
    std::optional<std::filesystem::path> reference;  // frame-scores CSV; unset: <out>/train/reference.csv
    scoring::MotionSettings motion;
    scoring::ScoreMode mode = scoring::ScoreMode::pixel;
    std::size_t reference_cap = 10000;
};

struct BenchSection {
    std::string dataset = "mnist";
    std::vector<int> classes;  // empty = all
    gan::ArchitectureConfig architecture;
    gan::TrainingConfig training;
    std::size_t train_limit = 0;
    bool plots = false;

    BenchSection();
};

// One serializable description of a run. Loading overlays a JSON file on the
// defaults; command-line flags are applied on top by the caller.
struct RunConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "out";
    int workers = 1;
    flowprep::PrepSettings preprocess;
    TrainSection train;
    ScoreSection score;
    BenchSection bench;

    // Throws ConfigError naming the offending field; numeric fields are checked
    // against the preconditions of the modules that consume them.
    void validate() const;

    nlohmann::json to_json() const;
    // Keys absent from j keep their value from base; unknown keys are rejected.
    static RunConfig from_json(const nlohmann::json& j, const RunConfig& base);
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path, const RunConfig& base);
    static RunConfig load(const std::filesystem::path& path);
};

// "pixel" / "latent".
scoring::ScoreMode parse_score_mode(const std::string& s);
std::string score_mode_name(scoring::ScoreMode m);

// "all" or a comma-separated list of class ids.
std::vector<int> parse_classes(const std::string& s);

} // namespace flowgan::cli
