#pragma once

#include "flowgan/bench/datasets.hpp"
#include "flowgan/error.hpp"
#include "flowgan/gan/train.hpp"
#include "flowgan/scoring/metrics.hpp"
#include "flowgan/scoring/video.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace flowgan::bench {

// train: normal-class training images only, labels stripped. test: the whole
// official test split, normal -> live, every other class -> spoof.
struct OneClassSplit {
    int normal_class = 0;
    flowprep::PatchBatch train;
    flowprep::PatchBatch test;
    std::vector<scoring::Label> test_labels;
};

// train_limit > 0 keeps a seeded subsample of that many normal images (original
// order kept); 0 keeps all. Throws DataError when the dataset has fewer than two
// classes or normal_class does not occur in both splits.
OneClassSplit make_one_class_split(const Dataset& dataset, int normal_class, std::uint64_t seed,
                                   std::size_t train_limit = 0);

struct BenchSettings {
    std::vector<int> classes;  // empty = every class
    gan::ArchitectureConfig arch;
    gan::TrainingConfig train;
    scoring::ScoreMode score_mode = scoring::ScoreMode::pixel;
    std::size_t train_limit = 0;
    int workers = 1;

    void validate(int num_classes) const;
    // Stable text description of everything that influences the results.
    nlohmann::json describe(const std::string& dataset) const;
};

struct ClassResult {
    int normal_class = 0;
    double auc = 0.0;
    gan::TrainingHistory history;
    std::vector<double> normal_scores;
    std::vector<double> abnormal_scores;
    double seconds = 0.0;
};

struct BenchReport {
    std::string dataset;
    std::map<int, double> auc;  // per normal class
    double mean_auc = 0.0;
    double runtime_seconds = 0.0;
    std::string fingerprint;  // hex digest of BenchSettings::describe
    std::vector<ClassResult> classes;

    // class,auc rows in class order; byte-identical across runs with equal settings.
    std::string to_csv() const;
    // e.g. "mnist classes=10 mean_auc=0.9712 runtime=812.4s fingerprint=..."
    std::string summary_line() const;
    nlohmann::json to_json() const;

    // Writes auc.csv, summary.txt, report.json and, when plots is set, one score
    // histogram and one loss curve PNG per class.
    void save(const std::filesystem::path& dir, bool plots) const;
};

using BenchProgress = std::function<void(const ClassResult&)>;

// One generator per normal class trained on its normal images and scored on the
// full test split by reconstruction error; classes run on up to `workers` threads
// and are assembled in ascending class order. Divergence is rethrown as
// ClassDivergenceError.
BenchReport run_one_class_benchmark(const Dataset& dataset, const BenchSettings& settings,
                                    const BenchProgress& progress = {});

class ClassDivergenceError : public DivergenceError {
public:
    ClassDivergenceError(int normal_class, const DivergenceError& e)
        : DivergenceError(e.epoch(), e.batch(), "normal class " + std::to_string(normal_class)),
          normal_class_(normal_class) {}
    int normal_class() const noexcept { return normal_class_; }

private:
    int normal_class_;
};

// 64-bit FNV-1a of the text, as 16 hex digits.
std::string fingerprint(const std::string& text);

} // namespace flowgan::bench
