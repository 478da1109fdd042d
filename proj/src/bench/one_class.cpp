#include "flowgan/bench/one_class.hpp"

#include "flowgan/bench/plots.hpp"
#include "flowgan/error.hpp"
#include "flowgan/flowprep/color.hpp"
#include "flowgan/io.hpp"
#include "flowgan/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <iterator>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace flowgan::bench {

namespace {

void append_image(flowprep::PatchBatch& b, const LabeledImages& imgs, std::size_t i) {
    const float* src = imgs.image(i);
    b.values.insert(b.values.end(), src, src + imgs.image_elements());
    b.origins.push_back({static_cast<int>(i), 0, 0});
}

const char* score_mode_name(scoring::ScoreMode m) { return m == scoring::ScoreMode::pixel ? "pixel" : "latent"; }

std::vector<int> resolve_classes(const BenchSettings& s, int num_classes) {
    if (!s.classes.empty()) return s.classes;
    std::vector<int> all(static_cast<std::size_t>(num_classes));
    std::iota(all.begin(), all.end(), 0);
    return all;
}

ClassResult run_class(const Dataset& ds, const BenchSettings& s, int cls) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto split = make_one_class_split(ds, cls, s.train.seed, s.train_limit);
    auto cfg = s.train;
    cfg.checkpoint_path.reset();
    cfg.monitor = nullptr;
    ClassResult r;
    r.normal_class = cls;
    gan::TrainResult trained = [&] {
        try {
            return gan::train(split.train, s.arch, cfg);
        } catch (const DivergenceError& e) {
            throw ClassDivergenceError(cls, e);
        }
    }();
    r.history = std::move(trained.history);

    std::vector<double> scores;
    if (s.score_mode == scoring::ScoreMode::pixel) {
        scoring::PixelScorer scorer(trained.models.generator);
        scores = scorer.score_patches(split.test);
    } else {
        scoring::LatentScorer scorer(trained.models.generator);
        scores = scorer.score_patches(split.test);
    }
    std::vector<scoring::LabeledScore> labeled(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        labeled[i] = {scores[i], split.test_labels[i]};
        (split.test_labels[i] == scoring::Label::live ? r.normal_scores : r.abnormal_scores).push_back(scores[i]);
    }
    r.auc = scoring::auc(labeled);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace

OneClassSplit make_one_class_split(const Dataset& ds, int normal_class, std::uint64_t seed, std::size_t train_limit) {
    if (ds.num_classes < 2) throw DataError("dataset '" + ds.name + "' has fewer than two classes");
    if (ds.train.channels != 3 || ds.test.channels != 3 || ds.train.size != ds.test.size)
        throw ShapeError("dataset '" + ds.name + "' must hold 3-channel images of one size");
    std::vector<std::size_t> normal;
    for (std::size_t i = 0; i < ds.train.count(); ++i)
        if (ds.train.labels[i] == normal_class) normal.push_back(i);
    const bool in_test = std::count(ds.test.labels.begin(), ds.test.labels.end(), normal_class) > 0;
    if (normal.empty() || !in_test)
        throw DataError("class " + std::to_string(normal_class) + " does not occur in both splits of '" + ds.name
                        + "'");
    if (std::all_of(ds.test.labels.begin(), ds.test.labels.end(), [&](int l) { return l == normal_class; }))
        throw DataError("test split of '" + ds.name + "' holds no abnormal images");

    if (train_limit > 0 && normal.size() > train_limit) {
        std::vector<std::size_t> kept;
        std::mt19937_64 rng(derive_seed(derive_seed(seed, seed_stream::dataset_split), normal_class));
        std::sample(normal.begin(), normal.end(), std::back_inserter(kept), train_limit, rng);
        normal = std::move(kept);
    }

    OneClassSplit s;
    s.normal_class = normal_class;
    s.train.window = s.test.window = ds.train.size;
    s.train.values.reserve(normal.size() * ds.train.image_elements());
    for (std::size_t i : normal) append_image(s.train, ds.train, i);
    s.test.values.reserve(ds.test.pixels.size());
    for (std::size_t i = 0; i < ds.test.count(); ++i) {
        append_image(s.test, ds.test, i);
        s.test_labels.push_back(ds.test.labels[i] == normal_class ? scoring::Label::live : scoring::Label::spoof);
    }
    return s;
}

void BenchSettings::validate(int num_classes) const {
    arch.validate();
    train.validate();
    if (workers < 1) throw ConfigError("workers must be at least 1");
    for (int c : classes)
        if (c < 0 || c >= num_classes)
            throw ConfigError("class " + std::to_string(c) + " outside 0.." + std::to_string(num_classes - 1));
    auto sorted = classes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError("duplicate class id");
}

nlohmann::json BenchSettings::describe(const std::string& dataset) const {
    return {{"dataset", dataset},
            {"classes", classes},
            {"architecture", arch.to_json()},
            {"train",
             {{"learning_rate", train.learning_rate},
              {"epochs", train.epochs},
              {"batch_size", train.batch_size},
              {"seed", train.seed},
              {"optimizer", {{"name", train.optimizer.name}, {"beta1", train.optimizer.beta1},
                             {"beta2", train.optimizer.beta2}, {"eps", train.optimizer.eps}}},
              {"w_i", train.loss_weights.w_i},
              {"w_a", train.loss_weights.w_a},
              {"adversarial", train.adversarial == gan::AdversarialForm::non_saturating ? "non_saturating"
                                                                                         : "minimax"}}},
            {"score_mode", score_mode_name(score_mode)},
            {"train_limit", train_limit}};
}

std::string fingerprint(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

BenchReport run_one_class_benchmark(const Dataset& ds, const BenchSettings& settings, const BenchProgress& progress) {
    settings.validate(ds.num_classes);
    if (settings.arch.input_size != ds.train.size || settings.arch.input_channels != ds.train.channels)
        throw ConfigError("architecture expects " + std::to_string(settings.arch.input_size) + "x"
                          + std::to_string(settings.arch.input_size) + " inputs, dataset '" + ds.name + "' has "
                          + std::to_string(ds.train.size));
    const auto classes = resolve_classes(settings, ds.num_classes);
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<ClassResult> results(classes.size());
    std::vector<std::exception_ptr> errors(classes.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t k; (k = next++) < classes.size();) {
            try {
                results[k] = run_class(ds, settings, classes[k]);
                if (progress) {
                    std::lock_guard lock(progress_mutex);
                    progress(results[k]);
                }
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const int n_threads = std::min<int>(settings.workers, static_cast<int>(classes.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    BenchReport report;
    report.dataset = ds.name;
    std::vector<std::size_t> order(classes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return classes[a] < classes[b]; });
    double sum = 0;
    for (std::size_t k : order) {
        report.auc[classes[k]] = results[k].auc;
        sum += results[k].auc;
        report.classes.push_back(std::move(results[k]));
    }
    report.mean_auc = sum / static_cast<double>(classes.size());
    report.fingerprint = fingerprint(settings.describe(ds.name).dump());
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::string BenchReport::to_csv() const {
    io::CsvWriter csv({"class", "auc"});
    for (const auto& [c, a] : auc) csv.row({std::to_string(c), io::format_double(a)});
    if (auc.size() > 1) csv.row({"mean", io::format_double(mean_auc)});
    return csv.str();
}

std::string BenchReport::summary_line() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s classes=%zu mean_auc=%.4f runtime=%.1fs fingerprint=%s", dataset.c_str(),
                  auc.size(), mean_auc, runtime_seconds, fingerprint.c_str());
    return buf;
}

nlohmann::json BenchReport::to_json() const {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& c : classes) {
        nlohmann::json epochs = nlohmann::json::array();
        for (const auto& e : c.history.epochs)
            epochs.push_back({{"epoch", e.epoch}, {"recon_loss", e.recon_loss}, {"g_adv_loss", e.g_adv_loss},
                              {"d_loss", e.d_loss}});
        per_class.push_back({{"class", c.normal_class},
                             {"auc", c.auc},
                             {"seconds", c.seconds},
                             {"n_normal", c.normal_scores.size()},
                             {"n_abnormal", c.abnormal_scores.size()},
                             {"history", epochs}});
    }
    return {{"dataset", dataset},   {"mean_auc", mean_auc},       {"runtime_seconds", runtime_seconds},
            {"fingerprint", fingerprint}, {"classes", per_class}};
}

void BenchReport::save(const std::filesystem::path& dir, bool plots) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    io::write_file_atomic(dir / "auc.csv", to_csv());
    io::write_file_atomic(dir / "summary.txt", summary_line() + "\n");
    io::write_file_atomic(dir / "report.json", to_json().dump(2) + "\n");
    if (!plots) return;
    for (const auto& c : classes) {
        const std::string id = std::to_string(c.normal_class);
        flowprep::write_png(score_histogram(c.normal_scores, c.abnormal_scores, dataset + " class " + id),
                            dir / ("scores_class" + id + ".png"));
        flowprep::write_png(loss_curves(c.history, dataset + " class " + id), dir / ("loss_class" + id + ".png"));
    }
}

} // namespace flowgan::bench
