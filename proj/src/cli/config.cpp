#include "flowgan/cli/config.hpp"

#include "flowgan/bench/datasets.hpp"
#include "flowgan/error.hpp"
#include "flowgan/io.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace flowgan::cli {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            throw ConfigError(where + ": unknown key '" + k + "' (expected one of: " + list + ")");
        }
}

template <typename T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

json training_json(const gan::TrainingConfig& t) {
    return {{"learning_rate", t.learning_rate},
            {"epochs", t.epochs},
            {"batch_size", t.batch_size},
            {"w_i", t.loss_weights.w_i},
            {"w_a", t.loss_weights.w_a},
            {"adversarial", t.adversarial == gan::AdversarialForm::non_saturating ? "non_saturating" : "minimax"},
            {"optimizer",
             {{"name", t.optimizer.name}, {"beta1", t.optimizer.beta1}, {"beta2", t.optimizer.beta2},
              {"eps", t.optimizer.eps}}},
            {"checkpoint_every", t.checkpoint_every}};
}

const std::set<std::string> kTrainingKeys{"learning_rate", "epochs",    "batch_size",      "w_i",
                                          "w_a",           "adversarial", "optimizer", "checkpoint_every"};

void read_training(const json& j, gan::TrainingConfig& t, const std::string& where) {
    read(j, "learning_rate", t.learning_rate, where);
    read(j, "epochs", t.epochs, where);
    read(j, "batch_size", t.batch_size, where);
    read(j, "w_i", t.loss_weights.w_i, where);
    read(j, "w_a", t.loss_weights.w_a, where);
    read(j, "checkpoint_every", t.checkpoint_every, where);
    if (j.contains("adversarial")) {
        std::string form;
        read(j, "adversarial", form, where);
        if (form == "non_saturating") t.adversarial = gan::AdversarialForm::non_saturating;
        else if (form == "minimax") t.adversarial = gan::AdversarialForm::minimax;
        else throw ConfigError(where + ".adversarial: expected non_saturating or minimax, got '" + form + "'");
    }
    if (j.contains("optimizer")) {
        const auto& o = j.at("optimizer");
        const std::string w = where + ".optimizer";
        check_keys(o, {"name", "beta1", "beta2", "eps"}, w);
        read(o, "name", t.optimizer.name, w);
        read(o, "beta1", t.optimizer.beta1, w);
        read(o, "beta2", t.optimizer.beta2, w);
        read(o, "eps", t.optimizer.eps, w);
    }
}

void read_architecture(const json& j, gan::ArchitectureConfig& a, const std::string& where) {
    check_keys(j, {"input_size", "input_channels", "encoder_filters", "latent_dim", "discriminator_filters",
                   "leaky_slope"},
               where);
    read(j, "input_size", a.input_size, where);
    read(j, "input_channels", a.input_channels, where);
    read(j, "encoder_filters", a.encoder_filters, where);
    read(j, "latent_dim", a.latent_dim, where);
    read(j, "discriminator_filters", a.discriminator_filters, where);
    read(j, "leaky_slope", a.leaky_slope, where);
}

void validate_training(const gan::TrainingConfig& t, const std::string& where) {
    try {
        t.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

} // namespace

BenchSection::BenchSection() {
    architecture.encoder_filters = {16, 32, 64};
    architecture.discriminator_filters = {16, 32, 64};
    architecture.latent_dim = 8;
    training.epochs = 10;
}

scoring::ScoreMode parse_score_mode(const std::string& s) {
    if (s == "pixel") return scoring::ScoreMode::pixel;
    if (s == "latent") return scoring::ScoreMode::latent;
    throw ConfigError("score mode must be pixel or latent, got '" + s + "'");
}

std::string score_mode_name(scoring::ScoreMode m) { return m == scoring::ScoreMode::pixel ? "pixel" : "latent"; }

std::vector<int> parse_classes(const std::string& s) {
    if (s == "all") return {};
    std::vector<int> out;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw ConfigError("bad class id '" + tok + "' in '" + s + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty class list");
    return out;
}

void RunConfig::validate() const {
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
    try {
        preprocess.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("preprocess: ") + e.what());
    }
    try {
        train.architecture.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("train: ") + e.what());
    }
    validate_training(train.training, "train");
    if (train.architecture.input_size != preprocess.window)
        throw ConfigError("train.architecture.input_size (" + std::to_string(train.architecture.input_size)
                          + ") must equal preprocess.window (" + std::to_string(preprocess.window) + ")");
    if (train.architecture.input_channels != 3) throw ConfigError("train.architecture.input_channels must be 3");
    if (score.kernel) score.kernel->validate();
    try {
        score.motion.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("score: ") + e.what());
    }
    if (score.reference_cap == 0) throw ConfigError("score.reference_cap must be positive");
    const auto names = bench::supported_datasets();
    if (std::find(names.begin(), names.end(), bench.dataset) == names.end()) {
        std::string list;
        for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
        throw ConfigError("bench.dataset: unknown dataset '" + bench.dataset + "' (supported: " + list + ")");
    }
    try {
        bench.architecture.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("bench: ") + e.what());
    }
    validate_training(bench.training, "bench");
    if (bench.architecture.input_size != 32 || bench.architecture.input_channels != 3)
        throw ConfigError("bench.architecture must take 32x32 three-channel inputs");
    for (int c : bench.classes)
        if (c < 0 || c > 9) throw ConfigError("bench.classes: class id " + std::to_string(c) + " outside 0..9");
}

json RunConfig::to_json() const {
    json pre{{"fps", preprocess.fps},
             {"estimator", preprocess.estimator},
             {"window", preprocess.window},
             {"stride", preprocess.stride}};
    if (preprocess.magnitude.fixed_max) pre["max_magnitude"] = *preprocess.magnitude.fixed_max;
    else pre["max_magnitude"] = "auto";

    json tr = training_json(train.training);
    tr["architecture"] = train.architecture.to_json();

    json sc{{"kernel", score.kernel ? score.kernel->to_json() : json("auto")},
            {"reference", score.reference ? json(score.reference->string()) : json(nullptr)},
            {"motion", {{"enabled", score.motion.enabled}, {"n_pairs", score.motion.n_pairs},
                        {"epsilon", score.motion.epsilon}}},
            {"mode", score_mode_name(score.mode)},
            {"reference_cap", score.reference_cap}};

    json be = training_json(bench.training);
    be["dataset"] = bench.dataset;
    be["classes"] = bench.classes.empty() ? json("all") : json(bench.classes);
    be["architecture"] = bench.architecture.to_json();
    be["train_limit"] = bench.train_limit;
    be["plots"] = bench.plots;

    return {{"seed", seed}, {"out_dir", out_dir.string()}, {"workers", workers}, {"preprocess", pre},
            {"train", tr},  {"score", sc},                 {"bench", be}};
}

RunConfig RunConfig::from_json(const json& j, const RunConfig& base) {
    RunConfig c = base;
    check_keys(j, {"seed", "out_dir", "workers", "preprocess", "train", "score", "bench"}, "config");
    read(j, "seed", c.seed, "config");
    if (j.contains("out_dir")) {
        std::string s;
        read(j, "out_dir", s, "config");
        c.out_dir = s;
    }
    read(j, "workers", c.workers, "config");

    if (j.contains("preprocess")) {
        const auto& p = j.at("preprocess");
        check_keys(p, {"fps", "estimator", "window", "stride", "max_magnitude"}, "preprocess");
        read(p, "fps", c.preprocess.fps, "preprocess");
        read(p, "estimator", c.preprocess.estimator, "preprocess");
        read(p, "window", c.preprocess.window, "preprocess");
        read(p, "stride", c.preprocess.stride, "preprocess");
        if (p.contains("max_magnitude")) {
            const auto& m = p.at("max_magnitude");
            if (m.is_string() && m.get<std::string>() == "auto") c.preprocess.magnitude = flowprep::MagnitudeMode::automatic();
            else if (m.is_number()) c.preprocess.magnitude = flowprep::MagnitudeMode::fixed(m.get<double>());
            else throw ConfigError("preprocess.max_magnitude: expected a number or \"auto\"");
        }
    }

    if (j.contains("train")) {
        const auto& t = j.at("train");
        auto keys = kTrainingKeys;
        keys.insert("architecture");
        check_keys(t, keys, "train");
        read_training(t, c.train.training, "train");
        if (t.contains("architecture")) read_architecture(t.at("architecture"), c.train.architecture, "train.architecture");
    }

    if (j.contains("score")) {
        const auto& s = j.at("score");
        check_keys(s, {"kernel", "reference", "motion", "mode", "reference_cap"}, "score");
        if (s.contains("kernel")) {
            const auto& k = s.at("kernel");
            if (k.is_string() && k.get<std::string>() == "auto") c.score.kernel.reset();
            else if (k.is_string() && k.get<std::string>() == "linear") c.score.kernel = scoring::KernelSpec::linear();
            else if (k.is_object()) c.score.kernel = scoring::KernelSpec::from_json(k);
            else throw ConfigError("score.kernel: expected \"auto\", \"linear\" or a kernel object");
        }
        if (s.contains("reference")) {
            const auto& r = s.at("reference");
            if (r.is_null()) c.score.reference.reset();
            else if (r.is_string()) c.score.reference = std::filesystem::path(r.get<std::string>());
            else throw ConfigError("score.reference: expected a path or null");
        }
        if (s.contains("motion")) {
            const auto& m = s.at("motion");
            check_keys(m, {"enabled", "n_pairs", "epsilon"}, "score.motion");
            read(m, "enabled", c.score.motion.enabled, "score.motion");
            read(m, "n_pairs", c.score.motion.n_pairs, "score.motion");
            read(m, "epsilon", c.score.motion.epsilon, "score.motion");
        }
        if (s.contains("mode")) {
            std::string m;
            read(s, "mode", m, "score");
            c.score.mode = parse_score_mode(m);
        }
        read(s, "reference_cap", c.score.reference_cap, "score");
    }

    if (j.contains("bench")) {
        const auto& b = j.at("bench");
        auto keys = kTrainingKeys;
        keys.insert({"dataset", "classes", "architecture", "train_limit", "plots"});
        check_keys(b, keys, "bench");
        read_training(b, c.bench.training, "bench");
        read(b, "dataset", c.bench.dataset, "bench");
        if (b.contains("classes")) {
            const auto& cl = b.at("classes");
            if (cl.is_string()) c.bench.classes = parse_classes(cl.get<std::string>());
            else read(b, "classes", c.bench.classes, "bench");
        }
        if (b.contains("architecture")) read_architecture(b.at("architecture"), c.bench.architecture, "bench.architecture");
        read(b, "train_limit", c.bench.train_limit, "bench");
        read(b, "plots", c.bench.plots, "bench");
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path, const RunConfig& base) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return from_json(j, base);
}

RunConfig RunConfig::from_json(const json& j) { return from_json(j, RunConfig{}); }
RunConfig RunConfig::load(const std::filesystem::path& path) { return load(path, RunConfig{}); }

} // namespace flowgan::cli
