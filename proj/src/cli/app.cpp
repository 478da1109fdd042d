#include "flowgan/cli/app.hpp"

#include "flowgan/cli/commands.hpp"
#include "flowgan/error.hpp"

#include <CLI11.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace flowgan::cli {

namespace fs = std::filesystem;

namespace {

// Flag values; unset optionals leave the config file (or default) in place.
struct Overrides {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> workers;

    std::optional<int> fps, window, stride;
    std::optional<std::string> estimator, max_magnitude;

    std::optional<int> epochs, batch_size, latent_dim, checkpoint_every;
    std::optional<double> lr, w_i, w_a;
    std::optional<std::vector<int>> filters;

    std::optional<std::string> kernel, reference, mode;
    std::optional<double> epsilon;
    std::optional<int> pairs;
    bool no_motion = false;

    std::optional<std::string> dataset, classes;
    std::optional<std::size_t> train_limit;
    bool plots = false;
};

template <typename T>
void set_if(const std::optional<T>& v, T& dst) {
    if (v) dst = *v;
}

void apply_training(const Overrides& o, gan::TrainingConfig& t, gan::ArchitectureConfig& a) {
    set_if(o.epochs, t.epochs);
    set_if(o.batch_size, t.batch_size);
    set_if(o.checkpoint_every, t.checkpoint_every);
    set_if(o.lr, t.learning_rate);
    set_if(o.w_i, t.loss_weights.w_i);
    set_if(o.w_a, t.loss_weights.w_a);
    set_if(o.latent_dim, a.latent_dim);
    if (o.filters) a.encoder_filters = a.discriminator_filters = *o.filters;
}

RunConfig resolve(const Overrides& o, const std::string& command) {
    RunConfig c = o.config ? RunConfig::load(*o.config) : RunConfig{};
    set_if(o.seed, c.seed);
    if (o.out) c.out_dir = *o.out;
    set_if(o.workers, c.workers);

    set_if(o.fps, c.preprocess.fps);
    set_if(o.window, c.preprocess.window);
    set_if(o.stride, c.preprocess.stride);
    set_if(o.estimator, c.preprocess.estimator);
    if (o.max_magnitude) {
        if (*o.max_magnitude == "auto") c.preprocess.magnitude = flowprep::MagnitudeMode::automatic();
        else {
            try {
                c.preprocess.magnitude = flowprep::MagnitudeMode::fixed(std::stod(*o.max_magnitude));
            } catch (const std::exception&) {
                throw ConfigError("--max-magnitude expects a number or 'auto'");
            }
        }
    }

    if (command == "bench") apply_training(o, c.bench.training, c.bench.architecture);
    else apply_training(o, c.train.training, c.train.architecture);

    if (o.kernel) {
        if (*o.kernel == "auto") c.score.kernel.reset();
        else if (*o.kernel == "linear") c.score.kernel = scoring::KernelSpec::linear();
        else throw ConfigError("--kernel expects auto or linear (use the config file for explicit mixtures)");
    }
    if (o.reference) c.score.reference = fs::path(*o.reference);
    if (o.mode) c.score.mode = parse_score_mode(*o.mode);
    set_if(o.epsilon, c.score.motion.epsilon);
    set_if(o.pairs, c.score.motion.n_pairs);
    if (o.no_motion) c.score.motion.enabled = false;

    set_if(o.dataset, c.bench.dataset);
    if (o.classes) c.bench.classes = parse_classes(*o.classes);
    set_if(o.train_limit, c.bench.train_limit);
    if (o.plots) c.bench.plots = true;
    return c;
}

void add_prep_flags(CLI::App* app, Overrides& o) {
    app->add_option("--fps", o.fps, "Target frame rate");
    app->add_option("--estimator", o.estimator, "Flow estimator (farneback, opencv-farneback, dis)");
    app->add_option("--window", o.window, "Patch side in pixels");
    app->add_option("--stride", o.stride, "Patch stride in pixels");
    app->add_option("--max-magnitude", o.max_magnitude, "Flow magnitude at full saturation, or 'auto'");
}

void add_train_flags(CLI::App* app, Overrides& o) {
    app->add_option("--epochs", o.epochs, "Training epochs");
    app->add_option("--lr", o.lr, "Learning rate");
    app->add_option("--batch-size", o.batch_size, "Minibatch size");
    app->add_option("--w-i", o.w_i, "Reconstruction loss weight");
    app->add_option("--w-a", o.w_a, "Adversarial loss weight (0 trains a plain autoencoder)");
    app->add_option("--latent-dim", o.latent_dim, "Latent code size");
    app->add_option("--filters", o.filters, "Filters per encoder/discriminator stage")->delimiter(',');
}

void add_score_flags(CLI::App* app, Overrides& o) {
    app->add_option("--kernel", o.kernel, "MMD kernel: auto (median-heuristic rbf mixture) or linear");
    app->add_option("--reference", o.reference, "Reference frame-scores CSV (default <out>/train/reference.csv)");
    app->add_option("--mode", o.mode, "Frame score: pixel or latent");
    app->add_option("--epsilon", o.epsilon, "Motion judgment threshold (8-bit units)");
    app->add_option("--pairs", o.pairs, "Motion judgment pair count");
    app->add_flag("--no-motion", o.no_motion, "Disable motion judgment");
}

std::vector<VideoEntry> entries(const std::vector<std::string>& paths, const std::optional<std::string>& manifest) {
    std::vector<VideoEntry> out;
    if (manifest) out = read_manifest(*manifest);
    for (const auto& p : paths) out.push_back({p, std::nullopt});
    return out;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optical-flow GAN face anti-spoofing pipeline and one-class benchmark"};
    app.require_subcommand(1);
    Overrides o;
    app.add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "Global seed");
    app.add_option("--out", o.out, "Output directory");
    app.add_option("--workers", o.workers, "Worker threads for per-video and per-class work");
    app.set_version_flag("--version", "flowgan 1.0");

    std::vector<std::string> inputs;
    std::optional<std::string> checkpoint, calibration, manifest;

    auto* pre = app.add_subcommand("preprocess", "Videos -> flow maps and patch containers");
    add_prep_flags(pre, o);
    pre->add_option("videos", inputs, "Video files")->required();

    auto* train = app.add_subcommand("train", "Train on live-class patch containers");
    add_prep_flags(train, o);
    add_train_flags(train, o);
    train->add_option("--checkpoint-every", o.checkpoint_every, "Checkpoint cadence in epochs");
    add_score_flags(train, o);
    train->add_option("containers", inputs, "Patch containers (patches.fga)")->required();

    auto* cal = app.add_subcommand("calibrate", "Pick the decision threshold on labeled dev videos");
    add_prep_flags(cal, o);
    add_score_flags(cal, o);
    cal->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
    cal->add_option("--videos", manifest, "Manifest CSV: path,label")->required();

    auto* score = app.add_subcommand("score", "Score videos and report live/spoof decisions");
    add_prep_flags(score, o);
    add_score_flags(score, o);
    score->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
    score->add_option("--calibration", calibration, "Calibration file")->required();
    score->add_option("--videos", manifest, "Manifest CSV: path[,label]");
    score->add_option("paths", inputs, "Video files (unlabeled)");

    auto* bench = app.add_subcommand("bench", "One-class benchmark on MNIST or CIFAR-10 (cache: $FLOWGAN_DATA_DIR)");
    add_train_flags(bench, o);
    bench->add_option("--dataset", o.dataset, "mnist or cifar10");
    bench->add_option("--classes", o.classes, "'all' or comma-separated class ids");
    bench->add_option("--train-limit", o.train_limit, "Seeded cap on normal training images per class (0 = all)");
    bench->add_option("--mode", o.mode, "Image score: pixel or latent");
    bench->add_flag("--plots", o.plots, "Write score histograms and loss curves");

    std::string set_name = "videos";
    std::vector<std::string> models{"live"};
    int count = 5, n_frames = 16, size = 64;
    auto* synth = app.add_subcommand("synth", "Write synthetic live/spoof videos and a manifest");
    synth->add_option("--name", set_name, "Set name (also salts the seed)")->capture_default_str();
    synth->add_option("--models", models, "live, spoof-hand, spoof-fixed")->delimiter(',')->capture_default_str();
    synth->add_option("--count", count, "Videos per model")->capture_default_str();
    synth->add_option("--frames", n_frames, "Frames per video")->capture_default_str();
    synth->add_option("--size", size, "Frame side in pixels")->capture_default_str();
    synth->add_option("--fps", o.fps, "Frame rate written to the files");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kConfigError;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    RunConfig cfg;
    try {
        cfg = resolve(o, command);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for_current_exception();
    }

    if (command == "preprocess") {
        std::vector<fs::path> videos(inputs.begin(), inputs.end());
        return cmd_preprocess(cfg, videos, out, err);
    }
    if (command == "train") {
        std::vector<fs::path> containers(inputs.begin(), inputs.end());
        return cmd_train(cfg, containers, out, err);
    }
    try {
        if (command == "calibrate") return cmd_calibrate(cfg, *checkpoint, entries({}, manifest), out, err);
        if (command == "score")
            return cmd_score(cfg, *checkpoint, *calibration, entries(inputs, manifest), out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for_current_exception();
    }
    if (command == "synth") return cmd_synth(cfg, set_name, models, count, n_frames, size, out, err);
    return cmd_bench(cfg, out, err);
}

} // namespace flowgan::cli
