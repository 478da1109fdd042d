#include "flowgan/bench/end_to_end.hpp"

#include "flowgan/error.hpp"
#include "flowgan/rng.hpp"

namespace flowgan::bench {

namespace {

struct Prepared {
    SyntheticVideo video;
    std::vector<flowprep::FlowMapImage> maps;
};

std::vector<Prepared> prepare(const EndToEndConfig& cfg, MotionModel model, int count, std::uint64_t seed) {
    std::vector<Prepared> out;
    for (auto& v : synthetic_set(cfg.video, model, count, seed)) {
        auto maps = flowprep::flow_maps(v.video, cfg.prep);
        out.push_back({std::move(v), std::move(maps)});
    }
    return out;
}

double mean(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace

EndToEndConfig::EndToEndConfig() {
    arch.encoder_filters = {16, 32, 64};
    arch.discriminator_filters = {16, 32, 64};
    arch.latent_dim = 16;
    train.epochs = 20;
    train.learning_rate = 2e-3;
    train.batch_size = 32;
}

void EndToEndConfig::validate() const {
    if (n_train_live < 1 || n_dev_per_model < 1 || n_test_per_model < 1)
        throw ConfigError("end-to-end set sizes must be positive");
    video.validate(prep.window);
    prep.validate();
    arch.validate();
    train.validate();
    motion.validate();
    if (reference_cap == 0) throw ConfigError("reference cap must be positive");
}

EndToEndReport run_end_to_end(const EndToEndConfig& cfg) {
    cfg.validate();
    const std::uint64_t base = derive_seed(cfg.seed, seed_stream::synthetic_video);
    const MotionModel models[] = {MotionModel::live, MotionModel::spoof_hand, MotionModel::spoof_fixed};

    const auto train_set = prepare(cfg, MotionModel::live, cfg.n_train_live, derive_seed(base, 0));
    flowprep::PatchBatch patches;
    patches.window = cfg.prep.window;
    for (const auto& p : train_set) patches.append(flowprep::patches_of(p.maps, cfg.prep));

    auto train_cfg = cfg.train;
    train_cfg.seed = cfg.seed;
    auto trained = gan::train(patches, cfg.arch, train_cfg);
    scoring::PixelScorer scorer(trained.models.generator);

    std::vector<scoring::ScoreDistribution> train_frames;
    for (const auto& p : train_set)
        train_frames.push_back(scoring::maps_distribution(scorer, p.maps, cfg.prep, p.video.video.source_id));
    const auto reference = scoring::pool_reference(train_frames, cfg.reference_cap,
                                                   derive_seed(cfg.seed, seed_stream::reference_subsample));
    const auto kernel =
        scoring::median_heuristic_kernel(reference.samples, derive_seed(cfg.seed, seed_stream::bandwidth_subsample));
    const std::uint64_t motion_seed = derive_seed(cfg.seed, seed_stream::motion_pairs);

    auto evaluate = [&](const Prepared& p) {
        EndToEndVideo v;
        v.video_id = p.video.video.source_id;
        v.model = p.video.model;
        v.truth = p.video.label;
        const auto frames = scoring::maps_distribution(scorer, p.maps, cfg.prep, v.video_id);
        v.mean_frame_score = mean(frames.samples);
        v.score = scoring::score_video(frames, p.maps, reference, kernel, cfg.motion, motion_seed);
        return v;
    };

    EndToEndReport report;
    report.history = std::move(trained.history);
    std::vector<scoring::LabeledScore> dev;
    for (std::size_t m = 0; m < 3; ++m)
        for (const auto& p : prepare(cfg, models[m], cfg.n_dev_per_model, derive_seed(base, 1 + m))) {
            const auto v = evaluate(p);
            dev.push_back({v.score.decision_score(), v.truth});
        }
    report.calibration = scoring::calibrate_threshold(dev);
    report.calibration.kernel = kernel;

    std::vector<scoring::LabeledScore> test;
    std::vector<double> frame_means[3];
    for (std::size_t m = 0; m < 3; ++m)
        for (const auto& p : prepare(cfg, models[m], cfg.n_test_per_model, derive_seed(base, 10 + m))) {
            auto v = evaluate(p);
            v.decision = v.score.decide(report.calibration);
            test.push_back({v.score.decision_score(), v.truth});
            frame_means[m].push_back(v.mean_frame_score);
            report.test_videos.push_back(std::move(v));
        }
    report.test = scoring::compute_metrics(test, report.calibration.threshold);
    report.mean_frame_live = mean(frame_means[0]);
    report.mean_frame_hand = mean(frame_means[1]);
    report.mean_frame_fixed = mean(frame_means[2]);
    return report;
}

} // namespace flowgan::bench
