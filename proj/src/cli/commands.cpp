#include "flowgan/cli/commands.hpp"

#include "flowgan/bench/datasets.hpp"
#include "flowgan/bench/synthetic.hpp"
#include "flowgan/error.hpp"
#include "flowgan/flowprep/video.hpp"
#include "flowgan/gan/checkpoint.hpp"
#include "flowgan/io.hpp"
#include "flowgan/rng.hpp"
#include "flowgan/scoring/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <thread>

namespace flowgan::cli {

namespace fs = std::filesystem;

int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const ConfigError&) {
        return kConfigError;
    } catch (const ShapeError&) {
        return kConfigError;
    } catch (const DataError&) {
        return kDataError;
    } catch (const DecodeError&) {
        return kDataError;
    } catch (const IoError&) {
        return kIoError;
    } catch (const fs::filesystem_error&) {
        return kIoError;
    } catch (const NumericError&) {
        return kNumericError;
    } catch (const DomainError&) {
        return kNumericError;
    } catch (const FormatError&) {
        return kFormatError;
    } catch (...) {
        return kInternalError;
    }
}

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for_current_exception();
    }
}

fs::path make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string()
                                                    + (ec ? ": " + ec.message() : ""));
    return dir;
}

void write_run_config(const fs::path& dir, const RunConfig& cfg) {
    io::write_file_atomic(dir / "run_config.json", cfg.to_json().dump(2) + "\n");
}

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) throw ConfigError(what + " not found: " + p.string());
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions are kept per
// item, so one failure never stops the others.
std::vector<std::exception_ptr> parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int threads = std::min<int>(workers, static_cast<int>(n));
    if (threads <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    return errors;
}

std::string message_of(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& x) {
        return x.what();
    } catch (...) {
        return "unknown error";
    }
}

std::string video_id_of(const fs::path& p) { return p.stem().string(); }

template <typename Paths>
void require_unique_ids(const Paths& ids) {
    std::set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second) throw ConfigError("two inputs share the id '" + id + "'; ids come from file stems");
}

std::unique_ptr<scoring::PatchScorer> make_scorer(scoring::ScoreMode mode, gan::Generator<float>& g) {
    if (mode == scoring::ScoreMode::latent) return std::make_unique<scoring::LatentScorer>(g);
    return std::make_unique<scoring::PixelScorer>(g);
}

gan::Checkpoint load_model(const RunConfig& cfg, const fs::path& checkpoint) {
    require_file(checkpoint, "checkpoint");
    auto ck = gan::load_checkpoint(checkpoint);
    if (ck.arch.input_size != cfg.preprocess.window)
        throw ConfigError("checkpoint expects " + std::to_string(ck.arch.input_size) + "-pixel patches but "
                          "preprocess.window is " + std::to_string(cfg.preprocess.window));
    return ck;
}

fs::path reference_path(const RunConfig& cfg) {
    return cfg.score.reference ? *cfg.score.reference : cfg.out_dir / "train" / "reference.csv";
}

scoring::ScoreDistribution load_reference(const RunConfig& cfg) {
    const auto path = reference_path(cfg);
    require_file(path, "reference frame scores");
    return scoring::pool_reference(scoring::load_frame_scores(path), cfg.score.reference_cap,
                                   derive_seed(cfg.seed, seed_stream::reference_subsample));
}

struct ScoredVideo {
    std::string video_id;
    std::optional<scoring::Label> truth;
    scoring::ScoreDistribution frames;
    scoring::VideoScore score;
};

// Decodes and preprocesses every video (in parallel), then scores them in input
// order. Returns one entry per video; failures carry an error message instead.
struct VideoOutcome {
    std::optional<ScoredVideo> scored;
    std::string error;
};

std::vector<VideoOutcome> score_videos(const RunConfig& cfg, const std::vector<VideoEntry>& videos,
                                       scoring::PatchScorer& scorer, const scoring::ScoreDistribution& reference,
                                       const scoring::KernelSpec& kernel) {
    std::vector<std::vector<flowprep::FlowMapImage>> maps(videos.size());
    const auto errors = parallel_for(videos.size(), cfg.workers, [&](std::size_t i) {
        maps[i] = flowprep::flow_maps(flowprep::extract_frames(videos[i].path, cfg.preprocess.fps), cfg.preprocess);
    });
    const std::uint64_t motion_seed = derive_seed(cfg.seed, seed_stream::motion_pairs);
    std::vector<VideoOutcome> out(videos.size());
    for (std::size_t i = 0; i < videos.size(); ++i) {
        if (errors[i]) {
            out[i].error = message_of(errors[i]);
            continue;
        }
        try {
            ScoredVideo s;
            s.video_id = video_id_of(videos[i].path);
            s.truth = videos[i].label;
            s.frames = scoring::maps_distribution(scorer, maps[i], cfg.preprocess, s.video_id);
            s.score = scoring::score_video(s.frames, maps[i], reference, kernel, cfg.score.motion, motion_seed);
            out[i].scored = std::move(s);
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    }
    return out;
}

std::uint64_t name_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

} // namespace

std::vector<VideoEntry> read_manifest(const fs::path& manifest) {
    require_file(manifest, "manifest");
    const auto rows = io::read_csv(manifest);
    if (rows.empty() || rows[0].empty() || rows[0][0] != "path")
        throw FormatError(manifest.string() + ": expected a header starting with 'path'");
    const bool labeled = rows[0].size() > 1;
    if (labeled && rows[0][1] != "label") throw FormatError(manifest.string() + ": second column must be 'label'");
    std::vector<VideoEntry> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw FormatError(manifest.string() + ": row " + std::to_string(r) + " has the wrong number of fields");
        VideoEntry e;
        e.path = rows[r][0];
        if (e.path.is_relative()) e.path = manifest.parent_path() / e.path;
        if (labeled) e.label = scoring::parse_label(rows[r][1]);
        out.push_back(std::move(e));
    }
    return out;
}

int cmd_preprocess(const RunConfig& cfg, const std::vector<fs::path>& videos, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        if (videos.empty()) throw ConfigError("preprocess: no input videos");
        std::vector<std::string> ids;
        for (const auto& v : videos) ids.push_back(video_id_of(v));
        require_unique_ids(ids);
        const auto root = make_dir(cfg.out_dir / "preprocess");
        write_run_config(root, cfg);

        std::vector<std::string> summary(videos.size());
        const auto errors = parallel_for(videos.size(), cfg.workers, [&](std::size_t i) {
            const auto frames = flowprep::extract_frames(videos[i], cfg.preprocess.fps);
            const auto maps = flowprep::flow_maps(frames, cfg.preprocess);
            const auto patches = flowprep::patches_of(maps, cfg.preprocess);
            const auto dir = make_dir(root / ids[i]);
            fs::remove_all(dir / "flow");
            make_dir(dir / "flow");
            for (std::size_t k = 0; k < maps.size(); ++k) {
                char name[32];
                std::snprintf(name, sizeof name, "flow_%04zu.png", k);
                flowprep::write_png(maps[k].pixels, dir / "flow" / name);
            }
            flowprep::save_patches(patches, ids[i], dir / "patches.fga", dir / "patches.csv");
            summary[i] = ids[i] + ": " + std::to_string(frames.frames.size()) + " frames, "
                         + std::to_string(maps.size()) + " flow maps, " + std::to_string(patches.size()) + " patches";
        });
        int failed = 0;
        for (std::size_t i = 0; i < videos.size(); ++i) {
            if (errors[i]) {
                ++failed;
                err << "error: " << videos[i].string() << ": " << message_of(errors[i]) << "\n";
            } else {
                out << summary[i] << "\n";
            }
        }
        out << "preprocessed " << videos.size() - failed << " of " << videos.size() << " videos into "
            << root.string() << "\n";
        return failed ? kPartialFailure : kOk;
    });
}

int cmd_train(const RunConfig& cfg, const std::vector<fs::path>& containers, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        if (containers.empty()) throw ConfigError("train: no patch containers");
        for (const auto& c : containers) require_file(c, "patch container");

        std::vector<flowprep::PatchBatch> parts;
        std::vector<std::string> ids;
        flowprep::PatchBatch all;
        all.window = cfg.preprocess.window;
        for (const auto& c : containers) {
            parts.push_back(flowprep::load_patches(c));
            if (parts.back().window != cfg.preprocess.window)
                throw ConfigError(c.string() + " holds " + std::to_string(parts.back().window)
                                  + "-pixel patches, preprocess.window is " + std::to_string(cfg.preprocess.window));
            all.append(parts.back());
            // <out>/preprocess/<id>/patches.fga -> <id>
            ids.push_back(c.filename() == "patches.fga" && c.has_parent_path() ? c.parent_path().filename().string()
                                                                               : c.stem().string());
        }
        require_unique_ids(ids);

        const auto dir = make_dir(cfg.out_dir / "train");
        write_run_config(dir, cfg);
        auto tcfg = cfg.train.training;
        tcfg.seed = cfg.seed;
        tcfg.checkpoint_path = dir / "checkpoint.fgc";
        gan::TrainResult result = [&] {
            try {
                return gan::train(all, cfg.train.architecture, tcfg);
            } catch (const DivergenceError&) {
                err << "hint: lower train.learning_rate or check the input patches for non-finite values\n";
                throw;
            }
        }();
        result.history.save_csv(dir / "history.csv");

        auto scorer = make_scorer(cfg.score.mode, result.models.generator);
        std::vector<scoring::ScoreDistribution> reference;
        for (std::size_t i = 0; i < parts.size(); ++i)
            reference.push_back(scoring::patches_distribution(*scorer, parts[i], ids[i]));
        scoring::save_frame_scores(reference, dir / "reference.csv");

        const auto& last = result.history.epochs.back();
        out << "trained " << result.history.epochs.size() << " epochs on " << all.size() << " patches; final recon "
            << fmt(last.recon_loss) << ", g_adv " << fmt(last.g_adv_loss) << ", d " << fmt(last.d_loss) << "\n"
            << "wrote " << (dir / "checkpoint.fgc").string() << ", history.csv, reference.csv\n";
        return kOk;
    });
}

int cmd_calibrate(const RunConfig& cfg, const fs::path& checkpoint, const std::vector<VideoEntry>& dev,
                  std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        if (dev.empty()) throw ConfigError("calibrate: no dev videos");
        std::vector<std::string> ids;
        bool has_live = false, has_spoof = false;
        for (const auto& v : dev) {
            if (!v.label) throw ConfigError("calibrate: every dev video needs a label (" + v.path.string() + ")");
            (*v.label == scoring::Label::live ? has_live : has_spoof) = true;
            ids.push_back(video_id_of(v.path));
        }
        if (!has_live || !has_spoof) throw DataError("calibrate: the dev set must contain both live and spoof videos");
        require_unique_ids(ids);
        auto ck = load_model(cfg, checkpoint);
        const auto reference = load_reference(cfg);
        const auto kernel = cfg.score.kernel ? *cfg.score.kernel
                                             : scoring::median_heuristic_kernel(
                                                   reference.samples, derive_seed(cfg.seed, seed_stream::bandwidth_subsample));

        auto scorer = make_scorer(cfg.score.mode, ck.models.generator);
        const auto scored = score_videos(cfg, dev, *scorer, reference, kernel);
        int failed = 0;
        for (std::size_t i = 0; i < dev.size(); ++i)
            if (!scored[i].scored) {
                ++failed;
                err << "error: " << dev[i].path.string() << ": " << scored[i].error << "\n";
            }
        if (failed) {
            err << "calibration needs every dev video; nothing written\n";
            return kPartialFailure;
        }

        std::vector<scoring::LabeledScore> labeled;
        for (const auto& s : scored) labeled.push_back({s.scored->score.decision_score(), *s.scored->truth});
        auto cal = scoring::calibrate_threshold(labeled);
        cal.kernel = kernel;

        const auto dir = make_dir(cfg.out_dir / "calibrate");
        write_run_config(dir, cfg);
        cal.save(dir / "calibration.json");
        io::CsvWriter csv({"video_id", "mmd_score", "has_motion", "truth", "label"});
        for (const auto& s : scored)
            csv.row({s.scored->video_id, io::format_double(s.scored->score.mmd_score),
                     s.scored->score.motion.has_motion ? "1" : "0", scoring::label_name(*s.scored->truth),
                     scoring::label_name(s.scored->score.decide(cal))});
        csv.save(dir / "dev_report.csv");
        out << "dev FAR=" << fmt(cal.dev_far) << " FRR=" << fmt(cal.dev_frr) << " HTER=" << fmt(cal.dev_hter)
            << " threshold=" << io::format_double(cal.threshold) << "\n"
            << "wrote " << (dir / "calibration.json").string() << "\n";
        return kOk;
    });
}

int cmd_score(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& calibration,
              const std::vector<VideoEntry>& videos, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        if (videos.empty()) throw ConfigError("score: no videos");
        const auto cal = scoring::CalibrationResult::load(calibration);
        std::vector<std::string> ids;
        for (const auto& v : videos) ids.push_back(video_id_of(v.path));
        require_unique_ids(ids);
        auto ck = load_model(cfg, checkpoint);
        const auto reference = load_reference(cfg);

        auto scorer = make_scorer(cfg.score.mode, ck.models.generator);
        const auto scored = score_videos(cfg, videos, *scorer, reference, cal.kernel);

        const auto dir = make_dir(cfg.out_dir / "score");
        write_run_config(dir, cfg);
        io::CsvWriter report({"video_id", "mmd_score", "has_motion", "label"});
        std::vector<scoring::ScoreDistribution> frames;
        std::vector<scoring::LabeledScore> labeled;
        bool all_labeled = true;
        int failed = 0;
        for (std::size_t i = 0; i < videos.size(); ++i) {
            if (!scored[i].scored) {
                ++failed;
                err << "error: " << videos[i].path.string() << ": " << scored[i].error << "\n";
                continue;
            }
            const auto& s = *scored[i].scored;
            const auto label = s.score.decide(cal);
            report.row({s.video_id, io::format_double(s.score.mmd_score), s.score.motion.has_motion ? "1" : "0",
                        scoring::label_name(label)});
            frames.push_back(s.frames);
            if (s.truth) labeled.push_back({s.score.decision_score(), *s.truth});
            else all_labeled = false;
        }
        report.save(dir / "report.csv");
        scoring::save_frame_scores(frames, dir / "frame_scores.csv");
        out << report.str();

        const bool both = std::any_of(labeled.begin(), labeled.end(), [](auto& l) { return l.label == scoring::Label::live; })
                          && std::any_of(labeled.begin(), labeled.end(), [](auto& l) { return l.label == scoring::Label::spoof; });
        if (all_labeled && both) {
            const auto m = scoring::compute_metrics(labeled, cal.threshold);
            nlohmann::json j{{"far", m.far}, {"frr", m.frr}, {"hter", m.hter}, {"auc", m.auc},
                             {"n_live", m.n_live}, {"n_spoof", m.n_spoof}, {"threshold", cal.threshold}};
            if (!std::isfinite(cal.threshold)) j["threshold"] = cal.threshold > 0 ? "inf" : "-inf";
            io::write_file_atomic(dir / "metrics.json", j.dump(2) + "\n");
            out << "FAR=" << fmt(m.far) << " FRR=" << fmt(m.frr) << " HTER=" << fmt(m.hter) << " AUC=" << fmt(m.auc)
                << " (" << m.n_live << " live, " << m.n_spoof << " spoof)\n";
        }
        return failed ? kPartialFailure : kOk;
    });
}

int cmd_synth(const RunConfig& cfg, const std::string& set_name, const std::vector<std::string>& models, int count,
              int n_frames, int size, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        if (count < 1) throw ConfigError("synth: count must be positive");
        if (set_name.empty() || set_name.find_first_of("/\\") != std::string::npos)
            throw ConfigError("synth: set name must be a plain file name");
        bench::SyntheticVideoSpec spec;
        spec.n_frames = n_frames;
        spec.size = size;
        spec.fps = cfg.preprocess.fps;
        spec.validate(cfg.preprocess.window);
        std::vector<bench::MotionModel> parsed;
        for (const auto& m : models) parsed.push_back(bench::parse_motion_model(m));
        if (parsed.empty()) throw ConfigError("synth: no motion models given");

        const auto dir = make_dir(cfg.out_dir / "synth" / set_name);
        const std::uint64_t base = derive_seed(derive_seed(cfg.seed, seed_stream::synthetic_video),
                                               name_hash(set_name));
        io::CsvWriter manifest({"path", "label"});
        for (std::size_t m = 0; m < parsed.size(); ++m) {
            for (const auto& v : bench::synthetic_set(spec, parsed[m], count, derive_seed(base, m))) {
                const std::string file = set_name + "-" + v.video.source_id + ".mkv";
                flowprep::write_video(v.video, dir / file);
                manifest.row({file, scoring::label_name(v.label)});
            }
        }
        manifest.save(dir / "manifest.csv");
        out << "wrote " << count * parsed.size() << " videos and " << (dir / "manifest.csv").string() << "\n";
        return kOk;
    });
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        const auto ds = bench::load_dataset(cfg.bench.dataset);
        bench::BenchSettings s;
        s.classes = cfg.bench.classes;
        s.arch = cfg.bench.architecture;
        s.train = cfg.bench.training;
        s.train.seed = cfg.seed;
        s.score_mode = cfg.score.mode;
        s.train_limit = cfg.bench.train_limit;
        s.workers = cfg.workers;
        const auto report = bench::run_one_class_benchmark(ds, s, [&](const bench::ClassResult& r) {
            err << "class " << r.normal_class << ": auc " << fmt(r.auc) << " (" << fmt(r.seconds) << " s)\n";
        });
        const auto dir = make_dir(cfg.out_dir / "bench");
        write_run_config(dir, cfg);
        report.save(dir, cfg.bench.plots);
        out << report.to_csv() << report.summary_line() << "\n";
        return kOk;
    });
}

} // namespace flowgan::cli
