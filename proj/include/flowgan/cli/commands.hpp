#pragma once

#include "flowgan/bench/one_class.hpp"
#include "flowgan/cli/config.hpp"
#include "flowgan/scoring/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace flowgan::cli {

// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kPartialFailure = 1,  // some work items failed, the rest were written
    kConfigError = 2,
    kDataError = 3,
    kIoError = 4,
    kNumericError = 5,
    kFormatError = 6,
    kInternalError = 70,
};

// Maps the exception currently being handled to an exit code.
int exit_code_for_current_exception();

struct VideoEntry {
    std::filesystem::path path;
    std::optional<scoring::Label> label;
};

// Manifest CSV with header path,label (label column optional, values live/spoof).
// Relative paths resolve against the manifest's directory.
std::vector<VideoEntry> read_manifest(const std::filesystem::path& manifest);

// Outputs per video under <out>/preprocess/<stem>/: flow/flow_NNNN.png (one per
// consecutive frame pair), patches.fga and patches.csv. Every video is attempted;
// failures are reported on err and turn the exit code nonzero.
int cmd_preprocess(const RunConfig& cfg, const std::vector<std::filesystem::path>& videos, std::ostream& out,
                   std::ostream& err);

// Trains on the given patch containers (live class only) and writes
// <out>/train/checkpoint.fgc, history.csv and reference.csv (frame scores of the
// training containers under the final model).
int cmd_train(const RunConfig& cfg, const std::vector<std::filesystem::path>& containers, std::ostream& out,
              std::ostream& err);

// Scores labeled dev videos against the reference and writes
// <out>/calibrate/calibration.json and dev_report.csv.
int cmd_calibrate(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                  const std::vector<VideoEntry>& dev, std::ostream& out, std::ostream& err);

// Writes <out>/score/report.csv (video_id,mmd_score,has_motion,label),
// frame_scores.csv and, when every video carries a label, metrics.json.
int cmd_score(const RunConfig& cfg, const std::filesystem::path& checkpoint, const std::filesystem::path& calibration,
              const std::vector<VideoEntry>& videos, std::ostream& out, std::ostream& err);

// Writes `count` synthetic videos of each requested model as lossless .mkv files
// under <out>/synth/ plus manifest.csv (path,label). Seeds derive from cfg.seed and
// the set name, so disjoint sets (train/dev/test) come from distinct names.
int cmd_synth(const RunConfig& cfg, const std::string& set_name, const std::vector<std::string>& models, int count,
              int n_frames, int size, std::ostream& out, std::ostream& err);

// Writes <out>/bench/{auc.csv, summary.txt, report.json} and optional plots.
int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace flowgan::cli
