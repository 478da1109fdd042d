#pragma once

#include "flowgan/flowprep/types.hpp"
#include "flowgan/gan/losses.hpp"
#include "flowgan/gan/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace flowgan::gan {

struct OptimizerConfig {
    std::string name = "adam";  // only adam is implemented
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Held-out reconstruction losses evaluated after each epoch (eval mode).
struct MonitorLosses {
    double live = 0.0;
    double spoof = 0.0;
};
using EpochMonitor = std::function<MonitorLosses(Generator<float>&)>;

struct TrainingConfig {
    double learning_rate = 0.02;
    int epochs = 40;
    int batch_size = 64;
    std::uint64_t seed = 0;
    OptimizerConfig optimizer;
    LossWeights loss_weights;
    AdversarialForm adversarial = AdversarialForm::non_saturating;
    // Written every checkpoint_every epochs and after the last one, when set.
    std::optional<std::filesystem::path> checkpoint_path;
    int checkpoint_every = 1;
    EpochMonitor monitor;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double recon_loss = 0.0;
    double g_adv_loss = 0.0;
    double d_loss = 0.0;
    std::optional<MonitorLosses> monitor;
    friend bool operator==(const EpochRecord& a, const EpochRecord& b) {
        const bool ma = a.monitor.has_value(), mb = b.monitor.has_value();
        return a.epoch == b.epoch && a.recon_loss == b.recon_loss && a.g_adv_loss == b.g_adv_loss
               && a.d_loss == b.d_loss && ma == mb
               && (!ma || (a.monitor->live == b.monitor->live && a.monitor->spoof == b.monitor->spoof));
    }
};

struct TrainingHistory {
    std::vector<EpochRecord> epochs;

    // epoch,recon_loss,g_adv_loss,d_loss (+ monitor_live,monitor_spoof when recorded)
    std::string to_csv() const;
    void save_csv(const std::filesystem::path& path) const;
    friend bool operator==(const TrainingHistory&, const TrainingHistory&) = default;
};

struct TrainResult {
    Models<float> models;
    TrainingHistory history;
};

// Trains generator and discriminator on unlabeled normal-class patches. The batch
// type carries pixels and provenance only, so no label can reach the update step.
// Per batch: one discriminator step, then one generator step (skipped discriminator
// when w_a == 0). Batch order is drawn from the seed; results are bit-reproducible.
// Throws DataError for fewer than two patches, ConfigError for bad settings,
// DivergenceError on a non-finite loss.
TrainResult train(const flowprep::PatchBatch& patches, const ArchitectureConfig& arch,
                  const TrainingConfig& cfg);

// Adaptive-moment update for one network's trainable parameters.
template <typename T>
class Adam {
public:
    Adam(std::vector<Param<T>*> params, double lr, const OptimizerConfig& cfg);
    void step();

private:
    std::vector<Param<T>*> params_;
    std::vector<std::vector<double>> m_, v_;
    double lr_;
    OptimizerConfig cfg_;
    long t_ = 0;
};

} // namespace flowgan::gan
