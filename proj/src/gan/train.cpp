#include "flowgan/gan/train.hpp"

#include "flowgan/error.hpp"
#include "flowgan/gan/checkpoint.hpp"
#include "flowgan/io.hpp"
#include "flowgan/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace flowgan::gan {

void TrainingConfig::validate() const {
    if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw ConfigError("train.learning_rate must be positive");
    if (epochs <= 0) throw ConfigError("train.epochs must be positive");
    if (batch_size < 2) throw ConfigError("train.batch_size must be at least 2 (batch normalization)");
    if (optimizer.name != "adam") throw ConfigError("train.optimizer: unknown scheme '" + optimizer.name + "' (supported: adam)");
    if (!(optimizer.beta1 >= 0 && optimizer.beta1 < 1) || !(optimizer.beta2 >= 0 && optimizer.beta2 < 1))
        throw ConfigError("train.optimizer betas must be in [0, 1)");
    if (!(optimizer.eps > 0)) throw ConfigError("train.optimizer.eps must be positive");
    if (checkpoint_every < 1) throw ConfigError("train.checkpoint_every must be at least 1");
    loss_weights.validate();
}

std::string TrainingHistory::to_csv() const {
    const bool monitored = std::any_of(epochs.begin(), epochs.end(), [](auto& e) { return e.monitor.has_value(); });
    std::vector<std::string> header{"epoch", "recon_loss", "g_adv_loss", "d_loss"};
    if (monitored) {
        header.push_back("monitor_live");
        header.push_back("monitor_spoof");
    }
    io::CsvWriter csv(header);
    for (const auto& e : epochs) {
        std::vector<std::string> row{std::to_string(e.epoch), io::format_double(e.recon_loss),
                                     io::format_double(e.g_adv_loss), io::format_double(e.d_loss)};
        if (monitored) {
            row.push_back(e.monitor ? io::format_double(e.monitor->live) : "");
            row.push_back(e.monitor ? io::format_double(e.monitor->spoof) : "");
        }
        csv.row(row);
    }
    return csv.str();
}

void TrainingHistory::save_csv(const std::filesystem::path& path) const { io::write_file_atomic(path, to_csv()); }

template <typename T>
Adam<T>::Adam(std::vector<Param<T>*> params, double lr, const OptimizerConfig& cfg) : lr_(lr), cfg_(cfg) {
    for (auto* p : params)
        if (p->trainable && !p->value.empty()) params_.push_back(p);
    for (auto* p : params_) {
        m_.emplace_back(p->value.size(), 0.0);
        v_.emplace_back(p->value.size(), 0.0);
    }
}

template <typename T>
void Adam<T>::step() {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = *params_[i];
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < p.value.size(); ++j) {
            const double g = p.grad[j];
            m[j] = cfg_.beta1 * m[j] + (1 - cfg_.beta1) * g;
            v[j] = cfg_.beta2 * v[j] + (1 - cfg_.beta2) * g * g;
            p.value[j] -= static_cast<T>(lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.eps));
        }
    }
}

template class Adam<float>;
template class Adam<double>;

namespace {

FeatureMap<float> gather(const flowprep::PatchBatch& batch, const std::vector<std::size_t>& order,
                         std::size_t first, std::size_t count) {
    const int w = batch.window;
    FeatureMap<float> x(3, static_cast<int>(count), w, w);
    const std::size_t plane = static_cast<std::size_t>(w) * w;
    for (std::size_t n = 0; n < count; ++n) {
        const float* src = batch.patch(order[first + n]);
        for (std::size_t p = 0; p < plane; ++p)
            for (int c = 0; c < 3; ++c) x.data[(static_cast<std::size_t>(c) * count + n) * plane + p] = src[p * 3 + c];
    }
    return x;
}

} // namespace

TrainResult train(const flowprep::PatchBatch& patches, const ArchitectureConfig& arch, const TrainingConfig& cfg) {
    cfg.validate();
    arch.validate();
    if (patches.size() < 2) throw DataError("training needs at least two patches, got " + std::to_string(patches.size()));
    if (patches.window != arch.input_size || arch.input_channels != 3)
        throw ShapeError("patch window " + std::to_string(patches.window) + " does not match architecture input "
                         + std::to_string(arch.input_size));

    TrainResult result{init_models<float>(arch, cfg.seed), {}};
    auto& g = result.models.generator;
    auto& d = result.models.discriminator;
    Adam<float> opt_g(g.params(), cfg.learning_rate, cfg.optimizer);
    Adam<float> opt_d(d.params(), cfg.learning_rate, cfg.optimizer);
    const bool adversarial = cfg.loss_weights.w_a > 0;

    std::mt19937_64 order_rng(derive_seed(cfg.seed, seed_stream::batch_order));
    std::vector<std::size_t> order(patches.size());
    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), order_rng);
        double sum_rec = 0, sum_adv = 0, sum_d = 0;
        int batches = 0;
        for (std::size_t first = 0, b = 0; first < order.size(); first += bs, ++b) {
            const std::size_t count = std::min(bs, order.size() - first);
            if (count < 2) break;  // a single item has no batch statistics
            const auto x = gather(patches, order, first, count);
            const auto fake = g.forward(x, Mode::train);
            double d_loss = 0.0;
            if (adversarial) {
                d_loss = discriminator_gradients(d, x, fake);
                if (!std::isfinite(d_loss))
                    throw DivergenceError(epoch, static_cast<int>(b), "non-finite discriminator loss");
                opt_d.step();
            }
            GeneratorLossParts parts;
            try {
                parts = generator_gradients(g, d, x, fake, cfg.loss_weights, cfg.adversarial);
            } catch (const NumericError&) {
                throw DivergenceError(epoch, static_cast<int>(b), "non-finite generator loss");
            }
            opt_g.step();
            sum_rec += parts.reconstruction;
            sum_adv += parts.adversarial;
            sum_d += d_loss;
            ++batches;
        }
        EpochRecord rec{epoch, sum_rec / batches, sum_adv / batches, sum_d / batches, std::nullopt};
        if (cfg.monitor) rec.monitor = cfg.monitor(g);
        result.history.epochs.push_back(rec);
        if (cfg.checkpoint_path && (epoch % cfg.checkpoint_every == 0 || epoch == cfg.epochs))
            save_checkpoint(*cfg.checkpoint_path, result.models, arch, epoch, cfg.loss_weights);
    }
    return result;
}

} // namespace flowgan::gan
