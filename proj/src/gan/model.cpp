#include "flowgan/gan/model.hpp"

#include "flowgan/error.hpp"
#include "flowgan/rng.hpp"

#include <cmath>
#include <limits>

namespace flowgan::gan {

void ArchitectureConfig::validate() const {
    if (input_size <= 0) throw ConfigError("architecture.input_size must be positive");
    if (input_channels <= 0) throw ConfigError("architecture.input_channels must be positive");
    if (latent_dim <= 0) throw ConfigError("architecture.latent_dim must be positive");
    if (encoder_filters.empty()) throw ConfigError("architecture.encoder_filters must not be empty");
    if (discriminator_filters.empty()) throw ConfigError("architecture.discriminator_filters must not be empty");
    for (int f : encoder_filters)
        if (f <= 0) throw ConfigError("architecture.encoder_filters entries must be positive");
    for (int f : discriminator_filters)
        if (f <= 0) throw ConfigError("architecture.discriminator_filters entries must be positive");
    if (!(leaky_slope >= 0 && leaky_slope < 1)) throw ConfigError("architecture.leaky_slope must be in [0, 1)");

    auto check_stack = [&](std::size_t stages, const char* what) {
        int s = input_size;
        for (std::size_t i = 0; i < stages; ++i) {
            if (s < 2 || s % 2 != 0)
                throw ConfigError(std::string(what) + ": input_size " + std::to_string(input_size)
                                  + " cannot be halved " + std::to_string(stages) + " times");
            s = (s + 2 * kPad - kKernel) / kStride + 1;
        }
        return s;
    };
    int s = check_stack(encoder_filters.size(), "encoder");
    check_stack(discriminator_filters.size(), "discriminator");
    for (std::size_t i = 0; i < encoder_filters.size(); ++i) s = (s - 1) * kStride - 2 * kPad + kKernel;
    if (s != input_size) throw ConfigError("decoder output size does not match the input size");
}

nlohmann::json ArchitectureConfig::to_json() const {
    return {{"input_size", input_size},       {"input_channels", input_channels},
            {"encoder_filters", encoder_filters}, {"latent_dim", latent_dim},
            {"discriminator_filters", discriminator_filters}, {"leaky_slope", leaky_slope}};
}

ArchitectureConfig ArchitectureConfig::from_json(const nlohmann::json& j) {
    ArchitectureConfig a;
    try {
        a.input_size = j.value("input_size", a.input_size);
        a.input_channels = j.value("input_channels", a.input_channels);
        a.encoder_filters = j.value("encoder_filters", a.encoder_filters);
        a.latent_dim = j.value("latent_dim", a.latent_dim);
        a.discriminator_filters = j.value("discriminator_filters", a.discriminator_filters);
        a.leaky_slope = j.value("leaky_slope", a.leaky_slope);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid architecture record: ") + e.what());
    }
    return a;
}

// --- Generator ----------------------------------------------------------------

template <typename T>
Generator<T>::Generator(const ArchitectureConfig& arch) : arch_(arch) {
    arch_.validate();
    const T slope = static_cast<T>(arch_.leaky_slope);
    int in = arch_.input_channels;
    int size = arch_.input_size;
    for (std::size_t i = 0; i < arch_.encoder_filters.size(); ++i) {
        const int f = arch_.encoder_filters[i];
        const std::string id = std::to_string(i);
        encoder_.template add<Conv2d<T>>("enc.conv" + id, in, f, ArchitectureConfig::kKernel,
                                         ArchitectureConfig::kStride, ArchitectureConfig::kPad, false);
        encoder_.template add<BatchNorm<T>>("enc.bn" + id, f);
        encoder_.template add<LeakyRelu<T>>(slope);
        in = f;
        size /= 2;
    }
    const int bottleneck = in * size * size;
    encoder_.template add<Flatten<T>>();
    encoder_.template add<Dense<T>>("enc.fc", bottleneck, arch_.latent_dim, true);

    decoder_.template add<Dense<T>>("dec.fc", arch_.latent_dim, bottleneck, false);
    decoder_.template add<BatchNorm<T>>("dec.bn_fc", bottleneck);
    decoder_.template add<LeakyRelu<T>>(T(0));
    decoder_.template add<Unflatten<T>>(in, size, size);
    const int stages = static_cast<int>(arch_.encoder_filters.size());
    for (int j = stages - 1; j >= 0; --j) {
        const int out = j > 0 ? arch_.encoder_filters[j - 1] : arch_.input_channels;
        const std::string id = std::to_string(stages - 1 - j);
        decoder_.template add<ConvTranspose2d<T>>("dec.deconv" + id, arch_.encoder_filters[j], out,
                                                  ArchitectureConfig::kKernel, ArchitectureConfig::kStride,
                                                  ArchitectureConfig::kPad, j == 0);
        if (j > 0) {
            decoder_.template add<BatchNorm<T>>("dec.bn" + id, out);
            decoder_.template add<LeakyRelu<T>>(T(0));
        } else {
            decoder_.template add<Tanh<T>>();
        }
    }
}

template <typename T>
FeatureMap<T> Generator<T>::forward(const FeatureMap<T>& x, Mode mode) {
    return decoder_.forward(encoder_.forward(x, mode), mode);
}

template <typename T>
FeatureMap<T> Generator<T>::backward(const FeatureMap<T>& dy, bool param_grads) {
    return encoder_.backward(decoder_.backward(dy, param_grads), param_grads);
}

template <typename T>
std::vector<Param<T>*> Generator<T>::params() {
    auto p = encoder_.params();
    for (auto* q : decoder_.params()) p.push_back(q);
    return p;
}

template <typename T>
void Generator<T>::zero_grad() {
    encoder_.zero_grad();
    decoder_.zero_grad();
}

template <typename T>
void Generator<T>::init(std::mt19937_64& rng) {
    encoder_.init(rng);
    decoder_.init(rng);
}

// --- Discriminator ------------------------------------------------------------

template <typename T>
Discriminator<T>::Discriminator(const ArchitectureConfig& arch) : arch_(arch) {
    arch_.validate();
    const T slope = static_cast<T>(arch_.leaky_slope);
    int in = arch_.input_channels;
    int size = arch_.input_size;
    for (std::size_t i = 0; i < arch_.discriminator_filters.size(); ++i) {
        const int f = arch_.discriminator_filters[i];
        const std::string id = std::to_string(i);
        net_.template add<Conv2d<T>>("disc.conv" + id, in, f, ArchitectureConfig::kKernel,
                                     ArchitectureConfig::kStride, ArchitectureConfig::kPad, false);
        net_.template add<BatchNorm<T>>("disc.bn" + id, f);
        net_.template add<LeakyRelu<T>>(slope);
        in = f;
        size /= 2;
    }
    net_.template add<Flatten<T>>();
    net_.template add<Dense<T>>("disc.fc", in * size * size, 1, true);
}

template <typename T>
FeatureMap<T> Discriminator<T>::logits(const FeatureMap<T>& x, Mode mode) {
    return net_.forward(x, mode);
}

template <typename T>
FeatureMap<T> Discriminator<T>::backward(const FeatureMap<T>& dlogits, bool param_grads) {
    return net_.backward(dlogits, param_grads);
}

template <typename T>
std::vector<Param<T>*> Discriminator<T>::params() {
    return net_.params();
}

template <typename T>
void Discriminator<T>::zero_grad() {
    net_.zero_grad();
}

template <typename T>
void Discriminator<T>::init(std::mt19937_64& rng) {
    net_.init(rng);
}

// --- free functions -------------------------------------------------------------

template <typename T>
Models<T> init_models(const ArchitectureConfig& arch, std::uint64_t seed) {
    arch.validate();
    Models<T> m{Generator<T>(arch), Discriminator<T>(arch), seed};
    std::mt19937_64 g_rng(derive_seed(seed, seed_stream::generator_init));
    std::mt19937_64 d_rng(derive_seed(seed, seed_stream::discriminator_init));
    m.generator.init(g_rng);
    m.discriminator.init(d_rng);
    return m;
}

template <typename T>
FeatureMap<T> to_feature_map(const flowprep::PatchBatch& batch, std::size_t first, std::size_t count) {
    if (first + count > batch.size()) throw ShapeError("patch range out of bounds");
    const int w = batch.window;
    FeatureMap<T> x(3, static_cast<int>(count), w, w);
    const std::size_t plane = static_cast<std::size_t>(w) * w;
    for (std::size_t n = 0; n < count; ++n) {
        const float* src = batch.patch(first + n);
        for (std::size_t p = 0; p < plane; ++p)
            for (int c = 0; c < 3; ++c)
                x.data[(static_cast<std::size_t>(c) * count + n) * plane + p] = static_cast<T>(src[p * 3 + c]);
    }
    return x;
}

namespace {
template <typename T>
void check_input(const ArchitectureConfig& arch, const FeatureMap<T>& x) {
    if (x.channels != arch.input_channels || x.height != arch.input_size || x.width != arch.input_size)
        throw ShapeError("batch is " + std::to_string(x.channels) + "x" + std::to_string(x.height) + "x"
                         + std::to_string(x.width) + ", model expects " + std::to_string(arch.input_channels)
                         + "x" + std::to_string(arch.input_size) + "x" + std::to_string(arch.input_size));
    if (x.batch <= 0) throw ShapeError("empty batch");
}
} // namespace

template <typename T>
FeatureMap<T> generator_forward(Generator<T>& g, const FeatureMap<T>& batch) {
    check_input(g.arch(), batch);
    return g.forward(batch, Mode::eval);
}

double probability_from_logit(double logit) {
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    const double p = 1.0 / (1.0 + std::exp(-logit));
    return p < lo ? lo : (p > hi ? hi : p);
}

template <typename T>
std::vector<double> discriminator_forward(Discriminator<T>& d, const FeatureMap<T>& batch) {
    check_input(d.arch(), batch);
    const auto logits = d.logits(batch, Mode::eval);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = probability_from_logit(logits.data[i]);
    return out;
}

#define FLOWGAN_INSTANTIATE(T)                                                                          \
    template class Generator<T>;                                                                        \
    template class Discriminator<T>;                                                                    \
    template Models<T> init_models<T>(const ArchitectureConfig&, std::uint64_t);                        \
    template FeatureMap<T> to_feature_map<T>(const flowprep::PatchBatch&, std::size_t, std::size_t);    \
    template FeatureMap<T> generator_forward<T>(Generator<T>&, const FeatureMap<T>&);                   \
    template std::vector<double> discriminator_forward<T>(Discriminator<T>&, const FeatureMap<T>&);

FLOWGAN_INSTANTIATE(float)
FLOWGAN_INSTANTIATE(double)

#undef FLOWGAN_INSTANTIATE

} // namespace flowgan::gan
