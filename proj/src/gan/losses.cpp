#include "flowgan/gan/losses.hpp"

#include "flowgan/error.hpp"
#include "flowgan/simd/kernels.hpp"

#include <cmath>

namespace flowgan::gan {

void LossWeights::validate() const {
    if (!(w_i >= 0) || !(w_a >= 0) || !std::isfinite(w_i) || !std::isfinite(w_a))
        throw ConfigError("loss weights must be finite and non-negative");
    if (!(w_i + w_a > 0)) throw ConfigError("loss weights must not both be zero");
}

namespace {

template <typename T>
double l1_mean(std::span<const T> x, std::span<const T> y) {
    if (x.size() != y.size())
        throw ShapeError("reconstruction_loss: sizes differ (" + std::to_string(x.size()) + " vs "
                         + std::to_string(y.size()) + ")");
    if (x.empty()) throw ShapeError("reconstruction_loss: empty input");
    return simd::abs_diff_sum(x.data(), y.data(), x.size()) / static_cast<double>(x.size());
}

double softplus(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <typename T>
double mean_softplus(const FeatureMap<T>& logits, double sign) {
    double s = 0.0;
    for (auto l : logits.data) s += softplus(sign * l);
    return s / logits.size();
}

} // namespace

double reconstruction_loss(std::span<const float> x, std::span<const float> x_hat) { return l1_mean(x, x_hat); }
double reconstruction_loss(std::span<const double> x, std::span<const double> x_hat) { return l1_mean(x, x_hat); }

AdversarialLosses adversarial_losses(std::span<const double> d_real, std::span<const double> d_fake,
                                     AdversarialForm form) {
    if (d_real.empty() || d_fake.empty()) throw DataError("adversarial_losses: empty probability vector");
    auto check = [](double p) {
        if (!(p > 0.0 && p < 1.0)) throw DomainError("discriminator output outside (0, 1): " + std::to_string(p));
    };
    double log_real = 0.0, log_one_minus_fake = 0.0, log_fake = 0.0;
    for (double p : d_real) {
        check(p);
        log_real += std::log(p);
    }
    for (double p : d_fake) {
        check(p);
        log_one_minus_fake += std::log1p(-p);
        log_fake += std::log(p);
    }
    const double nr = static_cast<double>(d_real.size());
    const double nf = static_cast<double>(d_fake.size());
    AdversarialLosses out;
    out.discriminator = -log_real / nr - log_one_minus_fake / nf;
    out.generator = form == AdversarialForm::non_saturating ? -log_fake / nf : log_one_minus_fake / nf;
    return out;
}

double total_generator_loss(double l_irec, double l_adv, const LossWeights& w) {
    if (!std::isfinite(l_irec) || !std::isfinite(l_adv) || !std::isfinite(w.w_i) || !std::isfinite(w.w_a))
        throw NumericError("total_generator_loss: non-finite input");
    return w.w_i * l_irec + w.w_a * l_adv;
}

template <typename T>
double discriminator_gradients(Discriminator<T>& d, const FeatureMap<T>& real, const FeatureMap<T>& fake) {
    d.zero_grad();
    const auto lr = d.logits(real, Mode::train);
    const double loss_real = mean_softplus(lr, -1.0);
    FeatureMap<T> g_real(1, lr.batch, 1, 1);
    for (std::size_t i = 0; i < lr.size(); ++i)
        g_real.data[i] = static_cast<T>((sigmoid(lr.data[i]) - 1.0) / lr.size());
    d.backward(g_real, true);

    const auto lf = d.logits(fake, Mode::train);
    const double loss_fake = mean_softplus(lf, 1.0);
    FeatureMap<T> g_fake(1, lf.batch, 1, 1);
    for (std::size_t i = 0; i < lf.size(); ++i) g_fake.data[i] = static_cast<T>(sigmoid(lf.data[i]) / lf.size());
    d.backward(g_fake, true);
    return loss_real + loss_fake;
}

namespace {

template <typename T>
double adversarial_term(const FeatureMap<T>& logits, AdversarialForm form) {
    return form == AdversarialForm::non_saturating ? mean_softplus(logits, -1.0) : -mean_softplus(logits, 1.0);
}

} // namespace

template <typename T>
GeneratorLossParts generator_gradients(Generator<T>& g, Discriminator<T>& d, const FeatureMap<T>& real,
                                       const FeatureMap<T>& fake, const LossWeights& w, AdversarialForm form) {
    if (!real.same_shape(fake)) throw ShapeError("generator_gradients: real/fake shape mismatch");
    g.zero_grad();
    GeneratorLossParts parts;
    parts.reconstruction = reconstruction_loss(std::span<const T>(real.data), std::span<const T>(fake.data));

    FeatureMap<T> dfake(fake.channels, fake.batch, fake.height, fake.width);
    const T rec_scale = static_cast<T>(w.w_i / static_cast<double>(fake.size()));
    for (std::size_t i = 0; i < fake.size(); ++i) {
        const T diff = fake.data[i] - real.data[i];
        dfake.data[i] = diff > T(0) ? rec_scale : (diff < T(0) ? -rec_scale : T(0));
    }

    if (w.w_a > 0) {
        const auto logits = d.logits(fake, Mode::train);
        parts.adversarial = adversarial_term(logits, form);
        FeatureMap<T> dl(1, logits.batch, 1, 1);
        const double n = static_cast<double>(logits.size());
        for (std::size_t i = 0; i < logits.size(); ++i) {
            const double s = sigmoid(logits.data[i]);
            const double grad = form == AdversarialForm::non_saturating ? (s - 1.0) / n : -s / n;
            dl.data[i] = static_cast<T>(w.w_a * grad);
        }
        const auto dadv = d.backward(dl, false);
        for (std::size_t i = 0; i < dfake.size(); ++i) dfake.data[i] += dadv.data[i];
    }
    parts.total = total_generator_loss(parts.reconstruction, parts.adversarial, w);
    g.backward(dfake, true);
    return parts;
}

template <typename T>
GeneratorLossParts generator_objective(Generator<T>& g, Discriminator<T>& d, const FeatureMap<T>& real,
                                       const LossWeights& w, AdversarialForm form) {
    const auto fake = g.forward(real, Mode::train);
    GeneratorLossParts parts;
    parts.reconstruction = reconstruction_loss(std::span<const T>(real.data), std::span<const T>(fake.data));
    if (w.w_a > 0) parts.adversarial = adversarial_term(d.logits(fake, Mode::train), form);
    parts.total = total_generator_loss(parts.reconstruction, parts.adversarial, w);
    return parts;
}

template <typename T>
double discriminator_objective(Generator<T>& g, Discriminator<T>& d, const FeatureMap<T>& real) {
    const auto fake = g.forward(real, Mode::train);
    return mean_softplus(d.logits(real, Mode::train), -1.0) + mean_softplus(d.logits(fake, Mode::train), 1.0);
}

#define FLOWGAN_INSTANTIATE(T)                                                                             \
    template double discriminator_gradients<T>(Discriminator<T>&, const FeatureMap<T>&, const FeatureMap<T>&); \
    template GeneratorLossParts generator_gradients<T>(Generator<T>&, Discriminator<T>&, const FeatureMap<T>&, \
                                                       const FeatureMap<T>&, const LossWeights&,            \
                                                       AdversarialForm);                                     \
    template GeneratorLossParts generator_objective<T>(Generator<T>&, Discriminator<T>&, const FeatureMap<T>&, \
                                                       const LossWeights&, AdversarialForm);                 \
    template double discriminator_objective<T>(Generator<T>&, Discriminator<T>&, const FeatureMap<T>&);

FLOWGAN_INSTANTIATE(float)
FLOWGAN_INSTANTIATE(double)

#undef FLOWGAN_INSTANTIATE

} // namespace flowgan::gan
