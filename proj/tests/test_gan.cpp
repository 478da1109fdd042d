#include "flowgan/error.hpp"
#include "flowgan/gan/checkpoint.hpp"
#include "flowgan/gan/losses.hpp"
#include "flowgan/gan/model.hpp"
#include "flowgan/gan/train.hpp"

#include "gradcheck.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <type_traits>

using namespace flowgan;
using namespace flowgan::gan;
using namespace gradcheck;

namespace {

ArchitectureConfig tiny_arch() {
    ArchitectureConfig a;
    a.input_size = 8;
    a.encoder_filters = {4, 6};
    a.latent_dim = 5;
    a.discriminator_filters = {4, 6};
    return a;
}

template <typename T>
FeatureMap<T> random_batch(const ArchitectureConfig& a, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    FeatureMap<T> x(a.input_channels, n, a.input_size, a.input_size);
    for (auto& v : x.data) v = static_cast<T>(u(rng));
    return x;
}

flowprep::PatchBatch random_patches(int n, int window, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-1, 1);
    flowprep::PatchBatch b;
    b.window = window;
    b.values.resize(static_cast<std::size_t>(n) * window * window * 3);
    for (auto& v : b.values) v = u(rng);
    for (int i = 0; i < n; ++i) b.origins.push_back({i, 0, 0});
    return b;
}

// Coherent "flow-like" patches: smooth color fields with a random global tint.
flowprep::PatchBatch smooth_patches(int n, int window, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    flowprep::PatchBatch b;
    b.window = window;
    for (int i = 0; i < n; ++i) {
        const double angle = u(rng) * 6.283185307179586, phase = u(rng) * 3;
        for (int y = 0; y < window; ++y)
            for (int x = 0; x < window; ++x) {
                const double s = 0.5 + 0.5 * std::sin(0.2 * (x * std::cos(angle) + y * std::sin(angle)) + phase);
                b.values.push_back(static_cast<float>(2 * s - 1));
                b.values.push_back(static_cast<float>(std::cos(angle) * 0.8));
                b.values.push_back(static_cast<float>(std::sin(angle) * 0.8));
            }
        b.origins.push_back({i, 0, 0});
    }
    return b;
}

} // namespace

TEST_SUITE("gan") {

TEST_CASE("init_models is deterministic and seed sensitive") {
    auto arch = tiny_arch();
    auto a = init_models<float>(arch, 1);
    auto b = init_models<float>(arch, 1);
    auto c = init_models<float>(arch, 2);
    auto pa = a.generator.params(), pb = b.generator.params(), pc = c.generator.params();
    bool differs = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->value == pb[i]->value);
        if (pa[i]->name.find("weight") != std::string::npos && pa[i]->value != pc[i]->value) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("weights follow N(0, 0.02)") {
    auto m = init_models<float>(ArchitectureConfig{}, 7);
    double s = 0, s2 = 0;
    std::size_t n = 0;
    for (auto* p : m.generator.params()) {
        if (p->name.find("weight") == std::string::npos) continue;
        for (float v : p->value) {
            s += v;
            s2 += double(v) * v;
            ++n;
        }
    }
    const double mean = s / n, sd = std::sqrt(s2 / n - mean * mean);
    CHECK(std::abs(mean) < 1e-3);
    CHECK(sd == doctest::Approx(0.02).epsilon(0.02));
}

TEST_CASE("invalid architectures are rejected") {
    auto a = tiny_arch();
    a.latent_dim = 0;
    CHECK_THROWS_AS(init_models<float>(a, 0), ConfigError);
    a = tiny_arch();
    a.input_size = 12;  // 12 -> 6 -> 3, then 3 cannot be halved
    a.encoder_filters = {4, 4, 4};
    CHECK_THROWS_AS(a.validate(), ConfigError);
}

TEST_CASE("generator and discriminator shapes and ranges") {
    ArchitectureConfig arch;
    auto m = init_models<float>(arch, 3);
    auto x = random_batch<float>(arch, 5, 11);
    x.data.assign(x.data.size(), 0.f);
    for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = static_cast<float>(std::sin(0.37 * i) * 3);  // beyond [-1, 1]
    auto y = generator_forward(m.generator, x);
    CHECK(y.same_shape(x));
    CHECK(std::all_of(y.data.begin(), y.data.end(), [](float v) { return std::abs(v) <= 1.f; }));
    CHECK(reconstruction_loss(std::span<const float>(x.data), std::span<const float>(y.data)) > 0);

    auto p = discriminator_forward(m.discriminator, x);
    CHECK(p.size() == 5);
    CHECK(std::all_of(p.begin(), p.end(), [](double v) { return v > 0 && v < 1; }));

    FeatureMap<float> wrong(3, 2, 16, 16);
    CHECK_THROWS_AS(generator_forward(m.generator, wrong), ShapeError);
    CHECK_THROWS_AS(discriminator_forward(m.discriminator, wrong), ShapeError);
}

TEST_CASE("discriminator is a pure function of each item in eval mode") {
    auto arch = tiny_arch();
    auto m = init_models<double>(arch, 4);
    auto x = random_batch<double>(arch, 3, 5);
    const std::size_t plane = 64;
    for (int c = 0; c < 3; ++c)
        std::copy_n(&x.at(c, 0, 0, 0), plane, &x.at(c, 2, 0, 0));
    auto p = discriminator_forward(m.discriminator, x);
    CHECK(p[0] == p[2]);
}

TEST_CASE("probabilities stay strictly inside (0, 1)") {
    for (double l : {-1000.0, -40.0, 0.0, 40.0, 1000.0}) {
        const double p = probability_from_logit(l);
        CHECK(p > 0);
        CHECK(p < 1);
    }
}

TEST_CASE("reconstruction loss") {
    std::vector<double> ones(10, 1.0), zeros(10, 0.0);
    CHECK(reconstruction_loss(std::span<const double>(ones), std::span<const double>(ones)) == 0);
    CHECK(reconstruction_loss(std::span<const double>(ones), std::span<const double>(zeros)) == 1);
    std::vector<double> short_v(3);
    CHECK_THROWS_AS(reconstruction_loss(std::span<const double>(ones), std::span<const double>(short_v)), ShapeError);

    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(1 + rng() % 500), b(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = n(rng);
            b[i] = n(rng);
        }
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
        const double l = reconstruction_loss(std::span<const double>(a), std::span<const double>(b));
        CHECK(std::abs(l - s / a.size()) <= 1e-12);
        CHECK(l == reconstruction_loss(std::span<const double>(b), std::span<const double>(a)));
        CHECK(l > 0);
    }
}

TEST_CASE("adversarial losses") {
    std::vector<double> half(4, 0.5);
    auto l = adversarial_losses(half, half);
    CHECK(std::abs(l.discriminator - 2 * std::log(2.0)) < 1e-15);
    CHECK(std::abs(l.generator - std::log(2.0)) < 1e-15);
    CHECK(std::abs(adversarial_losses(half, half, AdversarialForm::minimax).generator + std::log(2.0)) < 1e-15);

    std::vector<double> bad{0.5, 1.0};
    CHECK_THROWS_AS(adversarial_losses(bad, half), DomainError);
    CHECK_THROWS_AS(adversarial_losses(half, std::vector<double>{0.0}), DomainError);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(1e-6, 1 - 1e-6);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> r(1 + rng() % 40), f(1 + rng() % 40);
        for (auto& v : r) v = u(rng);
        for (auto& v : f) v = u(rng);
        double lr = 0, lf = 0, lg = 0;
        for (double v : r) lr += std::log(v);
        for (double v : f) {
            lf += std::log(1 - v);
            lg += std::log(v);
        }
        auto out = adversarial_losses(r, f);
        CHECK(std::abs(out.discriminator - (-lr / r.size() - lf / f.size())) <= 1e-12);
        CHECK(std::abs(out.generator - (-lg / f.size())) <= 1e-12);
    }
}

TEST_CASE("total generator loss") {
    CHECK(total_generator_loss(0.3, 0.9, {1, 0}) == 0.3);
    CHECK(total_generator_loss(0.3, 0.9, {0, 1}) == 0.9);
    CHECK(total_generator_loss(0.2, 0.7, {50, 1}) == doctest::Approx(10.7).epsilon(1e-14));
    CHECK_THROWS_AS(total_generator_loss(NAN, 0.1, {}), NumericError);
    CHECK_THROWS_AS(total_generator_loss(0.1, INFINITY, {}), NumericError);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10, 10);
    LossWeights w{3.5, 0.25};
    for (int i = 0; i < 200; ++i) {
        const double a1 = u(rng), b1 = u(rng), a2 = u(rng), b2 = u(rng), k = u(rng);
        const double lhs = total_generator_loss(a1 + k * a2, b1 + k * b2, w);
        const double rhs = total_generator_loss(a1, b1, w) + k * total_generator_loss(a2, b2, w);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1 + std::abs(lhs)));
    }
    CHECK_THROWS_AS((LossWeights{0, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((LossWeights{-1, 2}.validate()), ConfigError);
}

TEST_CASE("generator gradients match central differences (double)") {
    const auto arch = tiny_arch();
    auto m = init_models<double>(arch, 21);
    const auto real = random_batch<double>(arch, 4, 22);
    std::mt19937_64 rng(23);
    for (auto form : {AdversarialForm::non_saturating, AdversarialForm::minimax}) {
        const LossWeights w{50, 1};
        const auto fake = m.generator.forward(real, Mode::train);
        generator_gradients(m.generator, m.discriminator, real, fake, w, form);
        auto params = m.generator.params();
        double worst = 0;
        int checked = 0;
        while (checked < 100) {
            const auto [p, i] = draw_probes(params, 1, rng).front();
            if (straddles_kink(m.generator, real, params[p]->value[i], 1e-5)) continue;
            ++checked;
            const double analytic = params[p]->grad[i];
            const double numeric = central_difference(params[p]->value[i], 1e-5, [&] {
                return generator_objective(m.generator, m.discriminator, real, w, form).total;
            });
            worst = std::max(worst, rel_error(analytic, numeric));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("discriminator gradients match central differences (double)") {
    const auto arch = tiny_arch();
    auto m = init_models<double>(arch, 31);
    const auto real = random_batch<double>(arch, 4, 32);
    const auto fake = m.generator.forward(real, Mode::train);
    discriminator_gradients(m.discriminator, real, fake);
    auto params = m.discriminator.params();
    std::mt19937_64 rng(33);
    double worst = 0;
    for (auto [p, i] : draw_probes(params, 100, rng)) {
        const double analytic = params[p]->grad[i];
        const double numeric = central_difference(params[p]->value[i], 1e-5,
                                                  [&] { return discriminator_objective(m.generator, m.discriminator, real); });
        worst = std::max(worst, rel_error(analytic, numeric));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("float gradients agree with a double-precision reference") {
    const auto arch = tiny_arch();
    auto mf = init_models<float>(arch, 41);
    auto md = init_models<double>(arch, 41);
    auto pf = mf.generator.params();
    auto pd = md.generator.params();
    for (std::size_t i = 0; i < pf.size(); ++i)
        for (std::size_t j = 0; j < pf[i]->value.size(); ++j) pd[i]->value[j] = pf[i]->value[j];
    auto qf = mf.discriminator.params();
    auto qd = md.discriminator.params();
    for (std::size_t i = 0; i < qf.size(); ++i)
        for (std::size_t j = 0; j < qf[i]->value.size(); ++j) qd[i]->value[j] = qf[i]->value[j];

    const auto real_d = random_batch<double>(arch, 4, 42);
    FeatureMap<float> real_f(real_d.channels, real_d.batch, real_d.height, real_d.width);
    for (std::size_t i = 0; i < real_d.size(); ++i) real_f.data[i] = static_cast<float>(real_d.data[i]);
    FeatureMap<double> real_r(real_d.channels, real_d.batch, real_d.height, real_d.width);
    for (std::size_t i = 0; i < real_d.size(); ++i) real_r.data[i] = real_f.data[i];

    const LossWeights w{50, 1};
    auto fake_f = mf.generator.forward(real_f, Mode::train);
    generator_gradients(mf.generator, mf.discriminator, real_f, fake_f, w, AdversarialForm::non_saturating);
    auto fake_d = md.generator.forward(real_r, Mode::train);
    generator_gradients(md.generator, md.discriminator, real_r, fake_d, w, AdversarialForm::non_saturating);

    std::mt19937_64 rng(43);
    double worst = 0;
    int checked = 0;
    while (checked < 100) {
        const auto [p, i] = draw_probes(pf, 1, rng).front();
        if (straddles_kink(md.generator, real_r, pd[p]->value[i], 1e-5)) continue;
        ++checked;
        const double numeric = central_difference(pd[p]->value[i], 1e-5, [&] {
            return generator_objective(md.generator, md.discriminator, real_r, w, AdversarialForm::non_saturating).total;
        });
        worst = std::max(worst, std::abs(pf[p]->grad[i] - numeric) / std::max({std::abs(numeric), 1e-3}));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("training interface accepts unlabeled patches only") {
    struct Labeled {
        flowprep::PatchBatch patches;
        std::vector<int> labels;
    };
    static_assert(std::is_invocable_v<decltype(&train), const flowprep::PatchBatch&, const ArchitectureConfig&,
                                      const TrainingConfig&>);
    static_assert(!std::is_invocable_v<decltype(&train), const Labeled&, const ArchitectureConfig&,
                                       const TrainingConfig&>);
    static_assert(!std::is_invocable_v<decltype(&train), const std::vector<std::pair<flowprep::PatchBatch, int>>&,
                                       const ArchitectureConfig&, const TrainingConfig&>);
    CHECK(true);
}

TEST_CASE("training validates its inputs") {
    TrainingConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    CHECK_THROWS_AS(train(flowprep::PatchBatch{}, ArchitectureConfig{}, cfg), DataError);
    cfg.learning_rate = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("training reduces reconstruction loss and is reproducible") {
    ArchitectureConfig arch;
    arch.input_size = 16;
    arch.encoder_filters = {8, 16};
    arch.discriminator_filters = {8, 16};
    arch.latent_dim = 16;
    TrainingConfig cfg;
    cfg.epochs = 10;
    cfg.batch_size = 16;
    cfg.learning_rate = 2e-3;
    cfg.seed = 5;
    const auto patches = smooth_patches(128, 16, 6);
    auto a = train(patches, arch, cfg);
    auto b = train(patches, arch, cfg);
    REQUIRE(a.history.epochs.size() == 10);
    CHECK(a.history == b.history);
    CHECK(a.history.epochs.back().recon_loss < 0.5 * a.history.epochs.front().recon_loss);
    CHECK(a.history.to_csv().rfind("epoch,recon_loss,g_adv_loss,d_loss\n", 0) == 0);
}

TEST_CASE("autoencoder mode never touches the discriminator") {
    auto arch = tiny_arch();
    TrainingConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.loss_weights = {1, 0};
    auto r = train(random_patches(20, 8, 1), arch, cfg);
    auto fresh = init_models<float>(arch, cfg.seed);
    auto p = r.models.discriminator.params(), q = fresh.discriminator.params();
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i]->value == q[i]->value);
    for (auto& e : r.history.epochs) CHECK(e.d_loss == 0);
}

TEST_CASE("divergence is reported with its position") {
    auto arch = tiny_arch();
    auto patches = random_patches(16, 8, 2);
    patches.values[5] = NAN;
    TrainingConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 8;
    try {
        train(patches, arch, cfg);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.epoch() == 1);
        CHECK(e.batch() >= 0);
    }
}

TEST_CASE("checkpoint round trip reproduces inference exactly") {
    auto arch = tiny_arch();
    TrainingConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.seed = 77;
    const auto dir = std::filesystem::temp_directory_path() / "flowgan_ckpt_test";
    std::filesystem::create_directories(dir);
    cfg.checkpoint_path = dir / "model.ckpt";
    auto r = train(random_patches(24, 8, 3), arch, cfg);
    auto ck = load_checkpoint(*cfg.checkpoint_path);
    CHECK(ck.arch == arch);
    CHECK(ck.epoch == 2);
    CHECK(ck.seed == 77);
    CHECK(ck.loss_weights.w_i == cfg.loss_weights.w_i);
    const auto x = random_batch<float>(arch, 6, 4);
    CHECK(generator_forward(r.models.generator, x).data == generator_forward(ck.models.generator, x).data);
    CHECK(discriminator_forward(r.models.discriminator, x) == discriminator_forward(ck.models.discriminator, x));

    std::filesystem::resize_file(*cfg.checkpoint_path, 40);
    CHECK_THROWS_AS(load_checkpoint(*cfg.checkpoint_path), FormatError);
    std::filesystem::remove_all(dir);
}

}
