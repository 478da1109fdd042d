#include "flowgan/scoring/mmd.hpp"

#include "flowgan/error.hpp"
#include "flowgan/rng.hpp"
#include "flowgan/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace flowgan::scoring {

void ScoreDistribution::validate() const {
    if (samples.empty()) throw DataError("score distribution '" + video_id + "' is empty");
    for (double s : samples)
        if (!std::isfinite(s) || s < 0) throw DataError("score distribution '" + video_id + "' has an invalid sample");
}

KernelSpec KernelSpec::rbf(std::vector<double> bandwidths, std::vector<double> weights) {
    if (weights.empty()) weights.assign(bandwidths.size(), bandwidths.empty() ? 0.0 : 1.0 / bandwidths.size());
    return {KernelFamily::rbf, std::move(bandwidths), std::move(weights)};
}

void KernelSpec::validate() const {
    if (weights.empty()) throw ConfigError("kernel: no mixture weights");
    double sum = 0;
    for (double w : weights) {
        if (!(w >= 0) || !std::isfinite(w)) throw ConfigError("kernel: mixture weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("kernel: mixture weights must sum to 1");
    if (family == KernelFamily::rbf) {
        if (bandwidths.size() != weights.size()) throw ConfigError("kernel: one weight per bandwidth required");
        for (double b : bandwidths)
            if (!(b > 0) || !std::isfinite(b)) throw ConfigError("kernel: bandwidths must be positive");
    } else if (weights.size() != 1) {
        throw ConfigError("kernel: the linear kernel takes a single weight");
    }
}

nlohmann::json KernelSpec::to_json() const {
    return {{"family", family == KernelFamily::rbf ? "rbf" : "linear"}, {"bandwidths", bandwidths}, {"weights", weights}};
}

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
    KernelSpec k;
    try {
        const auto fam = j.at("family").get<std::string>();
        if (fam == "rbf") k.family = KernelFamily::rbf;
        else if (fam == "linear") k.family = KernelFamily::linear;
        else throw ConfigError("kernel: unknown family '" + fam + "' (supported: rbf, linear)");
        k.bandwidths = j.value("bandwidths", std::vector<double>{});
        k.weights = j.at("weights").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("kernel: ") + e.what());
    }
    k.validate();
    return k;
}

std::vector<double> cap_samples(std::span<const double> samples, std::size_t cap, std::uint64_t seed) {
    if (samples.size() <= cap) return {samples.begin(), samples.end()};
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first cap entries become a uniform sample.
    for (std::size_t i = 0; i < cap; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    std::vector<double> out;
    out.reserve(cap);
    for (auto i : idx) out.push_back(samples[i]);
    return out;
}

double median_pairwise_distance(std::span<const double> pooled, std::uint64_t seed, std::size_t max_samples) {
    const auto xs = cap_samples(pooled, max_samples, derive_seed(seed, seed_stream::bandwidth_subsample));
    if (xs.size() < 2) return 1.0;
    std::vector<double> d;
    d.reserve(xs.size() * (xs.size() - 1) / 2);
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j) d.push_back(std::abs(xs[i] - xs[j]));
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + mid, d.end());
    double med = d[mid];
    if (d.size() % 2 == 0) med = 0.5 * (med + *std::max_element(d.begin(), d.begin() + mid));
    return med > 0 && std::isfinite(med) ? med : 1.0;
}

KernelSpec median_heuristic_kernel(std::span<const double> pooled, std::uint64_t seed,
                                   const std::vector<double>& multipliers) {
    const double med = median_pairwise_distance(pooled, seed);
    std::vector<double> bw;
    for (double m : multipliers) bw.push_back(m * med);
    auto k = KernelSpec::rbf(bw);
    k.validate();
    return k;
}

namespace {

double mean_of(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Mixture kernel mean over all (x_i, y_j) pairs.
double kernel_mean(std::span<const double> x, std::span<const double> y, const KernelSpec& k) {
    double total = 0;
    for (std::size_t m = 0; m < k.bandwidths.size(); ++m) {
        const double gamma = 1.0 / (2.0 * k.bandwidths[m] * k.bandwidths[m]);
        total += k.weights[m] * simd::rbf_pair_sum(x.data(), x.size(), y.data(), y.size(), gamma);
    }
    return total / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

} // namespace

double mmd(std::span<const double> a, std::span<const double> b, const KernelSpec& kernel) {
    if (a.empty() || b.empty()) throw DataError("mmd: empty sample set");
    kernel.validate();
    for (double v : a)
        if (!std::isfinite(v)) throw DataError("mmd: non-finite sample");
    for (double v : b)
        if (!std::isfinite(v)) throw DataError("mmd: non-finite sample");
    if (std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end())) std::swap(a, b);

    if (kernel.family == KernelFamily::linear) {
        // The feature map is the identity, so the mean embeddings are the sample means.
        return std::sqrt(kernel.weights[0]) * std::abs(mean_of(a) - mean_of(b));
    }
    const double kaa = kernel_mean(a, a, kernel);
    const double kbb = kernel_mean(b, b, kernel);
    const double kab = kernel_mean(a, b, kernel);
    const double sq = kaa - 2.0 * kab + kbb;
    return std::sqrt(std::max(0.0, sq));
}

double mmd(const ScoreDistribution& a, const ScoreDistribution& b, const KernelSpec& kernel) {
    a.validate();
    b.validate();
    return mmd(std::span<const double>(a.samples), std::span<const double>(b.samples), kernel);
}

} // namespace flowgan::scoring
