#pragma once

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flowgan::scoring {

enum class Source { reference, test };

// Per-frame reconstruction errors of one video, or of a pooled reference set.
struct ScoreDistribution {
    std::vector<double> samples;
    Source source = Source::test;
    std::string video_id;

    // Throws DataError when empty or holding negative / non-finite samples.
    void validate() const;
};

enum class KernelFamily { rbf, linear };

// Convex mixture of basis kernels. rbf: k(x, y) = exp(-(x - y)^2 / (2 s^2)) per
// bandwidth s; linear: k(x, y) = x * y (bandwidths unused, single unit weight).
struct KernelSpec {
    KernelFamily family = KernelFamily::rbf;
    std::vector<double> bandwidths{1.0};
    std::vector<double> weights{1.0};

    static KernelSpec linear() { return {KernelFamily::linear, {}, {1.0}}; }
    // Equal weights when none are given.
    static KernelSpec rbf(std::vector<double> bandwidths, std::vector<double> weights = {});

    // Throws ConfigError: weights must be non-negative and sum to 1 (1e-9), rbf
    // bandwidths positive and as many as weights.
    void validate() const;

    nlohmann::json to_json() const;
    static KernelSpec from_json(const nlohmann::json& j);
    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline const std::vector<double> kDefaultBandwidthMultipliers{0.5, 1, 2, 4, 8};

// Median of |x_i - x_j| over i < j. Pools larger than max_samples are first
// subsampled (seeded). Returns 1 when the median is 0 or there is a single sample.
double median_pairwise_distance(std::span<const double> pooled, std::uint64_t seed, std::size_t max_samples = 2000);

// rbf mixture with bandwidths multipliers x median pairwise distance, equal weights.
KernelSpec median_heuristic_kernel(std::span<const double> pooled, std::uint64_t seed,
                                   const std::vector<double>& multipliers = kDefaultBandwidthMultipliers);

// Biased V-statistic of the maximum mean discrepancy:
// sqrt(max(0, mean k(a, a') - 2 mean k(a, b) + mean k(b, b'))). The two inputs are
// put in a canonical order first, so mmd(a, b) == mmd(b, a) exactly.
// Throws DataError for empty input, ConfigError for an invalid kernel.
double mmd(std::span<const double> a, std::span<const double> b, const KernelSpec& kernel);
double mmd(const ScoreDistribution& a, const ScoreDistribution& b, const KernelSpec& kernel);

// Seeded subsample down to at most cap samples, original order kept.
std::vector<double> cap_samples(std::span<const double> samples, std::size_t cap, std::uint64_t seed);

} // namespace flowgan::scoring
