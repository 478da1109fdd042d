#pragma once

// Finite-difference helpers shared by the gradient tests and the acceptance run.

#include "flowgan/gan/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace gradcheck {

using flowgan::gan::Generator;
using flowgan::gan::FeatureMap;
using flowgan::gan::Mode;
using flowgan::gan::Param;

struct Probe {
    std::size_t param;
    std::size_t index;
};

template <typename T>
std::vector<Probe> draw_probes(const std::vector<Param<T>*>& params, int count, std::mt19937_64& rng) {
    std::vector<std::size_t> trainable;
    for (std::size_t i = 0; i < params.size(); ++i)
        if (params[i]->trainable && !params[i]->value.empty()) trainable.push_back(i);
    std::vector<Probe> out;
    for (int k = 0; k < count; ++k) {
        const std::size_t p = trainable[rng() % trainable.size()];
        out.push_back({p, static_cast<std::size_t>(rng() % params[p]->value.size())});
    }
    return out;
}

// Relative error with an absolute floor. With h = 1e-5 and losses of order 10 the
// difference quotient carries ~1e-9 of rounding noise, so gradients below 1e-3 are
// effectively held to an absolute 1e-9.
inline double rel_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3});
}

// Sign pattern of fake - real. The L1 term is smooth only while this pattern holds,
// so a difference quotient that straddles a change measures a kink, not a gradient.
template <typename T>
std::vector<int> residual_signs(Generator<T>& g, const FeatureMap<T>& real) {
    const auto fake = g.forward(real, Mode::train);
    std::vector<int> s(fake.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = (fake.data[i] > real.data[i]) - (fake.data[i] < real.data[i]);
    return s;
}

template <typename T>
bool straddles_kink(Generator<T>& g, const FeatureMap<T>& real, T& slot, double h) {
    const T saved = slot;
    slot = static_cast<T>(saved + h);
    const auto up = residual_signs(g, real);
    slot = static_cast<T>(saved - h);
    const auto down = residual_signs(g, real);
    slot = saved;
    return up != down;
}

template <typename Objective>
double central_difference(double& slot, double h, Objective f) {
    const double saved = slot;
    slot = saved + h;
    const double up = f();
    slot = saved - h;
    const double down = f();
    slot = saved;
    return (up - down) / (2 * h);
}

} // namespace gradcheck
