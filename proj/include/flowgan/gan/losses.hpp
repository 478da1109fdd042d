#pragma once

#include "flowgan/gan/model.hpp"

#include <span>

namespace flowgan::gan {

struct LossWeights {
    double w_i = 50.0;  // reconstruction
    double w_a = 1.0;   // adversarial

    void validate() const;
};

// Mean absolute difference over all elements. Throws ShapeError on size mismatch.
double reconstruction_loss(std::span<const float> x, std::span<const float> x_hat);
double reconstruction_loss(std::span<const double> x, std::span<const double> x_hat);

enum class AdversarialForm {
    non_saturating,  // generator minimizes -log D(G(x))
    minimax,         // generator minimizes log(1 - D(G(x)))
};

struct AdversarialLosses {
    double generator = 0.0;
    double discriminator = 0.0;
};

// From discriminator probabilities, each strictly inside (0, 1):
//   discriminator = -mean(log d_real) - mean(log(1 - d_fake))
//   generator     = -mean(log d_fake)        (non_saturating)
//                 =  mean(log(1 - d_fake))   (minimax)
// Throws DomainError for values outside (0, 1), DataError for empty input.
AdversarialLosses adversarial_losses(std::span<const double> d_real, std::span<const double> d_fake,
                                     AdversarialForm form = AdversarialForm::non_saturating);

// w_i * l_irec + w_a * l_adv. Throws NumericError for non-finite inputs.
double total_generator_loss(double l_irec, double l_adv, const LossWeights& w);

// Gradient passes shared by training and the gradient checks. Both expect the
// generator's most recent forward() (train mode) to have produced `fake` from `real`.

// Zeroes and fills the discriminator gradients for
// -mean(log D(real)) - mean(log(1 - D(fake))); returns that loss.
template <typename T>
double discriminator_gradients(Discriminator<T>& d, const FeatureMap<T>& real, const FeatureMap<T>& fake);

struct GeneratorLossParts {
    double reconstruction = 0.0;
    double adversarial = 0.0;
    double total = 0.0;
};

// Zeroes and fills the generator gradients of w_i * L1(real, fake) + w_a * adv(fake).
// The discriminator is evaluated in train mode and its parameters are left untouched.
// With w_a == 0 the discriminator is not consulted at all.
template <typename T>
GeneratorLossParts generator_gradients(Generator<T>& g, Discriminator<T>& d, const FeatureMap<T>& real,
                                       const FeatureMap<T>& fake, const LossWeights& w, AdversarialForm form);

// Loss values only (no gradients), same definitions as above; used as finite-difference oracles.
template <typename T>
GeneratorLossParts generator_objective(Generator<T>& g, Discriminator<T>& d, const FeatureMap<T>& real,
                                       const LossWeights& w, AdversarialForm form);
template <typename T>
double discriminator_objective(Generator<T>& g, Discriminator<T>& d, const FeatureMap<T>& real);

} // namespace flowgan::gan
