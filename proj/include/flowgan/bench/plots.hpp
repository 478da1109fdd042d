#pragma once

#include "flowgan/flowprep/types.hpp"
#include "flowgan/gan/train.hpp"

#include <string>
#include <vector>

namespace flowgan::bench {

// Overlaid histograms of two score sets (normal in blue, abnormal in red).
flowprep::RgbImage score_histogram(const std::vector<double>& normal, const std::vector<double>& abnormal,
                                   const std::string& title, int bins = 40);

// Per-epoch reconstruction, generator-adversarial and discriminator losses, each
// scaled to its own range.
flowprep::RgbImage loss_curves(const gan::TrainingHistory& history, const std::string& title);

} // namespace flowgan::bench
