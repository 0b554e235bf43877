#pragma once

#include <cstdint>

#include "rbmc/features.hpp"

namespace rbmc {

/// Synthetic clustering data: class centers drawn from a seeded Gaussian
/// scaled by `separation`, frames = center + unit Gaussian noise.
struct SynthConfig {
    std::size_t classes = 1;
    std::size_t items_per_class = 1;
    std::size_t frames_per_item = 1;
    std::size_t dim = 1;
    double separation = 1.0;
    std::uint64_t seed = 0;
};

/// Generates the dataset with ground-truth labels attached. Item ids are
/// c<class>_i<item>, class ids are class<class>, zero-padded.
Dataset make_synthetic_dataset(const SynthConfig& config);

}  // namespace rbmc
