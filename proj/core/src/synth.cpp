#include "rbmc/synth.hpp"

#include <cstdio>

#include "rbmc/errors.hpp"
#include "rbmc/rng.hpp"

namespace rbmc {

namespace {

std::string padded(std::size_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*zu", width, value);
    return buf;
}

}  // namespace

Dataset make_synthetic_dataset(const SynthConfig& config) {
    if (config.classes == 0 || config.items_per_class == 0 ||
        config.frames_per_item == 0 || config.dim == 0) {
        throw InvalidConfig("synth: all counts must be >= 1");
    }
    Rng rng(config.seed);

    std::vector<std::vector<double>> centers(config.classes);
    for (auto& center : centers) {
        center.resize(config.dim);
        for (double& x : center) x = config.separation * rng.next_gaussian();
    }

    Dataset dataset;
    dataset.labels.emplace();
    for (std::size_t c = 0; c < config.classes; ++c) {
        const std::string class_id = "class" + padded(c, 3);
        for (std::size_t i = 0; i < config.items_per_class; ++i) {
            ItemFeatures item;
            item.item_id = "c" + padded(c, 3) + "_i" + padded(i, 3);
            item.frames.resize(config.frames_per_item);
            for (auto& frame : item.frames) {
                frame.resize(config.dim);
                for (std::size_t k = 0; k < config.dim; ++k) {
                    frame[k] = centers[c][k] + rng.next_gaussian();
                }
            }
            (*dataset.labels)[item.item_id] = class_id;
            dataset.items.push_back(std::move(item));
        }
    }
    return dataset;
}

}  // namespace rbmc
