#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rbmc/metrics.hpp"
#include "rbmc/rbm.hpp"

namespace rbmc {

struct KMeansConfig {
    std::size_t k = 1;
    std::size_t max_iters = 300;
    std::uint64_t seed = 0;
    double tol = 1e-6;  // max centroid displacement
};

struct KMeansResult {
    Partition partition;  // cluster ids "0".."k-1"
    /// Within-cluster sum of squares after each assignment step.
    std::vector<double> objective_history;
    std::size_t iterations = 0;
};

/// Lloyd's algorithm with seeded distinct-point initialization. Assignment
/// breaks distance ties toward the smaller centroid index; an empty cluster
/// is re-seeded with the point farthest from its assigned centroid.
/// Deterministic given the seed.
KMeansResult kmeans(std::span<const Supervector> vectors, const KMeansConfig& config);

}  // namespace rbmc
