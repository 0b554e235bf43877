#include "rbmc/kmeans.hpp"

#include <cmath>
#include <limits>

#include "rbmc/errors.hpp"
#include "rbmc/rng.hpp"

namespace rbmc {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
    }
    return acc;
}

}  // namespace

KMeansResult kmeans(std::span<const Supervector> vectors, const KMeansConfig& config) {
    if (vectors.empty()) throw EmptyInput("kmeans: no vectors");
    const std::size_t n = vectors.size();
    const std::size_t dim = vectors.front().values.size();
    if (config.k == 0) throw InvalidConfig("kmeans: k must be >= 1");
    if (config.k > n) {
        throw InvalidConfig("kmeans: k=" + std::to_string(config.k) +
                            " exceeds N=" + std::to_string(n));
    }
    if (config.max_iters == 0) throw InvalidConfig("kmeans: max_iters must be >= 1");
    if (config.tol < 0.0) throw InvalidConfig("kmeans: tol must be >= 0");
    for (const auto& sv : vectors) {
        if (sv.values.size() != dim) {
            throw ShapeError("kmeans: '" + sv.source_item + "' has dimension " +
                             std::to_string(sv.values.size()) + " != " + std::to_string(dim));
        }
    }

    // Distinct-point init: shuffle indices, take the first k.
    Rng rng(config.seed);
    std::vector<std::size_t> init(n);
    for (std::size_t i = 0; i < n; ++i) init[i] = i;
    rng.shuffle(init);
    std::vector<std::vector<double>> centroids(config.k);
    for (std::size_t c = 0; c < config.k; ++c) centroids[c] = vectors[init[c]].values;

    std::vector<std::size_t> assignment(n, 0);
    std::vector<double> point_dist(n, 0.0);
    KMeansResult result;

    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        // Assignment step; objective measured here.
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_c = 0;
            for (std::size_t c = 0; c < config.k; ++c) {
                const double d = squared_distance(vectors[i].values, centroids[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            assignment[i] = best_c;
            point_dist[i] = best;
            objective += best;
        }
        result.objective_history.push_back(objective);
        result.iterations = iter + 1;

        // Update step.
        std::vector<std::vector<double>> sums(config.k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(config.k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assignment[i]];
            const auto& v = vectors[i].values;
            auto& s = sums[assignment[i]];
            for (std::size_t k = 0; k < dim; ++k) s[k] += v[k];
        }

        double movement = 0.0;
        std::vector<double> reseed_dist = point_dist;
        for (std::size_t c = 0; c < config.k; ++c) {
            std::vector<double> next;
            if (counts[c] > 0) {
                next = std::move(sums[c]);
                for (double& s : next) s /= static_cast<double>(counts[c]);
            } else {
                // Re-seed with the farthest point (tie: smallest index);
                // each reseeded point is claimed once.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (reseed_dist[i] > far_d) {
                        far_d = reseed_dist[i];
                        far = i;
                    }
                }
                reseed_dist[far] = -1.0;
                next = vectors[far].values;
            }
            movement = std::max(movement, std::sqrt(squared_distance(next, centroids[c])));
            centroids[c] = std::move(next);
        }
        if (movement <= config.tol) break;
    }

    for (std::size_t i = 0; i < n; ++i) {
        result.partition.assignment[vectors[i].source_item] = std::to_string(assignment[i]);
    }
    if (result.partition.assignment.size() != n) {
        throw DataError("kmeans: duplicate item ids in input vectors");
    }
    return result;
}

}  // namespace rbmc
