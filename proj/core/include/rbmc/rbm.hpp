#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rbmc/features.hpp"
#include "rbmc/rng.hpp"

namespace rbmc {

/// Gaussian-Bernoulli RBM parameters: real-valued visible units with unit
/// variance, binary hidden units, a single visible-to-hidden weight matrix.
struct RbmParams {
    std::size_t visible = 0;
    std::size_t hidden = 0;
    std::vector<double> weights;      // row-major V x H
    std::vector<double> visible_bias; // V
    std::vector<double> hidden_bias;  // H

    double w(std::size_t i, std::size_t j) const { return weights[i * hidden + j]; }
    double& w(std::size_t i, std::size_t j) { return weights[i * hidden + j]; }

    static RbmParams zeros(std::size_t visible, std::size_t hidden);
};

struct TrainConfig {
    std::size_t epochs = 200;
    double learning_rate = 0.0005;
    double weight_decay = 0.0002;
    std::size_t batch_size = 100;
    std::uint64_t seed = 0;
    std::size_t cd_steps = 1;
};

/// Universal-model defaults: 200 epochs, lr 0.0005, decay 0.0002, batch 100.
TrainConfig urbm_defaults();

/// Per-item adaptation defaults: 200 epochs, lr 0.005, decay 2e-6, batch 64.
TrainConfig adaptation_defaults();

/// Flattened embedding of one RBM: row-major W, then visible bias, then
/// hidden bias; dimension V*H + V + H.
struct Supervector {
    std::string source_item;
    std::vector<double> values;
};

struct TrainLogEntry {
    std::size_t epoch = 0;  // 1-based
    double mean_reconstruction_error = 0.0;
};

/// E(v, h) = 0.5*||v - b_v||^2 - b_h.h - v^T W h, with h in {0,1}^H.
double energy(const RbmParams& params, std::span<const double> v,
              std::span<const double> h);

/// p(h_j = 1 | v) = sigmoid(b_h[j] + sum_i v[i] W[i][j]).
std::vector<double> hidden_given_visible(const RbmParams& params,
                                         std::span<const double> v);

/// Gaussian means of the visible units: b_v[i] + sum_j W[i][j] h[j].
std::vector<double> visible_given_hidden(const RbmParams& params,
                                         std::span<const double> h);

/// F(v) = 0.5*||v - b_v||^2 - sum_j softplus(b_h[j] + (v^T W)_j), so that
/// exp(-F(v)) equals the sum of exp(-E(v,h)) over all hidden states.
double free_energy(const RbmParams& params, std::span<const double> v);

struct Cd1Stats {
    double recon_error_sum = 0.0;  // sum over frames of ||v - v'||^2
    std::size_t frames = 0;
};

/// One CD-1 gradient step on a batch. Positive statistics use hidden
/// probabilities; the Gibbs step samples binary hidden states (one uniform
/// draw per sample per hidden unit, samples in batch order, units in index
/// order), reconstructs with visible means (no noise), and recomputes hidden
/// probabilities for the negative statistics. Weight decay applies to W
/// only. lr == 0 returns the input bit-exactly; the rng still advances.
RbmParams cd1_update(const RbmParams& params,
                     std::span<const std::vector<double>> batch,
                     double lr, double wd, Rng& rng, Cd1Stats* stats = nullptr);

/// Seeded minibatch contrastive-divergence training: each epoch shuffles
/// the sample order (Rng::shuffle) and sweeps consecutive batches of
/// config.batch_size, the final short batch included. config.cd_steps
/// selects CD-k (1 is the default and the only value used by the standard
/// pipeline). Per-epoch mean reconstruction error (per-element MSE) is
/// appended to *log when given.
RbmParams train(const RbmParams& init, std::span<const std::vector<double>> data,
                const TrainConfig& config, std::vector<TrainLogEntry>* log = nullptr);

/// Universal model: pools all frames (item order, then frame order), draws
/// W i.i.d. from N(0, 0.01^2) with the seeded stream (row-major order),
/// zero biases, then trains with the same stream.
RbmParams train_urbm(const Dataset& training, std::size_t hidden_units,
                     const TrainConfig& config, std::vector<TrainLogEntry>* log = nullptr);

/// Continues training from the universal model on one item's frames. The
/// effective seed is derive_seed(config.seed, item_id), so items may be
/// adapted in any order or in parallel with identical results.
RbmParams adapt(const RbmParams& urbm, const ItemFeatures& item,
                const TrainConfig& config, std::vector<TrainLogEntry>* log = nullptr);

/// Concatenates row-major W, b_v, b_h. With center = true the universal
/// model's supervector is subtracted elementwise (urbm must be non-null and
/// shape-matched); centering restores cosine discrimination between adapted
/// models that all start at the same universal parameters.
Supervector extract_supervector(const RbmParams& params, const RbmParams* urbm,
                                bool center, const std::string& source_item = {});

/// Inverse of extract_supervector for an uncentered vector.
RbmParams unflatten_supervector(const Supervector& sv, std::size_t visible,
                                std::size_t hidden);

/// Model checkpoint: magic RBMC, version 1, V, H, then W row-major, b_v,
/// b_h as little-endian doubles. save_rbm also writes a `<path>.cfg` text
/// sidecar when a config is supplied.
void save_rbm(const RbmParams& params, const std::filesystem::path& path,
              const TrainConfig* config = nullptr);
RbmParams load_rbm(const std::filesystem::path& path);

void save_train_config(const TrainConfig& config, const std::filesystem::path& path);
TrainConfig load_train_config(const std::filesystem::path& path);

/// Supervector file: magic RBSV, version 1, dim, count, then per record the
/// item id (u16 length + bytes) and dim little-endian doubles.
void save_supervectors(std::span<const Supervector> vectors,
                       const std::filesystem::path& path);
std::vector<Supervector> load_supervectors(const std::filesystem::path& path);

/// Training log CSV: epoch,mean_reconstruction_error.
void save_training_log(std::span<const TrainLogEntry> log,
                       const std::filesystem::path& path);

}  // namespace rbmc
