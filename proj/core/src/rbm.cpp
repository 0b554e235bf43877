#include "rbmc/rbm.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "rbmc/errors.hpp"
#include "io_util.hpp"

namespace rbmc {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// log(1 + exp(x)) without overflow for large |x|.
double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

void check_visible(const RbmParams& params, std::span<const double> v) {
    if (v.size() != params.visible) {
        throw ShapeError("visible vector dimension " + std::to_string(v.size()) +
                         " != " + std::to_string(params.visible));
    }
}

void check_hidden(const RbmParams& params, std::span<const double> h) {
    if (h.size() != params.hidden) {
        throw ShapeError("hidden vector dimension " + std::to_string(h.size()) +
                         " != " + std::to_string(params.hidden));
    }
}

void check_shape(const RbmParams& params) {
    if (params.visible == 0 || params.hidden == 0) {
        throw ShapeError("RBM must have at least one visible and one hidden unit");
    }
    if (params.weights.size() != params.visible * params.hidden ||
        params.visible_bias.size() != params.visible ||
        params.hidden_bias.size() != params.hidden) {
        throw ShapeError("RBM parameter buffers do not match V=" +
                         std::to_string(params.visible) + " H=" +
                         std::to_string(params.hidden));
    }
}

/// b_h[j] + sum_i v[i] W[i][j] for all j.
std::vector<double> hidden_activation(const RbmParams& params, std::span<const double> v) {
    std::vector<double> act(params.hidden_bias.begin(), params.hidden_bias.end());
    for (std::size_t i = 0; i < params.visible; ++i) {
        const double vi = v[i];
        const double* row = params.weights.data() + i * params.hidden;
        for (std::size_t j = 0; j < params.hidden; ++j) act[j] += vi * row[j];
    }
    return act;
}

}  // namespace

RbmParams RbmParams::zeros(std::size_t visible, std::size_t hidden) {
    RbmParams p;
    p.visible = visible;
    p.hidden = hidden;
    p.weights.assign(visible * hidden, 0.0);
    p.visible_bias.assign(visible, 0.0);
    p.hidden_bias.assign(hidden, 0.0);
    check_shape(p);
    return p;
}

TrainConfig urbm_defaults() {
    TrainConfig c;
    c.epochs = 200;
    c.learning_rate = 0.0005;
    c.weight_decay = 0.0002;
    c.batch_size = 100;
    return c;
}

TrainConfig adaptation_defaults() {
    TrainConfig c;
    c.epochs = 200;
    c.learning_rate = 0.005;
    c.weight_decay = 2e-6;
    c.batch_size = 64;
    return c;
}

double energy(const RbmParams& params, std::span<const double> v,
              std::span<const double> h) {
    check_shape(params);
    check_visible(params, v);
    check_hidden(params, h);
    double quad = 0.0;
    for (std::size_t i = 0; i < params.visible; ++i) {
        const double d = v[i] - params.visible_bias[i];
        quad += d * d;
    }
    double hidden_term = 0.0;
    for (std::size_t j = 0; j < params.hidden; ++j) {
        hidden_term += params.hidden_bias[j] * h[j];
    }
    double cross = 0.0;
    for (std::size_t i = 0; i < params.visible; ++i) {
        const double* row = params.weights.data() + i * params.hidden;
        double acc = 0.0;
        for (std::size_t j = 0; j < params.hidden; ++j) acc += row[j] * h[j];
        cross += v[i] * acc;
    }
    return 0.5 * quad - hidden_term - cross;
}

std::vector<double> hidden_given_visible(const RbmParams& params,
                                         std::span<const double> v) {
    check_shape(params);
    check_visible(params, v);
    std::vector<double> act = hidden_activation(params, v);
    for (double& a : act) a = sigmoid(a);
    return act;
}

std::vector<double> visible_given_hidden(const RbmParams& params,
                                         std::span<const double> h) {
    check_shape(params);
    check_hidden(params, h);
    std::vector<double> mean(params.visible_bias.begin(), params.visible_bias.end());
    for (std::size_t i = 0; i < params.visible; ++i) {
        const double* row = params.weights.data() + i * params.hidden;
        double acc = 0.0;
        for (std::size_t j = 0; j < params.hidden; ++j) acc += row[j] * h[j];
        mean[i] += acc;
    }
    return mean;
}

double free_energy(const RbmParams& params, std::span<const double> v) {
    check_shape(params);
    check_visible(params, v);
    double quad = 0.0;
    for (std::size_t i = 0; i < params.visible; ++i) {
        const double d = v[i] - params.visible_bias[i];
        quad += d * d;
    }
    const std::vector<double> act = hidden_activation(params, v);
    double sp = 0.0;
    for (const double a : act) sp += softplus(a);
    return 0.5 * quad - sp;
}

namespace {

/// CD-k step. k = 1 is the public cd1_update; train honors larger
/// config.cd_steps as a non-default variant. Per sample the chain draws
/// one uniform per hidden unit per step; negative statistics come from the
/// final reconstruction, the logged error from the first.
RbmParams cd_update(const RbmParams& params,
                    std::span<const std::vector<double>> batch,
                    double lr, double wd, std::size_t steps, Rng& rng,
                    Cd1Stats* stats) {
    check_shape(params);
    if (batch.empty()) throw EmptyInput("cd_update: empty batch");
    if (steps == 0) throw InvalidConfig("cd_update: cd_steps must be >= 1");
    for (const auto& v : batch) check_visible(params, v);

    const std::size_t V = params.visible;
    const std::size_t H = params.hidden;
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    std::vector<double> grad_w(V * H, 0.0);   // sum of v p^T - v' p'^T
    std::vector<double> grad_bv(V, 0.0);      // sum of v - v'
    std::vector<double> grad_bh(H, 0.0);      // sum of p - p'
    std::vector<double> h_state(H);

    for (const auto& v : batch) {
        const std::vector<double> pos_p = hidden_given_visible(params, v);
        std::vector<double> probs = pos_p;
        std::vector<double> recon;
        double first_step_error = 0.0;
        for (std::size_t step = 0; step < steps; ++step) {
            for (std::size_t j = 0; j < H; ++j) {
                h_state[j] = rng.next_double() < probs[j] ? 1.0 : 0.0;
            }
            recon = visible_given_hidden(params, h_state);
            probs = hidden_given_visible(params, recon);
            if (step == 0) {
                for (std::size_t i = 0; i < V; ++i) {
                    const double d = v[i] - recon[i];
                    first_step_error += d * d;
                }
            }
        }
        const std::vector<double>& neg_p = probs;

        for (std::size_t i = 0; i < V; ++i) {
            double* row = grad_w.data() + i * H;
            const double vi = v[i];
            const double ri = recon[i];
            for (std::size_t j = 0; j < H; ++j) {
                row[j] += vi * pos_p[j] - ri * neg_p[j];
            }
        }
        for (std::size_t i = 0; i < V; ++i) grad_bv[i] += v[i] - recon[i];
        for (std::size_t j = 0; j < H; ++j) grad_bh[j] += pos_p[j] - neg_p[j];
        if (stats) {
            stats->recon_error_sum += first_step_error;
            stats->frames += 1;
        }
    }

    RbmParams next = params;
    if (lr != 0.0) {
        for (std::size_t k = 0; k < V * H; ++k) {
            next.weights[k] += lr * grad_w[k] * inv_b - lr * wd * next.weights[k];
        }
        for (std::size_t i = 0; i < V; ++i) next.visible_bias[i] += lr * grad_bv[i] * inv_b;
        for (std::size_t j = 0; j < H; ++j) next.hidden_bias[j] += lr * grad_bh[j] * inv_b;
    }
    return next;
}

}  // namespace

RbmParams cd1_update(const RbmParams& params,
                     std::span<const std::vector<double>> batch,
                     double lr, double wd, Rng& rng, Cd1Stats* stats) {
    return cd_update(params, batch, lr, wd, 1, rng, stats);
}

namespace {

RbmParams train_with_rng(RbmParams params, std::span<const std::vector<double>> data,
                         const TrainConfig& config, Rng& rng,
                         std::vector<TrainLogEntry>* log) {
    if (data.empty()) throw EmptyInput("train: no samples");
    if (config.learning_rate <= 0.0) throw InvalidConfig("train: learning_rate must be > 0");
    if (config.weight_decay < 0.0) throw InvalidConfig("train: weight_decay must be >= 0");
    if (config.batch_size == 0) throw InvalidConfig("train: batch_size must be >= 1");
    if (config.cd_steps == 0) throw InvalidConfig("train: cd_steps must be >= 1");
    for (const auto& v : data) check_visible(params, v);

    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::vector<std::vector<double>> batch;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        rng.shuffle(order);

        Cd1Stats stats;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t end = std::min(start + config.batch_size, n);
            batch.clear();
            for (std::size_t k = start; k < end; ++k) batch.push_back(data[order[k]]);
            params = cd_update(params, batch, config.learning_rate,
                               config.weight_decay, config.cd_steps, rng, &stats);
        }
        if (log) {
            const double denom = static_cast<double>(stats.frames) *
                                 static_cast<double>(params.visible);
            log->push_back({epoch + 1, stats.recon_error_sum / denom});
        }
    }
    return params;
}

}  // namespace

RbmParams train(const RbmParams& init, std::span<const std::vector<double>> data,
                const TrainConfig& config, std::vector<TrainLogEntry>* log) {
    check_shape(init);
    Rng rng(config.seed);
    return train_with_rng(init, data, config, rng, log);
}

RbmParams train_urbm(const Dataset& training, std::size_t hidden_units,
                     const TrainConfig& config, std::vector<TrainLogEntry>* log) {
    validate_dataset(training);
    if (hidden_units == 0) throw InvalidConfig("train_urbm: hidden_units must be >= 1");
    const std::size_t visible = training.dim();

    std::vector<std::vector<double>> pooled;
    pooled.reserve(training.total_frames());
    for (const auto& item : training.items) {
        for (const auto& frame : item.frames) pooled.push_back(frame);
    }

    Rng rng(config.seed);
    RbmParams params = RbmParams::zeros(visible, hidden_units);
    for (double& w : params.weights) w = 0.01 * rng.next_gaussian();
    return train_with_rng(std::move(params), pooled, config, rng, log);
}

RbmParams adapt(const RbmParams& urbm, const ItemFeatures& item,
                const TrainConfig& config, std::vector<TrainLogEntry>* log) {
    check_shape(urbm);
    if (item.frames.empty()) throw EmptyInput("adapt: item '" + item.item_id + "' has no frames");
    TrainConfig per_item = config;
    per_item.seed = derive_seed(config.seed, item.item_id);
    Rng rng(per_item.seed);
    return train_with_rng(urbm, item.frames, per_item, rng, log);
}

Supervector extract_supervector(const RbmParams& params, const RbmParams* urbm,
                                bool center, const std::string& source_item) {
    check_shape(params);
    if (center) {
        if (urbm == nullptr) {
            throw ShapeError("extract_supervector: centering requires the universal model");
        }
        if (urbm->visible != params.visible || urbm->hidden != params.hidden) {
            throw ShapeError("extract_supervector: universal model shape mismatch");
        }
    }
    Supervector sv;
    sv.source_item = source_item;
    sv.values.reserve(params.weights.size() + params.visible + params.hidden);
    sv.values.insert(sv.values.end(), params.weights.begin(), params.weights.end());
    sv.values.insert(sv.values.end(), params.visible_bias.begin(), params.visible_bias.end());
    sv.values.insert(sv.values.end(), params.hidden_bias.begin(), params.hidden_bias.end());
    if (center) {
        std::size_t k = 0;
        for (const double w : urbm->weights) sv.values[k++] -= w;
        for (const double b : urbm->visible_bias) sv.values[k++] -= b;
        for (const double b : urbm->hidden_bias) sv.values[k++] -= b;
    }
    return sv;
}

RbmParams unflatten_supervector(const Supervector& sv, std::size_t visible,
                                std::size_t hidden) {
    const std::size_t expected = visible * hidden + visible + hidden;
    if (sv.values.size() != expected) {
        throw ShapeError("unflatten_supervector: dimension " +
                         std::to_string(sv.values.size()) + " != " +
                         std::to_string(expected));
    }
    RbmParams params = RbmParams::zeros(visible, hidden);
    auto it = sv.values.begin();
    std::copy(it, it + static_cast<std::ptrdiff_t>(visible * hidden), params.weights.begin());
    it += static_cast<std::ptrdiff_t>(visible * hidden);
    std::copy(it, it + static_cast<std::ptrdiff_t>(visible), params.visible_bias.begin());
    it += static_cast<std::ptrdiff_t>(visible);
    std::copy(it, it + static_cast<std::ptrdiff_t>(hidden), params.hidden_bias.begin());
    return params;
}

namespace {
constexpr char kModelMagic[4] = {'R', 'B', 'M', 'C'};
constexpr char kSupervectorMagic[4] = {'R', 'B', 'S', 'V'};
constexpr std::uint32_t kModelVersion = 1;
constexpr std::uint32_t kSupervectorVersion = 1;
}  // namespace

void save_rbm(const RbmParams& params, const std::filesystem::path& path,
              const TrainConfig* config) {
    check_shape(params);
    auto out = io::open_output(path, true);
    io::write_bytes(out, kModelMagic, 4);
    io::write_le<std::uint32_t>(out, kModelVersion);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.visible));
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.hidden));
    for (const double w : params.weights) io::write_f64_le(out, w);
    for (const double b : params.visible_bias) io::write_f64_le(out, b);
    for (const double b : params.hidden_bias) io::write_f64_le(out, b);
    if (!out) throw IoError("write failed: " + path.string());
    if (config) {
        save_train_config(*config, path.string() + ".cfg");
    }
}

RbmParams load_rbm(const std::filesystem::path& path) {
    auto in = io::open_input(path, true);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0) {
        throw FormatError(path.string() + ": bad magic (expected RBMC)");
    }
    std::uint32_t version = 0, v32 = 0, h32 = 0;
    if (!io::read_le(in, version) || !io::read_le(in, v32) || !io::read_le(in, h32)) {
        throw FormatError(path.string() + ": truncated header");
    }
    if (version != kModelVersion) {
        throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
    }
    if (v32 == 0 || h32 == 0) throw FormatError(path.string() + ": zero-sized layer");
    RbmParams params = RbmParams::zeros(v32, h32);
    for (double& w : params.weights) {
        if (!io::read_f64_le(in, w)) throw FormatError(path.string() + ": truncated weights");
    }
    for (double& b : params.visible_bias) {
        if (!io::read_f64_le(in, b)) throw FormatError(path.string() + ": truncated visible bias");
    }
    for (double& b : params.hidden_bias) {
        if (!io::read_f64_le(in, b)) throw FormatError(path.string() + ": truncated hidden bias");
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError(path.string() + ": trailing bytes");
    }
    return params;
}

void save_train_config(const TrainConfig& config, const std::filesystem::path& path) {
    auto out = io::open_output(path, false);
    out << "epochs = " << config.epochs << "\n"
        << "learning_rate = " << io::format_double(config.learning_rate) << "\n"
        << "weight_decay = " << io::format_double(config.weight_decay) << "\n"
        << "batch_size = " << config.batch_size << "\n"
        << "seed = " << config.seed << "\n"
        << "cd_steps = " << config.cd_steps << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

TrainConfig load_train_config(const std::filesystem::path& path) {
    auto in = io::open_input(path, false);
    TrainConfig config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto stripped = io::strip_cr(line);
        if (stripped.empty()) continue;
        const std::string context = path.string() + ":" + std::to_string(lineno);
        const std::size_t eq = stripped.find('=');
        if (eq == std::string_view::npos) throw FormatError(context + ": expected key = value");
        auto trim = [](std::string_view s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
            return s;
        };
        const auto key = trim(stripped.substr(0, eq));
        const auto value = trim(stripped.substr(eq + 1));
        if (key == "epochs") config.epochs = io::parse_u64(value, context);
        else if (key == "learning_rate") config.learning_rate = io::parse_double(value, context);
        else if (key == "weight_decay") config.weight_decay = io::parse_double(value, context);
        else if (key == "batch_size") config.batch_size = io::parse_u64(value, context);
        else if (key == "seed") config.seed = io::parse_u64(value, context);
        else if (key == "cd_steps") config.cd_steps = io::parse_u64(value, context);
        else throw FormatError(context + ": unknown key '" + std::string(key) + "'");
    }
    return config;
}

void save_supervectors(std::span<const Supervector> vectors,
                       const std::filesystem::path& path) {
    if (vectors.empty()) throw EmptyInput("save_supervectors: no vectors");
    const std::size_t dim = vectors.front().values.size();
    auto out = io::open_output(path, true);
    io::write_bytes(out, kSupervectorMagic, 4);
    io::write_le<std::uint32_t>(out, kSupervectorVersion);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    io::write_le<std::uint64_t>(out, vectors.size());
    for (const auto& sv : vectors) {
        if (sv.values.size() != dim) {
            throw ShapeError("save_supervectors: mixed dimensions (" +
                             std::to_string(sv.values.size()) + " vs " +
                             std::to_string(dim) + ")");
        }
        if (sv.source_item.size() > UINT16_MAX) {
            throw FormatError("save_supervectors: item_id longer than 65535 bytes");
        }
        io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(sv.source_item.size()));
        io::write_bytes(out, sv.source_item.data(), sv.source_item.size());
        for (const double v : sv.values) io::write_f64_le(out, v);
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Supervector> load_supervectors(const std::filesystem::path& path) {
    auto in = io::open_input(path, true);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kSupervectorMagic, 4) != 0) {
        throw FormatError(path.string() + ": bad magic (expected RBSV)");
    }
    std::uint32_t version = 0, dim = 0;
    std::uint64_t count = 0;
    if (!io::read_le(in, version) || !io::read_le(in, dim) || !io::read_le(in, count)) {
        throw FormatError(path.string() + ": truncated header");
    }
    if (version != kSupervectorVersion) {
        throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
    }
    std::vector<Supervector> vectors;
    vectors.reserve(count);
    for (std::uint64_t r = 0; r < count; ++r) {
        const std::string context = path.string() + ": record " + std::to_string(r);
        std::uint16_t id_len = 0;
        if (!io::read_le(in, id_len)) throw FormatError(context + ": truncated");
        Supervector sv;
        sv.source_item.resize(id_len);
        if (!in.read(sv.source_item.data(), id_len)) {
            throw FormatError(context + ": truncated item_id");
        }
        sv.values.resize(dim);
        for (std::uint32_t k = 0; k < dim; ++k) {
            if (!io::read_f64_le(in, sv.values[k])) {
                throw FormatError(context + ": truncated values");
            }
        }
        vectors.push_back(std::move(sv));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError(path.string() + ": trailing bytes after last record");
    }
    return vectors;
}

void save_training_log(std::span<const TrainLogEntry> log,
                       const std::filesystem::path& path) {
    auto out = io::open_output(path, false);
    out << "epoch,mean_reconstruction_error\n";
    for (const auto& entry : log) {
        out << entry.epoch << ',' << io::format_double(entry.mean_reconstruction_error) << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace rbmc
