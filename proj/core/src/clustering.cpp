#include "rbmc/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "rbmc/errors.hpp"
#include "io_util.hpp"

namespace rbmc {

Linkage parse_linkage(const std::string& name, bool size_weighted) {
    if (name == "single") {
        if (size_weighted) throw InvalidConfig("size-weighted applies to average linkage only");
        return Linkage::single;
    }
    if (name == "average") {
        return size_weighted ? Linkage::size_weighted_average : Linkage::average;
    }
    throw InvalidConfig("unknown linkage '" + name + "' (expected single or average)");
}

namespace {

double cosine_from_norms(std::span<const double> u, std::span<const double> v,
                         double norm_u, double norm_v) {
    double dot = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) dot += u[k] * v[k];
    return dot / (norm_u * norm_v);
}

double vector_norm(std::span<const double> u) {
    double sq = 0.0;
    for (const double x : u) sq += x * x;
    return std::sqrt(sq);
}

void validate_matrix(const SimilarityMatrix& m) {
    const std::size_t n = m.size();
    if (n == 0) throw EmptyInput("similarity matrix is empty");
    if (m.scores.size() != n * n) {
        throw MatrixError("similarity matrix buffer is " + std::to_string(m.scores.size()) +
                          " entries for N=" + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double s = m.at(i, j);
            if (!std::isfinite(s)) {
                throw MatrixError("similarity matrix has a non-finite entry at (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")");
            }
            if (j > i && s != m.at(j, i)) {
                throw MatrixError("similarity matrix is not symmetric at (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
}

double linkage_score(Linkage linkage, double s_a, double s_b,
                     std::size_t size_a, std::size_t size_b) {
    switch (linkage) {
        case Linkage::single:
            return std::max(s_a, s_b);
        case Linkage::average:
            return 0.5 * (s_a + s_b);
        case Linkage::size_weighted_average:
            return (static_cast<double>(size_a) * s_a + static_cast<double>(size_b) * s_b) /
                   static_cast<double>(size_a + size_b);
    }
    throw InvalidConfig("unhandled linkage");
}

/// Working state of the merge loop. Clusters live in fixed slots (a merge
/// reuses the first slot); `order` tracks the working-matrix order: merged
/// rows/columns are removed and the combined cluster is appended at the end.
class AhcEngine {
public:
    AhcEngine(const SimilarityMatrix& m, Linkage linkage)
        : n_(m.size()), linkage_(linkage), scores_(m.scores), order_(m.size()),
          members_(m.size()) {
        for (std::size_t i = 0; i < n_; ++i) {
            order_[i] = i;
            members_[i] = {i};
        }
    }

    std::size_t live() const { return order_.size(); }

    /// Best live pair by maximum score, ties to the smallest (p, q) position
    /// pair in the current order. Returns false when fewer than 2 live.
    bool best_pair(std::size_t& p_out, std::size_t& q_out, double& score_out) const {
        const std::size_t m = order_.size();
        if (m < 2) return false;
        double best = -std::numeric_limits<double>::infinity();
        std::size_t bp = 0, bq = 1;
        bool found = false;
        for (std::size_t p = 0; p + 1 < m; ++p) {
            const std::size_t a = order_[p];
            for (std::size_t q = p + 1; q < m; ++q) {
                const double s = scores_[a * n_ + order_[q]];
                if (!found || s > best) {
                    best = s;
                    bp = p;
                    bq = q;
                    found = true;
                }
            }
        }
        p_out = bp;
        q_out = bq;
        score_out = best;
        return true;
    }

    /// Merges the clusters at positions p < q of the current order.
    void merge(std::size_t p, std::size_t q, double score) {
        const std::size_t a = order_[p];
        const std::size_t b = order_[q];
        merge_slots_.emplace_back(a, b, score);

        for (const std::size_t pos_x : order_) {
            if (pos_x == a || pos_x == b) continue;
            const double s = linkage_score(linkage_, scores_[a * n_ + pos_x],
                                           scores_[b * n_ + pos_x],
                                           members_[a].size(), members_[b].size());
            scores_[a * n_ + pos_x] = s;
            scores_[pos_x * n_ + a] = s;
        }
        members_[a].insert(members_[a].end(), members_[b].begin(), members_[b].end());
        members_[b].clear();
        order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(q));
        order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(p));
        order_.push_back(a);
    }

    /// (slot_a, slot_b, score) per merge, in merge order.
    const std::vector<std::tuple<std::size_t, std::size_t, double>>& merge_slots() const {
        return merge_slots_;
    }

    /// Member original indices of the cluster at position `pos` of the
    /// current order.
    const std::vector<std::size_t>& member_indices_at(std::size_t pos) const {
        return members_[order_[pos]];
    }

    ClusterResult result(std::span<const std::string> ids) const {
        ClusterResult r;
        r.final_cluster_count = order_.size();
        for (std::size_t pos = 0; pos < order_.size(); ++pos) {
            for (const std::size_t idx : members_[order_[pos]]) {
                r.assignment[ids[idx]] = pos;
            }
        }
        return r;
    }

private:
    std::size_t n_;
    Linkage linkage_;
    std::vector<double> scores_;
    std::vector<std::size_t> order_;
    std::vector<std::vector<std::size_t>> members_;
    std::vector<std::tuple<std::size_t, std::size_t, double>> merge_slots_;
};

/// Replays a recorded merge-slot sequence to recover member lists and the
/// final working order without rescoring. Used by the threshold sweep.
class MergeReplay {
public:
    explicit MergeReplay(std::size_t n) : order_(n), members_(n) {
        for (std::size_t i = 0; i < n; ++i) {
            order_[i] = i;
            members_[i] = {i};
        }
    }

    void apply(std::size_t slot_a, std::size_t slot_b) {
        auto it_b = std::find(order_.begin(), order_.end(), slot_b);
        order_.erase(it_b);
        auto it_a = std::find(order_.begin(), order_.end(), slot_a);
        order_.erase(it_a);
        order_.push_back(slot_a);
        members_[slot_a].insert(members_[slot_a].end(), members_[slot_b].begin(),
                                members_[slot_b].end());
        members_[slot_b].clear();
    }

    const std::vector<std::size_t>& members(std::size_t slot) const { return members_[slot]; }

    ClusterResult result(std::span<const std::string> ids) const {
        ClusterResult r;
        r.final_cluster_count = order_.size();
        for (std::size_t pos = 0; pos < order_.size(); ++pos) {
            for (const std::size_t idx : members_[order_[pos]]) {
                r.assignment[ids[idx]] = pos;
            }
        }
        return r;
    }

private:
    std::vector<std::size_t> order_;
    std::vector<std::vector<std::size_t>> members_;
};

std::vector<std::string> id_subset(std::span<const std::string> ids,
                                   const std::vector<std::size_t>& indices) {
    std::vector<std::string> out;
    out.reserve(indices.size());
    for (const std::size_t idx : indices) out.push_back(ids[idx]);
    return out;
}

}  // namespace

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ShapeError("cosine_similarity: dimensions " + std::to_string(u.size()) +
                         " vs " + std::to_string(v.size()));
    }
    if (u.empty()) throw ShapeError("cosine_similarity: empty vectors");
    const double norm_u = vector_norm(u);
    const double norm_v = vector_norm(v);
    if (norm_u == 0.0 || norm_v == 0.0) {
        throw DegenerateVector("cosine_similarity: zero-norm vector");
    }
    return cosine_from_norms(u, v, norm_u, norm_v);
}

SimilarityMatrix build_similarity_matrix(std::span<const Supervector> vectors,
                                         std::size_t threads) {
    if (vectors.size() < 2) throw EmptyInput("build_similarity_matrix: need at least 2 vectors");
    const std::size_t n = vectors.size();
    const std::size_t dim = vectors.front().values.size();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (vectors[i].values.size() != dim) {
            throw ShapeError("build_similarity_matrix: '" + vectors[i].source_item +
                             "' has dimension " + std::to_string(vectors[i].values.size()) +
                             " != " + std::to_string(dim));
        }
        norms[i] = vector_norm(vectors[i].values);
        if (norms[i] == 0.0) {
            throw DegenerateVector("build_similarity_matrix: zero-norm supervector for item '" +
                                   vectors[i].source_item + "'");
        }
        if (!std::isfinite(norms[i])) {
            throw MatrixError("build_similarity_matrix: non-finite norm for item '" +
                              vectors[i].source_item + "'");
        }
    }

    SimilarityMatrix m;
    m.ids.reserve(n);
    for (const auto& sv : vectors) m.ids.push_back(sv.source_item);
    m.scores.assign(n * n, 0.0);

    const auto fill_rows = [&](std::size_t row_begin, std::size_t row_end) {
        for (std::size_t i = row_begin; i < row_end; ++i) {
            m.scores[i * n + i] = 1.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                m.scores[i * n + j] = cosine_from_norms(vectors[i].values, vectors[j].values,
                                                        norms[i], norms[j]);
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
    if (workers == 1) {
        fill_rows(0, n);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (n + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(begin + chunk, n);
            if (begin >= end) break;
            pool.emplace_back(fill_rows, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            m.scores[j * n + i] = m.scores[i * n + j];
        }
    }
    for (const double s : m.scores) {
        if (!std::isfinite(s)) {
            throw MatrixError("build_similarity_matrix: non-finite score");
        }
    }
    return m;
}

ClusterResult ahc(const SimilarityMatrix& matrix, Linkage linkage, const StopRule& stop) {
    validate_matrix(matrix);
    const std::size_t n = matrix.size();
    if (const auto* by_k = std::get_if<NumClustersStop>(&stop)) {
        if (by_k->k == 0) throw InvalidStop("num_clusters stop: k must be >= 1");
        if (by_k->k > n) {
            throw InvalidStop("num_clusters stop: k=" + std::to_string(by_k->k) +
                              " exceeds N=" + std::to_string(n));
        }
    }

    AhcEngine engine(matrix, linkage);
    std::vector<Merge> merges;
    while (true) {
        if (const auto* by_k = std::get_if<NumClustersStop>(&stop)) {
            if (engine.live() == by_k->k) break;
        }
        std::size_t p = 0, q = 0;
        double score = 0.0;
        if (!engine.best_pair(p, q, score)) break;
        if (const auto* by_theta = std::get_if<ThresholdStop>(&stop)) {
            if (score < by_theta->theta) break;
        }
        Merge record;
        record.members_a = id_subset(matrix.ids, engine.member_indices_at(p));
        record.members_b = id_subset(matrix.ids, engine.member_indices_at(q));
        record.score = score;
        merges.push_back(std::move(record));
        engine.merge(p, q, score);
    }

    ClusterResult result = engine.result(matrix.ids);
    result.merges = std::move(merges);
    return result;
}

std::vector<std::pair<double, ClusterResult>> sweep_threshold(
    const SimilarityMatrix& matrix, Linkage linkage, std::span<const double> thetas) {
    if (thetas.empty()) throw EmptyInput("sweep_threshold: no thresholds given");
    validate_matrix(matrix);

    // Full dendrogram once; merge scores are nonincreasing for these
    // linkages, so each theta cut is a prefix of the merge sequence.
    AhcEngine engine(matrix, linkage);
    std::vector<Merge> merges;
    while (true) {
        std::size_t p = 0, q = 0;
        double score = 0.0;
        if (!engine.best_pair(p, q, score)) break;
        Merge record;
        record.members_a = id_subset(matrix.ids, engine.member_indices_at(p));
        record.members_b = id_subset(matrix.ids, engine.member_indices_at(q));
        record.score = score;
        merges.push_back(std::move(record));
        engine.merge(p, q, score);
    }
    const auto& slots = engine.merge_slots();

    std::vector<std::pair<double, ClusterResult>> out;
    out.reserve(thetas.size());
    for (const double theta : thetas) {
        std::size_t cut = 0;
        while (cut < merges.size() && merges[cut].score >= theta) ++cut;
        MergeReplay replay(matrix.size());
        for (std::size_t s = 0; s < cut; ++s) {
            replay.apply(std::get<0>(slots[s]), std::get<1>(slots[s]));
        }
        ClusterResult result = replay.result(matrix.ids);
        result.merges.assign(merges.begin(), merges.begin() + static_cast<std::ptrdiff_t>(cut));
        out.emplace_back(theta, std::move(result));
    }
    return out;
}

void save_cluster_csv(const ClusterResult& result, std::span<const std::string> ids,
                      const std::filesystem::path& path) {
    auto out = io::open_output(path, false);
    out << "item_id,cluster_index\n";
    for (const auto& id : ids) {
        const auto it = result.assignment.find(id);
        if (it == result.assignment.end()) {
            throw KeyError("save_cluster_csv: no assignment for item '" + id + "'");
        }
        out << id << ',' << it->second << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::map<std::string, std::string> load_cluster_csv(const std::filesystem::path& path) {
    auto in = io::open_input(path, false);
    std::string line;
    if (!std::getline(in, line) || io::strip_cr(line) != "item_id,cluster_index") {
        throw FormatError(path.string() + ":1: expected header item_id,cluster_index");
    }
    std::map<std::string, std::string> assignment;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto stripped = io::strip_cr(line);
        if (stripped.empty()) continue;
        const std::string context = path.string() + ":" + std::to_string(lineno);
        const auto fields = io::split(stripped, ',');
        if (fields.size() != 2) throw FormatError(context + ": expected 2 fields");
        if (!assignment.emplace(std::string(fields[0]), std::string(fields[1])).second) {
            throw FormatError(context + ": duplicate item_id");
        }
    }
    if (assignment.empty()) throw EmptyInput(path.string() + ": no assignment rows");
    return assignment;
}

void save_merge_history_csv(const ClusterResult& result, const std::filesystem::path& path) {
    auto out = io::open_output(path, false);
    out << "step,score,members_a,members_b\n";
    std::size_t step = 1;
    for (const auto& merge : result.merges) {
        out << step++ << ',' << io::format_double(merge.score) << ',';
        for (std::size_t k = 0; k < merge.members_a.size(); ++k) {
            if (k) out << ';';
            out << merge.members_a[k];
        }
        out << ',';
        for (std::size_t k = 0; k < merge.members_b.size(); ++k) {
            if (k) out << ';';
            out << merge.members_b[k];
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace rbmc
