#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rbmc/rbm.hpp"

namespace rbmc {

/// Symmetric N x N similarity matrix over the items in `ids` (row/column
/// order). Higher scores mean more similar; the diagonal is the self-score.
struct SimilarityMatrix {
    std::vector<std::string> ids;
    std::vector<double> scores;  // row-major N x N

    std::size_t size() const { return ids.size(); }
    double at(std::size_t i, std::size_t j) const { return scores[i * ids.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return scores[i * ids.size() + j]; }
};

enum class Linkage {
    single,   // max of member scores
    average,  // unweighted half/half recursion (WPGMA)
    size_weighted_average,  // size-weighted mean (UPGMA); non-default variant
};

Linkage parse_linkage(const std::string& name, bool size_weighted = false);

struct ThresholdStop {
    double theta = 0.0;  // merge while the best score is >= theta
};

struct NumClustersStop {
    std::size_t k = 1;  // merge until exactly k clusters remain
};

using StopRule = std::variant<ThresholdStop, NumClustersStop>;

struct Merge {
    std::vector<std::string> members_a;
    std::vector<std::string> members_b;
    double score = 0.0;
};

struct ClusterResult {
    /// item_id -> cluster index; indices follow the surviving clusters'
    /// position in the final working-matrix order.
    std::map<std::string, std::size_t> assignment;
    std::vector<Merge> merges;
    std::size_t final_cluster_count = 0;
};

/// u.v / (||u|| ||v||); throws DegenerateVector on a zero-norm input.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// All-pairs cosine scores; diagonal exactly 1, exactly symmetric. Entries
/// are independent of `threads`.
SimilarityMatrix build_similarity_matrix(std::span<const Supervector> vectors,
                                         std::size_t threads = 1);

/// Bottom-up agglomerative clustering. Each step merges the pair of live
/// clusters with maximum similarity (ties: smallest index pair in the
/// current working order); the merged pair's rows/columns are removed and
/// the combined cluster is appended with linkage-updated scores. Stops when
/// the best score drops below the threshold or when k clusters remain.
ClusterResult ahc(const SimilarityMatrix& matrix, Linkage linkage, const StopRule& stop);

/// Threshold sweep sharing one merge sequence: the dendrogram is built once
/// (merge scores are nonincreasing for these linkages) and cut per theta.
/// Results are identical to running ahc per threshold.
std::vector<std::pair<double, ClusterResult>> sweep_threshold(
    const SimilarityMatrix& matrix, Linkage linkage, std::span<const double> thetas);

/// Cluster output CSV: item_id,cluster_index (rows in `ids` order).
void save_cluster_csv(const ClusterResult& result, std::span<const std::string> ids,
                      const std::filesystem::path& path);

/// Reads a cluster output CSV back as item_id -> cluster label.
std::map<std::string, std::string> load_cluster_csv(const std::filesystem::path& path);

/// Merge history CSV: step,score,members_a,members_b with ';'-joined ids.
void save_merge_history_csv(const ClusterResult& result, const std::filesystem::path& path);

}  // namespace rbmc
