#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace rbmc {

/// A full assignment of items to cluster labels.
struct Partition {
    std::map<std::string, std::string> assignment;  // item_id -> cluster_id

    std::size_t n_items() const { return assignment.size(); }
    std::size_t n_clusters() const;
};

struct PrfScores {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;  // harmonic mean; 0 when precision + recall == 0
};

struct EvalReport {
    PrfScores pairwise;
    PrfScores bcubed;
    std::size_t n_items = 0;
    std::size_t n_pred_clusters = 0;
    std::size_t n_true_clusters = 0;
};

/// Pairwise precision/recall over all unordered item pairs' co-clustering
/// decisions. Degenerate denominators: precision is 1 when pred has no
/// co-clustered pair, recall is 1 when truth has none.
PrfScores pairwise_f(const Partition& pred, const Partition& truth);

/// BCubed precision/recall: per-item overlap ratios averaged over items.
PrfScores bcubed_f(const Partition& pred, const Partition& truth);

EvalReport evaluate(const Partition& pred, const Partition& truth);

/// Single-row CSV: Fp_precision,Fp_recall,Fp,Fb_precision,Fb_recall,Fb,
/// n_items,n_pred,n_true.
void save_eval_report_csv(const EvalReport& report, const std::filesystem::path& path);

std::string format_eval_report(const EvalReport& report);

}  // namespace rbmc
