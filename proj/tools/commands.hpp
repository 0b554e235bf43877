#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rbmc/clustering.hpp"
#include "rbmc/features.hpp"
#include "rbmc/kmeans.hpp"
#include "rbmc/rbm.hpp"
#include "rbmc/synth.hpp"

namespace rbmctool {

// Stage commands write fixed filenames under --out-dir so that the staged
// invocations compose to exactly the pipeline output.

inline constexpr const char* kMvnStatsFile = "mvn_stats.csv";
inline constexpr const char* kTrainNormalizedStem = "train_normalized";
inline constexpr const char* kTestNormalizedStem = "test_normalized";
inline constexpr const char* kUrbmFile = "urbm.rbmc";
inline constexpr const char* kUrbmLogFile = "urbm_training_log.csv";
inline constexpr const char* kSupervectorsFile = "supervectors.rbsv";
inline constexpr const char* kClustersFile = "clusters.csv";
inline constexpr const char* kMergesFile = "merges.csv";
inline constexpr const char* kEvalCsvFile = "eval.csv";
inline constexpr const char* kEvalTxtFile = "eval.txt";
inline constexpr const char* kSweepDir = "sweep";
inline constexpr const char* kSweepSummaryFile = "sweep_summary.csv";
inline constexpr const char* kBestThetaFile = "best_theta.txt";
inline constexpr const char* kComparisonFile = "comparison.csv";

struct SynthOptions {
    rbmc::SynthConfig synth;
    std::filesystem::path features_out;
    std::filesystem::path labels_out;
    std::string format = "csv";
};

struct NormalizeOptions {
    std::filesystem::path train;
    std::filesystem::path test;  // optional; empty = none
    std::filesystem::path out_dir;
    std::string format = "csv";
    bool refit_on_test = false;  // ablation: refit the stats on the test data
};

struct TrainUrbmOptions {
    std::filesystem::path features;
    std::filesystem::path out_dir;
    std::string format = "csv";
    std::size_t hidden = 400;
    rbmc::TrainConfig config = rbmc::urbm_defaults();
};

struct AdaptExtractOptions {
    std::filesystem::path features;
    std::filesystem::path urbm;
    std::filesystem::path out_dir;
    std::string format = "csv";
    rbmc::TrainConfig config = rbmc::adaptation_defaults();
    std::size_t threads = 1;
    bool center = true;
};

struct StopSpec {
    std::optional<double> threshold;
    std::optional<std::size_t> num_clusters;
    std::vector<double> sweep;

    /// Exactly one of the three must be present.
    void validate() const;
};

struct ClusterOptions {
    std::filesystem::path supervectors;
    std::filesystem::path out_dir;
    std::string linkage = "average";
    bool size_weighted = false;
    StopSpec stop;
    std::filesystem::path labels;  // optional; enables per-theta sweep evaluation
};

struct EvaluateOptions {
    std::filesystem::path pred;
    std::filesystem::path labels;
    std::filesystem::path out_dir;
};

struct PipelineOptions {
    std::filesystem::path train;
    std::filesystem::path test;
    std::filesystem::path labels;  // optional unless evaluate is set
    std::filesystem::path out_dir;
    std::string format = "csv";
    std::size_t hidden = 400;
    rbmc::TrainConfig urbm_config = rbmc::urbm_defaults();
    rbmc::TrainConfig adapt_config = rbmc::adaptation_defaults();
    std::string linkage = "average";
    bool size_weighted = false;
    StopSpec stop;
    std::size_t threads = 1;
    bool center = true;
    bool refit_on_test = false;
    bool evaluate = false;        // require labels and fail without them
    bool kmeans_baseline = false; // also run k-means with the true K
};

void cmd_synth(const SynthOptions& options);
void cmd_normalize(const NormalizeOptions& options);
void cmd_train_urbm(const TrainUrbmOptions& options);
void cmd_adapt_extract(const AdaptExtractOptions& options);
void cmd_cluster(const ClusterOptions& options);
void cmd_evaluate(const EvaluateOptions& options);
void cmd_pipeline(const PipelineOptions& options);

}  // namespace rbmctool
