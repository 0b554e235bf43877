#include "commands.hpp"

#include <atomic>
#include <charconv>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "rbmc/errors.hpp"
#include "rbmc/metrics.hpp"
#include "rbmc/rng.hpp"

namespace rbmctool {

namespace {

namespace fs = std::filesystem;
using namespace rbmc;

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string format_extension(FeatureFormat format) {
    return format == FeatureFormat::csv ? ".csv" : ".bin";
}

fs::path normalized_path(const fs::path& dir, const char* stem, FeatureFormat format) {
    return dir / (stem + format_extension(format));
}

Partition partition_from_cluster_result(const ClusterResult& result) {
    Partition p;
    for (const auto& [id, index] : result.assignment) {
        p.assignment[id] = std::to_string(index);
    }
    return p;
}

Partition partition_from_map(const std::map<std::string, std::string>& assignment) {
    Partition p;
    p.assignment = assignment;
    return p;
}

void write_eval_outputs(const EvalReport& report, const fs::path& dir) {
    save_eval_report_csv(report, dir / kEvalCsvFile);
    std::ofstream txt(dir / kEvalTxtFile);
    if (!txt) throw IoError("cannot open for writing: " + (dir / kEvalTxtFile).string());
    txt << format_eval_report(report);
}

struct SweepEntry {
    double theta = 0.0;
    std::size_t n_clusters = 0;
    std::optional<EvalReport> report;
};

void write_sweep_summary(const std::vector<SweepEntry>& entries, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    const bool with_eval = !entries.empty() && entries.front().report.has_value();
    out << "theta,n_clusters";
    if (with_eval) out << ",Fp_precision,Fp_recall,Fp,Fb_precision,Fb_recall,Fb";
    out << "\n";
    for (const auto& e : entries) {
        out << format_double(e.theta) << ',' << e.n_clusters;
        if (with_eval) {
            const EvalReport& r = *e.report;
            out << ',' << format_double(r.pairwise.precision) << ','
                << format_double(r.pairwise.recall) << ',' << format_double(r.pairwise.f)
                << ',' << format_double(r.bcubed.precision) << ','
                << format_double(r.bcubed.recall) << ',' << format_double(r.bcubed.f);
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void StopSpec::validate() const {
    const int given = (threshold.has_value() ? 1 : 0) + (num_clusters.has_value() ? 1 : 0) +
                      (sweep.empty() ? 0 : 1);
    if (given != 1) {
        throw InvalidConfig("exactly one of --threshold, --num-clusters, --sweep is required");
    }
}

void cmd_synth(const SynthOptions& options) {
    if (options.features_out.empty() || options.labels_out.empty()) {
        throw InvalidConfig("synth: --features-out and --labels-out are required");
    }
    const FeatureFormat format = parse_feature_format(options.format);
    const Dataset dataset = make_synthetic_dataset(options.synth);
    if (const auto parent = options.features_out.parent_path(); !parent.empty()) ensure_dir(parent);
    if (const auto parent = options.labels_out.parent_path(); !parent.empty()) ensure_dir(parent);
    save_features(dataset, options.features_out, format);
    std::vector<std::pair<std::string, std::string>> labels;
    labels.reserve(dataset.items.size());
    for (const auto& item : dataset.items) {
        labels.emplace_back(item.item_id, dataset.labels->at(item.item_id));
    }
    save_labels(labels, options.labels_out);
    std::cout << "wrote " << dataset.items.size() << " items ("
              << dataset.total_frames() << " frames, dim " << dataset.dim() << ") to "
              << options.features_out.string() << "\n";
}

void cmd_normalize(const NormalizeOptions& options) {
    const FeatureFormat format = parse_feature_format(options.format);
    ensure_dir(options.out_dir);
    const Dataset train = load_features(options.train, format);

    Dataset test;
    const bool have_test = !options.test.empty();
    if (have_test) test = load_features(options.test, format);

    const MvnStats stats = options.refit_on_test && have_test ? mvn_fit(test) : mvn_fit(train);
    save_mvn_stats(stats, options.out_dir / kMvnStatsFile);
    save_features(mvn_apply(stats, train),
                  normalized_path(options.out_dir, kTrainNormalizedStem, format), format);
    if (have_test) {
        save_features(mvn_apply(stats, test),
                      normalized_path(options.out_dir, kTestNormalizedStem, format), format);
    }
}

void cmd_train_urbm(const TrainUrbmOptions& options) {
    const FeatureFormat format = parse_feature_format(options.format);
    ensure_dir(options.out_dir);
    const Dataset training = load_features(options.features, format);
    std::vector<TrainLogEntry> log;
    const RbmParams urbm = train_urbm(training, options.hidden, options.config, &log);
    save_rbm(urbm, options.out_dir / kUrbmFile, &options.config);
    save_training_log(log, options.out_dir / kUrbmLogFile);
    if (!log.empty()) {
        std::cout << "urbm: V=" << urbm.visible << " H=" << urbm.hidden << ", epoch 1 error "
                  << format_double(log.front().mean_reconstruction_error) << ", epoch "
                  << log.back().epoch << " error "
                  << format_double(log.back().mean_reconstruction_error) << "\n";
    }
}

void cmd_adapt_extract(const AdaptExtractOptions& options) {
    const FeatureFormat format = parse_feature_format(options.format);
    ensure_dir(options.out_dir);
    const Dataset items = load_features(options.features, format);
    const RbmParams urbm = load_rbm(options.urbm);

    const std::size_t n = items.items.size();
    std::vector<Supervector> vectors(n);
    const std::size_t workers =
        std::max<std::size_t>(1, std::min(options.threads, n));

    // Items are independent: each gets a seed derived from (seed, item_id),
    // so the result does not depend on the thread count.
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&]() {
        try {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                const RbmParams adapted = adapt(urbm, items.items[i], options.config);
                vectors[i] = extract_supervector(adapted, &urbm, options.center,
                                                 items.items[i].item_id);
            }
        } catch (...) {
            const std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(n);
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    save_supervectors(vectors, options.out_dir / kSupervectorsFile);
    std::cout << "extracted " << n << " supervectors of dimension "
              << vectors.front().values.size() << "\n";
}

void cmd_cluster(const ClusterOptions& options) {
    options.stop.validate();
    const Linkage linkage = parse_linkage(options.linkage, options.size_weighted);
    ensure_dir(options.out_dir);
    const std::vector<Supervector> vectors = load_supervectors(options.supervectors);
    const SimilarityMatrix matrix = build_similarity_matrix(vectors);

    std::optional<Partition> truth;
    if (!options.labels.empty()) {
        truth = partition_from_map(load_labels(options.labels));
    }

    if (options.stop.sweep.empty()) {
        StopRule stop = options.stop.threshold.has_value()
                            ? StopRule(ThresholdStop{*options.stop.threshold})
                            : StopRule(NumClustersStop{*options.stop.num_clusters});
        const ClusterResult result = ahc(matrix, linkage, stop);
        save_cluster_csv(result, matrix.ids, options.out_dir / kClustersFile);
        save_merge_history_csv(result, options.out_dir / kMergesFile);
        std::cout << "clusters: " << result.final_cluster_count << " (" << result.merges.size()
                  << " merges)\n";
        return;
    }

    const auto swept = sweep_threshold(matrix, linkage, options.stop.sweep);
    std::vector<SweepEntry> entries;
    entries.reserve(swept.size());
    std::size_t best = 0;
    double best_fp = -1.0;
    for (std::size_t idx = 0; idx < swept.size(); ++idx) {
        const auto& [theta, result] = swept[idx];
        const fs::path theta_dir = options.out_dir / kSweepDir / ("theta_" + format_double(theta));
        ensure_dir(theta_dir);
        save_cluster_csv(result, matrix.ids, theta_dir / kClustersFile);
        save_merge_history_csv(result, theta_dir / kMergesFile);
        SweepEntry entry;
        entry.theta = theta;
        entry.n_clusters = result.final_cluster_count;
        if (truth) {
            entry.report = evaluate(partition_from_cluster_result(result), *truth);
            write_eval_outputs(*entry.report, theta_dir);
            if (entry.report->pairwise.f > best_fp) {
                best_fp = entry.report->pairwise.f;
                best = idx;
            }
        }
        entries.push_back(std::move(entry));
    }
    write_sweep_summary(entries, options.out_dir / kSweepSummaryFile);

    if (truth) {
        const auto& [best_theta, best_result] = swept[best];
        save_cluster_csv(best_result, matrix.ids, options.out_dir / kClustersFile);
        save_merge_history_csv(best_result, options.out_dir / kMergesFile);
        write_eval_outputs(*entries[best].report, options.out_dir);
        std::ofstream theta_out(options.out_dir / kBestThetaFile);
        if (!theta_out) {
            throw IoError("cannot open for writing: " +
                          (options.out_dir / kBestThetaFile).string());
        }
        theta_out << format_double(best_theta) << "\n";
        std::cout << "sweep: best theta " << format_double(best_theta) << " (Fp "
                  << format_double(entries[best].report->pairwise.f) << ", Fb "
                  << format_double(entries[best].report->bcubed.f) << ", "
                  << entries[best].n_clusters << " clusters)\n";
    } else {
        std::cout << "sweep: " << entries.size() << " thresholds clustered\n";
    }
}

void cmd_evaluate(const EvaluateOptions& options) {
    ensure_dir(options.out_dir);
    const Partition pred = partition_from_map(load_cluster_csv(options.pred));
    const Partition truth = partition_from_map(load_labels(options.labels));
    const EvalReport report = evaluate(pred, truth);
    write_eval_outputs(report, options.out_dir);
    std::cout << format_eval_report(report);
}

void cmd_pipeline(const PipelineOptions& options) {
    options.stop.validate();
    parse_linkage(options.linkage, options.size_weighted);  // fail fast on bad names
    const FeatureFormat format = parse_feature_format(options.format);
    if (options.evaluate && options.labels.empty()) {
        throw InvalidConfig("pipeline: --evaluate requires --labels");
    }
    if (options.kmeans_baseline && options.labels.empty()) {
        throw InvalidConfig("pipeline: --kmeans-baseline requires --labels");
    }
    if (!options.labels.empty() && !fs::exists(options.labels)) {
        throw IoError("labels file not found: " + options.labels.string());
    }
    ensure_dir(options.out_dir);

    NormalizeOptions normalize;
    normalize.train = options.train;
    normalize.test = options.test;
    normalize.out_dir = options.out_dir;
    normalize.format = options.format;
    normalize.refit_on_test = options.refit_on_test;
    cmd_normalize(normalize);

    TrainUrbmOptions train;
    train.features = normalized_path(options.out_dir, kTrainNormalizedStem, format);
    train.out_dir = options.out_dir;
    train.format = options.format;
    train.hidden = options.hidden;
    train.config = options.urbm_config;
    cmd_train_urbm(train);

    AdaptExtractOptions adapt;
    adapt.features = normalized_path(options.out_dir, kTestNormalizedStem, format);
    adapt.urbm = options.out_dir / kUrbmFile;
    adapt.out_dir = options.out_dir;
    adapt.format = options.format;
    adapt.config = options.adapt_config;
    adapt.threads = options.threads;
    adapt.center = options.center;
    cmd_adapt_extract(adapt);

    ClusterOptions cluster;
    cluster.supervectors = options.out_dir / kSupervectorsFile;
    cluster.out_dir = options.out_dir;
    cluster.linkage = options.linkage;
    cluster.size_weighted = options.size_weighted;
    cluster.stop = options.stop;
    cluster.labels = options.labels;  // sweep evaluation per theta
    cmd_cluster(cluster);

    const bool have_labels = !options.labels.empty();
    if (have_labels && options.stop.sweep.empty()) {
        EvaluateOptions eval;
        eval.pred = options.out_dir / kClustersFile;
        eval.labels = options.labels;
        eval.out_dir = options.out_dir;
        cmd_evaluate(eval);
    }

    if (options.kmeans_baseline) {
        const Partition truth = partition_from_map(load_labels(options.labels));
        const Partition ahc_pred =
            partition_from_map(load_cluster_csv(options.out_dir / kClustersFile));
        const EvalReport ahc_report = evaluate(ahc_pred, truth);

        std::set<std::string> classes;
        for (const auto& [id, cls] : truth.assignment) classes.insert(cls);

        const std::vector<Supervector> vectors =
            load_supervectors(options.out_dir / kSupervectorsFile);
        KMeansConfig kconfig;
        kconfig.k = classes.size();
        kconfig.seed = derive_seed(options.urbm_config.seed, "kmeans");
        const KMeansResult kresult = kmeans(vectors, kconfig);
        const EvalReport kmeans_report = evaluate(kresult.partition, truth);

        std::ofstream obj(options.out_dir / "kmeans_objective.csv");
        if (!obj) throw IoError("cannot open for writing: kmeans_objective.csv");
        obj << "iteration,objective\n";
        for (std::size_t i = 0; i < kresult.objective_history.size(); ++i) {
            obj << i + 1 << ',' << format_double(kresult.objective_history[i]) << "\n";
        }

        std::ofstream cmp(options.out_dir / kComparisonFile);
        if (!cmp) throw IoError("cannot open for writing: comparison.csv");
        cmp << "method,Fp_precision,Fp_recall,Fp,Fb_precision,Fb_recall,Fb,n_pred_clusters\n";
        const auto row = [&cmp](const std::string& method, const EvalReport& r) {
            cmp << method << ',' << format_double(r.pairwise.precision) << ','
                << format_double(r.pairwise.recall) << ',' << format_double(r.pairwise.f) << ','
                << format_double(r.bcubed.precision) << ',' << format_double(r.bcubed.recall)
                << ',' << format_double(r.bcubed.f) << ',' << r.n_pred_clusters << "\n";
        };
        row("ahc", ahc_report);
        row("kmeans", kmeans_report);
    }
}

}  // namespace rbmctool
