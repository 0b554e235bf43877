#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "options.hpp"
#include "rbmc/errors.hpp"

namespace {

using namespace rbmctool;

// Exit codes: 0 success, 2 usage/config, 3 data/format, 4 numeric.
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

void add_stop_options(ConfigBinder& binder, std::optional<double>& threshold,
                      std::optional<std::size_t>& num_clusters, std::string& sweep) {
    binder.add("--threshold", threshold, "merge while the best similarity is >= this value");
    binder.add("--num-clusters", num_clusters, "merge until this many clusters remain");
    binder.add("--sweep", sweep, "comma-separated thresholds; one result per value");
    // A stop rule on the command line replaces any stop rule in the config.
    binder.exclusive_group({"threshold", "num-clusters", "sweep"});
}

void add_urbm_options(ConfigBinder& binder, TrainUrbmOptions& o) {
    binder.add("--hidden", o.hidden, "hidden units of the universal model");
    binder.add("--urbm-epochs", o.config.epochs, "universal model training epochs");
    binder.add("--urbm-learning-rate", o.config.learning_rate, "universal model learning rate");
    binder.add("--urbm-weight-decay", o.config.weight_decay, "universal model weight decay");
    binder.add("--urbm-batch-size", o.config.batch_size, "universal model batch size");
}

void add_adapt_options(ConfigBinder& binder, AdaptExtractOptions& o) {
    binder.add("--adapt-epochs", o.config.epochs, "per-item adaptation epochs");
    binder.add("--adapt-learning-rate", o.config.learning_rate, "per-item adaptation learning rate");
    binder.add("--adapt-weight-decay", o.config.weight_decay, "per-item adaptation weight decay");
    binder.add("--adapt-batch-size", o.config.batch_size, "per-item adaptation batch size");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RBM supervector extraction and agglomerative clustering"};
    app.require_subcommand(1);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic feature/label files");
    ConfigBinder synth_binder(synth_cmd);
    SynthOptions synth;
    synth_binder.add("--classes", synth.synth.classes, "number of classes");
    synth_binder.add("--items-per-class", synth.synth.items_per_class, "items per class");
    synth_binder.add("--frames-per-item", synth.synth.frames_per_item, "frames per item");
    synth_binder.add("--dim", synth.synth.dim, "feature dimension");
    synth_binder.add("--separation", synth.synth.separation, "class center scale");
    synth_binder.add("--seed", synth.synth.seed, "random seed");
    synth_binder.add("--format", synth.format, "feature file format: csv or binary");
    synth_binder.add("--features-out", synth.features_out, "output feature file")->required();
    synth_binder.add("--labels-out", synth.labels_out, "output labels file")->required();

    // normalize
    auto* norm_cmd = app.add_subcommand("normalize", "fit MVN on training data and apply it");
    ConfigBinder norm_binder(norm_cmd);
    NormalizeOptions normalize;
    norm_binder.add("--train", normalize.train, "training feature file")->required();
    norm_binder.add("--test", normalize.test, "test feature file (optional)");
    norm_binder.add("--out-dir", normalize.out_dir, "output directory")->required();
    norm_binder.add("--format", normalize.format, "feature file format: csv or binary");
    norm_binder.add_flag("--refit-on-test", normalize.refit_on_test,
                         "ablation: fit the statistics on the test data instead");

    // train-urbm
    auto* urbm_cmd = app.add_subcommand("train-urbm", "train the universal model");
    ConfigBinder urbm_binder(urbm_cmd);
    TrainUrbmOptions train_urbm;
    urbm_binder.add("--features", train_urbm.features, "normalized training features")->required();
    urbm_binder.add("--out-dir", train_urbm.out_dir, "output directory")->required();
    urbm_binder.add("--format", train_urbm.format, "feature file format: csv or binary");
    urbm_binder.add("--seed", train_urbm.config.seed, "random seed");
    add_urbm_options(urbm_binder, train_urbm);

    // adapt-extract
    auto* adapt_cmd = app.add_subcommand(
        "adapt-extract", "adapt the universal model per item and extract supervectors");
    ConfigBinder adapt_binder(adapt_cmd);
    AdaptExtractOptions adapt_extract;
    bool adapt_no_center = false;
    adapt_binder.add("--features", adapt_extract.features, "normalized test features")->required();
    adapt_binder.add("--urbm", adapt_extract.urbm, "universal model checkpoint")->required();
    adapt_binder.add("--out-dir", adapt_extract.out_dir, "output directory")->required();
    adapt_binder.add("--format", adapt_extract.format, "feature file format: csv or binary");
    adapt_binder.add("--seed", adapt_extract.config.seed, "base seed; per-item seeds derive from it");
    adapt_binder.add("--threads", adapt_extract.threads, "worker threads across items");
    adapt_binder.add_flag("--no-center", adapt_no_center,
                          "keep raw supervectors instead of subtracting the universal model's");
    add_adapt_options(adapt_binder, adapt_extract);

    // cluster
    auto* cluster_cmd = app.add_subcommand("cluster", "agglomerative clustering of supervectors");
    ConfigBinder cluster_binder(cluster_cmd);
    ClusterOptions cluster;
    std::string cluster_sweep;
    cluster_binder.add("--supervectors", cluster.supervectors, "supervector file")->required();
    cluster_binder.add("--out-dir", cluster.out_dir, "output directory")->required();
    cluster_binder.add("--linkage", cluster.linkage, "single or average");
    cluster_binder.add_flag("--size-weighted", cluster.size_weighted,
                            "size-weighted average linkage variant");
    cluster_binder.add("--labels", cluster.labels, "labels file for per-threshold sweep scoring");
    add_stop_options(cluster_binder, cluster.stop.threshold, cluster.stop.num_clusters,
                     cluster_sweep);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "score a clustering against ground truth");
    ConfigBinder eval_binder(eval_cmd);
    EvaluateOptions evaluate;
    eval_binder.add("--pred", evaluate.pred, "cluster output CSV")->required();
    eval_binder.add("--labels", evaluate.labels, "ground-truth labels CSV")->required();
    eval_binder.add("--out-dir", evaluate.out_dir, "output directory")->required();

    // pipeline
    auto* pipe_cmd = app.add_subcommand("pipeline", "run every stage end to end");
    ConfigBinder pipe_binder(pipe_cmd);
    PipelineOptions pipeline;
    std::uint64_t pipeline_seed = 0;
    std::string pipeline_sweep;
    bool pipeline_no_center = false;
    TrainUrbmOptions pipeline_urbm_view;          // flag targets; copied below
    AdaptExtractOptions pipeline_adapt_view;
    pipe_binder.add("--train", pipeline.train, "training feature file")->required();
    pipe_binder.add("--test", pipeline.test, "test feature file")->required();
    pipe_binder.add("--labels", pipeline.labels, "ground-truth labels file");
    pipe_binder.add("--out-dir", pipeline.out_dir, "output directory")->required();
    pipe_binder.add("--format", pipeline.format, "feature file format: csv or binary");
    pipe_binder.add("--seed", pipeline_seed, "seed for every stage");
    pipe_binder.add("--threads", pipeline.threads, "worker threads for adapt-extract");
    pipe_binder.add("--linkage", pipeline.linkage, "single or average");
    pipe_binder.add_flag("--size-weighted", pipeline.size_weighted,
                         "size-weighted average linkage variant");
    pipe_binder.add_flag("--no-center", pipeline_no_center,
                         "keep raw supervectors instead of subtracting the universal model's");
    pipe_binder.add_flag("--refit-on-test", pipeline.refit_on_test,
                         "ablation: fit MVN statistics on the test data");
    pipe_binder.add_flag("--evaluate", pipeline.evaluate, "require labels and emit eval outputs");
    pipe_binder.add_flag("--kmeans-baseline", pipeline.kmeans_baseline,
                         "also run k-means with the true class count and emit comparison.csv");
    add_stop_options(pipe_binder, pipeline.stop.threshold, pipeline.stop.num_clusters,
                     pipeline_sweep);
    add_urbm_options(pipe_binder, pipeline_urbm_view);
    add_adapt_options(pipe_binder, pipeline_adapt_view);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) {
            synth_binder.apply();
            cmd_synth(synth);
        } else if (norm_cmd->parsed()) {
            norm_binder.apply();
            cmd_normalize(normalize);
        } else if (urbm_cmd->parsed()) {
            urbm_binder.apply();
            cmd_train_urbm(train_urbm);
        } else if (adapt_cmd->parsed()) {
            adapt_binder.apply();
            adapt_extract.center = !adapt_no_center;
            cmd_adapt_extract(adapt_extract);
        } else if (cluster_cmd->parsed()) {
            cluster_binder.apply();
            if (!cluster_sweep.empty()) cluster.stop.sweep = parse_sweep_list(cluster_sweep);
            cmd_cluster(cluster);
        } else if (eval_cmd->parsed()) {
            eval_binder.apply();
            cmd_evaluate(evaluate);
        } else if (pipe_cmd->parsed()) {
            pipe_binder.apply();
            if (!pipeline_sweep.empty()) pipeline.stop.sweep = parse_sweep_list(pipeline_sweep);
            pipeline.center = !pipeline_no_center;
            pipeline.hidden = pipeline_urbm_view.hidden;
            pipeline.urbm_config = pipeline_urbm_view.config;
            pipeline.adapt_config = pipeline_adapt_view.config;
            pipeline.urbm_config.seed = pipeline_seed;
            pipeline.adapt_config.seed = pipeline_seed;
            cmd_pipeline(pipeline);
        }
    } catch (const rbmc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const rbmc::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const rbmc::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const rbmc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
