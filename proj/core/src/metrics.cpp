#include "rbmc/metrics.hpp"

#include <cstdint>
#include <set>
#include <sstream>

#include "rbmc/errors.hpp"
#include "io_util.hpp"

namespace rbmc {

namespace {

void check_same_items(const Partition& pred, const Partition& truth) {
    if (pred.assignment.size() != truth.assignment.size()) {
        throw KeyError("partitions cover different item counts: " +
                       std::to_string(pred.assignment.size()) + " vs " +
                       std::to_string(truth.assignment.size()));
    }
    auto it_p = pred.assignment.begin();
    auto it_t = truth.assignment.begin();
    for (; it_p != pred.assignment.end(); ++it_p, ++it_t) {
        if (it_p->first != it_t->first) {
            throw KeyError("partitions cover different items (first difference near '" +
                           it_p->first + "')");
        }
    }
    if (pred.assignment.empty()) throw EmptyInput("partitions are empty");
}

double harmonic(double p, double r) {
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::uint64_t pairs_of(std::uint64_t n) { return n * (n - 1) / 2; }

/// Cell counts |pred-cluster x truth-class| plus the marginal sizes.
struct Contingency {
    std::map<std::pair<std::string, std::string>, std::uint64_t> cells;
    std::map<std::string, std::uint64_t> pred_sizes;
    std::map<std::string, std::uint64_t> truth_sizes;
};

Contingency build_contingency(const Partition& pred, const Partition& truth) {
    Contingency c;
    auto it_t = truth.assignment.begin();
    for (const auto& [item, pred_cluster] : pred.assignment) {
        const std::string& true_class = it_t->second;
        ++it_t;
        ++c.cells[{pred_cluster, true_class}];
        ++c.pred_sizes[pred_cluster];
        ++c.truth_sizes[true_class];
    }
    return c;
}

}  // namespace

std::size_t Partition::n_clusters() const {
    std::set<std::string> labels;
    for (const auto& [item, cluster] : assignment) labels.insert(cluster);
    return labels.size();
}

PrfScores pairwise_f(const Partition& pred, const Partition& truth) {
    check_same_items(pred, truth);
    const Contingency c = build_contingency(pred, truth);

    std::uint64_t both = 0, in_pred = 0, in_truth = 0;
    for (const auto& [cell, count] : c.cells) both += pairs_of(count);
    for (const auto& [cluster, size] : c.pred_sizes) in_pred += pairs_of(size);
    for (const auto& [cls, size] : c.truth_sizes) in_truth += pairs_of(size);

    PrfScores out;
    out.precision = in_pred == 0 ? 1.0
                                 : static_cast<double>(both) / static_cast<double>(in_pred);
    out.recall = in_truth == 0 ? 1.0
                               : static_cast<double>(both) / static_cast<double>(in_truth);
    out.f = harmonic(out.precision, out.recall);
    return out;
}

PrfScores bcubed_f(const Partition& pred, const Partition& truth) {
    check_same_items(pred, truth);
    const Contingency c = build_contingency(pred, truth);

    // Per-item ratios accumulated in sorted item order so the result is
    // bit-identical to a per-item scan.
    double precision_sum = 0.0;
    double recall_sum = 0.0;
    auto it_t = truth.assignment.begin();
    for (const auto& [item, pred_cluster] : pred.assignment) {
        const std::string& true_class = it_t->second;
        ++it_t;
        const double overlap =
            static_cast<double>(c.cells.at({pred_cluster, true_class}));
        precision_sum += overlap / static_cast<double>(c.pred_sizes.at(pred_cluster));
        recall_sum += overlap / static_cast<double>(c.truth_sizes.at(true_class));
    }

    const double n = static_cast<double>(pred.assignment.size());
    PrfScores out;
    out.precision = precision_sum / n;
    out.recall = recall_sum / n;
    out.f = harmonic(out.precision, out.recall);
    return out;
}

EvalReport evaluate(const Partition& pred, const Partition& truth) {
    EvalReport report;
    report.pairwise = pairwise_f(pred, truth);
    report.bcubed = bcubed_f(pred, truth);
    report.n_items = pred.n_items();
    report.n_pred_clusters = pred.n_clusters();
    report.n_true_clusters = truth.n_clusters();
    return report;
}

void save_eval_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    auto out = io::open_output(path, false);
    out << "Fp_precision,Fp_recall,Fp,Fb_precision,Fb_recall,Fb,n_items,n_pred,n_true\n";
    out << io::format_double(report.pairwise.precision) << ','
        << io::format_double(report.pairwise.recall) << ','
        << io::format_double(report.pairwise.f) << ','
        << io::format_double(report.bcubed.precision) << ','
        << io::format_double(report.bcubed.recall) << ','
        << io::format_double(report.bcubed.f) << ','
        << report.n_items << ',' << report.n_pred_clusters << ','
        << report.n_true_clusters << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

std::string format_eval_report(const EvalReport& report) {
    std::ostringstream out;
    out << "items:          " << report.n_items << "\n"
        << "pred clusters:  " << report.n_pred_clusters << "\n"
        << "true clusters:  " << report.n_true_clusters << "\n"
        << "pairwise:       P=" << io::format_double(report.pairwise.precision)
        << " R=" << io::format_double(report.pairwise.recall)
        << " F=" << io::format_double(report.pairwise.f) << "\n"
        << "bcubed:         P=" << io::format_double(report.bcubed.precision)
        << " R=" << io::format_double(report.bcubed.recall)
        << " F=" << io::format_double(report.bcubed.f) << "\n";
    return out.str();
}

}  // namespace rbmc
