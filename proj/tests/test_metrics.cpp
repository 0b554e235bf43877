#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "rbmc/errors.hpp"
#include "rbmc/metrics.hpp"

using namespace rbmc;

namespace {

Partition from_pairs(std::initializer_list<std::pair<const char*, const char*>> pairs) {
    Partition p;
    for (const auto& [item, cluster] : pairs) p.assignment[item] = cluster;
    return p;
}

}  // namespace

TEST_CASE("identical partitions score 1 everywhere") {
    const Partition p = from_pairs({{"a", "x"}, {"b", "x"}, {"c", "y"}});
    const PrfScores pw = pairwise_f(p, p);
    CHECK(pw.precision == 1.0);
    CHECK(pw.recall == 1.0);
    CHECK(pw.f == 1.0);
    const PrfScores bc = bcubed_f(p, p);
    CHECK(bc.precision == 1.0);
    CHECK(bc.recall == 1.0);
    CHECK(bc.f == 1.0);
}

TEST_CASE("one cluster vs two classes of two: worked example") {
    const Partition pred =
        from_pairs({{"a", "all"}, {"b", "all"}, {"c", "all"}, {"d", "all"}});
    const Partition truth = from_pairs({{"a", "u"}, {"b", "u"}, {"c", "v"}, {"d", "v"}});

    const PrfScores pw = pairwise_f(pred, truth);
    CHECK(pw.precision == doctest::Approx(2.0 / 6.0));
    CHECK(pw.recall == 1.0);
    CHECK(pw.f == 0.5);

    const PrfScores bc = bcubed_f(pred, truth);
    CHECK(bc.precision == 0.5);
    CHECK(bc.recall == 1.0);
    CHECK(bc.f == 2.0 / 3.0);
}

TEST_CASE("all singletons: degenerate precision convention") {
    const Partition pred = from_pairs({{"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "4"}});
    const Partition truth = from_pairs({{"a", "u"}, {"b", "u"}, {"c", "v"}, {"d", "v"}});

    const PrfScores pw = pairwise_f(pred, truth);
    CHECK(pw.precision == 1.0);  // no co-clustered pred pairs
    CHECK(pw.recall == 0.0);
    CHECK(pw.f == 0.0);

    const PrfScores bc = bcubed_f(pred, truth);
    CHECK(bc.precision == 1.0);
    CHECK(bc.recall == 0.5);  // every class has size 2
    CHECK(bc.f == 2.0 / 3.0);
}

TEST_CASE("scores are invariant under cluster relabeling") {
    const Partition pred = from_pairs({{"a", "p"}, {"b", "p"}, {"c", "q"}, {"d", "r"}});
    const Partition relabeled =
        from_pairs({{"a", "7"}, {"b", "7"}, {"c", "zebra"}, {"d", "!"}});
    const Partition truth = from_pairs({{"a", "u"}, {"b", "v"}, {"c", "v"}, {"d", "v"}});

    const PrfScores pw1 = pairwise_f(pred, truth);
    const PrfScores pw2 = pairwise_f(relabeled, truth);
    CHECK(pw1.precision == pw2.precision);
    CHECK(pw1.recall == pw2.recall);
    const PrfScores bc1 = bcubed_f(pred, truth);
    const PrfScores bc2 = bcubed_f(relabeled, truth);
    CHECK(bc1.precision == bc2.precision);
    CHECK(bc1.recall == bc2.recall);
}

TEST_CASE("random partitions match the enumeration oracles exactly") {
    Rng rng(101);
    for (int round = 0; round < 50; ++round) {
        const std::size_t n = 2 + rng.next_index(60);
        const std::size_t max_clusters = 1 + rng.next_index(8);
        const Partition pred = oracle::random_partition(n, max_clusters, rng);
        const Partition truth = oracle::random_partition(n, 1 + rng.next_index(8), rng);

        const PrfScores pw = pairwise_f(pred, truth);
        const PrfScores pw_oracle = oracle::pairwise_by_enumeration(pred, truth);
        CHECK(pw.precision == pw_oracle.precision);
        CHECK(pw.recall == pw_oracle.recall);
        CHECK(pw.f == pw_oracle.f);

        const PrfScores bc = bcubed_f(pred, truth);
        const PrfScores bc_oracle = oracle::bcubed_by_items(pred, truth);
        CHECK(bc.precision == bc_oracle.precision);
        CHECK(bc.recall == bc_oracle.recall);
        CHECK(bc.f == bc_oracle.f);
    }
}

TEST_CASE("f equals 1 only for identical partitions") {
    Rng rng(103);
    for (int round = 0; round < 20; ++round) {
        const std::size_t n = 3 + rng.next_index(20);
        const Partition pred = oracle::random_partition(n, 4, rng);
        const Partition truth = oracle::random_partition(n, 4, rng);

        // Same co-membership relation?
        bool identical = true;
        for (const auto& [i1, c1] : pred.assignment) {
            for (const auto& [i2, c2] : pred.assignment) {
                const bool same_pred = c1 == c2;
                const bool same_truth =
                    truth.assignment.at(i1) == truth.assignment.at(i2);
                if (same_pred != same_truth) identical = false;
            }
        }
        const bool pw_perfect = pairwise_f(pred, truth).f == 1.0;
        const bool bc_perfect = bcubed_f(pred, truth).f == 1.0;
        CHECK(pw_perfect == identical);
        CHECK(bc_perfect == identical);
    }
}

TEST_CASE("merging pred clusters never raises bcubed precision") {
    // Per-class (a+b)^2/(n1+n2) <= a^2/n1 + b^2/n2, so the merged cluster's
    // precision mass cannot exceed the sum of its parts. No such bound holds
    // for pairwise precision: merging two clusters dominated by one class
    // raises it.
    Rng rng(107);
    for (int round = 0; round < 20; ++round) {
        const std::size_t n = 4 + rng.next_index(30);
        Partition pred = oracle::random_partition(n, 6, rng);
        const Partition truth = oracle::random_partition(n, 5, rng);
        const PrfScores bc_before = oracle::bcubed_by_items(pred, truth);

        // Merge cluster "c0" into "c1" (if distinct clusters exist).
        for (auto& [item, cluster] : pred.assignment) {
            if (cluster == "c0") cluster = "c1";
        }
        const PrfScores bc_after = oracle::bcubed_by_items(pred, truth);
        CHECK(bc_after.precision <= bc_before.precision + 1e-15);

        // Fast path and oracle agree on the merged partition too.
        const PrfScores pw_after = oracle::pairwise_by_enumeration(pred, truth);
        CHECK(pairwise_f(pred, truth).precision == pw_after.precision);
        CHECK(bcubed_f(pred, truth).precision == bc_after.precision);
    }
}

TEST_CASE("mismatched item sets raise KeyError") {
    const Partition a = from_pairs({{"a", "x"}, {"b", "x"}});
    const Partition b = from_pairs({{"a", "x"}, {"c", "x"}});
    const Partition c = from_pairs({{"a", "x"}});
    CHECK_THROWS_AS(pairwise_f(a, b), KeyError);
    CHECK_THROWS_AS(bcubed_f(a, c), KeyError);
}

TEST_CASE("evaluate fills the report and the CSV round-trips") {
    const Partition pred = from_pairs({{"a", "0"}, {"b", "0"}, {"c", "1"}, {"d", "1"}});
    const Partition truth = from_pairs({{"a", "u"}, {"b", "u"}, {"c", "v"}, {"d", "v"}});
    const EvalReport report = evaluate(pred, truth);
    CHECK(report.n_items == 4);
    CHECK(report.n_pred_clusters == 2);
    CHECK(report.n_true_clusters == 2);
    CHECK(report.pairwise.f == 1.0);
    CHECK(report.bcubed.f == 1.0);

    const auto path = std::filesystem::temp_directory_path() / "rbmc_eval_test.csv";
    save_eval_report_csv(report, path);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header ==
          "Fp_precision,Fp_recall,Fp,Fb_precision,Fb_recall,Fb,n_items,n_pred,n_true");
    CHECK(row == "1,1,1,1,1,1,4,2,2");
}
