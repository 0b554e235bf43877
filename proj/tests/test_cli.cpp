#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* env = std::getenv("RBMCLUSTER_BIN");
    REQUIRE_MESSAGE(env != nullptr, "RBMCLUSTER_BIN must point at the CLI binary");
    return env;
}

int run(const std::string& args) {
    const std::string command = cli_path() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const std::string kSmallPipelineFlags =
    " --seed 11 --hidden 12 --urbm-epochs 20 --adapt-epochs 25"
    " --linkage average --num-clusters 3";

void make_synth(const TempDir& dir, const std::string& extra = "") {
    const int rc = run("synth --classes 3 --items-per-class 4 --frames-per-item 2 --dim 6"
                       " --separation 4 --seed 5 --features-out " + (dir / "feats.csv") +
                       " --labels-out " + (dir / "labels.csv") + extra);
    REQUIRE(rc == 0);
}

}  // namespace

TEST_CASE("synth writes deterministic files with the expected row counts") {
    TempDir dir("rbmc_cli_synth");
    const int rc = run("synth --classes 2 --items-per-class 1 --frames-per-item 1 --dim 2"
                       " --separation 1 --seed 9 --features-out " + (dir / "a.csv") +
                       " --labels-out " + (dir / "la.csv"));
    CHECK(rc == 0);
    const int rc2 = run("synth --classes 2 --items-per-class 1 --frames-per-item 1 --dim 2"
                        " --separation 1 --seed 9 --features-out " + (dir / "b.csv") +
                        " --labels-out " + (dir / "lb.csv"));
    CHECK(rc2 == 0);
    CHECK(slurp(dir.path / "a.csv") == slurp(dir.path / "b.csv"));
    CHECK(slurp(dir.path / "la.csv") == slurp(dir.path / "lb.csv"));

    std::istringstream feats(slurp(dir.path / "a.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(feats, line)) ++rows;
    CHECK(rows == 3);  // header + 2 feature rows
    std::istringstream labels(slurp(dir.path / "la.csv"));
    rows = 0;
    while (std::getline(labels, line)) ++rows;
    CHECK(rows == 3);  // header + 2 label rows
}

TEST_CASE("staged execution equals pipeline execution byte for byte") {
    TempDir dir("rbmc_cli_staged");
    make_synth(dir);

    const std::string features = dir / "feats.csv";
    const std::string labels = dir / "labels.csv";
    const std::string staged = dir / "staged";
    const std::string piped = dir / "piped";

    REQUIRE(run("normalize --train " + features + " --test " + features +
                " --out-dir " + staged) == 0);
    REQUIRE(run("train-urbm --features " + staged + "/train_normalized.csv --out-dir " +
                staged + " --seed 11 --hidden 12 --urbm-epochs 20") == 0);
    REQUIRE(run("adapt-extract --features " + staged + "/test_normalized.csv --urbm " +
                staged + "/urbm.rbmc --out-dir " + staged +
                " --seed 11 --adapt-epochs 25") == 0);
    REQUIRE(run("cluster --supervectors " + staged + "/supervectors.rbsv --out-dir " +
                staged + " --linkage average --num-clusters 3") == 0);
    REQUIRE(run("evaluate --pred " + staged + "/clusters.csv --labels " + labels +
                " --out-dir " + staged) == 0);

    REQUIRE(run("pipeline --train " + features + " --test " + features + " --labels " +
                labels + " --out-dir " + piped + kSmallPipelineFlags) == 0);

    for (const char* name : {"mvn_stats.csv", "train_normalized.csv", "test_normalized.csv",
                             "urbm.rbmc", "urbm_training_log.csv", "supervectors.rbsv",
                             "clusters.csv", "merges.csv", "eval.csv", "eval.txt"}) {
        CHECK_MESSAGE(slurp(fs::path(staged) / name) == slurp(fs::path(piped) / name),
                      "stage/pipeline mismatch in " << name);
    }
}

TEST_CASE("pipeline reruns are byte-identical and threads do not matter") {
    TempDir dir("rbmc_cli_determinism");
    make_synth(dir);
    const std::string features = dir / "feats.csv";
    const std::string labels = dir / "labels.csv";

    REQUIRE(run("pipeline --train " + features + " --test " + features + " --labels " +
                labels + " --out-dir " + (dir / "run1") + kSmallPipelineFlags) == 0);
    REQUIRE(run("pipeline --train " + features + " --test " + features + " --labels " +
                labels + " --out-dir " + (dir / "run2") + kSmallPipelineFlags +
                " --threads 8") == 0);

    CHECK(slurp(dir.path / "run1" / "supervectors.rbsv") ==
          slurp(dir.path / "run2" / "supervectors.rbsv"));
    CHECK(slurp(dir.path / "run1" / "clusters.csv") ==
          slurp(dir.path / "run2" / "clusters.csv"));
}

TEST_CASE("sweep writes one subdirectory per threshold plus a summary") {
    TempDir dir("rbmc_cli_sweep");
    make_synth(dir);
    REQUIRE(run("pipeline --train " + (dir / "feats.csv") + " --test " + (dir / "feats.csv") +
                " --labels " + (dir / "labels.csv") + " --out-dir " + (dir / "out") +
                " --seed 3 --hidden 12 --urbm-epochs 15 --adapt-epochs 20"
                " --linkage average --sweep 0.8,0.4,0.0") == 0);
    CHECK(fs::exists(dir.path / "out" / "sweep" / "theta_0.8" / "clusters.csv"));
    CHECK(fs::exists(dir.path / "out" / "sweep" / "theta_0.4" / "eval.csv"));
    CHECK(fs::exists(dir.path / "out" / "sweep" / "theta_0" / "merges.csv"));
    CHECK(fs::exists(dir.path / "out" / "sweep_summary.csv"));
    CHECK(fs::exists(dir.path / "out" / "best_theta.txt"));
    CHECK(fs::exists(dir.path / "out" / "clusters.csv"));
}

TEST_CASE("cluster on a tiny fixture with a huge threshold yields singletons") {
    TempDir dir("rbmc_cli_singletons");
    make_synth(dir);
    const std::string out = dir / "out";
    REQUIRE(run("pipeline --train " + (dir / "feats.csv") + " --test " + (dir / "feats.csv") +
                " --out-dir " + out + " --seed 4 --hidden 8 --urbm-epochs 5 --adapt-epochs 5"
                " --threshold 100") == 0);
    std::istringstream clusters(slurp(fs::path(out) / "clusters.csv"));
    std::string line;
    std::set<std::string> indices;
    std::getline(clusters, line);  // header
    int rows = 0;
    while (std::getline(clusters, line)) {
        indices.insert(line.substr(line.find(',') + 1));
        ++rows;
    }
    CHECK(rows == 12);
    CHECK(indices.size() == 12);
}

TEST_CASE("evaluate on a pred-equals-truth fixture returns perfect scores") {
    TempDir dir("rbmc_cli_eval");
    {
        std::ofstream pred(dir.path / "pred.csv");
        pred << "item_id,cluster_index\na,0\nb,0\nc,1\n";
        std::ofstream labels(dir.path / "labels.csv");
        labels << "item_id,class_id\na,x\nb,x\nc,y\n";
    }
    REQUIRE(run("evaluate --pred " + (dir / "pred.csv") + " --labels " + (dir / "labels.csv") +
                " --out-dir " + (dir / "out")) == 0);
    const std::string csv = slurp(dir.path / "out" / "eval.csv");
    CHECK(csv.find("\n1,1,1,1,1,1,3,2,2") != std::string::npos);
}

TEST_CASE("exit codes: usage 2, data 3, numeric 4") {
    TempDir dir("rbmc_cli_exits");
    make_synth(dir);
    const std::string features = dir / "feats.csv";

    // No stop rule at all -> usage error.
    CHECK(run("pipeline --train " + features + " --test " + features + " --out-dir " +
              (dir / "x1") + " --hidden 8") == 2);
    // Unknown subcommand / missing required option -> CLI11 usage error.
    CHECK(run("clusterize") == 2);
    CHECK(run("synth --classes 2") == 2);
    // --evaluate without labels -> usage error.
    CHECK(run("pipeline --train " + features + " --test " + features + " --out-dir " +
              (dir / "x2") + " --threshold 0.5 --evaluate") == 2);
    // Missing labels file: the message names the path and the exit code is 3.
    {
        const std::string command = cli_path() + " pipeline --train " + features +
                                    " --test " + features + " --labels " + (dir / "nope.csv") +
                                    " --out-dir " + (dir / "x3") + " --threshold 0.5 2>" +
                                    (dir / "stderr.txt") + " >/dev/null";
        const int status = std::system(command.c_str());
        CHECK(WEXITSTATUS(status) == 3);
        CHECK(slurp(dir.path / "stderr.txt").find("nope.csv") != std::string::npos);
    }
    // Missing feature file -> data error.
    CHECK(run("train-urbm --features " + (dir / "missing.csv") + " --out-dir " +
              (dir / "x4")) == 3);
    // Zero-separation, zero-variance degenerate supervectors are a numeric error:
    // identical items centered on the universal model produce zero vectors.
    const int rc = run("synth --classes 1 --items-per-class 3 --frames-per-item 1 --dim 4"
                       " --separation 0 --seed 1 --features-out " + (dir / "flat.csv") +
                       " --labels-out " + (dir / "flat_labels.csv"));
    REQUIRE(rc == 0);
    CHECK(run("pipeline --train " + (dir / "flat.csv") + " --test " + (dir / "flat.csv") +
              " --out-dir " + (dir / "x5") + " --threshold 0.5 --adapt-epochs 0"
              " --hidden 4 --urbm-epochs 1") == 4);
}

TEST_CASE("config file supplies defaults and flags override it") {
    TempDir dir("rbmc_cli_config");
    make_synth(dir);
    {
        std::ofstream cfg(dir.path / "run.cfg");
        cfg << "# shared settings\n";
        cfg << "seed = 11\n";
        cfg << "hidden = 12\n";
        cfg << "urbm-epochs = 20\n";
        cfg << "adapt-epochs = 25\n";
        cfg << "linkage = average\n";
        cfg << "num-clusters = 3\n";
    }
    const std::string features = dir / "feats.csv";
    const std::string labels = dir / "labels.csv";

    REQUIRE(run("pipeline --train " + features + " --test " + features + " --labels " +
                labels + " --out-dir " + (dir / "from_config") + " --config " +
                (dir / "run.cfg")) == 0);
    REQUIRE(run("pipeline --train " + features + " --test " + features + " --labels " +
                labels + " --out-dir " + (dir / "from_flags") + kSmallPipelineFlags) == 0);
    CHECK(slurp(dir.path / "from_config" / "supervectors.rbsv") ==
          slurp(dir.path / "from_flags" / "supervectors.rbsv"));
    CHECK(slurp(dir.path / "from_config" / "clusters.csv") ==
          slurp(dir.path / "from_flags" / "clusters.csv"));

    // A flag overrides the config value: different seed, different bytes.
    REQUIRE(run("pipeline --train " + features + " --test " + features + " --labels " +
                labels + " --out-dir " + (dir / "override") + " --config " +
                (dir / "run.cfg") + " --seed 999") == 0);
    CHECK(slurp(dir.path / "override" / "supervectors.rbsv") !=
          slurp(dir.path / "from_config" / "supervectors.rbsv"));

    // A stop rule on the command line replaces the config file's stop rule.
    REQUIRE(run("pipeline --train " + features + " --test " + features + " --labels " +
                labels + " --out-dir " + (dir / "stop_override") + " --config " +
                (dir / "run.cfg") + " --threshold 0.5") == 0);

    // Bad config values are usage errors.
    {
        std::ofstream cfg(dir.path / "bad.cfg");
        cfg << "hidden = lots\n";
    }
    CHECK(run("pipeline --train " + features + " --test " + features + " --out-dir " +
              (dir / "bad_out") + " --threshold 0.5 --config " + (dir / "bad.cfg")) == 2);
}

TEST_CASE("refit-on-test changes the applied statistics") {
    TempDir dir("rbmc_cli_refit");
    make_synth(dir);
    const int rc = run("synth --classes 3 --items-per-class 4 --frames-per-item 2 --dim 6"
                       " --separation 2 --seed 77 --features-out " + (dir / "test.csv") +
                       " --labels-out " + (dir / "test_labels.csv"));
    REQUIRE(rc == 0);

    REQUIRE(run("normalize --train " + (dir / "feats.csv") + " --test " + (dir / "test.csv") +
                " --out-dir " + (dir / "plain")) == 0);
    REQUIRE(run("normalize --train " + (dir / "feats.csv") + " --test " + (dir / "test.csv") +
                " --out-dir " + (dir / "refit") + " --refit-on-test") == 0);
    CHECK(slurp(dir.path / "plain" / "mvn_stats.csv") !=
          slurp(dir.path / "refit" / "mvn_stats.csv"));
    CHECK(slurp(dir.path / "plain" / "test_normalized.csv") !=
          slurp(dir.path / "refit" / "test_normalized.csv"));
}

TEST_CASE("binary feature format flows through the pipeline") {
    TempDir dir("rbmc_cli_binary");
    const int rc = run("synth --classes 2 --items-per-class 3 --frames-per-item 2 --dim 5"
                       " --separation 4 --seed 6 --format binary --features-out " +
                       (dir / "feats.bin") + " --labels-out " + (dir / "labels.csv"));
    REQUIRE(rc == 0);
    CHECK(run("pipeline --train " + (dir / "feats.bin") + " --test " + (dir / "feats.bin") +
              " --labels " + (dir / "labels.csv") + " --out-dir " + (dir / "out") +
              " --format binary --seed 2 --hidden 8 --urbm-epochs 10 --adapt-epochs 10"
              " --num-clusters 2") == 0);
    CHECK(fs::exists(dir.path / "out" / "train_normalized.bin"));
    CHECK(fs::exists(dir.path / "out" / "eval.csv"));
}
