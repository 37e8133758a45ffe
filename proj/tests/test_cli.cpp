#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string bin() {
    const char* b = std::getenv("GRASP_BIN");
    REQUIRE(b != nullptr);
    return b;
}

int run(const std::string& args) {
    const std::string cmd = bin() + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("grasp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int counter() {
        static int c = 0;
        return c++;
    }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// Fast end-to-end settings: tiny corpus, small model.
std::string fast_flags() {
    return " --epochs 2 --location-mode disabled";
}

void write_config(const fs::path& p, int hidden, int heads, int mlp_hidden) {
    json j;
    j["hidden"] = hidden;
    j["heads"] = heads;
    j["mlp_hidden"] = mlp_hidden;
    std::ofstream out(p);
    out << j.dump();
}

}  // namespace

TEST_CASE("gen/train/infer/eval pipeline works end to end") {
    TempDir tmp;
    const std::string events = tmp / "events.jsonl";
    const std::string gt = tmp / "gt.json";
    const std::string config = tmp / "config.json";
    write_config(config, 16, 2, 16);

    // Day of benign data plus a novel-executable attack in the second half.
    REQUIRE(run("gen --events " + events + " --gt " + gt +
                " --days 1 --profile-count 3 --attack novel --attack-window 9 --seed 5") == 0);
    REQUIRE(fs::exists(events));
    REQUIRE(fs::exists(gt));

    // Train on the first half (attack-free), infer over everything.
    const std::int64_t cutoff = 6LL * 120 * 60'000'000'000LL;  // 6 windows
    const std::string bundle = tmp / "bundle";
    REQUIRE(run("train --config " + config + " --events " + events + " --cutoff-ts " +
                std::to_string(cutoff) + " --bundle " + bundle + " --seed 5" + fast_flags()) == 0);
    REQUIRE(fs::exists(fs::path(bundle) / "manifest.json"));
    REQUIRE(fs::exists(fs::path(bundle) / "params.bin"));
    REQUIRE(fs::exists(fs::path(bundle) / "clusters.json"));
    REQUIRE(fs::exists(fs::path(bundle) / "vocab.json"));
    REQUIRE(fs::exists(fs::path(bundle) / "location.bin"));

    const std::string report = tmp / "report";
    REQUIRE(run("infer --bundle " + bundle + " --events " + events + " --cutoff-ts " +
                std::to_string(cutoff) + " --report-dir " + report) == 0);
    REQUIRE(fs::exists(fs::path(report) / "alarms.jsonl"));
    REQUIRE(fs::exists(fs::path(report) / "summary.json"));
    REQUIRE(fs::exists(fs::path(report) / "timeline.csv"));

    json summary = json::parse(slurp(fs::path(report) / "summary.json"));
    CHECK(summary["unique_alarms"].get<int>() >= 1);
    CHECK(summary.contains("config_hash"));
    CHECK(summary.contains("seed"));

    const std::string out_csv = tmp / "summary.csv";
    REQUIRE(run("eval --gt " + gt + " --report-dir " + report + " --out " + out_csv) == 0);
    const std::string csv = slurp(out_csv);
    CHECK(csv.find("mu_attack_recall") != std::string::npos);
    CHECK(csv.find("\n1,1,") != std::string::npos);  // 1 run, recall 1

    SUBCASE("reruns are byte identical") {
        const std::string report2 = tmp / "report2";
        REQUIRE(run("infer --bundle " + bundle + " --events " + events + " --cutoff-ts " +
                    std::to_string(cutoff) + " --report-dir " + report2) == 0);
        CHECK(slurp(fs::path(report) / "alarms.jsonl") ==
              slurp(fs::path(report2) / "alarms.jsonl"));
        CHECK(slurp(fs::path(report) / "summary.json") ==
              slurp(fs::path(report2) / "summary.json"));
    }

    SUBCASE("window override mismatching the bundle is a config error") {
        CHECK(run("infer --bundle " + bundle + " --events " + events + " --report-dir " +
                  (tmp / "r3") + " --context-min 60") == 2);
    }

    SUBCASE("infer on the training period is silent") {
        const std::string train_events = tmp / "train.jsonl";
        // Re-generate the clean benign log; the attacked log differs only in
        // the attack events, which lie beyond the cutoff.
        REQUIRE(run("gen --events " + train_events + " --days 1 --profile-count 3 --seed 5") == 0);
        const std::string report3 = tmp / "report3";
        REQUIRE(run("infer --bundle " + bundle + " --events " + train_events + " --cutoff-ts 0" +
                    " --report-dir " + report3) == 0);
        // cutoff 0 puts everything in the test side; restrict to train span.
        json s = json::parse(slurp(fs::path(report3) / "summary.json"));
        // Windows beyond the training period contain drift-free benign data
        // from the same profiles, so alarms stay at zero as well.
        CHECK(s["unique_alarms"].get<int>() == 0);
    }
}

TEST_CASE("exit codes: config=2, data=3") {
    TempDir tmp;
    CHECK(run("train --events /definitely/missing.jsonl --bundle " + (tmp / "b")) == 2);
    CHECK(run("eval --gt /missing/gt.json --report-dir " + (tmp / "r")) == 3);
    // gen without an attack writes no GT; eval over an empty report dir fails.
    const std::string gt = tmp / "gt.json";
    {
        std::ofstream out(gt);
        out << R"({"attacks":[{"name":"a","node_ids":["x"]}]})";
    }
    CHECK(run("eval --gt " + gt + " --report-dir " + (tmp / "empty")) == 3);
}

TEST_CASE("gen determinism and GT presence only with --attack") {
    TempDir tmp;
    const std::string a = tmp / "a.jsonl";
    const std::string b = tmp / "b.jsonl";
    REQUIRE(run("gen --events " + a + " --days 1 --profile-count 2 --seed 7") == 0);
    REQUIRE(run("gen --events " + b + " --days 1 --profile-count 2 --seed 7") == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(!fs::exists(tmp / "gt.json"));

    const std::string c = tmp / "c.jsonl";
    REQUIRE(run("gen --events " + c + " --days 1 --profile-count 2 --seed 8") == 0);
    CHECK(slurp(a) != slurp(c));
}

TEST_CASE("stats command emits the hop CSV and window cache") {
    TempDir tmp;
    const std::string events = tmp / "events.jsonl";
    REQUIRE(run("gen --events " + events + " --days 1 --profile-count 2 --seed 9") == 0);
    const std::string csv = tmp / "hops.csv";
    const std::string cache = tmp / "cache";
    REQUIRE(run("stats --events " + events + " --out " + csv + " --cache-dir " + cache) == 0);
    const std::string text = slurp(csv);
    CHECK(text.find("hop,max,mean") != std::string::npos);
    CHECK(text.find("# config_hash=") == 0);
    CHECK(fs::exists(fs::path(cache) / "index.json"));
}

TEST_CASE("multi-run orchestration: N bundles, N reports, CV aggregation") {
    TempDir tmp;
    const std::string events = tmp / "events.jsonl";
    const std::string gt = tmp / "gt.json";
    const std::string config = tmp / "config.json";
    write_config(config, 16, 2, 16);
    REQUIRE(run("gen --events " + events + " --gt " + gt +
                " --days 1 --profile-count 2 --attack novel --attack-window 9 --seed 21") == 0);

    const std::int64_t cutoff = 6LL * 120 * 60'000'000'000LL;
    const std::string bundle = tmp / "bundles";
    REQUIRE(run("train --config " + config + " --events " + events + " --cutoff-ts " +
                std::to_string(cutoff) + " --bundle " + bundle + " --seed 21 --runs 2" +
                fast_flags()) == 0);
    REQUIRE(fs::exists(fs::path(bundle) / "run0" / "manifest.json"));
    REQUIRE(fs::exists(fs::path(bundle) / "run1" / "manifest.json"));

    const std::string reports = tmp / "reports";
    REQUIRE(run("infer --bundle " + bundle + " --events " + events + " --cutoff-ts " +
                std::to_string(cutoff) + " --report-dir " + reports) == 0);
    REQUIRE(fs::exists(fs::path(reports) / "run0" / "summary.json"));
    REQUIRE(fs::exists(fs::path(reports) / "run1" / "summary.json"));

    const std::string csv_path = tmp / "eval.csv";
    REQUIRE(run("eval --gt " + gt + " --report-dir " + reports + " --out " + csv_path) == 0);
    const std::string csv = slurp(csv_path);
    // Two runs, both catch the novel-executable attack: recall 1, CV 0.
    CHECK(csv.find("\n2,1,0,") != std::string::npos);
}

TEST_CASE("ablation flags are reflected in the bundle") {
    TempDir tmp;
    const std::string events = tmp / "events.jsonl";
    const std::string config = tmp / "config.json";
    write_config(config, 16, 2, 16);
    REQUIRE(run("gen --events " + events + " --days 1 --profile-count 2 --seed 11") == 0);
    const std::string bundle = tmp / "bundle";
    REQUIRE(run("train --config " + config + " --train-events " + events + " --bundle " + bundle +
                " --seed 11 --ablate-clustering" + fast_flags()) == 0);
    json clusters = json::parse(slurp(fs::path(bundle) / "clusters.json"));
    CHECK(clusters.empty());
    json manifest = json::parse(slurp(fs::path(bundle) / "manifest.json"));
    CHECK(manifest["clustering"].get<bool>() == false);
}
