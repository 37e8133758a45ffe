#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "grasp/bundle.hpp"
#include "grasp/common.hpp"
#include "grasp/detector.hpp"
#include "grasp/evalkit.hpp"
#include "grasp/synthgen.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace grasp;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << content;
}

// Everything a run needs; config file fields mirror the flag names.
struct RunConfig {
    std::string events, train_events, test_events;
    std::string gt;
    std::string bundle;
    std::string report_dir;
    std::string out;
    std::string profiles_path;
    std::string cache_dir;
    std::string schema = "TC";
    std::int64_t cutoff_ts = -1;
    TrainConfig train;
    int runs = 1;
    int days = 14;
    std::int64_t window_minutes = 120;
    int profile_count = 5;
    std::string attack;  // "", "novel", "lotl"
    int attack_window = -1;
    bool stochastic = false;
    int max_hop = 4;
    bool per_window = false;

    Schema parsed_schema() const {
        auto s = parse_schema(schema);
        if (!s) throw ConfigError("unknown schema: " + schema);
        return *s;
    }

    // Hash of the resolved run settings; output locations excluded so that
    // identical runs into different directories stay byte-comparable.
    std::string run_hash() const {
        json j = json::parse(train.to_json());
        j["schema"] = schema;
        j["cutoff_ts"] = cutoff_ts;
        j["runs"] = runs;
        j["days"] = days;
        j["window_minutes"] = window_minutes;
        j["profile_count"] = profile_count;
        j["attack"] = attack;
        j["attack_window"] = attack_window;
        j["stochastic"] = stochastic;
        return hex64(fnv1a(j.dump()));
    }
};

void apply_config_file(RunConfig& rc, const std::string& path) {
    json j = json::parse(slurp(path));
    rc.train = TrainConfig::from_json(path.empty() ? "{}" : slurp(path));
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j[key].template get<std::decay_t<decltype(field)>>();
    };
    get("events", rc.events);
    get("train_events", rc.train_events);
    get("test_events", rc.test_events);
    get("gt", rc.gt);
    get("bundle", rc.bundle);
    get("report_dir", rc.report_dir);
    get("out", rc.out);
    get("profiles", rc.profiles_path);
    get("cache_dir", rc.cache_dir);
    get("schema", rc.schema);
    get("cutoff_ts", rc.cutoff_ts);
    get("runs", rc.runs);
    get("days", rc.days);
    get("window_minutes", rc.window_minutes);
    get("profile_count", rc.profile_count);
    get("attack", rc.attack);
    get("attack_window", rc.attack_window);
    get("stochastic", rc.stochastic);
    get("max_hop", rc.max_hop);
    get("per_window", rc.per_window);
}

std::string csv_provenance(const RunConfig& rc) {
    return "# config_hash=" + rc.run_hash() + " seed=" + std::to_string(rc.train.seed) +
           " version=" + std::string(kVersion) + "\n";
}

EventLog load_train_log(const RunConfig& rc, ParseStats* stats) {
    const Schema schema = rc.parsed_schema();
    if (!rc.train_events.empty()) return parse_events_file(rc.train_events, schema, stats);
    if (rc.events.empty()) throw ConfigError("missing events path (--events or train_events)");
    if (!fs::exists(rc.events)) throw ConfigError("events path does not exist: " + rc.events);
    auto log = parse_events_file(rc.events, schema, stats);
    if (rc.cutoff_ts < 0)
        throw ConfigError("training from --events requires --cutoff-ts (or use train_events)");
    return split_dataset(log, rc.cutoff_ts).train;
}

EventLog load_test_log(const RunConfig& rc, Schema schema, ParseStats* stats) {
    if (!rc.test_events.empty()) return parse_events_file(rc.test_events, schema, stats);
    if (rc.events.empty()) throw ConfigError("missing events path (--events or test_events)");
    if (!fs::exists(rc.events)) throw ConfigError("events path does not exist: " + rc.events);
    auto log = parse_events_file(rc.events, schema, stats);
    if (rc.cutoff_ts < 0) return log;
    return split_dataset(log, rc.cutoff_ts).test;
}

ModelBundle train_one(const RunConfig& rc, const EventLog& train_log, LocationFitStats* locstats,
                      TrainReport* report) {
    ModelBundle b;
    b.schema = train_log.schema;
    b.cfg = rc.train;
    b.vocab = build_vocab(train_log);
    LocationConfig lcfg;
    lcfg.mode = rc.train.location_mode;
    lcfg.epochs = rc.train.location_epochs;
    lcfg.lr = rc.train.location_lr;
    lcfg.seed = rc.train.seed;
    b.location = fit_location_encoder(location_corpus(train_log), lcfg, locstats);
    auto windows = build_windows(train_log, rc.train.context_minutes, rc.train.step_minutes);
    b.params = train_model(windows, b.vocab, b.location, train_log.schema, rc.train, report);
    b.train_report = report ? *report : TrainReport{};
    if (rc.train.clustering)
        b.clusters = build_clusters(b.params, windows, rc.train, b.vocab, b.location);
    return b;
}

int cmd_train(const RunConfig& rc_in) {
    RunConfig rc = rc_in;
    if (rc.bundle.empty()) throw ConfigError("missing --bundle output directory");
    rc.train.validate();

    if (rc.train.jobs > 0) nn::set_num_threads(rc.train.jobs);
    for (int run = 0; run < rc.runs; ++run) {
        RunConfig one = rc;
        one.train.seed = rc.train.seed + static_cast<std::uint64_t>(run);
        const std::string dir =
            rc.runs == 1 ? rc.bundle : (fs::path(rc.bundle) / ("run" + std::to_string(run))).string();

        ParseStats pstats;
        EventLog train_log = load_train_log(one, &pstats);
        LocationFitStats locstats;
        TrainReport report;
        ModelBundle bundle = train_one(one, train_log, &locstats, &report);
        save_bundle(bundle, dir);
        spit(fs::path(dir) / "parse_stats.json", pstats.to_json());
        {
            json j;
            j["strings"] = locstats.strings;
            j["truncated"] = locstats.truncated;
            j["oov_chars"] = locstats.oov_chars;
            j["epoch_loss"] = locstats.epoch_loss;
            spit(fs::path(dir) / "location_stats.json", j.dump(2));
        }
        json out;
        out["bundle"] = dir;
        out["bundle_id"] = bundle_hash(dir);
        out["config_hash"] = one.train.config_hash();
        out["seed"] = one.train.seed;
        out["version"] = std::string(kVersion);
        out["macro_f1"] = report.macro_f1;
        out["weighted_f1"] = report.weighted_f1;
        out["epoch_mean_loss"] = report.epoch_mean_loss;
        out["cluster_pairs"] = bundle.clusters.pair_count();
        std::cout << out.dump() << '\n';
    }
    return 0;
}

int cmd_infer(const RunConfig& rc, bool context_set, bool step_set, bool schema_set) {
    if (rc.bundle.empty()) throw ConfigError("missing --bundle directory");
    if (rc.report_dir.empty()) throw ConfigError("missing --report-dir");

    std::vector<std::pair<std::string, std::string>> pairs;  // bundle dir -> report dir
    if (fs::exists(fs::path(rc.bundle) / "manifest.json")) {
        pairs.emplace_back(rc.bundle, rc.report_dir);
    } else {
        for (int run = 0;; ++run) {
            const fs::path sub = fs::path(rc.bundle) / ("run" + std::to_string(run));
            if (!fs::exists(sub / "manifest.json")) break;
            pairs.emplace_back(sub.string(),
                               (fs::path(rc.report_dir) / ("run" + std::to_string(run))).string());
        }
        if (pairs.empty()) throw ConfigError("no model bundle found under " + rc.bundle);
    }

    for (const auto& [bundle_dir, report_dir] : pairs) {
        ModelBundle bundle = load_bundle(bundle_dir);
        // Explicit window/schema overrides must agree with the bundle.
        if (context_set && rc.train.context_minutes != bundle.cfg.context_minutes)
            throw ConfigError("context size differs from the bundle configuration");
        if (step_set && rc.train.step_minutes != bundle.cfg.step_minutes)
            throw ConfigError("step size differs from the bundle configuration");
        if (schema_set && rc.parsed_schema() != bundle.schema)
            throw ConfigError("schema differs from the bundle configuration");
        if (rc.train.jobs > 0) nn::set_num_threads(rc.train.jobs);

        ParseStats pstats;
        EventLog test_log = load_test_log(rc, bundle.schema, &pstats);
        AlarmReport report = run_inference(bundle, test_log);

        spit(fs::path(report_dir) / "alarms.jsonl", report.to_jsonl());
        spit(fs::path(report_dir) / "summary.json", report.summary_json());
        spit(fs::path(report_dir) / "timeline.csv", csv_provenance(rc) + report.timeline_csv());
        spit(fs::path(report_dir) / "parse_stats.json", pstats.to_json());
        std::cout << report.summary_json() << '\n';
    }
    return 0;
}

RunResult result_from_summary(const json& summary, const GroundTruth& gt) {
    RunResult r;
    std::set<std::string> alarmed;
    for (const auto& id : summary.value("alarmed_nodes", std::vector<std::string>{}))
        alarmed.insert(id);
    std::set<std::string> unseen;
    for (const auto& id : summary.value("unseen_processes", std::vector<std::string>{}))
        unseen.insert(id);
    r.attack_recall = attack_recall(alarmed, gt);
    r.alarms = static_cast<double>(alarmed.size());
    r.true_positives = static_cast<double>(true_positives(alarmed, gt));
    if (!unseen.empty()) {
        std::uint64_t hit = 0;
        for (const auto& id : unseen) hit += alarmed.count(id);
        r.unseen_coverage = static_cast<double>(hit) / static_cast<double>(unseen.size());
    }
    return r;
}

int cmd_eval(const RunConfig& rc, const std::vector<std::string>& report_dirs) {
    if (rc.gt.empty() || !fs::exists(rc.gt)) throw DataError("missing ground truth file (--gt)");
    GroundTruth gt = GroundTruth::from_file(rc.gt);

    std::vector<std::string> dirs = report_dirs;
    if (dirs.empty() && !rc.report_dir.empty()) {
        if (fs::exists(fs::path(rc.report_dir) / "summary.json")) {
            dirs.push_back(rc.report_dir);
        } else {
            for (int run = 0;; ++run) {
                const fs::path sub = fs::path(rc.report_dir) / ("run" + std::to_string(run));
                if (!fs::exists(sub / "summary.json")) break;
                dirs.push_back(sub.string());
            }
        }
    }
    if (dirs.empty()) throw DataError("no reports to evaluate");

    std::vector<RunResult> results;
    for (const auto& dir : dirs) {
        json summary = json::parse(slurp((fs::path(dir) / "summary.json").string()));
        results.push_back(result_from_summary(summary, gt));
    }
    RunSummary summary = summarize_runs(results);
    const std::string csv = csv_provenance(rc) + summary.to_csv();
    if (!rc.out.empty()) spit(rc.out, csv);
    std::cout << csv;
    return 0;
}

int cmd_gen(const RunConfig& rc) {
    if (rc.events.empty()) throw ConfigError("missing --events output path");
    std::vector<synth::BehaviorProfile> profiles =
        rc.profiles_path.empty() ? synth::separable_profiles(rc.profile_count)
                                 : synth::profiles_from_json(slurp(rc.profiles_path));
    synth::GenConfig gcfg;
    gcfg.days = rc.days;
    gcfg.window_minutes = rc.window_minutes;
    gcfg.seed = rc.train.seed;
    gcfg.stochastic = rc.stochastic;

    EventLog log = synth::generate(profiles, gcfg);
    std::optional<GroundTruth> gt;
    if (!rc.attack.empty()) {
        synth::AttackScript script;
        if (rc.attack == "novel") {
            script.kind = synth::AttackKind::NovelExecutable;
        } else if (rc.attack == "lotl") {
            script.kind = synth::AttackKind::Lotl;
            if (profiles.size() < 2) throw ConfigError("lotl attack needs at least two profiles");
            script.lotl_actor = profiles[0].executable;
            script.lotl_mimic = profiles[1].executable;
            script.lotl_child = profiles.back().executable;
        } else {
            throw ConfigError("unknown attack kind: " + rc.attack + " (use novel|lotl)");
        }
        const std::int64_t windows = rc.days * 24 * 60 / rc.window_minutes;
        script.window_index =
            rc.attack_window >= 0 ? rc.attack_window : static_cast<int>(windows * 3 / 4);
        auto [attacked, truth] = synth::inject_attack(log, profiles, script, gcfg);
        log = std::move(attacked);
        gt = std::move(truth);
    }
    serialize_events_file(log, rc.events);
    if (gt) {
        if (rc.gt.empty()) throw ConfigError("attack generation requires --gt output path");
        spit(rc.gt, gt->to_json());
    }
    json meta;
    meta["version"] = std::string(kVersion);
    meta["seed"] = rc.train.seed;
    meta["config_hash"] = rc.run_hash();
    meta["events"] = rc.events;
    meta["event_count"] = log.events.size();
    meta["attack"] = rc.attack;
    spit(rc.events + ".meta.json", meta.dump(2));
    std::cout << meta.dump() << '\n';
    return 0;
}

int cmd_stats(const RunConfig& rc) {
    if (rc.events.empty() || !fs::exists(rc.events))
        throw ConfigError("missing events path (--events)");
    ParseStats pstats;
    EventLog log = parse_events_file(rc.events, rc.parsed_schema(), &pstats);
    auto windows = build_windows(log, rc.train.context_minutes, rc.train.step_minutes);
    if (!rc.cache_dir.empty()) write_window_cache(windows, rc.cache_dir);

    std::vector<HopStats> per_window;
    per_window.reserve(windows.size());
    for (const auto& w : windows) {
        per_window.push_back(hop_statistics(w, rc.max_hop));
        if (per_window.back().no_seeds)
            std::cerr << "warning: window " << w.start << " has no seed processes\n";
    }
    HopStats merged = merge_hop_stats(per_window);
    std::string csv = csv_provenance(rc) + merged.to_csv();
    if (!rc.out.empty()) spit(rc.out, csv);
    std::cout << csv;

    if (rc.per_window && !rc.out.empty()) {
        std::ostringstream os;
        os << csv_provenance(rc) << "window_start,hop,max,mean\n";
        for (std::size_t i = 0; i < windows.size(); ++i)
            for (int h = 1; h <= per_window[i].max_hop; ++h)
                os << windows[i].start << ',' << h << ','
                   << per_window[i].max_size[static_cast<std::size_t>(h - 1)] << ','
                   << per_window[i].mean_size[static_cast<std::size_t>(h - 1)] << '\n';
        spit(rc.out + ".per_window.csv", os.str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grasp: masked self-supervised process anomaly detection"};
    app.require_subcommand(1);

    RunConfig rc;
    std::string config_path;
    std::vector<std::string> report_dirs;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file; flags override its fields");
        cmd->add_option("--seed", rc.train.seed, "run seed");
        cmd->add_option("--jobs", rc.train.jobs, "worker cap for parallel sections");
    };

    auto* train = app.add_subcommand("train", "fit a model bundle from training events");
    add_common(train);
    train->add_option("--events", rc.events, "events JSONL (training side via --cutoff-ts)");
    train->add_option("--train-events", rc.train_events, "pre-split training events JSONL");
    train->add_option("--cutoff-ts", rc.cutoff_ts, "train/test split timestamp (ns)");
    train->add_option("--bundle", rc.bundle, "output bundle directory");
    train->add_option("--schema", rc.schema, "TC or OpTC");
    train->add_option("--runs", rc.runs, "train N bundles with seeds seed..seed+N-1");
    auto* ctx_t = train->add_option("--context-min", rc.train.context_minutes, "window context");
    auto* step_t = train->add_option("--step-min", rc.train.step_minutes, "window step");
    train->add_option("--batch-size", rc.train.batch_size);
    train->add_option("--epochs", rc.train.epochs);
    train->add_option("--fanout1", rc.train.fanout1, "-1 all, 0 none, else cap");
    train->add_option("--fanout2", rc.train.fanout2);
    std::string location_mode;
    train->add_option("--location-mode", location_mode, "transformer|wordembed|disabled");
    bool ablate_ae = false, ablate_nbr = false, ablate_cluster = false;
    train->add_flag("--ablate-autoencoder", ablate_ae, "zero location embeddings");
    train->add_flag("--ablate-neighborhood", ablate_nbr, "isolate seeds (fanouts 0)");
    train->add_flag("--ablate-clustering", ablate_cluster, "skip the benign-mixup map");
    (void)ctx_t;
    (void)step_t;

    auto* infer = app.add_subcommand("infer", "score events against a bundle");
    add_common(infer);
    infer->add_option("--bundle", rc.bundle, "bundle directory (or parent of runN/)");
    infer->add_option("--events", rc.events, "events JSONL (test side via --cutoff-ts)");
    infer->add_option("--test-events", rc.test_events, "pre-split test events JSONL");
    infer->add_option("--cutoff-ts", rc.cutoff_ts);
    infer->add_option("--report-dir", rc.report_dir, "output directory");
    auto* ctx_i = infer->add_option("--context-min", rc.train.context_minutes);
    auto* step_i = infer->add_option("--step-min", rc.train.step_minutes);
    auto* schema_i = infer->add_option("--schema", rc.schema);

    auto* eval = app.add_subcommand("eval", "aggregate reports against ground truth");
    add_common(eval);
    eval->add_option("--gt", rc.gt, "ground truth JSON");
    eval->add_option("--report-dir", rc.report_dir, "report directory (or parent of runN/)");
    eval->add_option("--reports", report_dirs, "explicit report directories");
    eval->add_option("--out", rc.out, "write the CSV here as well");

    auto* gen = app.add_subcommand("gen", "generate synthetic events (and ground truth)");
    add_common(gen);
    gen->add_option("--events", rc.events, "output events JSONL");
    gen->add_option("--gt", rc.gt, "output ground truth JSON (with --attack)");
    gen->add_option("--profiles", rc.profiles_path, "behavior profiles JSON");
    gen->add_option("--profile-count", rc.profile_count, "built-in separable profiles to use");
    gen->add_option("--days", rc.days);
    gen->add_option("--window-min", rc.window_minutes);
    gen->add_option("--attack", rc.attack, "novel|lotl");
    gen->add_option("--attack-window", rc.attack_window, "window index; default 3/4 into the log");
    gen->add_flag("--stochastic", rc.stochastic, "jitter counts and timestamps");

    auto* stats = app.add_subcommand("stats", "hop-statistics CSV for an event log");
    add_common(stats);
    stats->add_option("--events", rc.events);
    stats->add_option("--schema", rc.schema);
    stats->add_option("--context-min", rc.train.context_minutes);
    stats->add_option("--step-min", rc.train.step_minutes);
    stats->add_option("--max-hop", rc.max_hop);
    stats->add_option("--out", rc.out, "CSV output path");
    stats->add_option("--cache-dir", rc.cache_dir, "also write the window cache here");
    stats->add_flag("--per-window", rc.per_window, "emit per-window rows next to --out");

    // Parse once to find the config file, apply it, then parse again so
    // explicit flags override file values.
    try {
        app.parse(argc, argv);
        if (!config_path.empty()) {
            apply_config_file(rc, config_path);
            rc.train = TrainConfig::from_json(slurp(config_path));
            app.clear();
            app.parse(argc, argv);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (train->parsed()) {
            if (ablate_ae) rc.train.location_mode = LocationMode::Disabled;
            if (!location_mode.empty()) {
                auto m = parse_location_mode(location_mode);
                if (!m) throw ConfigError("unknown location mode: " + location_mode);
                rc.train.location_mode = *m;
            }
            if (ablate_nbr) {
                rc.train.fanout1 = 0;
                rc.train.fanout2 = 0;
            }
            if (ablate_cluster) rc.train.clustering = false;
            return cmd_train(rc);
        }
        if (infer->parsed())
            return cmd_infer(rc, ctx_i->count() > 0, step_i->count() > 0, schema_i->count() > 0);
        if (eval->parsed()) return cmd_eval(rc, report_dirs);
        if (gen->parsed()) return cmd_gen(rc);
        if (stats->parsed()) return cmd_stats(rc);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const TrainingError& e) {
        std::cerr << "training error: " << e.what() << '\n';
        return kExitTraining;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
