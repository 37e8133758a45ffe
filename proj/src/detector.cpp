#include "grasp/detector.hpp"

#include <algorithm>
#include <sstream>

#include "grasp/common.hpp"
#include "json.hpp"

namespace grasp {

using nlohmann::json;

std::string_view to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::BenignMatch: return "BenignMatch";
        case VerdictKind::BenignCluster: return "BenignCluster";
        case VerdictKind::AnomalyMisclass: return "AnomalyMisclass";
        case VerdictKind::AnomalyUnseen: return "AnomalyUnseen";
    }
    return "?";
}

bool is_alarm(VerdictKind k) {
    return k == VerdictKind::AnomalyMisclass || k == VerdictKind::AnomalyUnseen;
}

VerdictKind judge(const std::string& observed, int predicted, const ExecutableVocab& vocab,
                  const ClusterMap& clusters) {
    const int observed_idx = vocab.index_of(observed);
    if (observed_idx < 0) return VerdictKind::AnomalyUnseen;
    if (predicted == observed_idx) return VerdictKind::BenignMatch;
    if (clusters.contains(observed_idx, predicted)) return VerdictKind::BenignCluster;
    return VerdictKind::AnomalyMisclass;
}

namespace {

struct WindowVerdicts {
    std::int64_t window_start = 0;
    std::vector<Verdict> verdicts;  // all seeds, benign included
};

WindowVerdicts score_window(const WindowGraph& w, const ModelBundle& m,
                            std::uint64_t sample_seed) {
    WindowVerdicts out;
    out.window_start = w.start;
    auto batches = make_batches(w, m.cfg, m.vocab, m.location, sample_seed, nullptr);
    for (const auto& batch : batches) {
        auto emb = nn::gat_forward(batch, m.params, false, 0);
        auto probs = nn::decode(emb, m.params);
        for (std::size_t s = 0; s < batch.seed_ids.size(); ++s) {
            int best = 0;
            for (int j = 1; j < probs.cols; ++j)
                if (probs.at(static_cast<int>(s), j) > probs.at(static_cast<int>(s), best))
                    best = j;
            Verdict v;
            v.window_start = w.start;
            v.window_end = w.end;
            v.node_id = batch.seed_ids[s];
            v.observed = batch.seed_observed[s];
            v.predicted = m.vocab.at(best);
            v.probability = probs.at(static_cast<int>(s), best);
            v.kind = judge(v.observed, best, m.vocab, m.clusters);
            out.verdicts.push_back(std::move(v));
        }
    }
    return out;
}

}  // namespace

AlarmReport run_inference(const ModelBundle& bundle, const EventLog& test) {
    if (test.schema != bundle.schema)
        throw ConfigError("schema mismatch between bundle and test data");
    auto windows = build_windows(test, bundle.cfg.context_minutes, bundle.cfg.step_minutes);

    const std::uint64_t sample_seed = inference_sample_seed(bundle.cfg.seed);
    std::vector<WindowVerdicts> results(windows.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(windows.size()); ++i) {
        auto idx = static_cast<std::size_t>(i);
        results[idx] = score_window(windows[idx], bundle, sample_seed);
    }

    AlarmReport report;
    report.seed = bundle.cfg.seed;
    report.config_hash = bundle.cfg.config_hash();
    report.bundle_id = bundle.bundle_id;
    for (auto& res : results) {
        WindowAlarmCount wc;
        wc.window_start = res.window_start;
        std::sort(res.verdicts.begin(), res.verdicts.end(),
                  [](const Verdict& a, const Verdict& b) { return a.node_id < b.node_id; });
        for (auto& v : res.verdicts) {
            ++report.total_verdicts;
            report.test_processes.insert(v.node_id);
            if (bundle.vocab.index_of(v.observed) < 0) report.unseen_processes.insert(v.node_id);
            if (is_alarm(v.kind)) {
                ++wc.alarms;
                report.alarmed_nodes.insert(v.node_id);
                report.alarms.push_back(std::move(v));
            }
        }
        report.per_window.push_back(wc);
    }
    return report;
}

std::string AlarmReport::to_jsonl() const {
    std::ostringstream os;
    for (const auto& v : alarms) {
        json j;
        j["window_start"] = v.window_start;
        j["window_end"] = v.window_end;
        j["node_id"] = v.node_id;
        j["observed"] = v.observed;
        j["predicted"] = v.predicted;
        j["probability"] = v.probability;
        j["kind"] = std::string(to_string(v.kind));
        os << j.dump() << '\n';
    }
    return os.str();
}

std::string AlarmReport::summary_json() const {
    json j;
    j["version"] = std::string(kVersion);
    j["seed"] = seed;
    j["config_hash"] = config_hash;
    j["bundle_id"] = bundle_id;
    j["total_verdicts"] = total_verdicts;
    j["time_based_alarms"] = time_based_alarms();
    j["unique_alarms"] = unique_alarms();
    j["test_process_count"] = test_processes.size();
    j["alarmed_nodes"] = std::vector<std::string>(alarmed_nodes.begin(), alarmed_nodes.end());
    j["unseen_processes"] =
        std::vector<std::string>(unseen_processes.begin(), unseen_processes.end());
    std::uint64_t unseen_alarmed = 0;
    for (const auto& id : unseen_processes) unseen_alarmed += alarmed_nodes.count(id);
    j["unseen_alarmed"] = unseen_alarmed;
    json pw = json::array();
    for (const auto& w : per_window)
        pw.push_back({{"window_start", w.window_start}, {"alarms", w.alarms}});
    j["per_window"] = pw;
    std::map<std::string, std::uint64_t> kind_counts;
    for (const auto& v : alarms) ++kind_counts[std::string(to_string(v.kind))];
    j["alarm_kinds"] = kind_counts;
    return j.dump(2);
}

std::string AlarmReport::timeline_csv() const { return window_timeline(*this); }

std::string window_timeline(const AlarmReport& report) {
    std::ostringstream os;
    os << "window_start,alarm_count\n";
    for (const auto& w : report.per_window) os << w.window_start << ',' << w.alarms << '\n';
    return os.str();
}

}  // namespace grasp
