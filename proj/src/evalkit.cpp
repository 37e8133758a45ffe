#include "grasp/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "grasp/common.hpp"
#include "grasp/windows.hpp"
#include "json.hpp"

namespace grasp {

using nlohmann::json;

std::string GroundTruth::to_json() const {
    json arr = json::array();
    for (const auto& a : attacks) {
        json aj;
        aj["name"] = a.name;
        aj["node_ids"] = std::vector<std::string>(a.node_ids.begin(), a.node_ids.end());
        if (a.t_start) aj["t_start"] = *a.t_start;
        if (a.t_end) aj["t_end"] = *a.t_end;
        arr.push_back(aj);
    }
    json j;
    j["attacks"] = arr;
    return j.dump(2);
}

GroundTruth GroundTruth::from_json(const std::string& text) {
    GroundTruth gt;
    json j = json::parse(text);
    for (const auto& aj : j.at("attacks")) {
        Attack a;
        a.name = aj.value("name", "");
        for (const auto& id : aj.at("node_ids")) a.node_ids.insert(id.get<std::string>());
        if (aj.contains("t_start")) a.t_start = aj["t_start"].get<std::int64_t>();
        if (aj.contains("t_end")) a.t_end = aj["t_end"].get<std::int64_t>();
        gt.attacks.push_back(std::move(a));
    }
    return gt;
}

GroundTruth GroundTruth::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open ground truth file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

double attack_recall(const std::set<std::string>& reported, const GroundTruth& gt) {
    if (gt.attacks.empty()) throw DataError("no attacks defined in ground truth");
    std::size_t detected = 0;
    for (const auto& a : gt.attacks) {
        const bool hit = std::any_of(a.node_ids.begin(), a.node_ids.end(),
                                     [&](const std::string& id) { return reported.count(id) > 0; });
        detected += hit ? 1 : 0;
    }
    return static_cast<double>(detected) / static_cast<double>(gt.attacks.size());
}

std::uint64_t true_positives(const std::set<std::string>& reported, const GroundTruth& gt) {
    std::uint64_t n = 0;
    for (const auto& id : reported) {
        const bool in_any = std::any_of(gt.attacks.begin(), gt.attacks.end(),
                                        [&](const auto& a) { return a.node_ids.count(id) > 0; });
        n += in_any ? 1 : 0;
    }
    return n;
}

Coverage unseen_coverage(const AlarmReport& report, const EventLog& test,
                         const ExecutableVocab& vocab) {
    Coverage c;
    std::set<std::string> unseen;
    for (const auto& [id, info] : test.entity_table)
        if (info.kind == NodeKind::Subject && vocab.index_of(info.attr) < 0) unseen.insert(id);
    c.denominator = unseen.size();
    if (unseen.empty()) return c;  // n/a sentinel
    for (const auto& id : unseen) c.numerator += report.alarmed_nodes.count(id);
    c.defined = true;
    c.value = static_cast<double>(c.numerator) / static_cast<double>(c.denominator);
    return c;
}

AlarmReport unseen_exec_baseline(const ExecutableVocab& vocab, const EventLog& test,
                                 std::int64_t context_minutes, std::int64_t step_minutes) {
    AlarmReport report;
    auto windows = build_windows(test, context_minutes, step_minutes);
    for (const auto& w : windows) {
        WindowAlarmCount wc;
        wc.window_start = w.start;
        for (std::uint32_t s : w.seed_processes) {
            ++report.total_verdicts;
            report.test_processes.insert(w.node_ids[s]);
            if (vocab.index_of(w.node_attrs[s]) >= 0) continue;
            Verdict v;
            v.window_start = w.start;
            v.window_end = w.end;
            v.node_id = w.node_ids[s];
            v.observed = w.node_attrs[s];
            v.kind = VerdictKind::AnomalyUnseen;
            report.unseen_processes.insert(v.node_id);
            report.alarmed_nodes.insert(v.node_id);
            report.alarms.push_back(std::move(v));
            ++wc.alarms;
        }
        report.per_window.push_back(wc);
    }
    return report;
}

EventLog lotl_transform(const EventLog& log, const ExecutableVocab& vocab) {
    std::set<std::string> removed;
    for (const auto& [id, info] : log.entity_table)
        if (info.kind == NodeKind::Subject && vocab.index_of(info.attr) < 0) removed.insert(id);

    std::vector<ProvenanceEvent> kept;
    kept.reserve(log.events.size());
    for (const auto& ev : log.events)
        if (removed.count(ev.src_id) == 0 && removed.count(ev.dst_id) == 0) kept.push_back(ev);
    return make_event_log(log.schema, std::move(kept));
}

namespace {

MetricStat stat_of(const std::vector<double>& values) {
    MetricStat s;
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return s;  // sample std undefined for N=1; CV stays 0
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    s.cv = s.mean != 0.0 ? sd / s.mean : 0.0;
    return s;
}

}  // namespace

RunSummary summarize_runs(const std::vector<RunResult>& results) {
    if (results.empty()) throw DataError("summarize_runs requires at least one run");
    RunSummary s;
    s.runs = results.size();
    std::vector<double> ar, alarms, tp, unseen;
    for (const auto& r : results) {
        ar.push_back(r.attack_recall);
        alarms.push_back(r.alarms);
        tp.push_back(r.true_positives);
        if (r.unseen_coverage) unseen.push_back(*r.unseen_coverage);
    }
    s.ar = stat_of(ar);
    s.alarms = stat_of(alarms);
    s.tp = stat_of(tp);
    if (!unseen.empty()) s.mu_unseen = stat_of(unseen).mean;
    return s;
}

std::string RunSummary::to_csv() const {
    std::ostringstream os;
    os << "runs,mu_attack_recall,cv_attack_recall,mu_alarms,mu_unseen_coverage,mu_tp\n";
    os << runs << ',' << ar.mean << ',' << ar.cv << ',' << alarms.mean << ',';
    if (mu_unseen)
        os << *mu_unseen;
    else
        os << "n/a";
    os << ',' << tp.mean << '\n';
    return os.str();
}

}  // namespace grasp
