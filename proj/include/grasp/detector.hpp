#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "grasp/encode.hpp"
#include "grasp/gat.hpp"
#include "grasp/trainer.hpp"

namespace grasp {

enum class VerdictKind : std::uint8_t {
    BenignMatch,
    BenignCluster,
    AnomalyMisclass,
    AnomalyUnseen,
};
std::string_view to_string(VerdictKind k);
bool is_alarm(VerdictKind k);

struct Verdict {
    std::int64_t window_start = 0;
    std::int64_t window_end = 0;
    std::string node_id;
    std::string observed;
    std::string predicted;
    double probability = 0.0;  // reported for analyst context, never filtered on
    VerdictKind kind = VerdictKind::BenignMatch;
};

struct WindowAlarmCount {
    std::int64_t window_start = 0;
    std::uint64_t alarms = 0;
};

struct AlarmReport {
    std::vector<Verdict> alarms;  // anomaly verdicts, ordered (window_start, node id)
    std::vector<WindowAlarmCount> per_window;  // every scored window, alarm-free included
    std::uint64_t total_verdicts = 0;          // seed verdicts over all windows (time-based)
    std::set<std::string> alarmed_nodes;       // unique node ids
    std::set<std::string> test_processes;      // distinct Subject ids judged
    std::set<std::string> unseen_processes;    // Subjects with out-of-vocab executables

    std::uint64_t seed = 0;
    std::string config_hash;
    std::string bundle_id;

    std::uint64_t time_based_alarms() const { return alarms.size(); }
    std::uint64_t unique_alarms() const { return alarmed_nodes.size(); }

    std::string to_jsonl() const;   // one alarm verdict per line
    std::string summary_json() const;
    std::string timeline_csv() const;
};

// Pure classification of one (observed, predicted) pair.
VerdictKind judge(const std::string& observed, int predicted, const ExecutableVocab& vocab,
                  const ClusterMap& clusters);

// A loaded model, everything inference needs.
struct ModelBundle {
    nn::ModelParams params;
    ExecutableVocab vocab;
    LocationEncoder location;
    ClusterMap clusters;
    TrainConfig cfg;  // as trained; carries the window geometry and rng seed
    Schema schema = Schema::TC;
    TrainReport train_report;
    std::string bundle_id;
};

// Scores every seed process of every window; windows run in parallel over
// the frozen bundle. Deterministic: batching and neighbor sampling reuse the
// bundle's inference stream, dropout is off.
AlarmReport run_inference(const ModelBundle& bundle, const EventLog& test);

// Per-window alarm counts ordered by window_start (CSV window_start,alarm_count).
std::string window_timeline(const AlarmReport& report);

}  // namespace grasp
