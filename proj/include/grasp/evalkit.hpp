#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "grasp/detector.hpp"
#include "grasp/encode.hpp"
#include "grasp/events.hpp"

namespace grasp {

struct GroundTruth {
    struct Attack {
        std::string name;
        std::set<std::string> node_ids;
        std::optional<std::int64_t> t_start;
        std::optional<std::int64_t> t_end;
    };
    std::vector<Attack> attacks;

    std::size_t k() const { return attacks.size(); }
    std::string to_json() const;
    static GroundTruth from_json(const std::string& text);
    static GroundTruth from_file(const std::string& path);
};

// D(p) without a threshold: fraction of attacks whose node set intersects
// the full reported set.
double attack_recall(const std::set<std::string>& reported, const GroundTruth& gt);

// Distinct alarmed nodes that belong to any attack set.
std::uint64_t true_positives(const std::set<std::string>& reported, const GroundTruth& gt);

struct Coverage {
    bool defined = false;  // false when the test period has no unseen executables
    double value = 0.0;
    std::uint64_t denominator = 0;
    std::uint64_t numerator = 0;
};

// Fraction of unseen-executable processes (distinct Subject ids in test whose
// executable is outside the vocabulary) that were alarmed at least once.
Coverage unseen_coverage(const AlarmReport& report, const EventLog& test,
                         const ExecutableVocab& vocab);

// Appendix-style baseline: alarm exactly the Subjects with out-of-vocabulary
// executables, one AnomalyUnseen per (window, node); no model involved.
AlarmReport unseen_exec_baseline(const ExecutableVocab& vocab, const EventLog& test,
                                 std::int64_t context_minutes, std::int64_t step_minutes);

// LOTL dataset transform: removes every Subject whose executable is outside
// the vocabulary together with all events incident to it.
EventLog lotl_transform(const EventLog& log, const ExecutableVocab& vocab);

struct RunResult {
    double attack_recall = 0.0;
    double alarms = 0.0;  // unique alarmed nodes
    std::optional<double> unseen_coverage;
    double true_positives = 0.0;
};

struct MetricStat {
    double mean = 0.0;
    double cv = 0.0;  // sample (N-1) std / mean; 0/0 -> 0
};

struct RunSummary {
    std::size_t runs = 0;
    MetricStat ar;      // attack recall
    MetricStat alarms;  // unique alarms
    MetricStat tp;
    std::optional<double> mu_unseen;  // mean over runs where defined

    std::string to_csv() const;  // mirrors the mu_AR / CV_AR / mu_a / mu_e / mu_TP layout
};

RunSummary summarize_runs(const std::vector<RunResult>& results);

}  // namespace grasp
