#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grasp/evalkit.hpp"
#include "grasp/events.hpp"

namespace grasp::synth {

// Per-executable behavior: which locations its processes touch and at what
// rate. Separable profile sets share no pool items, so a process's
// neighborhood identifies its executable exactly.
struct BehaviorProfile {
    std::string executable;
    std::vector<std::pair<std::string, double>> read_paths;   // weighted pools
    std::vector<std::pair<std::string, double>> write_paths;
    std::vector<std::pair<std::string, double>> netflows;     // "ip:port"
    std::vector<std::pair<std::string, double>> spawns;       // child executables
    int events_per_process = 6;
    int processes_per_window = 6;
};

struct GenConfig {
    int days = 14;
    std::int64_t window_minutes = 120;
    std::uint64_t seed = 1;
    bool stochastic = false;  // jitter event counts/timestamps; default exact
};

std::vector<BehaviorProfile> separable_profiles(int count);

std::string profiles_to_json(const std::vector<BehaviorProfile>& profiles);
std::vector<BehaviorProfile> profiles_from_json(const std::string& text);

// Deterministic per seed; output passes ingest validation under the TC
// schema with zero drops.
EventLog generate(const std::vector<BehaviorProfile>& profiles, const GenConfig& cfg);

enum class AttackKind : std::uint8_t { NovelExecutable, Lotl };

struct AttackScript {
    AttackKind kind = AttackKind::NovelExecutable;
    int window_index = 0;
    std::string novel_exe = "dropper.bin";  // NovelExecutable only
    std::string lotl_actor;   // existing executable carrying out the attack
    std::string lotl_mimic;   // profile whose pools the actor draws from
    std::string lotl_child;   // executable of the spawned child
};

// Merges the scripted attack events into the log (timestamp order; benign
// events and ids untouched) and emits the ground truth for the attack
// Subjects.
std::pair<EventLog, GroundTruth> inject_attack(const EventLog& log,
                                               const std::vector<BehaviorProfile>& profiles,
                                               const AttackScript& script, const GenConfig& cfg);

}  // namespace grasp::synth
