#include "grasp/synthgen.hpp"

#include <algorithm>

#include "grasp/common.hpp"
#include "json.hpp"

namespace grasp::synth {

using nlohmann::json;

namespace {

constexpr std::int64_t kNsPerMinute = 60'000'000'000LL;
constexpr std::int64_t kEventSpacing = 1'000'000;  // 1 ms between generated events

const std::string& pick(const std::vector<std::pair<std::string, double>>& pool, Rng& rng) {
    double total = 0.0;
    for (const auto& [item, weight] : pool) total += weight;
    double x = rng.uniform() * total;
    for (const auto& [item, weight] : pool) {
        x -= weight;
        if (x <= 0.0) return item;
    }
    return pool.back().first;
}

ProvenanceEvent subject_file(std::int64_t ts, const std::string& pid, const std::string& exe,
                             const std::string& path, const std::string& op) {
    ProvenanceEvent ev;
    ev.ts = ts;
    ev.src_id = pid;
    ev.src_kind = NodeKind::Subject;
    ev.src_attr = exe;
    ev.dst_id = "f:" + path;
    ev.dst_kind = NodeKind::File;
    ev.dst_attr = path;
    ev.op = op;
    return ev;
}

ProvenanceEvent subject_flow(std::int64_t ts, const std::string& pid, const std::string& exe,
                             const std::string& endpoint, const std::string& op) {
    ProvenanceEvent ev;
    ev.ts = ts;
    ev.src_id = pid;
    ev.src_kind = NodeKind::Subject;
    ev.src_attr = exe;
    ev.dst_id = "n:" + endpoint;
    ev.dst_kind = NodeKind::Netflow;
    ev.dst_attr = endpoint;
    ev.op = op;
    return ev;
}

ProvenanceEvent subject_subject(std::int64_t ts, const std::string& pid, const std::string& exe,
                                const std::string& child_id, const std::string& child_exe,
                                const std::string& op) {
    ProvenanceEvent ev;
    ev.ts = ts;
    ev.src_id = pid;
    ev.src_kind = NodeKind::Subject;
    ev.src_attr = exe;
    ev.dst_id = child_id;
    ev.dst_kind = NodeKind::Subject;
    ev.dst_attr = child_exe;
    ev.op = op;
    return ev;
}

const BehaviorProfile* find_profile(const std::vector<BehaviorProfile>& profiles,
                                    const std::string& exe) {
    for (const auto& p : profiles)
        if (p.executable == exe) return &p;
    return nullptr;
}

}  // namespace

std::vector<BehaviorProfile> separable_profiles(int count) {
    static const char* names[] = {"svc_alpha",  "svc_bravo", "svc_charlie", "svc_delta",
                                  "svc_echo",   "svc_fox",   "svc_golf",    "svc_hotel",
                                  "svc_india",  "svc_juliet"};
    if (count < 1 || count > 10) throw ConfigError("separable_profiles supports 1..10 profiles");
    std::vector<BehaviorProfile> out;
    for (int i = 0; i < count; ++i) {
        BehaviorProfile p;
        p.executable = names[i];
        for (int j = 0; j < 12; ++j)
            p.read_paths.emplace_back("/opt/" + p.executable + "/data/in" + std::to_string(j),
                                      j < 4 ? 3.0 : 1.0);
        for (int j = 0; j < 4; ++j)
            p.write_paths.emplace_back("/var/" + p.executable + "/out" + std::to_string(j), 1.0);
        for (int j = 0; j < 4; ++j)
            p.netflows.emplace_back("10.0." + std::to_string(i) + "." + std::to_string(j + 10) +
                                        ":" + std::to_string(4000 + 10 * i + j),
                                    1.0);
        out.push_back(std::move(p));
    }
    return out;
}

std::string profiles_to_json(const std::vector<BehaviorProfile>& profiles) {
    json arr = json::array();
    auto pool = [](const std::vector<std::pair<std::string, double>>& p) {
        json a = json::array();
        for (const auto& [item, w] : p) a.push_back({{"item", item}, {"weight", w}});
        return a;
    };
    for (const auto& p : profiles) {
        json pj;
        pj["executable"] = p.executable;
        pj["read_paths"] = pool(p.read_paths);
        pj["write_paths"] = pool(p.write_paths);
        pj["netflows"] = pool(p.netflows);
        pj["spawns"] = pool(p.spawns);
        pj["events_per_process"] = p.events_per_process;
        pj["processes_per_window"] = p.processes_per_window;
        arr.push_back(pj);
    }
    json j;
    j["profiles"] = arr;
    return j.dump(2);
}

std::vector<BehaviorProfile> profiles_from_json(const std::string& text) {
    json j = json::parse(text);
    std::vector<BehaviorProfile> out;
    auto pool = [](const json& a) {
        std::vector<std::pair<std::string, double>> p;
        for (const auto& e : a)
            p.emplace_back(e.at("item").get<std::string>(), e.value("weight", 1.0));
        return p;
    };
    for (const auto& pj : j.at("profiles")) {
        BehaviorProfile p;
        p.executable = pj.at("executable").get<std::string>();
        p.read_paths = pool(pj.value("read_paths", json::array()));
        p.write_paths = pool(pj.value("write_paths", json::array()));
        p.netflows = pool(pj.value("netflows", json::array()));
        p.spawns = pool(pj.value("spawns", json::array()));
        p.events_per_process = pj.value("events_per_process", 6);
        p.processes_per_window = pj.value("processes_per_window", 6);
        out.push_back(std::move(p));
    }
    return out;
}

EventLog generate(const std::vector<BehaviorProfile>& profiles, const GenConfig& cfg) {
    if (profiles.empty()) throw ConfigError("generator requires at least one profile");
    if (cfg.days < 1) throw ConfigError("generator requires days >= 1");
    for (const auto& p : profiles)
        if (p.read_paths.empty() || p.write_paths.empty() || p.netflows.empty())
            throw ConfigError("profile '" + p.executable + "' has an empty pool");

    const std::int64_t window_ns = cfg.window_minutes * kNsPerMinute;
    const std::int64_t windows = cfg.days * 24 * 60 / cfg.window_minutes;
    std::vector<ProvenanceEvent> events;

    for (std::int64_t w = 0; w < windows; ++w) {
        const std::int64_t wstart = w * window_ns;
        std::int64_t slot = 0;
        auto next_ts = [&] { return wstart + (++slot) * kEventSpacing; };

        for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
            const auto& prof = profiles[pi];
            Rng rng(mix_seed(cfg.seed, 0x9e4, static_cast<std::uint64_t>(w), pi));
            int procs = prof.processes_per_window;
            if (cfg.stochastic && procs > 1)
                procs += static_cast<int>(rng.bounded(3)) - 1;  // +-1 process
            for (int i = 0; i < procs; ++i) {
                const std::string pid = "p:" + std::to_string(cfg.seed) + ":" +
                                        std::to_string(w) + ":" + prof.executable + ":" +
                                        std::to_string(i);
                int n_events = prof.events_per_process;
                if (cfg.stochastic && n_events > 2)
                    n_events += static_cast<int>(rng.bounded(3)) - 1;

                std::string r0 = pick(prof.read_paths, rng);
                std::string r1 = pick(prof.read_paths, rng);
                std::string w0 = pick(prof.write_paths, rng);
                std::string n0 = pick(prof.netflows, rng);
                for (int j = 0; j < n_events; ++j) {
                    switch (j % 6) {
                        case 0: events.push_back(subject_file(next_ts(), pid, prof.executable, r0, "open")); break;
                        case 1: events.push_back(subject_file(next_ts(), pid, prof.executable, r0, "read")); break;
                        case 2: events.push_back(subject_file(next_ts(), pid, prof.executable, r1, "read")); break;
                        case 3: events.push_back(subject_file(next_ts(), pid, prof.executable, w0, "write")); break;
                        case 4: events.push_back(subject_flow(next_ts(), pid, prof.executable, n0, "connect")); break;
                        case 5: events.push_back(subject_flow(next_ts(), pid, prof.executable, n0, "sendto")); break;
                    }
                    if (j % 6 == 5) {  // next cycle touches fresh pool picks
                        r0 = pick(prof.read_paths, rng);
                        r1 = pick(prof.read_paths, rng);
                        w0 = pick(prof.write_paths, rng);
                        n0 = pick(prof.netflows, rng);
                    }
                }
                // One spawn per window for profiles that clone children.
                if (!prof.spawns.empty() && i == 0) {
                    const std::string child_exe = pick(prof.spawns, rng);
                    const auto* child_prof = find_profile(profiles, child_exe);
                    const std::string cid = pid + ":child";
                    events.push_back(subject_subject(next_ts(), pid, prof.executable, cid,
                                                     child_exe, "clone"));
                    if (child_prof) {
                        const std::string cr = pick(child_prof->read_paths, rng);
                        events.push_back(subject_file(next_ts(), cid, child_exe, cr, "open"));
                        events.push_back(subject_file(next_ts(), cid, child_exe, cr, "read"));
                    }
                }
            }
        }
    }
    return make_event_log(Schema::TC, std::move(events));
}

std::pair<EventLog, GroundTruth> inject_attack(const EventLog& log,
                                               const std::vector<BehaviorProfile>& profiles,
                                               const AttackScript& script, const GenConfig& cfg) {
    if (log.events.empty()) throw DataError("cannot inject into an empty log");
    const std::int64_t window_ns = cfg.window_minutes * kNsPerMinute;
    const std::int64_t t0 = (log.first_ts() / window_ns) * window_ns;
    const std::int64_t wstart = t0 + script.window_index * window_ns;
    if (script.window_index < 0 || wstart > log.last_ts())
        throw ConfigError("attack window " + std::to_string(script.window_index) +
                          " is outside the log span");

    std::int64_t ts = wstart + window_ns / 2;
    auto next_ts = [&] { return ts += kEventSpacing; };

    std::vector<ProvenanceEvent> extra;
    GroundTruth gt;
    GroundTruth::Attack attack;
    attack.t_start = ts;

    const std::string tag = std::to_string(cfg.seed);
    if (script.kind == AttackKind::NovelExecutable) {
        attack.name = "novel-executable";
        const std::string p1 = "atk:" + tag + ":novel:1";
        const std::string p2 = "atk:" + tag + ":novel:2";
        const std::string payload = "/tmp/payload_" + tag + ".bin";
        extra.push_back(subject_file(next_ts(), p1, script.novel_exe, "/etc/shadow", "open"));
        extra.push_back(subject_file(next_ts(), p1, script.novel_exe, "/etc/shadow", "read"));
        extra.push_back(subject_file(next_ts(), p1, script.novel_exe, payload, "write"));
        extra.push_back(subject_file(next_ts(), p2, script.novel_exe, payload, "read"));
        extra.push_back(subject_file(next_ts(), p2, script.novel_exe, payload, "execute"));
        attack.node_ids = {p1, p2};
    } else {
        attack.name = "lotl";
        const auto* actor = find_profile(profiles, script.lotl_actor);
        const auto* mimic = find_profile(profiles, script.lotl_mimic);
        const auto* child = find_profile(profiles, script.lotl_child);
        if (!actor || !mimic || !child)
            throw ConfigError("lotl attack references executables missing from the profiles");
        Rng rng(mix_seed(cfg.seed, 0xa77acc));
        const std::string p1 = "atk:" + tag + ":lotl:1";
        const std::string cid = "atk:" + tag + ":lotl:child";
        const std::string r0 = pick(mimic->read_paths, rng);
        const std::string r1 = pick(mimic->read_paths, rng);
        const std::string w0 = pick(mimic->write_paths, rng);
        const std::string n0 = pick(mimic->netflows, rng);
        extra.push_back(subject_file(next_ts(), p1, actor->executable, r0, "open"));
        extra.push_back(subject_file(next_ts(), p1, actor->executable, r0, "read"));
        extra.push_back(subject_file(next_ts(), p1, actor->executable, r1, "read"));
        extra.push_back(subject_file(next_ts(), p1, actor->executable, w0, "write"));
        extra.push_back(subject_flow(next_ts(), p1, actor->executable, n0, "connect"));
        extra.push_back(subject_flow(next_ts(), p1, actor->executable, n0, "sendto"));
        extra.push_back(subject_subject(next_ts(), p1, actor->executable, cid,
                                        child->executable, "clone"));
        const std::string cr = pick(child->read_paths, rng);
        extra.push_back(subject_file(next_ts(), cid, child->executable, cr, "open"));
        extra.push_back(subject_file(next_ts(), cid, child->executable, cr, "read"));
        attack.node_ids = {p1};
    }
    attack.t_end = ts;
    gt.attacks.push_back(std::move(attack));

    std::vector<ProvenanceEvent> merged = log.events;
    merged.insert(merged.end(), extra.begin(), extra.end());
    return {make_event_log(log.schema, std::move(merged)), gt};
}

}  // namespace grasp::synth
