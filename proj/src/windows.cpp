#include "grasp/windows.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "grasp/common.hpp"
#include "json.hpp"

namespace grasp {

using nlohmann::json;

int WindowGraph::node_index(const std::string& id) const {
    auto it = std::lower_bound(node_ids.begin(), node_ids.end(), id);
    if (it == node_ids.end() || *it != id) return -1;
    return static_cast<int>(it - node_ids.begin());
}

std::string WindowGraph::to_canonical_json() const {
    json j;
    j["start"] = start;
    j["end"] = end;
    json nodes = json::array();
    for (std::size_t i = 0; i < node_ids.size(); ++i) {
        nodes.push_back({{"id", node_ids[i]},
                         {"kind", std::string(to_string(node_kinds[i]))},
                         {"attr", node_attrs[i]}});
    }
    j["nodes"] = nodes;
    json edge_arr = json::array();
    for (const auto& e : edges)
        edge_arr.push_back({{"u", e.u}, {"v", e.v}, {"op", e.op}, {"ts", e.ts}});
    j["edges"] = edge_arr;
    return j.dump();
}

namespace {

constexpr std::int64_t kNsPerMinute = 60'000'000'000LL;

std::int64_t floor_to(std::int64_t ts, std::int64_t granule) {
    std::int64_t q = ts / granule;
    if (ts < 0 && q * granule != ts) --q;
    return q * granule;
}

}  // namespace

std::vector<WindowGraph> build_windows(const EventLog& log, std::int64_t context_minutes,
                                       std::int64_t step_minutes) {
    if (context_minutes <= 0 || step_minutes <= 0)
        throw ConfigError("context and step sizes must be positive");
    std::vector<WindowGraph> out;
    if (log.events.empty()) return out;

    const std::int64_t context = context_minutes * kNsPerMinute;
    const std::int64_t step = step_minutes * kNsPerMinute;
    const std::int64_t t0 = floor_to(log.first_ts(), step);

    // Smallest grid point strictly past the last event; windows are laid
    // while they fit inside [t0, span_end). A span shorter than the context
    // still gets the anchor window so no event goes unscored.
    std::int64_t span_end = t0;
    while (span_end <= log.last_ts()) span_end += step;

    std::vector<std::int64_t> starts;
    for (std::int64_t s = t0; s + context <= span_end; s += step) starts.push_back(s);
    if (starts.empty()) starts.push_back(t0);

    for (std::int64_t ws : starts) {
        const std::int64_t we = ws + context;
        auto lo = std::lower_bound(log.events.begin(), log.events.end(), ws,
                                   [](const ProvenanceEvent& e, std::int64_t t) { return e.ts < t; });
        auto hi = std::lower_bound(log.events.begin(), log.events.end(), we,
                                   [](const ProvenanceEvent& e, std::int64_t t) { return e.ts < t; });
        if (lo == hi) continue;

        WindowGraph w;
        w.schema = log.schema;
        w.start = ws;
        w.end = we;

        // Canonical node indexing: sorted distinct ids.
        std::map<std::string, EntityInfo> nodes;
        for (auto it = lo; it != hi; ++it) {
            nodes.try_emplace(it->src_id, EntityInfo{it->src_kind, it->src_attr});
            nodes.try_emplace(it->dst_id, EntityInfo{it->dst_kind, it->dst_attr});
        }
        w.node_ids.reserve(nodes.size());
        for (auto& [id, info] : nodes) {
            // Prefer the log-level first-mention attribute when available.
            auto et = log.entity_table.find(id);
            const EntityInfo& use = et != log.entity_table.end() ? et->second : info;
            w.node_ids.push_back(id);
            w.node_kinds.push_back(use.kind);
            w.node_attrs.push_back(use.attr);
        }
        for (std::uint32_t i = 0; i < w.node_ids.size(); ++i)
            if (w.node_kinds[i] == NodeKind::Subject) w.seed_processes.push_back(i);

        w.edges.reserve(static_cast<std::size_t>(hi - lo));
        for (auto it = lo; it != hi; ++it) {
            WindowEdge e;
            e.u = static_cast<std::uint32_t>(w.node_index(it->src_id));
            e.v = static_cast<std::uint32_t>(w.node_index(it->dst_id));
            e.op = static_cast<std::uint16_t>(op_index(log.schema, it->op));
            e.ts = it->ts;
            w.edges.push_back(e);
        }

        w.adjacency.assign(w.node_count(), {});
        for (const auto& e : w.edges) {
            w.adjacency[e.u].push_back(e.v);
            if (e.u != e.v) w.adjacency[e.v].push_back(e.u);
        }
        for (auto& nb : w.adjacency) {
            std::sort(nb.begin(), nb.end());
            nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        }
        out.push_back(std::move(w));
    }
    return out;
}

SampledSubgraph two_hop_subgraph(const WindowGraph& w, const std::vector<std::uint32_t>& seeds,
                                 std::int64_t fanout1, std::int64_t fanout2,
                                 std::uint64_t rng_seed) {
    for (std::uint32_t s : seeds) {
        if (!std::binary_search(w.seed_processes.begin(), w.seed_processes.end(), s))
            throw DataError("seed node '" +
                            (s < w.node_count() ? w.node_ids[s] : std::to_string(s)) +
                            "' is not a seed process of this window");
    }
    if (fanout1 < -1 || fanout2 < -1) throw ConfigError("fanout must be -1, 0 or positive");

    SampledSubgraph sub;
    sub.window = &w;

    std::vector<std::int8_t> hop_of(w.node_count(), -1);
    std::vector<std::uint32_t> sorted_seeds = seeds;
    std::sort(sorted_seeds.begin(), sorted_seeds.end());
    sorted_seeds.erase(std::unique(sorted_seeds.begin(), sorted_seeds.end()), sorted_seeds.end());
    for (std::uint32_t s : sorted_seeds) {
        hop_of[s] = 0;
        sub.nodes.push_back(s);
    }
    sub.seed_count = static_cast<std::uint32_t>(sub.nodes.size());
    sub.hop.assign(sub.nodes.size(), 0);

    // Edge pairs selected by the expansions; all parallel edges between a
    // selected pair are retained.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;

    Rng rng(rng_seed);
    auto expand = [&](const std::vector<std::uint32_t>& frontier, std::int64_t fanout,
                      std::uint8_t next_hop) {
        std::vector<std::uint32_t> next;
        for (std::uint32_t n : frontier) {
            const auto& nbrs = w.adjacency[n];
            std::vector<std::uint32_t> picked;
            if (fanout < 0 || static_cast<std::size_t>(fanout) >= nbrs.size()) {
                picked.assign(nbrs.begin(), nbrs.end());
            } else if (fanout == 0) {
                continue;
            } else {
                auto idx = rng.sample_without_replacement(
                    static_cast<std::uint32_t>(nbrs.size()), static_cast<std::uint32_t>(fanout));
                std::sort(idx.begin(), idx.end());
                picked.reserve(idx.size());
                for (auto i : idx) picked.push_back(nbrs[i]);
            }
            for (std::uint32_t m : picked) {
                std::uint32_t a = std::min(n, m), b = std::max(n, m);
                pairs.emplace_back(a, b);
                if (hop_of[m] < 0) {
                    hop_of[m] = static_cast<std::int8_t>(next_hop);
                    sub.nodes.push_back(m);
                    sub.hop.push_back(next_hop);
                    next.push_back(m);
                }
            }
        }
        return next;
    };

    auto frontier1 = expand(sorted_seeds, fanout1, 1);
    expand(frontier1, fanout2, 2);

    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (std::uint32_t ei = 0; ei < w.edges.size(); ++ei) {
        const auto& e = w.edges[ei];
        std::uint32_t a = std::min(e.u, e.v), b = std::max(e.u, e.v);
        if (std::binary_search(pairs.begin(), pairs.end(), std::make_pair(a, b)))
            sub.edge_refs.push_back(ei);
    }
    return sub;
}

namespace {

// BFS neighborhood size at each depth 1..max_hop for one seed. Returns false
// if the budget was exhausted (sizes then hold the partial values).
bool bfs_sizes(const WindowGraph& w, std::uint32_t seed, int max_hop, std::uint64_t budget,
               std::vector<std::uint64_t>& sizes) {
    sizes.assign(static_cast<std::size_t>(max_hop), 0);
    std::vector<std::int8_t> dist(w.node_count(), -1);
    dist[seed] = 0;
    std::vector<std::uint32_t> frontier{seed};
    std::uint64_t visited = 0;
    std::uint64_t cumulative = 0;
    for (int h = 1; h <= max_hop; ++h) {
        std::vector<std::uint32_t> next;
        for (std::uint32_t n : frontier) {
            for (std::uint32_t m : w.adjacency[n]) {
                if (dist[m] >= 0) continue;
                dist[m] = static_cast<std::int8_t>(h);
                next.push_back(m);
                if (++visited > budget) return false;
            }
        }
        cumulative += next.size();
        sizes[static_cast<std::size_t>(h - 1)] = cumulative;
        frontier = std::move(next);
        if (frontier.empty()) {
            for (int k = h + 1; k <= max_hop; ++k)
                sizes[static_cast<std::size_t>(k - 1)] = cumulative;
            break;
        }
    }
    return true;
}

}  // namespace

HopStats hop_statistics(const WindowGraph& w, int max_hop, std::uint64_t node_budget) {
    if (max_hop < 1 || max_hop > 4) throw ConfigError("max_hop must be in [1,4]");
    HopStats stats;
    stats.max_hop = max_hop;
    stats.max_size.assign(static_cast<std::size_t>(max_hop), 0);
    stats.mean_size.assign(static_cast<std::size_t>(max_hop), 0.0);
    stats.seed_count = w.seed_processes.size();
    if (w.seed_processes.empty()) {
        stats.no_seeds = true;
        return stats;
    }

    const auto n_seeds = w.seed_processes.size();
    std::vector<std::vector<std::uint64_t>> per_seed(n_seeds);
    std::vector<std::uint8_t> abort_flag(n_seeds, 0);

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_seeds); ++i) {
        auto idx = static_cast<std::size_t>(i);
        if (!bfs_sizes(w, w.seed_processes[idx], max_hop, node_budget, per_seed[idx]))
            abort_flag[idx] = 1;
    }

    for (std::size_t i = 0; i < n_seeds; ++i) {
        stats.aborted += abort_flag[i];
        for (int h = 0; h < max_hop; ++h) {
            auto hs = static_cast<std::size_t>(h);
            stats.max_size[hs] = std::max(stats.max_size[hs], per_seed[i][hs]);
            stats.mean_size[hs] += static_cast<double>(per_seed[i][hs]);
        }
    }
    for (int h = 0; h < max_hop; ++h)
        stats.mean_size[static_cast<std::size_t>(h)] /= static_cast<double>(n_seeds);
    return stats;
}

HopStats merge_hop_stats(const std::vector<HopStats>& per_window) {
    HopStats out;
    if (per_window.empty()) return out;
    out.max_hop = per_window.front().max_hop;
    auto hops = static_cast<std::size_t>(out.max_hop);
    out.max_size.assign(hops, 0);
    out.mean_size.assign(hops, 0.0);
    std::uint64_t seeds = 0;
    for (const auto& s : per_window) {
        out.aborted += s.aborted;
        if (s.no_seeds) continue;
        seeds += s.seed_count;
        for (std::size_t h = 0; h < hops; ++h) {
            out.max_size[h] = std::max(out.max_size[h], s.max_size[h]);
            out.mean_size[h] += s.mean_size[h] * static_cast<double>(s.seed_count);
        }
    }
    out.seed_count = seeds;
    out.no_seeds = seeds == 0;
    if (seeds > 0)
        for (std::size_t h = 0; h < hops; ++h) out.mean_size[h] /= static_cast<double>(seeds);
    return out;
}

std::string HopStats::to_csv() const {
    std::ostringstream os;
    os << "hop,max,mean\n";
    for (int h = 0; h < max_hop; ++h) {
        auto hs = static_cast<std::size_t>(h);
        os << (h + 1) << ',' << max_size[hs] << ',' << mean_size[hs] << '\n';
    }
    return os.str();
}

void write_window_cache(const std::vector<WindowGraph>& windows, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    json index = json::object();
    for (const auto& w : windows) {
        std::string name = "window_" + std::to_string(w.start) + ".json";
        json j;
        j["start"] = w.start;
        j["end"] = w.end;
        json nodes = json::array();
        for (std::size_t i = 0; i < w.node_ids.size(); ++i)
            nodes.push_back({{"id", w.node_ids[i]},
                             {"kind", std::string(to_string(w.node_kinds[i]))},
                             {"attr", w.node_attrs[i]}});
        j["nodes"] = nodes;
        json edges = json::array();
        for (const auto& e : w.edges)
            edges.push_back({{"u", e.u}, {"v", e.v}, {"op", e.op}, {"ts", e.ts}});
        j["edges"] = edges;
        std::ofstream out(fs::path(dir) / name);
        out << j.dump();
        index[std::to_string(w.start)] = name;
    }
    std::ofstream idx(fs::path(dir) / "index.json");
    idx << index.dump(2);
}

}  // namespace grasp
