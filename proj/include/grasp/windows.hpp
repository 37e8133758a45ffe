#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grasp/events.hpp"

namespace grasp {

// Undirected multigraph over the entities active in one time window.
// Edges are stored once; all traversals treat them as bidirectional.
struct WindowEdge {
    std::uint32_t u = 0;  // node indices into the window's node arrays
    std::uint32_t v = 0;
    std::uint16_t op = 0;  // index into schema_ops()
    std::int64_t ts = 0;
};

struct WindowGraph {
    Schema schema = Schema::TC;
    std::int64_t start = 0;  // inclusive, epoch ns
    std::int64_t end = 0;    // exclusive; end - start == context

    // Node arrays indexed consistently; ids are sorted ascending so that
    // indices are canonical for a given window content.
    std::vector<std::string> node_ids;
    std::vector<NodeKind> node_kinds;
    std::vector<std::string> node_attrs;

    std::vector<WindowEdge> edges;              // event-time order
    std::vector<std::uint32_t> seed_processes;  // indices of Subject nodes, ascending

    // adjacency[i] = sorted distinct neighbor indices of node i.
    std::vector<std::vector<std::uint32_t>> adjacency;

    std::size_t node_count() const { return node_ids.size(); }
    int node_index(const std::string& id) const;  // -1 if absent
    std::string to_canonical_json() const;
};

// Segments a log into sliding-window graphs. Windows start on a grid
// anchored at the first event ts floored to step granularity and are laid
// while they fit inside the step-ceiled event span; a span shorter than the
// context yields the single anchor window. Empty windows are not emitted.
std::vector<WindowGraph> build_windows(const EventLog& log, std::int64_t context_minutes,
                                       std::int64_t step_minutes);

// GraphSAGE-style sampled two-hop neighborhood around a seed set.
// Fanouts: -1 = all neighbors, 0 = no expansion at that hop, >0 = cap.
struct SampledSubgraph {
    const WindowGraph* window = nullptr;
    std::vector<std::uint32_t> nodes;  // window node indices; seeds first
    std::vector<std::uint8_t> hop;     // per retained node: 0, 1 or 2
    std::uint32_t seed_count = 0;
    std::vector<std::uint32_t> edge_refs;  // indices into window->edges
};

SampledSubgraph two_hop_subgraph(const WindowGraph& w, const std::vector<std::uint32_t>& seeds,
                                 std::int64_t fanout1, std::int64_t fanout2,
                                 std::uint64_t rng_seed);

// Neighborhood-size statistics per hop depth over the window's seed
// processes. size at hop k = |{nodes at distance <= k}| minus the seed.
struct HopStats {
    int max_hop = 4;
    std::vector<std::uint64_t> max_size;  // indexed by hop-1
    std::vector<double> mean_size;
    std::uint64_t seed_count = 0;
    bool no_seeds = false;        // window had no Subject nodes
    std::uint64_t aborted = 0;    // seeds whose BFS hit the node budget

    std::string to_csv() const;  // columns: hop,max,mean
};

HopStats hop_statistics(const WindowGraph& w, int max_hop = 4,
                        std::uint64_t node_budget = 250000);

// Merges per-window stats into dataset-level figures (max of maxes,
// seed-weighted mean of means).
HopStats merge_hop_stats(const std::vector<HopStats>& per_window);

// Optional on-disk cache: one canonical JSON file per window plus an index
// mapping window_start -> relative path.
void write_window_cache(const std::vector<WindowGraph>& windows, const std::string& dir);

}  // namespace grasp
