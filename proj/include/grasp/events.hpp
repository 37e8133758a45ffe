#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace grasp {

enum class NodeKind : std::uint8_t { Subject, File, Netflow };
enum class Schema : std::uint8_t { TC, OpTC };

std::string_view to_string(NodeKind k);
std::string_view to_string(Schema s);
std::optional<NodeKind> parse_node_kind(std::string_view s);
std::optional<Schema> parse_schema(std::string_view s);

// Edge-type vocabulary is fixed per schema; events with any other op are
// dropped at parse time.
std::span<const std::string_view> schema_ops(Schema s);
int op_index(Schema s, std::string_view op);  // -1 if unknown

// One timestamped interaction between two entities. ts is epoch nanoseconds.
struct ProvenanceEvent {
    std::int64_t ts = 0;
    std::string src_id;
    NodeKind src_kind = NodeKind::Subject;
    std::string dst_id;
    NodeKind dst_kind = NodeKind::File;
    std::string op;
    std::string src_attr;  // Subject: executable, File: path, Netflow: "ip:port"
    std::string dst_attr;

    bool operator==(const ProvenanceEvent&) const = default;
};

struct EntityInfo {
    NodeKind kind;
    std::string attr;  // taken from the first event mentioning the entity
    bool operator==(const EntityInfo&) const = default;
};

struct EventLog {
    Schema schema = Schema::TC;
    std::vector<ProvenanceEvent> events;             // sorted non-decreasing by ts
    std::map<std::string, EntityInfo> entity_table;  // id -> (kind, attr)

    bool operator==(const EventLog&) const = default;
    std::int64_t first_ts() const { return events.empty() ? 0 : events.front().ts; }
    std::int64_t last_ts() const { return events.empty() ? 0 : events.back().ts; }
};

struct ParseStats {
    std::uint64_t lines = 0;
    std::uint64_t parsed = 0;
    std::uint64_t malformed_lines = 0;
    std::uint64_t dropped_unknown_op = 0;
    std::uint64_t dropped_unknown_kind = 0;
    std::uint64_t validation_errors = 0;
    std::uint64_t attr_conflicts = 0;  // warnings: later event disagrees on an attr
    // First few problems, for diagnostics. line numbers are 1-based.
    std::vector<std::pair<std::uint64_t, std::string>> issues;

    std::string to_json() const;
};

// Parses JSONL events: one object per line with fields
// ts, src_id, src_kind, dst_id, dst_kind, op, attrs{src,dst}.
// Malformed or invalid lines are dropped and counted; the result is sorted
// by ts (stable) with the entity table populated first-mention-wins.
EventLog parse_events(std::istream& in, Schema schema, ParseStats* stats = nullptr);
EventLog parse_events_file(const std::string& path, Schema schema, ParseStats* stats = nullptr);

void serialize_events(const EventLog& log, std::ostream& out);
void serialize_events_file(const EventLog& log, const std::string& path);

struct DatasetSplit {
    EventLog train;  // ts < cutoff
    EventLog test;   // ts >= cutoff
    std::int64_t cutoff_ts = 0;
};

DatasetSplit split_dataset(const EventLog& log, std::int64_t cutoff_ts);

// Rebuilds an EventLog from an arbitrary event list: stable ts sort +
// fresh entity table. Events must already satisfy the schema.
EventLog make_event_log(Schema schema, std::vector<ProvenanceEvent> events,
                        ParseStats* stats = nullptr);

}  // namespace grasp
