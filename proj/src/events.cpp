#include "grasp/events.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "grasp/common.hpp"
#include "json.hpp"

namespace grasp {

using nlohmann::json;

namespace {

// Edge types kept after component filtering, per schema.
constexpr std::array<std::string_view, 10> kTcOps = {
    "connect", "execute", "open", "read", "recvfrom",
    "recvmsg", "sendmsg", "sendto", "write", "clone",
};
constexpr std::array<std::string_view, 10> kOptcOps = {
    "open", "read", "create", "message", "modify",
    "start", "rename", "delete", "terminate", "write",
};

constexpr std::size_t kMaxIssues = 50;

void record_issue(ParseStats* stats, std::uint64_t line, std::string msg) {
    if (stats && stats->issues.size() < kMaxIssues)
        stats->issues.emplace_back(line, std::move(msg));
}

}  // namespace

std::string_view to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Subject: return "Subject";
        case NodeKind::File: return "File";
        case NodeKind::Netflow: return "Netflow";
    }
    return "?";
}

std::string_view to_string(Schema s) {
    return s == Schema::TC ? "TC" : "OpTC";
}

std::optional<NodeKind> parse_node_kind(std::string_view s) {
    if (s == "Subject") return NodeKind::Subject;
    if (s == "File") return NodeKind::File;
    if (s == "Netflow") return NodeKind::Netflow;
    return std::nullopt;
}

std::optional<Schema> parse_schema(std::string_view s) {
    if (s == "TC") return Schema::TC;
    if (s == "OpTC") return Schema::OpTC;
    return std::nullopt;
}

std::span<const std::string_view> schema_ops(Schema s) {
    if (s == Schema::TC) return {kTcOps.data(), kTcOps.size()};
    return {kOptcOps.data(), kOptcOps.size()};
}

int op_index(Schema s, std::string_view op) {
    auto ops = schema_ops(s);
    for (std::size_t i = 0; i < ops.size(); ++i)
        if (ops[i] == op) return static_cast<int>(i);
    return -1;
}

std::string ParseStats::to_json() const {
    json j;
    j["lines"] = lines;
    j["parsed"] = parsed;
    j["malformed_lines"] = malformed_lines;
    j["dropped_unknown_op"] = dropped_unknown_op;
    j["dropped_unknown_kind"] = dropped_unknown_kind;
    j["validation_errors"] = validation_errors;
    j["attr_conflicts"] = attr_conflicts;
    json issues_j = json::array();
    for (const auto& [line, msg] : issues) issues_j.push_back({{"line", line}, {"msg", msg}});
    j["issues"] = issues_j;
    return j.dump(2);
}

EventLog make_event_log(Schema schema, std::vector<ProvenanceEvent> events, ParseStats* stats) {
    EventLog log;
    log.schema = schema;
    log.events = std::move(events);
    std::stable_sort(log.events.begin(), log.events.end(),
                     [](const ProvenanceEvent& a, const ProvenanceEvent& b) { return a.ts < b.ts; });
    for (const auto& ev : log.events) {
        auto note = [&](const std::string& id, NodeKind kind, const std::string& attr) {
            auto [it, inserted] = log.entity_table.try_emplace(id, EntityInfo{kind, attr});
            if (!inserted && (it->second.attr != attr || it->second.kind != kind) && stats)
                ++stats->attr_conflicts;
        };
        note(ev.src_id, ev.src_kind, ev.src_attr);
        note(ev.dst_id, ev.dst_kind, ev.dst_attr);
    }
    return log;
}

EventLog parse_events(std::istream& in, Schema schema, ParseStats* stats) {
    std::vector<ProvenanceEvent> events;
    std::string line;
    std::uint64_t lineno = 0;
    ParseStats local;
    ParseStats& st = stats ? *stats : local;

    while (std::getline(in, line)) {
        ++lineno;
        ++st.lines;
        if (line.empty()) continue;

        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            ++st.malformed_lines;
            record_issue(&st, lineno, "malformed JSON");
            continue;
        }

        ProvenanceEvent ev;
        try {
            ev.ts = j.at("ts").get<std::int64_t>();
            ev.src_id = j.at("src_id").get<std::string>();
            ev.dst_id = j.at("dst_id").get<std::string>();
            ev.op = j.at("op").get<std::string>();
            auto src_kind = parse_node_kind(j.at("src_kind").get<std::string>());
            auto dst_kind = parse_node_kind(j.at("dst_kind").get<std::string>());
            if (!src_kind || !dst_kind) {
                ++st.dropped_unknown_kind;
                record_issue(&st, lineno, "unknown node kind");
                continue;
            }
            ev.src_kind = *src_kind;
            ev.dst_kind = *dst_kind;
            if (j.contains("attrs")) {
                const auto& attrs = j.at("attrs");
                ev.src_attr = attrs.value("src", "");
                ev.dst_attr = attrs.value("dst", "");
            }
        } catch (const json::exception& e) {
            ++st.malformed_lines;
            record_issue(&st, lineno, std::string("bad field: ") + e.what());
            continue;
        }

        if (ev.ts < 0) {
            ++st.validation_errors;
            record_issue(&st, lineno, "field 'ts' must be >= 0");
            continue;
        }
        if (op_index(schema, ev.op) < 0) {
            ++st.dropped_unknown_op;
            record_issue(&st, lineno, "op '" + ev.op + "' not in schema edge-type set");
            continue;
        }
        if (ev.src_kind == NodeKind::Subject && ev.src_attr.empty()) {
            ++st.validation_errors;
            record_issue(&st, lineno, "field 'attrs.src': Subject endpoint requires an executable");
            continue;
        }
        if (ev.dst_kind == NodeKind::Subject && ev.dst_attr.empty()) {
            ++st.validation_errors;
            record_issue(&st, lineno, "field 'attrs.dst': Subject endpoint requires an executable");
            continue;
        }
        ++st.parsed;
        events.push_back(std::move(ev));
    }
    return make_event_log(schema, std::move(events), &st);
}

EventLog parse_events_file(const std::string& path, Schema schema, ParseStats* stats) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open events file: " + path);
    return parse_events(in, schema, stats);
}

void serialize_events(const EventLog& log, std::ostream& out) {
    for (const auto& ev : log.events) {
        json j;
        j["ts"] = ev.ts;
        j["src_id"] = ev.src_id;
        j["src_kind"] = std::string(to_string(ev.src_kind));
        j["dst_id"] = ev.dst_id;
        j["dst_kind"] = std::string(to_string(ev.dst_kind));
        j["op"] = ev.op;
        j["attrs"] = {{"src", ev.src_attr}, {"dst", ev.dst_attr}};
        out << j.dump() << '\n';
    }
}

void serialize_events_file(const EventLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write events file: " + path);
    serialize_events(log, out);
}

DatasetSplit split_dataset(const EventLog& log, std::int64_t cutoff_ts) {
    DatasetSplit split;
    split.cutoff_ts = cutoff_ts;
    std::vector<ProvenanceEvent> train, test;
    for (const auto& ev : log.events) {
        if (ev.ts < cutoff_ts)
            train.push_back(ev);
        else
            test.push_back(ev);
    }
    split.train = make_event_log(log.schema, std::move(train));
    split.test = make_event_log(log.schema, std::move(test));
    return split;
}

}  // namespace grasp
