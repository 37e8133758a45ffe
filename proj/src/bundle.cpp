#include "grasp/bundle.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "grasp/common.hpp"
#include "json.hpp"

namespace grasp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open bundle artifact: " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write bundle artifact: " + p.string());
    out << content;
}

const char* kArtifacts[] = {"config.json", "params.bin", "location.bin",
                            "vocab.json", "clusters.json", "train_report.json"};

}  // namespace

void save_bundle(const ModelBundle& bundle, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path root(dir);

    {
        std::ofstream out(root / "params.bin", std::ios::binary);
        bundle.params.save(out);
    }
    {
        std::ofstream out(root / "location.bin", std::ios::binary);
        bundle.location.save(out);
    }
    spit(root / "vocab.json", bundle.vocab.to_json());
    spit(root / "clusters.json", bundle.clusters.to_json(bundle.vocab));
    spit(root / "train_report.json", bundle.train_report.to_json());
    spit(root / "config.json", bundle.cfg.to_json());

    json manifest;
    manifest["version"] = std::string(kVersion);
    manifest["schema"] = std::string(to_string(bundle.schema));
    manifest["config_hash"] = bundle.cfg.config_hash();
    manifest["seed"] = bundle.cfg.seed;
    manifest["k"] = bundle.vocab.size();
    manifest["d_in"] = bundle.params.dims.d_in;
    manifest["edge_dim"] = bundle.params.dims.edge_dim;
    manifest["location_mode"] = std::string(to_string(bundle.cfg.location_mode));
    manifest["clustering"] = bundle.cfg.clustering;
    json arts = json::array();
    for (const char* a : kArtifacts) arts.push_back(a);
    manifest["artifacts"] = arts;
    manifest["created_at"] = static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    spit(root / "manifest.json", manifest.dump(2));
}

ModelBundle load_bundle(const std::string& dir) {
    const fs::path root(dir);
    if (!fs::exists(root / "manifest.json"))
        throw ConfigError("not a model bundle (missing manifest.json): " + dir);
    json manifest = json::parse(slurp(root / "manifest.json"));

    ModelBundle b;
    auto schema = parse_schema(manifest.at("schema").get<std::string>());
    if (!schema) throw DataError("bundle manifest has unknown schema");
    b.schema = *schema;
    b.cfg = TrainConfig::from_json(slurp(root / "config.json"));
    {
        std::ifstream in(root / "params.bin", std::ios::binary);
        if (!in) throw DataError("cannot open bundle artifact: params.bin");
        b.params = nn::ModelParams::load(in);
    }
    {
        std::ifstream in(root / "location.bin", std::ios::binary);
        if (!in) throw DataError("cannot open bundle artifact: location.bin");
        b.location = LocationEncoder::load(in);
    }
    b.vocab = ExecutableVocab::from_json(slurp(root / "vocab.json"));
    b.clusters = ClusterMap::from_json(slurp(root / "clusters.json"), b.vocab);
    b.train_report = TrainReport::from_json(slurp(root / "train_report.json"));
    b.bundle_id = bundle_hash(dir);

    if (manifest.value("config_hash", "") != b.cfg.config_hash())
        throw ConfigError("bundle config hash mismatch; bundle is inconsistent");
    return b;
}

std::string bundle_hash(const std::string& dir) {
    const fs::path root(dir);
    json manifest = json::parse(slurp(root / "manifest.json"));
    manifest.erase("created_at");
    std::uint64_t h = fnv1a(manifest.dump());
    for (const char* a : kArtifacts) {
        h = splitmix64(h ^ fnv1a(a));
        h = splitmix64(h ^ fnv1a(slurp(root / a)));
    }
    return hex64(h);
}

}  // namespace grasp
