#include "grasp/encode.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include "grasp/common.hpp"
#include "json.hpp"

namespace grasp {

using nlohmann::json;

ExecutableVocab::ExecutableVocab(std::vector<std::string> sorted_exes)
    : exes_(std::move(sorted_exes)) {}

int ExecutableVocab::index_of(const std::string& exe) const {
    auto it = std::lower_bound(exes_.begin(), exes_.end(), exe);
    if (it == exes_.end() || *it != exe) return -1;
    return static_cast<int>(it - exes_.begin());
}

std::string ExecutableVocab::to_json() const {
    json j;
    j["executables"] = exes_;
    return j.dump(2);
}

ExecutableVocab ExecutableVocab::from_json(const std::string& text) {
    json j = json::parse(text);
    return ExecutableVocab(j.at("executables").get<std::vector<std::string>>());
}

ExecutableVocab build_vocab(const EventLog& train) {
    std::set<std::string> exes;
    for (const auto& [id, info] : train.entity_table)
        if (info.kind == NodeKind::Subject && !info.attr.empty()) exes.insert(info.attr);
    if (exes.empty()) throw DataError("no learnable targets: training data contains no Subjects");
    return ExecutableVocab(std::vector<std::string>(exes.begin(), exes.end()));
}

std::string_view to_string(LocationMode m) {
    switch (m) {
        case LocationMode::TransformerAE: return "transformer";
        case LocationMode::WordEmbed: return "wordembed";
        case LocationMode::Disabled: return "disabled";
    }
    return "?";
}

std::optional<LocationMode> parse_location_mode(std::string_view s) {
    if (s == "transformer") return LocationMode::TransformerAE;
    if (s == "wordembed") return LocationMode::WordEmbed;
    if (s == "disabled") return LocationMode::Disabled;
    return std::nullopt;
}

std::vector<std::string> location_corpus(const EventLog& train) {
    std::set<std::string> strings;
    for (const auto& [id, info] : train.entity_table)
        if (!info.attr.empty()) strings.insert(info.attr);
    return {strings.begin(), strings.end()};
}

std::array<double, LocationEncoder::kDim> LocationEncoder::embed(const std::string& s) const {
    switch (mode_) {
        case LocationMode::Disabled: return {};
        case LocationMode::WordEmbed: return we_->embed(s);
        case LocationMode::TransformerAE: return ae_->embed_tokens(ae_->tokenize(s));
    }
    return {};
}

std::string LocationEncoder::reconstruct(const std::string& s) const {
    if (mode_ != LocationMode::TransformerAE) return {};
    return ae_->greedy_decode(s);
}

LocationEncoder fit_location_encoder(const std::vector<std::string>& corpus,
                                     const LocationConfig& cfg, LocationFitStats* stats) {
    if (corpus.empty()) throw DataError("location encoder corpus is empty");
    LocationEncoder enc;
    enc.mode_ = cfg.mode;
    LocationFitStats local;
    LocationFitStats& st = stats ? *stats : local;
    st.strings = corpus.size();

    if (cfg.mode == LocationMode::Disabled) return enc;

    if (cfg.mode == LocationMode::WordEmbed) {
        loc::WordEmbedConfig wcfg;
        wcfg.epochs = cfg.epochs;
        wcfg.seed = cfg.seed;
        enc.we_ = loc::WordEmbedModel::fit(corpus, wcfg);
        return enc;
    }

    loc::TransformerConfig tcfg;
    tcfg.epochs = cfg.epochs;
    tcfg.lr = cfg.lr;
    tcfg.seed = cfg.seed;
    loc::TransformerAutoencoder ae(tcfg);

    std::vector<std::vector<int>> seqs;
    seqs.reserve(corpus.size());
    for (const auto& s : corpus) {
        bool truncated = false;
        auto toks = ae.tokenize(s, &truncated);
        if (truncated) ++st.truncated;
        for (int t : toks)
            if (t == loc::kOov) ++st.oov_chars;
        seqs.push_back(std::move(toks));
    }

    nn::AdamState opt;
    opt.init(ae.params());
    nn::AdamConfig adam;
    adam.lr = cfg.lr;
    Rng shuffle_rng(mix_seed(cfg.seed, 0x10c));
    for (int ep = 0; ep < cfg.epochs; ++ep)
        st.epoch_loss.push_back(ae.train_epoch(seqs, opt, adam, shuffle_rng));

    enc.ae_ = std::move(ae);
    return enc;
}

void LocationEncoder::save(std::ostream& out) const {
    const auto mode = static_cast<std::uint8_t>(mode_);
    out.write(reinterpret_cast<const char*>(&mode), 1);
    if (mode_ == LocationMode::TransformerAE) ae_->save(out);
    if (mode_ == LocationMode::WordEmbed) we_->save(out);
}

LocationEncoder LocationEncoder::load(std::istream& in) {
    std::uint8_t mode = 0;
    in.read(reinterpret_cast<char*>(&mode), 1);
    if (!in) throw DataError("truncated location encoder blob");
    LocationEncoder enc;
    enc.mode_ = static_cast<LocationMode>(mode);
    if (enc.mode_ == LocationMode::TransformerAE)
        enc.ae_ = loc::TransformerAutoencoder::load(in);
    else if (enc.mode_ == LocationMode::WordEmbed)
        enc.we_ = loc::WordEmbedModel::load(in);
    return enc;
}

EncodedBatch encode_batch(const SampledSubgraph& sub, const ExecutableVocab& vocab,
                          const LocationEncoder& loc) {
    const WindowGraph& w = *sub.window;
    const int k = vocab.size();
    EncodedBatch b;
    b.n_nodes = static_cast<int>(sub.nodes.size());
    b.feat_dim = 3 + LocationEncoder::kDim + k;
    b.edge_dim = static_cast<int>(schema_ops(w.schema).size());
    b.x = nn::Matrix(b.n_nodes, b.feat_dim);

    std::vector<int> local_of(w.node_count(), -1);
    for (int i = 0; i < b.n_nodes; ++i)
        local_of[sub.nodes[static_cast<std::size_t>(i)]] = i;

    for (int i = 0; i < b.n_nodes; ++i) {
        const std::uint32_t wi = sub.nodes[static_cast<std::size_t>(i)];
        const NodeKind kind = w.node_kinds[wi];
        const bool is_seed = i < static_cast<int>(sub.seed_count);
        double* row = b.x.row(i);
        row[static_cast<int>(kind)] = 1.0;
        if (!is_seed) {
            // Location embedding for context nodes; seeds are fully masked so
            // nothing derived from their executable leaks into the features.
            const auto emb = loc.embed(w.node_attrs[wi]);
            for (int d = 0; d < LocationEncoder::kDim; ++d) row[3 + d] = emb[static_cast<std::size_t>(d)];
            if (kind == NodeKind::Subject) {
                const int idx = vocab.index_of(w.node_attrs[wi]);
                if (idx >= 0) row[3 + LocationEncoder::kDim + idx] = 1.0;
            }
        }
        if (is_seed) {
            b.seed_rows.push_back(i);
            b.seed_ids.push_back(w.node_ids[wi]);
            b.seed_observed.push_back(w.node_attrs[wi]);
            b.labels.push_back(vocab.index_of(w.node_attrs[wi]));
        }
    }

    b.edge_index.reserve(sub.edge_refs.size() * 2);
    b.edge_op.reserve(sub.edge_refs.size() * 2);
    for (std::uint32_t ref : sub.edge_refs) {
        const WindowEdge& e = w.edges[ref];
        const int u = local_of[e.u];
        const int v = local_of[e.v];
        b.edge_index.emplace_back(u, v);
        b.edge_op.push_back(e.op);
        b.edge_index.emplace_back(v, u);
        b.edge_op.push_back(e.op);
    }
    return b;
}

}  // namespace grasp
