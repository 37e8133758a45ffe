#include "grasp/trainer.hpp"

#include <algorithm>
#include <cassert>

#include "grasp/common.hpp"
#include "json.hpp"

namespace grasp {

using nlohmann::json;

void TrainConfig::validate() const {
    if (context_minutes <= 0 || step_minutes <= 0)
        throw ConfigError("context and step sizes must be positive");
    if (batch_size <= 0) throw ConfigError("batch_size must be positive");
    if (epochs <= 0) throw ConfigError("epochs must be positive");
    if (fanout1 < -1 || fanout2 < -1) throw ConfigError("fanout must be -1, 0 or positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0,1)");
    if (lr <= 0.0) throw ConfigError("lr must be positive");
    if (hidden <= 0 || heads <= 0 || mlp_hidden <= 0)
        throw ConfigError("model dimensions must be positive");
}

namespace {

json config_to_json(const TrainConfig& c) {
    json j;
    j["context_minutes"] = c.context_minutes;
    j["step_minutes"] = c.step_minutes;
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["fanout1"] = c.fanout1;
    j["fanout2"] = c.fanout2;
    j["dropout"] = c.dropout;
    j["lr"] = c.lr;
    j["weight_decay"] = c.weight_decay;
    j["scheduler_factor"] = c.scheduler_factor;
    j["scheduler_patience"] = c.scheduler_patience;
    j["seed"] = c.seed;
    j["location_mode"] = std::string(to_string(c.location_mode));
    j["location_epochs"] = c.location_epochs;
    j["location_lr"] = c.location_lr;
    j["clustering"] = c.clustering;
    j["hidden"] = c.hidden;
    j["heads"] = c.heads;
    j["mlp_hidden"] = c.mlp_hidden;
    return j;
}

}  // namespace

std::string TrainConfig::to_json() const { return config_to_json(*this).dump(2); }

TrainConfig TrainConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    TrainConfig c;
    c.context_minutes = j.value("context_minutes", c.context_minutes);
    c.step_minutes = j.value("step_minutes", c.step_minutes);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.fanout1 = j.value("fanout1", c.fanout1);
    c.fanout2 = j.value("fanout2", c.fanout2);
    c.dropout = j.value("dropout", c.dropout);
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.scheduler_factor = j.value("scheduler_factor", c.scheduler_factor);
    c.scheduler_patience = j.value("scheduler_patience", c.scheduler_patience);
    c.seed = j.value("seed", c.seed);
    if (j.contains("location_mode")) {
        auto m = parse_location_mode(j["location_mode"].get<std::string>());
        if (!m) throw ConfigError("unknown location_mode: " + j["location_mode"].get<std::string>());
        c.location_mode = *m;
    }
    c.location_epochs = j.value("location_epochs", c.location_epochs);
    c.location_lr = j.value("location_lr", c.location_lr);
    c.clustering = j.value("clustering", c.clustering);
    c.hidden = j.value("hidden", c.hidden);
    c.heads = j.value("heads", c.heads);
    c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
    return c;
}

std::string TrainConfig::config_hash() const {
    // jobs is runtime-only; it must not change the hash.
    return hex64(fnv1a(config_to_json(*this).dump()));
}

std::string TrainReport::to_json() const {
    json j;
    j["epoch_mean_loss"] = epoch_mean_loss;
    j["macro_f1"] = macro_f1;
    j["weighted_f1"] = weighted_f1;
    j["class_support"] = class_support;
    return j.dump(2);
}

TrainReport TrainReport::from_json(const std::string& text) {
    json j = json::parse(text);
    TrainReport r;
    r.epoch_mean_loss = j.value("epoch_mean_loss", std::vector<double>{});
    r.macro_f1 = j.value("macro_f1", 0.0);
    r.weighted_f1 = j.value("weighted_f1", 0.0);
    r.class_support = j.value("class_support", std::vector<std::uint64_t>{});
    return r;
}

std::size_t ClusterMap::pair_count() const {
    std::size_t n = 0;
    for (const auto& [t, s] : allowed) n += s.size();
    return n;
}

std::string ClusterMap::to_json(const ExecutableVocab& vocab) const {
    json j = json::object();
    for (const auto& [truth, preds] : allowed) {
        json arr = json::array();
        for (int p : preds) arr.push_back(vocab.at(p));
        j[vocab.at(truth)] = arr;
    }
    return j.dump(2);
}

ClusterMap ClusterMap::from_json(const std::string& text, const ExecutableVocab& vocab) {
    ClusterMap m;
    json j = json::parse(text);
    for (auto it = j.begin(); it != j.end(); ++it) {
        const int truth = vocab.index_of(it.key());
        if (truth < 0) throw DataError("cluster map references unknown executable: " + it.key());
        for (const auto& p : it.value()) {
            const int pred = vocab.index_of(p.get<std::string>());
            if (pred < 0)
                throw DataError("cluster map references unknown executable: " +
                                p.get<std::string>());
            m.allowed[truth].insert(pred);
        }
    }
    return m;
}

std::uint64_t train_sample_seed(std::uint64_t run_seed, int epoch) {
    return mix_seed(run_seed, 0x7261, static_cast<std::uint64_t>(epoch));
}

std::uint64_t inference_sample_seed(std::uint64_t run_seed) {
    return mix_seed(run_seed, 0x1f3a);
}

std::vector<EncodedBatch> make_batches(const WindowGraph& w, const TrainConfig& cfg,
                                       const ExecutableVocab& vocab, const LocationEncoder& loc,
                                       std::uint64_t sample_seed, Rng* shuffle_rng) {
    const auto& seeds = w.seed_processes;  // already ascending
    std::vector<std::vector<std::uint32_t>> groups;
    for (std::size_t i = 0; i < seeds.size(); i += static_cast<std::size_t>(cfg.batch_size)) {
        const auto end = std::min(seeds.size(), i + static_cast<std::size_t>(cfg.batch_size));
        groups.emplace_back(seeds.begin() + static_cast<std::ptrdiff_t>(i),
                            seeds.begin() + static_cast<std::ptrdiff_t>(end));
    }

    std::vector<EncodedBatch> batches;
    batches.reserve(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto sub = two_hop_subgraph(w, groups[g], cfg.fanout1, cfg.fanout2,
                                    mix_seed(sample_seed, static_cast<std::uint64_t>(w.start), g));
        batches.push_back(encode_batch(sub, vocab, loc));
    }
    if (shuffle_rng) shuffle_rng->shuffle(batches);
    return batches;
}

F1Scores compute_f1(std::span<const int> preds, std::span<const int> truths, int k) {
    if (preds.empty() || preds.size() != truths.size())
        throw DataError("compute_f1 requires equal-length non-empty label sequences");
    std::vector<std::uint64_t> tp(static_cast<std::size_t>(k), 0);
    std::vector<std::uint64_t> pred_count(static_cast<std::size_t>(k), 0);
    std::vector<std::uint64_t> support(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int p = preds[i], t = truths[i];
        if (p < 0 || p >= k || t < 0 || t >= k)
            throw DataError("compute_f1 label outside [0,K)");
        ++pred_count[static_cast<std::size_t>(p)];
        ++support[static_cast<std::size_t>(t)];
        if (p == t) ++tp[static_cast<std::size_t>(p)];
    }
    F1Scores out;
    double macro_sum = 0.0, weighted_sum = 0.0;
    std::uint64_t macro_classes = 0, total_support = 0;
    for (int c = 0; c < k; ++c) {
        auto cs = static_cast<std::size_t>(c);
        if (support[cs] == 0 && pred_count[cs] == 0) continue;
        double f1 = 0.0;
        if (tp[cs] > 0) {
            const double prec = static_cast<double>(tp[cs]) / static_cast<double>(pred_count[cs]);
            const double rec = static_cast<double>(tp[cs]) / static_cast<double>(support[cs]);
            f1 = 2.0 * prec * rec / (prec + rec);
        }
        macro_sum += f1;
        ++macro_classes;
        weighted_sum += f1 * static_cast<double>(support[cs]);
        total_support += support[cs];
    }
    out.macro = macro_classes > 0 ? macro_sum / static_cast<double>(macro_classes) : 0.0;
    out.weighted = total_support > 0 ? weighted_sum / static_cast<double>(total_support) : 0.0;
    return out;
}

nn::ModelParams train_model(const std::vector<WindowGraph>& windows, const ExecutableVocab& vocab,
                            const LocationEncoder& loc, Schema schema, const TrainConfig& cfg,
                            TrainReport* report) {
    cfg.validate();
    bool any_seed = false;
    for (const auto& w : windows) any_seed |= !w.seed_processes.empty();
    if (windows.empty() || !any_seed) throw TrainingError("empty training set");

    nn::GatDims dims;
    dims.d_in = 3 + LocationEncoder::kDim + vocab.size();
    dims.edge_dim = static_cast<int>(schema_ops(schema).size());
    dims.hidden = cfg.hidden;
    dims.heads = cfg.heads;
    dims.mlp_hidden = cfg.mlp_hidden;
    dims.k = vocab.size();

    nn::ModelParams model = nn::init_model(dims, cfg.dropout, mix_seed(cfg.seed, 0x90de1));
    nn::ModelParams grads = nn::make_grads(model);
    auto params_reg = model.registry();
    auto grads_reg = grads.registry();
    nn::AdamState opt;
    opt.init(params_reg);
    nn::AdamConfig adam;
    adam.lr = cfg.lr;
    adam.weight_decay = cfg.weight_decay;
    nn::PlateauScheduler sched;
    sched.lr = cfg.lr;
    sched.factor = cfg.scheduler_factor;
    sched.patience = cfg.scheduler_patience;

    TrainReport local;
    TrainReport& rep = report ? *report : local;
    rep.epoch_mean_loss.clear();
    rep.class_support.assign(static_cast<std::size_t>(vocab.size()), 0);

    std::vector<int> final_preds, final_truths;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const bool last_epoch = epoch == cfg.epochs - 1;
        Rng shuffle_rng(mix_seed(cfg.seed, 0xe90c, static_cast<std::uint64_t>(epoch)));
        const std::uint64_t sample_seed = train_sample_seed(cfg.seed, epoch);
        double loss_sum = 0.0;
        std::uint64_t batch_count = 0;

        for (const auto& w : windows) {
            if (w.seed_processes.empty()) continue;
            auto batches = make_batches(w, cfg, vocab, loc, sample_seed, &shuffle_rng);
            for (auto& batch : batches) {
                // Vocabulary comes from this very data, so every seed is labeled.
                for (int label : batch.labels) assert(label >= 0);
                nn::zero_params(grads);
                const std::uint64_t drop_seed =
                    mix_seed(cfg.seed, 0xd0, static_cast<std::uint64_t>(epoch),
                             static_cast<std::uint64_t>(w.start), batch_count);
                auto res = nn::loss_and_gradients(batch, model, grads, true, drop_seed);
                ++batch_count;
                if (!res.any_labeled) continue;
                loss_sum += res.loss;
                nn::adam_step(params_reg, grads_reg, opt, adam);
                if (last_epoch) {
                    for (std::size_t s = 0; s < batch.labels.size(); ++s) {
                        int best = 0;
                        for (int j = 1; j < dims.k; ++j)
                            if (res.probs.at(static_cast<int>(s), j) >
                                res.probs.at(static_cast<int>(s), best))
                                best = j;
                        final_preds.push_back(best);
                        final_truths.push_back(batch.labels[s]);
                    }
                }
            }
        }
        const double mean_loss =
            batch_count > 0 ? loss_sum / static_cast<double>(batch_count) : 0.0;
        rep.epoch_mean_loss.push_back(mean_loss);
        adam.lr = sched.step(mean_loss);
    }

    if (!final_truths.empty()) {
        auto f1 = compute_f1(final_preds, final_truths, dims.k);
        rep.macro_f1 = f1.macro;
        rep.weighted_f1 = f1.weighted;
        for (int t : final_truths) ++rep.class_support[static_cast<std::size_t>(t)];
    }
    return model;
}

ClusterMap build_clusters(const nn::ModelParams& params, const std::vector<WindowGraph>& windows,
                          const TrainConfig& cfg, const ExecutableVocab& vocab,
                          const LocationEncoder& loc) {
    ClusterMap map;
    const std::uint64_t sample_seed = inference_sample_seed(cfg.seed);
    for (const auto& w : windows) {
        if (w.seed_processes.empty()) continue;
        auto batches = make_batches(w, cfg, vocab, loc, sample_seed, nullptr);
        for (const auto& batch : batches) {
            auto emb = nn::gat_forward(batch, params, false, 0);
            auto probs = nn::decode(emb, params);
            for (std::size_t s = 0; s < batch.labels.size(); ++s) {
                const int truth = batch.labels[s];
                if (truth < 0) continue;
                int best = 0;
                for (int j = 1; j < probs.cols; ++j)
                    if (probs.at(static_cast<int>(s), j) > probs.at(static_cast<int>(s), best))
                        best = j;
                if (best != truth) map.allowed[truth].insert(best);
            }
        }
    }
    return map;
}

}  // namespace grasp
