#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "grasp/encode.hpp"
#include "grasp/gat.hpp"
#include "grasp/optim.hpp"
#include "grasp/windows.hpp"

namespace grasp {

struct TrainConfig {
    std::int64_t context_minutes = 120;
    std::int64_t step_minutes = 120;
    int batch_size = 32;
    int epochs = 4;
    std::int64_t fanout1 = -1;  // -1 = all neighbors
    std::int64_t fanout2 = -1;
    double dropout = 0.1;
    double lr = 0.01;
    double weight_decay = 1e-4;
    double scheduler_factor = 0.5;
    int scheduler_patience = 5;
    std::uint64_t seed = 1;
    LocationMode location_mode = LocationMode::TransformerAE;
    int location_epochs = 10;
    double location_lr = 0.005;
    bool clustering = true;
    int jobs = 0;  // inference worker cap; 0 keeps the OpenMP default

    // Model topology.
    int hidden = 128;
    int heads = 4;
    int mlp_hidden = 128;

    void validate() const;
    std::string to_json() const;
    static TrainConfig from_json(const std::string& text);
    std::string config_hash() const;
};

struct TrainReport {
    std::vector<double> epoch_mean_loss;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    std::vector<std::uint64_t> class_support;  // per vocab index, final epoch

    std::string to_json() const;
    static TrainReport from_json(const std::string& text);
};

// Benign-mixup table: observed executable index -> predicted indices that
// the final model confuses it with on its own training data.
struct ClusterMap {
    std::map<int, std::set<int>> allowed;

    bool contains(int truth, int pred) const {
        auto it = allowed.find(truth);
        return it != allowed.end() && it->second.count(pred) > 0;
    }
    bool empty() const { return allowed.empty(); }
    std::size_t pair_count() const;

    std::string to_json(const ExecutableVocab& vocab) const;
    static ClusterMap from_json(const std::string& text, const ExecutableVocab& vocab);
};

// Seed sampling streams. Training resamples neighborhoods per epoch; the
// clustering pass and inference share one fixed stream so that their batch
// graphs are identical and the zero-alarm closure on training data holds.
std::uint64_t train_sample_seed(std::uint64_t run_seed, int epoch);
std::uint64_t inference_sample_seed(std::uint64_t run_seed);

// Seed processes of the window, in canonical id order, chunked into groups
// of cfg.batch_size, each expanded to a sampled subgraph and encoded.
// A non-null shuffle_rng permutes batch order (membership is unaffected).
std::vector<EncodedBatch> make_batches(const WindowGraph& w, const TrainConfig& cfg,
                                       const ExecutableVocab& vocab, const LocationEncoder& loc,
                                       std::uint64_t sample_seed, Rng* shuffle_rng);

struct F1Scores {
    double macro = 0.0;
    double weighted = 0.0;
};

// Per-class F1 with zero for degenerate classes; macro averages classes with
// support or predicted presence, weighted weights by support.
F1Scores compute_f1(std::span<const int> preds, std::span<const int> truths, int k);

nn::ModelParams train_model(const std::vector<WindowGraph>& windows, const ExecutableVocab& vocab,
                            const LocationEncoder& loc, Schema schema, const TrainConfig& cfg,
                            TrainReport* report = nullptr);

ClusterMap build_clusters(const nn::ModelParams& params, const std::vector<WindowGraph>& windows,
                          const TrainConfig& cfg, const ExecutableVocab& vocab,
                          const LocationEncoder& loc);

}  // namespace grasp
