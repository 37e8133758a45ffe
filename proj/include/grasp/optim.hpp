#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace grasp::nn {

// A named view over one parameter (or gradient) array. Models expose their
// storage through a registry so the optimizer, serialization and the
// finite-difference checks all walk parameters in one fixed order.
struct ParamView {
    std::string name;
    double* data = nullptr;
    std::size_t n = 0;
};
using ParamRegistry = std::vector<ParamView>;

std::size_t total_params(const ParamRegistry& reg);

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // classical coupling: added to the gradient as L2
};

struct AdamState {
    std::uint64_t step = 0;
    std::vector<std::vector<double>> m;  // first moments, aligned with the registry
    std::vector<std::vector<double>> v;  // second moments

    void init(const ParamRegistry& params);
};

// One Adam update with bias correction. Throws TrainingError on NaN/Inf
// gradients; parameters are guaranteed finite afterwards for finite inputs.
void adam_step(const ParamRegistry& params, const ParamRegistry& grads, AdamState& state,
               const AdamConfig& cfg);

// Reduce-on-plateau: halves the rate after more than `patience` consecutive
// epochs without improvement of the best loss seen so far.
struct PlateauScheduler {
    double lr = 0.01;
    double factor = 0.5;
    int patience = 5;

    double best_loss = 0.0;
    bool has_best = false;
    int bad_epochs = 0;

    // Feed the epoch loss; returns the (possibly reduced) learning rate.
    double step(double epoch_loss);
};

}  // namespace grasp::nn
