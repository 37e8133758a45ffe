#include "grasp/optim.hpp"

#include <cmath>

#include "grasp/common.hpp"

namespace grasp::nn {

std::size_t total_params(const ParamRegistry& reg) {
    std::size_t n = 0;
    for (const auto& p : reg) n += p.n;
    return n;
}

void AdamState::init(const ParamRegistry& params) {
    step = 0;
    m.clear();
    v.clear();
    for (const auto& p : params) {
        m.emplace_back(p.n, 0.0);
        v.emplace_back(p.n, 0.0);
    }
}

void adam_step(const ParamRegistry& params, const ParamRegistry& grads, AdamState& state,
               const AdamConfig& cfg) {
    if (params.size() != grads.size() || state.m.size() != params.size())
        throw TrainingError("optimizer state does not match parameter registry");
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (params[t].n != grads[t].n)
            throw TrainingError("gradient shape mismatch for " + params[t].name);
        double* w = params[t].data;
        const double* g = grads[t].data;
        auto& mt = state.m[t];
        auto& vt = state.v[t];
        for (std::size_t i = 0; i < params[t].n; ++i) {
            double gi = g[i];
            if (!std::isfinite(gi))
                throw TrainingError("non-finite gradient in " + params[t].name);
            gi += cfg.weight_decay * w[i];
            mt[i] = cfg.beta1 * mt[i] + (1.0 - cfg.beta1) * gi;
            vt[i] = cfg.beta2 * vt[i] + (1.0 - cfg.beta2) * gi * gi;
            const double mhat = mt[i] / bc1;
            const double vhat = vt[i] / bc2;
            w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

double PlateauScheduler::step(double epoch_loss) {
    if (!has_best || epoch_loss < best_loss) {
        best_loss = epoch_loss;
        has_best = true;
        bad_epochs = 0;
    } else {
        ++bad_epochs;
        if (bad_epochs > patience) {
            lr *= factor;
            bad_epochs = 0;
        }
    }
    return lr;
}

}  // namespace grasp::nn
