#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "grasp/encode.hpp"
#include "grasp/linalg.hpp"
#include "grasp/optim.hpp"

namespace grasp::nn {

struct GatDims {
    int d_in = 0;
    int edge_dim = 0;
    int hidden = 128;  // channels per head
    int heads = 4;
    int mlp_hidden = 128;
    int k = 0;  // classes

    int gat_out() const { return hidden * heads; }
    bool operator==(const GatDims&) const = default;
};

// One graph-attention layer. Attention scores concatenate transformed
// source, edge and destination features through per-head scoring vectors
// (leaky slope 0.2); self-loops carry a zero edge-feature row.
struct GatLayer {
    int in_dim = 0, out_dim = 0, heads = 0, edge_dim = 0;
    std::vector<Matrix> w;       // per head: out_dim x in_dim
    std::vector<Matrix> w_edge;  // per head: out_dim x edge_dim
    std::vector<Vector> att_src, att_dst, att_edge;  // per head: out_dim
    Vector bias;  // heads * out_dim, applied after concat
};

struct Mlp {
    Matrix w1;  // mlp_hidden x gat_out
    Vector b1;
    Matrix w2;  // k x mlp_hidden
    Vector b2;
};

struct ModelParams {
    GatDims dims;
    double dropout = 0.1;  // attention coefficients only, training only
    GatLayer gat0, gat1;
    Mlp mlp;

    ParamRegistry registry();
    void save(std::ostream& out) const;
    static ModelParams load(std::istream& in);
    bool all_finite() const;
};

ModelParams init_model(const GatDims& dims, double dropout, std::uint64_t seed);
ModelParams make_grads(const ModelParams& like);
void zero_params(ModelParams& p);

// Two attention layers over the batch graph (undirected edges materialized
// in both directions, self-loops added internally); returns the post-ReLU
// 512-dim embeddings of the seed rows. Deterministic given rng_seed; the
// rng drives only attention dropout and is unused when !training.
Matrix gat_forward(const EncodedBatch& batch, const ModelParams& params, bool training,
                   std::uint64_t rng_seed);

// MLP head: per-seed class probabilities (rows sum to 1).
Matrix decode(const Matrix& seed_embeddings, const ModelParams& params);

struct LossResult {
    double loss = 0.0;
    bool any_labeled = false;      // false => batch carries no trainable seed
    Matrix probs;                   // n_seeds x k, from the same pass
};

// Mean cross-entropy over the labeled seeds plus exact reverse-mode
// gradients for every parameter, accumulated into `grads`.
LossResult loss_and_gradients(const EncodedBatch& batch, const ModelParams& params,
                              ModelParams& grads, bool training, std::uint64_t rng_seed);

}  // namespace grasp::nn
