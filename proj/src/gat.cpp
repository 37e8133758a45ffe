#include "grasp/gat.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "grasp/common.hpp"

namespace grasp::nn {

namespace {

constexpr double kLeakySlope = 0.2;

void glorot(Matrix& m, Rng& rng) {
    const double a = std::sqrt(6.0 / (m.rows + m.cols));
    for (auto& x : m.a) x = rng.uniform(-a, a);
}

void glorot_vec(Vector& v, Rng& rng) {
    const double a = std::sqrt(6.0 / (1.0 + static_cast<double>(v.size())));
    for (auto& x : v) x = rng.uniform(-a, a);
}

GatLayer make_layer(int in_dim, int out_dim, int heads, int edge_dim) {
    GatLayer l;
    l.in_dim = in_dim;
    l.out_dim = out_dim;
    l.heads = heads;
    l.edge_dim = edge_dim;
    for (int h = 0; h < heads; ++h) {
        l.w.emplace_back(out_dim, in_dim);
        l.w_edge.emplace_back(out_dim, edge_dim);
        l.att_src.emplace_back(static_cast<std::size_t>(out_dim), 0.0);
        l.att_dst.emplace_back(static_cast<std::size_t>(out_dim), 0.0);
        l.att_edge.emplace_back(static_cast<std::size_t>(out_dim), 0.0);
    }
    l.bias.assign(static_cast<std::size_t>(out_dim) * heads, 0.0);
    return l;
}

// Batch graph with both edge directions plus one self-loop per node,
// CSR-indexed by destination so softmax groups are contiguous.
struct BatchGraph {
    std::vector<int> src, dst, op;  // op < 0 marks a self-loop (zero edge row)
    std::vector<int> in_start;      // CSR offsets per destination node
    std::vector<int> in_edge;      // edge ids ordered by destination
    int n_nodes = 0;
    int n_edges() const { return static_cast<int>(src.size()); }
};

BatchGraph build_graph(const EncodedBatch& b) {
    BatchGraph g;
    g.n_nodes = b.n_nodes;
    const auto total = b.edge_index.size() + static_cast<std::size_t>(b.n_nodes);
    g.src.reserve(total);
    g.dst.reserve(total);
    g.op.reserve(total);
    for (std::size_t e = 0; e < b.edge_index.size(); ++e) {
        g.src.push_back(b.edge_index[e].first);
        g.dst.push_back(b.edge_index[e].second);
        g.op.push_back(b.edge_op[e]);
    }
    for (int i = 0; i < b.n_nodes; ++i) {
        g.src.push_back(i);
        g.dst.push_back(i);
        g.op.push_back(-1);
    }
    std::vector<int> count(static_cast<std::size_t>(g.n_nodes) + 1, 0);
    for (int d : g.dst) ++count[static_cast<std::size_t>(d) + 1];
    for (int i = 0; i < g.n_nodes; ++i) count[static_cast<std::size_t>(i) + 1] += count[static_cast<std::size_t>(i)];
    g.in_start = count;
    g.in_edge.assign(g.src.size(), 0);
    std::vector<int> cursor = g.in_start;
    for (int e = 0; e < g.n_edges(); ++e)
        g.in_edge[static_cast<std::size_t>(cursor[static_cast<std::size_t>(g.dst[static_cast<std::size_t>(e)])]++)] = e;
    return g;
}

struct LayerTrace {
    std::vector<Matrix> h;                          // per head: N x out_dim
    std::vector<std::vector<double>> score_pre;     // per head, per edge
    std::vector<std::vector<double>> alpha;         // post softmax
    std::vector<std::vector<double>> alpha_used;    // post dropout
    std::vector<std::vector<std::uint8_t>> keep;    // dropout keep mask
    Matrix z;  // pre-ReLU output (N x heads*out_dim)
};

// Forward of one GAT layer; y holds the post-ReLU output.
void layer_forward(const Matrix& x, const BatchGraph& g, const GatLayer& p, bool training,
                   double dropout, Rng* rng, LayerTrace& t, Matrix& y) {
    const int n = x.rows;
    const int heads = p.heads;
    const int od = p.out_dim;
    t.h.assign(static_cast<std::size_t>(heads), Matrix());
    t.score_pre.assign(static_cast<std::size_t>(heads), {});
    t.alpha.assign(static_cast<std::size_t>(heads), {});
    t.alpha_used.assign(static_cast<std::size_t>(heads), {});
    t.keep.assign(static_cast<std::size_t>(heads), {});
    t.z = Matrix(n, heads * od);

    const bool do_drop = training && dropout > 0.0;
    const double keep_prob = 1.0 - dropout;

    for (int h = 0; h < heads; ++h) {
        auto hs = static_cast<std::size_t>(h);
        Matrix& hh = t.h[hs];
        matmul_bt(x, p.w[hs], hh);

        // Per-node attention terms and per-op edge scores.
        std::vector<double> a_src(static_cast<std::size_t>(n)), a_dst(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            a_src[static_cast<std::size_t>(i)] = dot(p.att_src[hs].data(), hh.row(i), od);
            a_dst[static_cast<std::size_t>(i)] = dot(p.att_dst[hs].data(), hh.row(i), od);
        }
        std::vector<double> op_score(static_cast<std::size_t>(p.edge_dim), 0.0);
        for (int op = 0; op < p.edge_dim; ++op) {
            double s = 0.0;
            for (int d = 0; d < od; ++d) s += p.att_edge[hs][static_cast<std::size_t>(d)] * p.w_edge[hs].at(d, op);
            op_score[static_cast<std::size_t>(op)] = s;
        }

        auto& pre = t.score_pre[hs];
        auto& alpha = t.alpha[hs];
        pre.assign(static_cast<std::size_t>(g.n_edges()), 0.0);
        alpha.assign(static_cast<std::size_t>(g.n_edges()), 0.0);
        for (int e = 0; e < g.n_edges(); ++e) {
            auto es = static_cast<std::size_t>(e);
            double s = a_src[static_cast<std::size_t>(g.src[es])] +
                       a_dst[static_cast<std::size_t>(g.dst[es])];
            if (g.op[es] >= 0) s += op_score[static_cast<std::size_t>(g.op[es])];
            pre[es] = s;
        }
        // Softmax over each node's incoming edges.
        for (int i = 0; i < g.n_nodes; ++i) {
            const int lo = g.in_start[static_cast<std::size_t>(i)];
            const int hi = g.in_start[static_cast<std::size_t>(i) + 1];
            double mx = -1e300;
            for (int q = lo; q < hi; ++q) {
                const auto e = static_cast<std::size_t>(g.in_edge[static_cast<std::size_t>(q)]);
                const double act = pre[e] > 0.0 ? pre[e] : kLeakySlope * pre[e];
                alpha[e] = act;
                mx = std::max(mx, act);
            }
            double denom = 0.0;
            for (int q = lo; q < hi; ++q) {
                const auto e = static_cast<std::size_t>(g.in_edge[static_cast<std::size_t>(q)]);
                alpha[e] = std::exp(alpha[e] - mx);
                denom += alpha[e];
            }
            for (int q = lo; q < hi; ++q) {
                const auto e = static_cast<std::size_t>(g.in_edge[static_cast<std::size_t>(q)]);
                alpha[e] /= denom;
            }
        }

        auto& used = t.alpha_used[hs];
        used = alpha;
        if (do_drop) {
            auto& keep = t.keep[hs];
            keep.assign(alpha.size(), 1);
            for (std::size_t e = 0; e < alpha.size(); ++e) {
                if (rng->uniform() < dropout) {
                    keep[e] = 0;
                    used[e] = 0.0;
                } else {
                    used[e] = alpha[e] / keep_prob;
                }
            }
        }

        // Aggregate messages into the head's output slice.
        for (int e = 0; e < g.n_edges(); ++e) {
            auto es = static_cast<std::size_t>(e);
            if (used[es] == 0.0) continue;
            axpy(used[es], hh.row(g.src[es]), t.z.row(g.dst[es]) + h * od, od);
        }
    }

    for (int i = 0; i < n; ++i) {
        double* zi = t.z.row(i);
        for (int c = 0; c < heads * od; ++c) zi[c] += p.bias[static_cast<std::size_t>(c)];
    }
    y = t.z;
    for (auto& v : y.a) v = std::max(0.0, v);
}

// Backward of one GAT layer. dy is the gradient at the post-ReLU output;
// dx receives the input gradient.
void layer_backward(const Matrix& x, const BatchGraph& g, const GatLayer& p, GatLayer& gp,
                    bool training, double dropout, const LayerTrace& t, const Matrix& dy,
                    Matrix& dx) {
    const int n = x.rows;
    const int heads = p.heads;
    const int od = p.out_dim;
    const bool do_drop = training && dropout > 0.0;
    const double keep_prob = 1.0 - dropout;

    Matrix dz = dy;
    for (std::size_t i = 0; i < dz.a.size(); ++i)
        if (t.z.a[i] <= 0.0) dz.a[i] = 0.0;

    for (int i = 0; i < n; ++i)
        for (int c = 0; c < heads * od; ++c) gp.bias[static_cast<std::size_t>(c)] += dz.at(i, c);

    dx = Matrix(n, p.in_dim);
    for (int h = 0; h < heads; ++h) {
        auto hs = static_cast<std::size_t>(h);
        const Matrix& hh = t.h[hs];
        const auto& alpha = t.alpha[hs];
        const auto& used = t.alpha_used[hs];
        const auto& pre = t.score_pre[hs];

        Matrix dh(n, od);
        std::vector<double> dused(static_cast<std::size_t>(g.n_edges()), 0.0);
        for (int e = 0; e < g.n_edges(); ++e) {
            auto es = static_cast<std::size_t>(e);
            const double* dzd = dz.row(g.dst[es]) + h * od;
            dused[es] = dot(dzd, hh.row(g.src[es]), od);
            if (used[es] != 0.0) axpy(used[es], dzd, dh.row(g.src[es]), od);
        }

        // Dropout, then softmax jacobian per destination group.
        std::vector<double>& dalpha = dused;
        if (do_drop) {
            const auto& keep = t.keep[hs];
            for (std::size_t e = 0; e < dalpha.size(); ++e)
                dalpha[e] = keep[e] ? dalpha[e] / keep_prob : 0.0;
        }
        std::vector<double> ds(static_cast<std::size_t>(g.n_edges()), 0.0);
        for (int i = 0; i < g.n_nodes; ++i) {
            const int lo = g.in_start[static_cast<std::size_t>(i)];
            const int hi = g.in_start[static_cast<std::size_t>(i) + 1];
            double inner = 0.0;
            for (int q = lo; q < hi; ++q) {
                const auto e = static_cast<std::size_t>(g.in_edge[static_cast<std::size_t>(q)]);
                inner += alpha[e] * dalpha[e];
            }
            for (int q = lo; q < hi; ++q) {
                const auto e = static_cast<std::size_t>(g.in_edge[static_cast<std::size_t>(q)]);
                const double dsoft = alpha[e] * (dalpha[e] - inner);
                ds[e] = pre[e] > 0.0 ? dsoft : kLeakySlope * dsoft;
            }
        }

        std::vector<double> da_src(static_cast<std::size_t>(n), 0.0);
        std::vector<double> da_dst(static_cast<std::size_t>(n), 0.0);
        std::vector<double> dop(static_cast<std::size_t>(p.edge_dim), 0.0);
        for (int e = 0; e < g.n_edges(); ++e) {
            auto es = static_cast<std::size_t>(e);
            da_src[static_cast<std::size_t>(g.src[es])] += ds[es];
            da_dst[static_cast<std::size_t>(g.dst[es])] += ds[es];
            if (g.op[es] >= 0) dop[static_cast<std::size_t>(g.op[es])] += ds[es];
        }

        // att_src/att_dst couple node features and scoring vectors.
        for (int i = 0; i < n; ++i) {
            auto is = static_cast<std::size_t>(i);
            if (da_src[is] != 0.0) {
                axpy(da_src[is], hh.row(i), gp.att_src[hs].data(), od);
                axpy(da_src[is], p.att_src[hs].data(), dh.row(i), od);
            }
            if (da_dst[is] != 0.0) {
                axpy(da_dst[is], hh.row(i), gp.att_dst[hs].data(), od);
                axpy(da_dst[is], p.att_dst[hs].data(), dh.row(i), od);
            }
        }
        // op_score[t] = att_edge . w_edge[:,t]
        for (int op = 0; op < p.edge_dim; ++op) {
            const double d = dop[static_cast<std::size_t>(op)];
            if (d == 0.0) continue;
            for (int c = 0; c < od; ++c) {
                gp.att_edge[hs][static_cast<std::size_t>(c)] += d * p.w_edge[hs].at(c, op);
                gp.w_edge[hs].at(c, op) += d * p.att_edge[hs][static_cast<std::size_t>(c)];
            }
        }

        matmul_at_accum(dh, x, gp.w[hs]);
        matmul_accum(dh, p.w[hs], dx);
    }
}

struct ForwardTrace {
    BatchGraph graph;
    LayerTrace l0, l1;
    Matrix x0;       // input features
    Matrix y0;       // post-ReLU layer0 output
    Matrix y1;       // post-ReLU layer1 output (node embeddings)
    Matrix seed_emb; // rows gathered at seeds
};

void check_dims(const EncodedBatch& b, const ModelParams& p) {
    if (b.feat_dim != p.dims.d_in)
        throw DataError("gat layer0 input width mismatch: expected " +
                        std::to_string(p.dims.d_in) + ", got " + std::to_string(b.feat_dim));
    if (b.edge_dim != p.dims.edge_dim)
        throw DataError("gat edge feature width mismatch: expected " +
                        std::to_string(p.dims.edge_dim) + ", got " + std::to_string(b.edge_dim));
}

void forward_full(const EncodedBatch& b, const ModelParams& p, bool training,
                  std::uint64_t rng_seed, ForwardTrace& t) {
    check_dims(b, p);
    t.graph = build_graph(b);
    t.x0 = b.x;
    Rng rng(mix_seed(rng_seed, 0xd209));
    Rng* rp = training ? &rng : nullptr;
    layer_forward(t.x0, t.graph, p.gat0, training, p.dropout, rp, t.l0, t.y0);
    layer_forward(t.y0, t.graph, p.gat1, training, p.dropout, rp, t.l1, t.y1);
    t.seed_emb = Matrix(static_cast<int>(b.seed_rows.size()), p.dims.gat_out());
    for (std::size_t s = 0; s < b.seed_rows.size(); ++s)
        std::copy_n(t.y1.row(b.seed_rows[s]), p.dims.gat_out(),
                    t.seed_emb.row(static_cast<int>(s)));
}

}  // namespace

ParamRegistry ModelParams::registry() {
    ParamRegistry r;
    auto add_layer = [&r](const std::string& name, GatLayer& l) {
        for (int h = 0; h < l.heads; ++h) {
            auto hs = static_cast<std::size_t>(h);
            const std::string p = name + ".h" + std::to_string(h);
            r.push_back({p + ".w", l.w[hs].a.data(), l.w[hs].a.size()});
            r.push_back({p + ".w_edge", l.w_edge[hs].a.data(), l.w_edge[hs].a.size()});
            r.push_back({p + ".att_src", l.att_src[hs].data(), l.att_src[hs].size()});
            r.push_back({p + ".att_dst", l.att_dst[hs].data(), l.att_dst[hs].size()});
            r.push_back({p + ".att_edge", l.att_edge[hs].data(), l.att_edge[hs].size()});
        }
        r.push_back({name + ".bias", l.bias.data(), l.bias.size()});
    };
    add_layer("gat0", gat0);
    add_layer("gat1", gat1);
    r.push_back({"mlp.w1", mlp.w1.a.data(), mlp.w1.a.size()});
    r.push_back({"mlp.b1", mlp.b1.data(), mlp.b1.size()});
    r.push_back({"mlp.w2", mlp.w2.a.data(), mlp.w2.a.size()});
    r.push_back({"mlp.b2", mlp.b2.data(), mlp.b2.size()});
    return r;
}

bool ModelParams::all_finite() const {
    auto& self = const_cast<ModelParams&>(*this);
    for (auto reg = self.registry(); const auto& p : reg)
        for (std::size_t i = 0; i < p.n; ++i)
            if (!std::isfinite(p.data[i])) return false;
    return true;
}

ModelParams init_model(const GatDims& dims, double dropout, std::uint64_t seed) {
    ModelParams m;
    m.dims = dims;
    m.dropout = dropout;
    m.gat0 = make_layer(dims.d_in, dims.hidden, dims.heads, dims.edge_dim);
    m.gat1 = make_layer(dims.gat_out(), dims.hidden, dims.heads, dims.edge_dim);
    m.mlp.w1 = Matrix(dims.mlp_hidden, dims.gat_out());
    m.mlp.b1.assign(static_cast<std::size_t>(dims.mlp_hidden), 0.0);
    m.mlp.w2 = Matrix(dims.k, dims.mlp_hidden);
    m.mlp.b2.assign(static_cast<std::size_t>(dims.k), 0.0);

    Rng rng(mix_seed(seed, 0x6a7));
    for (auto* layer : {&m.gat0, &m.gat1}) {
        for (int h = 0; h < layer->heads; ++h) {
            auto hs = static_cast<std::size_t>(h);
            glorot(layer->w[hs], rng);
            glorot(layer->w_edge[hs], rng);
            glorot_vec(layer->att_src[hs], rng);
            glorot_vec(layer->att_dst[hs], rng);
            glorot_vec(layer->att_edge[hs], rng);
        }
    }
    glorot(m.mlp.w1, rng);
    glorot(m.mlp.w2, rng);
    return m;
}

ModelParams make_grads(const ModelParams& like) {
    ModelParams g = like;
    zero_params(g);
    return g;
}

void zero_params(ModelParams& p) {
    for (auto reg = p.registry(); auto& view : reg) std::fill(view.data, view.data + view.n, 0.0);
}

Matrix gat_forward(const EncodedBatch& batch, const ModelParams& params, bool training,
                   std::uint64_t rng_seed) {
    ForwardTrace t;
    forward_full(batch, params, training, rng_seed, t);
    return t.seed_emb;
}

Matrix decode(const Matrix& seed_embeddings, const ModelParams& params) {
    Matrix z1;
    matmul_bt(seed_embeddings, params.mlp.w1, z1);
    for (int i = 0; i < z1.rows; ++i)
        for (int j = 0; j < z1.cols; ++j)
            z1.at(i, j) = std::max(0.0, z1.at(i, j) + params.mlp.b1[static_cast<std::size_t>(j)]);
    Matrix logits;
    matmul_bt(z1, params.mlp.w2, logits);
    for (int i = 0; i < logits.rows; ++i) {
        double* li = logits.row(i);
        for (int j = 0; j < logits.cols; ++j) li[j] += params.mlp.b2[static_cast<std::size_t>(j)];
        double mx = li[0];
        for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, li[j]);
        double denom = 0.0;
        for (int j = 0; j < logits.cols; ++j) {
            li[j] = std::exp(li[j] - mx);
            denom += li[j];
        }
        for (int j = 0; j < logits.cols; ++j) li[j] /= denom;
    }
    return logits;
}

LossResult loss_and_gradients(const EncodedBatch& batch, const ModelParams& params,
                              ModelParams& grads, bool training, std::uint64_t rng_seed) {
    ForwardTrace t;
    forward_full(batch, params, training, rng_seed, t);

    const int n_seeds = static_cast<int>(batch.seed_rows.size());
    const int k = params.dims.k;

    // MLP forward with cached pre-activations.
    Matrix z1;
    matmul_bt(t.seed_emb, params.mlp.w1, z1);
    for (int i = 0; i < z1.rows; ++i)
        for (int j = 0; j < z1.cols; ++j) z1.at(i, j) += params.mlp.b1[static_cast<std::size_t>(j)];
    Matrix a1 = z1;
    for (auto& v : a1.a) v = std::max(0.0, v);
    Matrix logits;
    matmul_bt(a1, params.mlp.w2, logits);
    for (int i = 0; i < logits.rows; ++i)
        for (int j = 0; j < logits.cols; ++j)
            logits.at(i, j) += params.mlp.b2[static_cast<std::size_t>(j)];

    LossResult res;
    res.probs = logits;
    int labeled = 0;
    for (int s = 0; s < n_seeds; ++s)
        if (batch.labels[static_cast<std::size_t>(s)] >= 0) ++labeled;
    for (int i = 0; i < n_seeds; ++i) {
        double* pi = res.probs.row(i);
        double mx = pi[0];
        for (int j = 1; j < k; ++j) mx = std::max(mx, pi[j]);
        double denom = 0.0;
        for (int j = 0; j < k; ++j) {
            pi[j] = std::exp(pi[j] - mx);
            denom += pi[j];
        }
        for (int j = 0; j < k; ++j) pi[j] /= denom;
    }
    if (labeled == 0) return res;  // skip signal: nothing to learn from
    res.any_labeled = true;

    double loss = 0.0;
    Matrix dlogits(n_seeds, k);
    for (int s = 0; s < n_seeds; ++s) {
        const int label = batch.labels[static_cast<std::size_t>(s)];
        if (label < 0) continue;
        loss -= std::log(std::max(res.probs.at(s, label), 1e-300));
        for (int j = 0; j < k; ++j)
            dlogits.at(s, j) = (res.probs.at(s, j) - (j == label ? 1.0 : 0.0)) / labeled;
    }
    res.loss = loss / labeled;

    // MLP backward.
    matmul_at_accum(dlogits, a1, grads.mlp.w2);
    for (int i = 0; i < dlogits.rows; ++i)
        for (int j = 0; j < dlogits.cols; ++j)
            grads.mlp.b2[static_cast<std::size_t>(j)] += dlogits.at(i, j);
    Matrix da1(n_seeds, params.dims.mlp_hidden);
    matmul_accum(dlogits, params.mlp.w2, da1);
    for (std::size_t i = 0; i < da1.a.size(); ++i)
        if (z1.a[i] <= 0.0) da1.a[i] = 0.0;
    matmul_at_accum(da1, t.seed_emb, grads.mlp.w1);
    for (int i = 0; i < da1.rows; ++i)
        for (int j = 0; j < da1.cols; ++j)
            grads.mlp.b1[static_cast<std::size_t>(j)] += da1.at(i, j);
    Matrix demb(n_seeds, params.dims.gat_out());
    matmul_accum(da1, params.mlp.w1, demb);

    // Scatter seed gradients into the full node embedding gradient.
    Matrix dy1(t.y1.rows, t.y1.cols);
    for (int s = 0; s < n_seeds; ++s)
        axpy(1.0, demb.row(s), dy1.row(batch.seed_rows[static_cast<std::size_t>(s)]), dy1.cols);

    Matrix dy0;
    layer_backward(t.y0, t.graph, params.gat1, grads.gat1, training, params.dropout, t.l1, dy1,
                   dy0);
    Matrix dx0;
    layer_backward(t.x0, t.graph, params.gat0, grads.gat0, training, params.dropout, t.l0, dy0,
                   dx0);
    return res;
}

void ModelParams::save(std::ostream& out) const {
    auto wr_u64 = [&](std::uint64_t x) { out.write(reinterpret_cast<const char*>(&x), sizeof x); };
    auto wr_f64 = [&](double x) { out.write(reinterpret_cast<const char*>(&x), sizeof x); };
    wr_u64(0x47524153'50474154ULL);
    wr_u64(static_cast<std::uint64_t>(dims.d_in));
    wr_u64(static_cast<std::uint64_t>(dims.edge_dim));
    wr_u64(static_cast<std::uint64_t>(dims.hidden));
    wr_u64(static_cast<std::uint64_t>(dims.heads));
    wr_u64(static_cast<std::uint64_t>(dims.mlp_hidden));
    wr_u64(static_cast<std::uint64_t>(dims.k));
    wr_f64(dropout);
    auto reg = const_cast<ModelParams*>(this)->registry();
    wr_u64(reg.size());
    for (const auto& p : reg) {
        wr_u64(p.n);
        out.write(reinterpret_cast<const char*>(p.data),
                  static_cast<std::streamsize>(p.n * sizeof(double)));
    }
}

ModelParams ModelParams::load(std::istream& in) {
    auto rd_u64 = [&] {
        std::uint64_t x = 0;
        in.read(reinterpret_cast<char*>(&x), sizeof x);
        return x;
    };
    auto rd_f64 = [&] {
        double x = 0;
        in.read(reinterpret_cast<char*>(&x), sizeof x);
        return x;
    };
    if (rd_u64() != 0x47524153'50474154ULL) throw DataError("bad model parameter blob");
    GatDims dims;
    dims.d_in = static_cast<int>(rd_u64());
    dims.edge_dim = static_cast<int>(rd_u64());
    dims.hidden = static_cast<int>(rd_u64());
    dims.heads = static_cast<int>(rd_u64());
    dims.mlp_hidden = static_cast<int>(rd_u64());
    dims.k = static_cast<int>(rd_u64());
    const double dropout = rd_f64();
    ModelParams m = init_model(dims, dropout, 0);
    auto reg = m.registry();
    if (rd_u64() != reg.size()) throw DataError("model blob parameter count mismatch");
    for (auto& p : reg) {
        if (rd_u64() != p.n) throw DataError("model blob shape mismatch at " + p.name);
        in.read(reinterpret_cast<char*>(p.data),
                static_cast<std::streamsize>(p.n * sizeof(double)));
    }
    if (!in) throw DataError("truncated model parameter blob");
    return m;
}

}  // namespace grasp::nn
