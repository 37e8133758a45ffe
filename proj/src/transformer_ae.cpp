#include "grasp/transformer_ae.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace grasp::loc {

using nn::Matrix;
using nn::Vector;

namespace {

// The 100 permitted characters: digits, letters, punctuation, whitespace.
const std::string& charset() {
    static const std::string cs = [] {
        std::string s;
        for (char c = '0'; c <= '9'; ++c) s += c;
        for (char c = 'a'; c <= 'z'; ++c) s += c;
        for (char c = 'A'; c <= 'Z'; ++c) s += c;
        s += "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";
        s += " \t\n\r\x0b\x0c";
        return s;
    }();
    return cs;
}

const std::array<int, 256>& char_lut() {
    static const std::array<int, 256> lut = [] {
        std::array<int, 256> t{};
        t.fill(kOov);
        const auto& cs = charset();
        for (std::size_t i = 0; i < cs.size(); ++i)
            t[static_cast<unsigned char>(cs[i])] = static_cast<int>(i) + 4;
        return t;
    }();
    return lut;
}

constexpr double kLnEps = 1e-5;

Matrix add(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += b.a[i];
    return out;
}

}  // namespace

int char_token(char c) { return char_lut()[static_cast<unsigned char>(c)]; }

char token_char(int t) {
    const auto& cs = charset();
    if (t >= 4 && t < 4 + static_cast<int>(cs.size())) return cs[static_cast<std::size_t>(t - 4)];
    return '?';
}

int char_vocab_size() { return 4 + static_cast<int>(charset().size()); }

TransformerAutoencoder::TransformerAutoencoder(const TransformerConfig& cfg) : cfg_(cfg) {
    allocate();
    Rng rng(mix_seed(cfg.seed, 0x7ae5));
    init_params(rng);
}

void TransformerAutoencoder::allocate() {
    const int d = cfg_.d_model;
    const int v = char_vocab_size();
    auto dense = [](int out_dim, int in_dim) {
        Dense dn;
        dn.w = Matrix(out_dim, in_dim);
        dn.gw = Matrix(out_dim, in_dim);
        dn.b.assign(static_cast<std::size_t>(out_dim), 0.0);
        dn.gb.assign(static_cast<std::size_t>(out_dim), 0.0);
        return dn;
    };
    auto norm = [d] {
        Norm n;
        n.gamma.assign(static_cast<std::size_t>(d), 1.0);
        n.beta.assign(static_cast<std::size_t>(d), 0.0);
        n.ggamma.assign(static_cast<std::size_t>(d), 0.0);
        n.gbeta.assign(static_cast<std::size_t>(d), 0.0);
        return n;
    };
    auto attn = [&] {
        Attn a;
        a.q = dense(d, d);
        a.k = dense(d, d);
        a.v = dense(d, d);
        a.o = dense(d, d);
        return a;
    };
    emb_ = Matrix(v, d);
    gemb_ = Matrix(v, d);
    enc_.clear();
    dec_.clear();
    for (int l = 0; l < cfg_.layers; ++l) {
        EncoderLayer el;
        el.self = attn();
        el.ln1 = norm();
        el.ff1 = dense(cfg_.d_ff, d);
        el.ff2 = dense(d, cfg_.d_ff);
        el.ln2 = norm();
        enc_.push_back(std::move(el));
        DecoderLayer dl;
        dl.self = attn();
        dl.ln1 = norm();
        dl.cross = attn();
        dl.ln2 = norm();
        dl.ff1 = dense(cfg_.d_ff, d);
        dl.ff2 = dense(d, cfg_.d_ff);
        dl.ln3 = norm();
        dec_.push_back(std::move(dl));
    }
    out_ = dense(v, d);

    const int rows = cfg_.max_chars + 2;
    pos_ = Matrix(rows, d);
    for (int p = 0; p < rows; ++p)
        for (int i = 0; i < d; ++i) {
            const double angle =
                p / std::pow(10000.0, 2.0 * (i / 2) / static_cast<double>(d));
            pos_.at(p, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
}

void TransformerAutoencoder::init_params(Rng& rng) {
    auto glorot = [&rng](Matrix& m) {
        const double a = std::sqrt(6.0 / (m.rows + m.cols));
        for (auto& x : m.a) x = rng.uniform(-a, a);
    };
    glorot(emb_);
    auto init_dense = [&](Dense& d) { glorot(d.w); };
    auto init_attn = [&](Attn& a) {
        init_dense(a.q);
        init_dense(a.k);
        init_dense(a.v);
        init_dense(a.o);
    };
    for (auto& l : enc_) {
        init_attn(l.self);
        init_dense(l.ff1);
        init_dense(l.ff2);
    }
    for (auto& l : dec_) {
        init_attn(l.self);
        init_attn(l.cross);
        init_dense(l.ff1);
        init_dense(l.ff2);
    }
    init_dense(out_);
}

void TransformerAutoencoder::register_dense(nn::ParamRegistry& r, const std::string& name,
                                            Dense& d, bool grad) {
    r.push_back({name + ".w", grad ? d.gw.a.data() : d.w.a.data(), d.w.a.size()});
    r.push_back({name + ".b", grad ? d.gb.data() : d.b.data(), d.b.size()});
}

void TransformerAutoencoder::register_norm(nn::ParamRegistry& r, const std::string& name, Norm& n,
                                           bool grad) {
    r.push_back({name + ".gamma", grad ? n.ggamma.data() : n.gamma.data(), n.gamma.size()});
    r.push_back({name + ".beta", grad ? n.gbeta.data() : n.beta.data(), n.beta.size()});
}

nn::ParamRegistry TransformerAutoencoder::registry(bool grad) {
    nn::ParamRegistry r;
    r.push_back({"emb", grad ? gemb_.a.data() : emb_.a.data(), emb_.a.size()});
    auto reg_attn = [&](const std::string& name, Attn& a) {
        register_dense(r, name + ".q", a.q, grad);
        register_dense(r, name + ".k", a.k, grad);
        register_dense(r, name + ".v", a.v, grad);
        register_dense(r, name + ".o", a.o, grad);
    };
    for (std::size_t l = 0; l < enc_.size(); ++l) {
        const std::string p = "enc" + std::to_string(l);
        reg_attn(p + ".self", enc_[l].self);
        register_norm(r, p + ".ln1", enc_[l].ln1, grad);
        register_dense(r, p + ".ff1", enc_[l].ff1, grad);
        register_dense(r, p + ".ff2", enc_[l].ff2, grad);
        register_norm(r, p + ".ln2", enc_[l].ln2, grad);
    }
    for (std::size_t l = 0; l < dec_.size(); ++l) {
        const std::string p = "dec" + std::to_string(l);
        reg_attn(p + ".self", dec_[l].self);
        register_norm(r, p + ".ln1", dec_[l].ln1, grad);
        reg_attn(p + ".cross", dec_[l].cross);
        register_norm(r, p + ".ln2", dec_[l].ln2, grad);
        register_dense(r, p + ".ff1", dec_[l].ff1, grad);
        register_dense(r, p + ".ff2", dec_[l].ff2, grad);
        register_norm(r, p + ".ln3", dec_[l].ln3, grad);
    }
    register_dense(r, "out", out_, grad);
    return r;
}

nn::ParamRegistry TransformerAutoencoder::params() { return registry(false); }
nn::ParamRegistry TransformerAutoencoder::grads() { return registry(true); }

void TransformerAutoencoder::zero_grads() {
    for (auto reg = grads(); auto& p : reg) std::fill(p.data, p.data + p.n, 0.0);
}

std::vector<int> TransformerAutoencoder::tokenize(const std::string& s, bool* truncated) const {
    std::vector<int> t;
    const std::size_t n = std::min<std::size_t>(s.size(), static_cast<std::size_t>(cfg_.max_chars));
    if (truncated) *truncated = s.size() > n;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back(char_token(s[i]));
    return t;
}

// ---- forward/backward building blocks -------------------------------------

namespace {

struct LNCache {
    Matrix xhat;
    Vector inv_std;
};

struct AttnCache {
    Matrix q, k, v, ctx;
    std::vector<Matrix> alpha;  // per head: Lq x Lk
};

struct FfnCache {
    Matrix x;  // input
    Matrix h;  // post-relu hidden
};

Matrix dense_fwd(const Matrix& x, const Matrix& w, const Vector& b) {
    Matrix y;
    nn::matmul_bt(x, w, y);
    for (int i = 0; i < y.rows; ++i) {
        double* yi = y.row(i);
        for (int j = 0; j < y.cols; ++j) yi[j] += b[static_cast<std::size_t>(j)];
    }
    return y;
}

}  // namespace

// Per-sequence workspace; friend of the model so the blocks can touch params.
struct TransformerWorkspace {
    using AE = TransformerAutoencoder;
    AE& m;
    explicit TransformerWorkspace(AE& model) : m(model) {}

    struct EncCache {
        Matrix x_in;
        AttnCache attn;
        LNCache ln1;
        Matrix y1;
        FfnCache ffn;
        LNCache ln2;
    };
    struct DecCache {
        Matrix x_in;
        AttnCache self;
        LNCache ln1;
        Matrix y1;
        AttnCache cross;
        LNCache ln2;
        Matrix y2;
        FfnCache ffn;
        LNCache ln3;
    };

    std::vector<int> enc_tokens, dec_tokens, targets;
    Matrix enc_x0, dec_x0;
    std::vector<EncCache> enc_caches;
    std::vector<DecCache> dec_caches;
    Matrix enc_out;
    Matrix dec_out;
    Matrix probs;  // softmax over logits, per position

    static Matrix dense(const Matrix& x, const AE::Dense& d) { return dense_fwd(x, d.w, d.b); }

    static Matrix dense_bwd(const Matrix& dy, const Matrix& x, AE::Dense& d) {
        nn::matmul_at_accum(dy, x, d.gw);
        for (int i = 0; i < dy.rows; ++i)
            for (int j = 0; j < dy.cols; ++j) d.gb[static_cast<std::size_t>(j)] += dy.at(i, j);
        Matrix dx(x.rows, x.cols);
        nn::matmul_accum(dy, d.w, dx);
        return dx;
    }

    static Matrix ln_fwd(const Matrix& x, const AE::Norm& p, LNCache& c) {
        const int d = x.cols;
        Matrix y(x.rows, d);
        c.xhat = Matrix(x.rows, d);
        c.inv_std.assign(static_cast<std::size_t>(x.rows), 0.0);
        for (int i = 0; i < x.rows; ++i) {
            const double* xi = x.row(i);
            double mean = 0.0;
            for (int j = 0; j < d; ++j) mean += xi[j];
            mean /= d;
            double var = 0.0;
            for (int j = 0; j < d; ++j) var += (xi[j] - mean) * (xi[j] - mean);
            var /= d;
            const double inv = 1.0 / std::sqrt(var + kLnEps);
            c.inv_std[static_cast<std::size_t>(i)] = inv;
            for (int j = 0; j < d; ++j) {
                const double xh = (xi[j] - mean) * inv;
                c.xhat.at(i, j) = xh;
                y.at(i, j) = p.gamma[static_cast<std::size_t>(j)] * xh +
                             p.beta[static_cast<std::size_t>(j)];
            }
        }
        return y;
    }

    static Matrix ln_bwd(const Matrix& dy, AE::Norm& p, const LNCache& c) {
        const int d = dy.cols;
        Matrix dx(dy.rows, d);
        for (int i = 0; i < dy.rows; ++i) {
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (int j = 0; j < d; ++j) {
                const double dyij = dy.at(i, j);
                const double xh = c.xhat.at(i, j);
                p.ggamma[static_cast<std::size_t>(j)] += dyij * xh;
                p.gbeta[static_cast<std::size_t>(j)] += dyij;
                const double dxh = dyij * p.gamma[static_cast<std::size_t>(j)];
                sum_dxhat += dxh;
                sum_dxhat_xhat += dxh * xh;
            }
            const double inv = c.inv_std[static_cast<std::size_t>(i)];
            for (int j = 0; j < d; ++j) {
                const double dxh = dy.at(i, j) * p.gamma[static_cast<std::size_t>(j)];
                dx.at(i, j) =
                    inv * (dxh - sum_dxhat / d - c.xhat.at(i, j) * sum_dxhat_xhat / d);
            }
        }
        return dx;
    }

    Matrix attn_fwd(const Matrix& xq, const Matrix& xkv, const AE::Attn& p, bool causal,
                    AttnCache& c) const {
        const int heads = m.cfg_.heads;
        const int d = m.cfg_.d_model;
        const int dh = d / heads;
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        c.q = dense(xq, p.q);
        c.k = dense(xkv, p.k);
        c.v = dense(xkv, p.v);
        const int lq = xq.rows, lk = xkv.rows;
        c.ctx = Matrix(lq, d);
        c.alpha.assign(static_cast<std::size_t>(heads), Matrix());
        for (int h = 0; h < heads; ++h) {
            Matrix& alpha = c.alpha[static_cast<std::size_t>(h)];
            alpha = Matrix(lq, lk);
            const int off = h * dh;
            for (int i = 0; i < lq; ++i) {
                const int kmax = causal ? std::min(i + 1, lk) : lk;
                double mx = -1e300;
                for (int j = 0; j < kmax; ++j) {
                    const double s = nn::dot(c.q.row(i) + off, c.k.row(j) + off, dh) * scale;
                    alpha.at(i, j) = s;
                    mx = std::max(mx, s);
                }
                double denom = 0.0;
                for (int j = 0; j < kmax; ++j) {
                    const double e = std::exp(alpha.at(i, j) - mx);
                    alpha.at(i, j) = e;
                    denom += e;
                }
                for (int j = 0; j < kmax; ++j) alpha.at(i, j) /= denom;
                for (int j = kmax; j < lk; ++j) alpha.at(i, j) = 0.0;
                double* ctx = c.ctx.row(i) + off;
                for (int j = 0; j < kmax; ++j)
                    nn::axpy(alpha.at(i, j), c.v.row(j) + off, ctx, dh);
            }
        }
        return dense(c.ctx, p.o);
    }

    void attn_bwd(const Matrix& dy, const Matrix& xq, const Matrix& xkv, AE::Attn& p, bool causal,
                  const AttnCache& c, Matrix& dxq, Matrix& dxkv) const {
        const int heads = m.cfg_.heads;
        const int d = m.cfg_.d_model;
        const int dh = d / heads;
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        const int lq = xq.rows, lk = xkv.rows;

        Matrix dctx = dense_bwd(dy, c.ctx, p.o);
        Matrix dq(lq, d), dk(lk, d), dv(lk, d);
        for (int h = 0; h < heads; ++h) {
            const Matrix& alpha = c.alpha[static_cast<std::size_t>(h)];
            const int off = h * dh;
            for (int i = 0; i < lq; ++i) {
                const int kmax = causal ? std::min(i + 1, lk) : lk;
                // dalpha then softmax jacobian
                std::vector<double> dal(static_cast<std::size_t>(kmax));
                double inner = 0.0;
                for (int j = 0; j < kmax; ++j) {
                    dal[static_cast<std::size_t>(j)] =
                        nn::dot(dctx.row(i) + off, c.v.row(j) + off, dh);
                    nn::axpy(alpha.at(i, j), dctx.row(i) + off, dv.row(j) + off, dh);
                    inner += alpha.at(i, j) * dal[static_cast<std::size_t>(j)];
                }
                for (int j = 0; j < kmax; ++j) {
                    const double ds = alpha.at(i, j) * (dal[static_cast<std::size_t>(j)] - inner);
                    nn::axpy(ds * scale, c.k.row(j) + off, dq.row(i) + off, dh);
                    nn::axpy(ds * scale, c.q.row(i) + off, dk.row(j) + off, dh);
                }
            }
        }
        {
            Matrix t = dense_bwd(dq, xq, p.q);
            for (std::size_t i = 0; i < t.a.size(); ++i) dxq.a[i] += t.a[i];
        }
        {
            Matrix t = dense_bwd(dk, xkv, p.k);
            for (std::size_t i = 0; i < t.a.size(); ++i) dxkv.a[i] += t.a[i];
        }
        {
            Matrix t = dense_bwd(dv, xkv, p.v);
            for (std::size_t i = 0; i < t.a.size(); ++i) dxkv.a[i] += t.a[i];
        }
    }

    Matrix ffn_fwd(const Matrix& x, const AE::Dense& f1, const AE::Dense& f2, FfnCache& c) const {
        c.x = x;
        c.h = dense(x, f1);
        for (auto& v : c.h.a) v = std::max(0.0, v);
        return dense(c.h, f2);
    }

    Matrix ffn_bwd(const Matrix& dy, AE::Dense& f1, AE::Dense& f2, const FfnCache& c) const {
        Matrix dh = dense_bwd(dy, c.h, f2);
        for (std::size_t i = 0; i < dh.a.size(); ++i)
            if (c.h.a[i] <= 0.0) dh.a[i] = 0.0;
        return dense_bwd(dh, c.x, f1);
    }

    Matrix embed_tokens_fwd(const std::vector<int>& toks) const {
        const int d = m.cfg_.d_model;
        const double s = std::sqrt(static_cast<double>(d));
        Matrix x(static_cast<int>(toks.size()), d);
        for (int i = 0; i < x.rows; ++i)
            for (int j = 0; j < d; ++j)
                x.at(i, j) = m.emb_.at(toks[static_cast<std::size_t>(i)], j) * s + m.pos_.at(i, j);
        return x;
    }

    void embed_tokens_bwd(const std::vector<int>& toks, const Matrix& dx) {
        const double s = std::sqrt(static_cast<double>(m.cfg_.d_model));
        for (int i = 0; i < dx.rows; ++i)
            nn::axpy(s, dx.row(i), m.gemb_.row(toks[static_cast<std::size_t>(i)]), dx.cols);
    }

    Matrix run_encoder(const std::vector<int>& toks) {
        enc_tokens = toks.empty() ? std::vector<int>{kPad} : toks;
        enc_x0 = embed_tokens_fwd(enc_tokens);
        Matrix x = enc_x0;
        enc_caches.assign(m.enc_.size(), {});
        for (std::size_t l = 0; l < m.enc_.size(); ++l) {
            auto& lay = m.enc_[l];
            auto& c = enc_caches[l];
            c.x_in = x;
            Matrix a = attn_fwd(x, x, lay.self, false, c.attn);
            c.y1 = ln_fwd(add(x, a), lay.ln1, c.ln1);
            Matrix f = ffn_fwd(c.y1, lay.ff1, lay.ff2, c.ffn);
            x = ln_fwd(add(c.y1, f), lay.ln2, c.ln2);
        }
        enc_out = x;
        return x;
    }

    Matrix run_decoder(const std::vector<int>& dec_toks) {
        dec_tokens = dec_toks;
        dec_x0 = embed_tokens_fwd(dec_tokens);
        Matrix x = dec_x0;
        dec_caches.assign(m.dec_.size(), {});
        for (std::size_t l = 0; l < m.dec_.size(); ++l) {
            auto& lay = m.dec_[l];
            auto& c = dec_caches[l];
            c.x_in = x;
            Matrix a = attn_fwd(x, x, lay.self, true, c.self);
            c.y1 = ln_fwd(add(x, a), lay.ln1, c.ln1);
            Matrix cr = attn_fwd(c.y1, enc_out, lay.cross, false, c.cross);
            c.y2 = ln_fwd(add(c.y1, cr), lay.ln2, c.ln2);
            Matrix f = ffn_fwd(c.y2, lay.ff1, lay.ff2, c.ffn);
            x = ln_fwd(add(c.y2, f), lay.ln3, c.ln3);
        }
        dec_out = x;
        return x;
    }

    double loss_and_backward(const std::vector<int>& toks) {
        run_encoder(toks);
        std::vector<int> dec_in{kBos};
        dec_in.insert(dec_in.end(), toks.begin(), toks.end());
        targets = toks;
        targets.push_back(kEos);
        run_decoder(dec_in);

        Matrix logits = dense(dec_out, m.out_);
        const int L = logits.rows, V = logits.cols;
        probs = logits;
        double loss = 0.0;
        Matrix dlogits(L, V);
        for (int i = 0; i < L; ++i) {
            double* pi = probs.row(i);
            double mx = pi[0];
            for (int j = 1; j < V; ++j) mx = std::max(mx, pi[j]);
            double denom = 0.0;
            for (int j = 0; j < V; ++j) {
                pi[j] = std::exp(pi[j] - mx);
                denom += pi[j];
            }
            for (int j = 0; j < V; ++j) pi[j] /= denom;
            const int t = targets[static_cast<std::size_t>(i)];
            loss -= std::log(std::max(pi[t], 1e-300));
            for (int j = 0; j < V; ++j) dlogits.at(i, j) = (pi[j] - (j == t ? 1.0 : 0.0)) / L;
        }
        loss /= L;

        Matrix dx = dense_bwd(dlogits, dec_out, m.out_);
        Matrix denc(enc_out.rows, enc_out.cols);
        for (int l = static_cast<int>(m.dec_.size()) - 1; l >= 0; --l) {
            auto& lay = m.dec_[static_cast<std::size_t>(l)];
            auto& c = dec_caches[static_cast<std::size_t>(l)];
            Matrix dsum3 = ln_bwd(dx, lay.ln3, c.ln3);
            Matrix dy2 = dsum3;  // residual branch
            Matrix dffn = ffn_bwd(dsum3, lay.ff1, lay.ff2, c.ffn);
            for (std::size_t i = 0; i < dy2.a.size(); ++i) dy2.a[i] += dffn.a[i];

            Matrix dsum2 = ln_bwd(dy2, lay.ln2, c.ln2);
            Matrix dy1 = dsum2;
            attn_bwd(dsum2, c.y1, enc_out, lay.cross, false, c.cross, dy1, denc);

            Matrix dsum1 = ln_bwd(dy1, lay.ln1, c.ln1);
            Matrix dxin = dsum1;
            attn_bwd(dsum1, c.x_in, c.x_in, lay.self, true, c.self, dxin, dxin);
            dx = dxin;
        }
        embed_tokens_bwd(dec_tokens, dx);

        Matrix de = denc;
        for (int l = static_cast<int>(m.enc_.size()) - 1; l >= 0; --l) {
            auto& lay = m.enc_[static_cast<std::size_t>(l)];
            auto& c = enc_caches[static_cast<std::size_t>(l)];
            Matrix dsum2 = ln_bwd(de, lay.ln2, c.ln2);
            Matrix dy1 = dsum2;
            Matrix dffn = ffn_bwd(dsum2, lay.ff1, lay.ff2, c.ffn);
            for (std::size_t i = 0; i < dy1.a.size(); ++i) dy1.a[i] += dffn.a[i];

            Matrix dsum1 = ln_bwd(dy1, lay.ln1, c.ln1);
            Matrix dxin = dsum1;
            attn_bwd(dsum1, c.x_in, c.x_in, lay.self, false, c.attn, dxin, dxin);
            de = dxin;
        }
        embed_tokens_bwd(enc_tokens, de);
        return loss;
    }
};

double TransformerAutoencoder::loss_and_gradients(const std::vector<int>& tokens) {
    TransformerWorkspace ws(*this);
    return ws.loss_and_backward(tokens);
}

double TransformerAutoencoder::train_epoch(const std::vector<std::vector<int>>& seqs,
                                           nn::AdamState& opt, const nn::AdamConfig& adam,
                                           Rng& shuffle_rng) {
    std::vector<std::size_t> order(seqs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_rng.shuffle(order);
    auto p = params();
    auto g = grads();
    double total = 0.0;
    for (std::size_t idx : order) {
        zero_grads();
        total += loss_and_gradients(seqs[idx]);
        adam_step(p, g, opt, adam);
    }
    return seqs.empty() ? 0.0 : total / static_cast<double>(seqs.size());
}

std::array<double, 8> TransformerAutoencoder::embed_tokens(const std::vector<int>& tokens) const {
    TransformerWorkspace ws(const_cast<TransformerAutoencoder&>(*this));
    Matrix enc = ws.run_encoder(tokens);
    std::array<double, 8> out{};
    for (int i = 0; i < enc.rows; ++i)
        for (int j = 0; j < enc.cols && j < 8; ++j)
            out[static_cast<std::size_t>(j)] += enc.at(i, j);
    for (auto& v : out) v /= enc.rows;
    return out;
}

std::string TransformerAutoencoder::greedy_decode(const std::string& s) const {
    TransformerWorkspace ws(const_cast<TransformerAutoencoder&>(*this));
    ws.run_encoder(tokenize(s));
    std::vector<int> dec{kBos};
    std::string out;
    for (int step = 0; step < cfg_.max_chars + 1; ++step) {
        Matrix y = ws.run_decoder(dec);
        Matrix logits = TransformerWorkspace::dense(y, out_);
        const int last = logits.rows - 1;
        int best = kEos;
        double bestv = -1e300;
        for (int j = 0; j < logits.cols; ++j) {
            if (j == kPad || j == kBos) continue;
            if (logits.at(last, j) > bestv) {
                bestv = logits.at(last, j);
                best = j;
            }
        }
        if (best == kEos) break;
        out += token_char(best);
        dec.push_back(best);
    }
    return out;
}

// ---- serialization ---------------------------------------------------------

namespace {

void write_u64(std::ostream& o, std::uint64_t v) {
    o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint64_t read_u64(std::istream& i) {
    std::uint64_t v = 0;
    i.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
void write_f64(std::ostream& o, double v) {
    o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
double read_f64(std::istream& i) {
    double v = 0;
    i.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

void TransformerAutoencoder::save(std::ostream& out) const {
    write_u64(out, 0x47524153'50414531ULL);  // magic
    write_u64(out, static_cast<std::uint64_t>(cfg_.d_model));
    write_u64(out, static_cast<std::uint64_t>(cfg_.heads));
    write_u64(out, static_cast<std::uint64_t>(cfg_.layers));
    write_u64(out, static_cast<std::uint64_t>(cfg_.d_ff));
    write_u64(out, static_cast<std::uint64_t>(cfg_.max_chars));
    write_u64(out, static_cast<std::uint64_t>(cfg_.epochs));
    write_f64(out, cfg_.lr);
    write_u64(out, cfg_.seed);
    auto reg = const_cast<TransformerAutoencoder*>(this)->params();
    write_u64(out, reg.size());
    for (const auto& p : reg) {
        write_u64(out, p.n);
        out.write(reinterpret_cast<const char*>(p.data),
                  static_cast<std::streamsize>(p.n * sizeof(double)));
    }
}

TransformerAutoencoder TransformerAutoencoder::load(std::istream& in) {
    if (read_u64(in) != 0x47524153'50414531ULL)
        throw DataError("bad transformer autoencoder blob");
    TransformerConfig cfg;
    cfg.d_model = static_cast<int>(read_u64(in));
    cfg.heads = static_cast<int>(read_u64(in));
    cfg.layers = static_cast<int>(read_u64(in));
    cfg.d_ff = static_cast<int>(read_u64(in));
    cfg.max_chars = static_cast<int>(read_u64(in));
    cfg.epochs = static_cast<int>(read_u64(in));
    cfg.lr = read_f64(in);
    cfg.seed = read_u64(in);
    TransformerAutoencoder ae(cfg);
    auto reg = ae.params();
    const std::uint64_t n = read_u64(in);
    if (n != reg.size()) throw DataError("transformer blob parameter count mismatch");
    for (auto& p : reg) {
        const std::uint64_t count = read_u64(in);
        if (count != p.n) throw DataError("transformer blob shape mismatch at " + p.name);
        in.read(reinterpret_cast<char*>(p.data),
                static_cast<std::streamsize>(p.n * sizeof(double)));
    }
    if (!in) throw DataError("truncated transformer autoencoder blob");
    return ae;
}

}  // namespace grasp::loc
