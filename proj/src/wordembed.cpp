#include "grasp/wordembed.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "grasp/common.hpp"

namespace grasp::loc {

std::vector<std::string> split_segments(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == '/' || c == '.' || c == ':') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

int WordEmbedModel::index_of(const std::string& seg) const {
    auto it = std::lower_bound(vocab_.begin(), vocab_.end(), seg);
    if (it == vocab_.end() || *it != seg) return -1;
    return static_cast<int>(it - vocab_.begin());
}

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

WordEmbedModel WordEmbedModel::fit(const std::vector<std::string>& corpus,
                                   const WordEmbedConfig& cfg) {
    WordEmbedModel m;
    m.cfg_ = cfg;

    std::set<std::string> segs;
    std::vector<std::vector<int>> docs;
    for (const auto& s : corpus)
        for (const auto& seg : split_segments(s)) segs.insert(seg);
    m.vocab_.assign(segs.begin(), segs.end());
    for (const auto& s : corpus) {
        std::vector<int> doc;
        for (const auto& seg : split_segments(s)) doc.push_back(m.index_of(seg));
        if (!doc.empty()) docs.push_back(std::move(doc));
    }

    const auto v = m.vocab_.size();
    const auto d = static_cast<std::size_t>(cfg.dim);
    Rng rng(mix_seed(cfg.seed, 0x77e));
    m.in_vec.assign(v, std::vector<double>(d, 0.0));
    m.out_vec.assign(v, std::vector<double>(d, 0.0));
    for (auto& row : m.in_vec)
        for (auto& x : row) x = rng.uniform(-0.5 / cfg.dim, 0.5 / cfg.dim);

    if (v == 0) return m;

    std::vector<double> grad_center(d);
    for (int ep = 0; ep < cfg.epochs; ++ep) {
        for (const auto& doc : docs) {
            const int n = static_cast<int>(doc.size());
            for (int i = 0; i < n; ++i) {
                for (int off = -cfg.window; off <= cfg.window; ++off) {
                    if (off == 0) continue;
                    const int j = i + off;
                    if (j < 0 || j >= n) continue;
                    const int center = doc[static_cast<std::size_t>(i)];
                    const int ctx = doc[static_cast<std::size_t>(j)];
                    auto& wc = m.in_vec[static_cast<std::size_t>(center)];
                    std::fill(grad_center.begin(), grad_center.end(), 0.0);

                    auto pull = [&](int target, double label) {
                        auto& wo = m.out_vec[static_cast<std::size_t>(target)];
                        double dotv = 0.0;
                        for (std::size_t k = 0; k < d; ++k) dotv += wc[k] * wo[k];
                        const double g = (sigmoid(dotv) - label) * cfg.lr;
                        for (std::size_t k = 0; k < d; ++k) {
                            grad_center[k] += g * wo[k];
                            wo[k] -= g * wc[k];
                        }
                    };
                    pull(ctx, 1.0);
                    for (int neg = 0; neg < cfg.negatives; ++neg) {
                        int cand = static_cast<int>(rng.bounded(v));
                        if (cand == ctx) continue;
                        pull(cand, 0.0);
                    }
                    for (std::size_t k = 0; k < d; ++k) wc[k] -= grad_center[k];
                }
            }
        }
    }
    return m;
}

std::array<double, 8> WordEmbedModel::embed(const std::string& s) const {
    std::array<double, 8> out{};
    int found = 0;
    for (const auto& seg : split_segments(s)) {
        const int idx = index_of(seg);
        if (idx < 0) continue;
        ++found;
        const auto& v = in_vec[static_cast<std::size_t>(idx)];
        for (std::size_t k = 0; k < v.size() && k < 8; ++k) out[k] += v[k];
    }
    if (found > 0)
        for (auto& x : out) x /= found;
    return out;
}

void WordEmbedModel::save(std::ostream& out) const {
    std::uint64_t magic = 0x47524153'50573245ULL;
    out.write(reinterpret_cast<const char*>(&magic), sizeof magic);
    auto wr_u64 = [&](std::uint64_t x) { out.write(reinterpret_cast<const char*>(&x), sizeof x); };
    auto wr_f64 = [&](double x) { out.write(reinterpret_cast<const char*>(&x), sizeof x); };
    wr_u64(static_cast<std::uint64_t>(cfg_.dim));
    wr_u64(static_cast<std::uint64_t>(cfg_.window));
    wr_u64(static_cast<std::uint64_t>(cfg_.negatives));
    wr_u64(static_cast<std::uint64_t>(cfg_.epochs));
    wr_f64(cfg_.lr);
    wr_u64(cfg_.seed);
    wr_u64(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        wr_u64(vocab_[i].size());
        out.write(vocab_[i].data(), static_cast<std::streamsize>(vocab_[i].size()));
        for (double x : in_vec[i]) wr_f64(x);
        for (double x : out_vec[i]) wr_f64(x);
    }
}

WordEmbedModel WordEmbedModel::load(std::istream& in) {
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
    if (rd_u64() != 0x47524153'50573245ULL) throw DataError("bad word-embedding blob");
    WordEmbedModel m;
    m.cfg_.dim = static_cast<int>(rd_u64());
    m.cfg_.window = static_cast<int>(rd_u64());
    m.cfg_.negatives = static_cast<int>(rd_u64());
    m.cfg_.epochs = static_cast<int>(rd_u64());
    m.cfg_.lr = rd_f64();
    m.cfg_.seed = rd_u64();
    const std::uint64_t v = rd_u64();
    m.vocab_.resize(v);
    m.in_vec.assign(v, std::vector<double>(static_cast<std::size_t>(m.cfg_.dim)));
    m.out_vec.assign(v, std::vector<double>(static_cast<std::size_t>(m.cfg_.dim)));
    for (std::uint64_t i = 0; i < v; ++i) {
        std::string s(rd_u64(), '\0');
        in.read(s.data(), static_cast<std::streamsize>(s.size()));
        m.vocab_[i] = std::move(s);
        for (auto& x : m.in_vec[i]) x = rd_f64();
        for (auto& x : m.out_vec[i]) x = rd_f64();
    }
    if (!in) throw DataError("truncated word-embedding blob");
    return m;
}

}  // namespace grasp::loc
