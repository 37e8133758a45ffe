#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "grasp/common.hpp"
#include "grasp/linalg.hpp"
#include "grasp/optim.hpp"

namespace grasp::loc {

// Character tokens: digits, ASCII letters, punctuation and whitespace
// (100 symbols) plus PAD/BOS/EOS/OOV specials.
inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kOov = 3;
int char_token(char c);
char token_char(int t);
int char_vocab_size();

struct TransformerConfig {
    int d_model = 8;
    int heads = 4;
    int layers = 2;
    int d_ff = 32;
    int max_chars = 100;
    int epochs = 10;
    double lr = 0.005;
    std::uint64_t seed = 1;
};

// Character-level sequence autoencoder: transformer encoder-decoder trained
// with teacher forcing on reconstruction. The 8-D string embedding is the
// mean of the final encoder states.
class TransformerAutoencoder {
public:
    TransformerAutoencoder() = default;
    explicit TransformerAutoencoder(const TransformerConfig& cfg);

    const TransformerConfig& config() const { return cfg_; }

    std::vector<int> tokenize(const std::string& s, bool* truncated = nullptr) const;

    // One pass over the corpus (token sequences), one optimizer step per
    // sequence; returns the mean per-position cross entropy.
    double train_epoch(const std::vector<std::vector<int>>& seqs, nn::AdamState& opt,
                       const nn::AdamConfig& adam, Rng& shuffle_rng);

    std::array<double, 8> embed_tokens(const std::vector<int>& tokens) const;
    std::string greedy_decode(const std::string& s) const;

    // Loss + gradients for a single sequence; used by training and by the
    // gradient check in tests.
    double loss_and_gradients(const std::vector<int>& tokens);

    nn::ParamRegistry params();
    nn::ParamRegistry grads();
    void zero_grads();

    void save(std::ostream& out) const;
    static TransformerAutoencoder load(std::istream& in);

private:
    friend struct TransformerWorkspace;

    struct Dense {
        nn::Matrix w, gw;
        nn::Vector b, gb;
    };
    struct Attn {
        Dense q, k, v, o;  // all d_model x d_model
    };
    struct Norm {
        nn::Vector gamma, beta, ggamma, gbeta;
    };
    struct EncoderLayer {
        Attn self;
        Norm ln1;
        Dense ff1, ff2;
        Norm ln2;
    };
    struct DecoderLayer {
        Attn self;
        Norm ln1;
        Attn cross;
        Norm ln2;
        Dense ff1, ff2;
        Norm ln3;
    };

    TransformerConfig cfg_;
    nn::Matrix emb_, gemb_;  // vocab x d_model
    std::vector<EncoderLayer> enc_;
    std::vector<DecoderLayer> dec_;
    Dense out_;              // vocab x d_model projection
    nn::Matrix pos_;         // precomputed sinusoidal table

    void allocate();
    void init_params(Rng& rng);
    void register_dense(nn::ParamRegistry& r, const std::string& name, Dense& d, bool grad);
    void register_norm(nn::ParamRegistry& r, const std::string& name, Norm& n, bool grad);
    nn::ParamRegistry registry(bool grad);
};

}  // namespace grasp::loc
