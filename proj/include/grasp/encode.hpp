#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "grasp/events.hpp"
#include "grasp/transformer_ae.hpp"
#include "grasp/windows.hpp"
#include "grasp/wordembed.hpp"

namespace grasp {

// Executable classification vocabulary: the distinct executables observed in
// the training data, in lexicographic order.
class ExecutableVocab {
public:
    ExecutableVocab() = default;
    explicit ExecutableVocab(std::vector<std::string> sorted_exes);

    int size() const { return static_cast<int>(exes_.size()); }
    // -1 for strings outside the vocabulary; never a dense index.
    int index_of(const std::string& exe) const;
    const std::string& at(int idx) const { return exes_[static_cast<std::size_t>(idx)]; }
    const std::vector<std::string>& entries() const { return exes_; }

    std::string to_json() const;
    static ExecutableVocab from_json(const std::string& text);

private:
    std::vector<std::string> exes_;
};

ExecutableVocab build_vocab(const EventLog& train);

enum class LocationMode : std::uint8_t { TransformerAE, WordEmbed, Disabled };
std::string_view to_string(LocationMode m);
std::optional<LocationMode> parse_location_mode(std::string_view s);

struct LocationConfig {
    LocationMode mode = LocationMode::TransformerAE;
    int epochs = 10;
    double lr = 0.005;
    std::uint64_t seed = 1;
};

struct LocationFitStats {
    std::uint64_t strings = 0;
    std::uint64_t truncated = 0;
    std::uint64_t oov_chars = 0;
    std::vector<double> epoch_loss;  // TransformerAE only
};

// Maps path / "ip:port" / executable strings to fixed 8-D vectors.
class LocationEncoder {
public:
    static constexpr int kDim = 8;

    LocationEncoder() = default;

    LocationMode mode() const { return mode_; }
    std::array<double, kDim> embed(const std::string& s) const;
    // TransformerAE only; returns the reconstruction of s.
    std::string reconstruct(const std::string& s) const;

    void save(std::ostream& out) const;
    static LocationEncoder load(std::istream& in);

    friend LocationEncoder fit_location_encoder(const std::vector<std::string>& corpus,
                                                const LocationConfig& cfg,
                                                LocationFitStats* stats);

private:
    LocationMode mode_ = LocationMode::Disabled;
    std::optional<loc::TransformerAutoencoder> ae_;
    std::optional<loc::WordEmbedModel> we_;
};

LocationEncoder fit_location_encoder(const std::vector<std::string>& corpus,
                                     const LocationConfig& cfg,
                                     LocationFitStats* stats = nullptr);

// Distinct location strings of a training log (file paths, netflow
// endpoints, executables), sorted: the autoencoder corpus.
std::vector<std::string> location_corpus(const EventLog& train);

// Numeric view of a sampled subgraph. Feature layout per node row:
// [ 3 node-kind one-hot | 8 location embedding | K executable one-hot ].
// Seed rows are masked: location and executable blocks are all zero.
struct EncodedBatch {
    int n_nodes = 0;
    int feat_dim = 0;  // 11 + K
    int edge_dim = 0;  // |schema ops|
    nn::Matrix x;      // n_nodes x feat_dim

    // Both directions of every stored undirected edge.
    std::vector<std::pair<int, int>> edge_index;  // (src, dst) local rows
    std::vector<int> edge_op;                     // op index per directed edge

    std::vector<int> seed_rows;
    std::vector<int> labels;                  // per seed; -1 = unknown executable
    std::vector<std::string> seed_ids;        // node ids, aligned with seed_rows
    std::vector<std::string> seed_observed;   // observed executable strings
};

EncodedBatch encode_batch(const SampledSubgraph& sub, const ExecutableVocab& vocab,
                          const LocationEncoder& loc);

}  // namespace grasp
