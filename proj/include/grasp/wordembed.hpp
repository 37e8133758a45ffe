#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace grasp::loc {

// Skip-gram-with-negative-sampling over location segments (paths split on
// '/', '.' and ':'). A string embeds as the mean of its segment vectors.
struct WordEmbedConfig {
    int dim = 8;
    int window = 2;
    int negatives = 5;
    int epochs = 5;
    double lr = 0.025;
    std::uint64_t seed = 1;
};

std::vector<std::string> split_segments(const std::string& s);

class WordEmbedModel {
public:
    WordEmbedModel() = default;

    static WordEmbedModel fit(const std::vector<std::string>& corpus, const WordEmbedConfig& cfg);

    std::array<double, 8> embed(const std::string& s) const;

    void save(std::ostream& out) const;
    static WordEmbedModel load(std::istream& in);

    std::size_t vocab_size() const { return vocab_.size(); }

private:
    WordEmbedConfig cfg_;
    std::vector<std::string> vocab_;          // sorted segments
    std::vector<std::vector<double>> in_vec;  // per segment
    std::vector<std::vector<double>> out_vec;

    int index_of(const std::string& seg) const;
};

}  // namespace grasp::loc
