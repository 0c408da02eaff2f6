/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#ifndef ZSMAP_EMBEDDING_HPP
#define ZSMAP_EMBEDDING_HPP

#include "zsmap/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace zsmap {

enum class EmbeddingFormat {
    TextHeader,      // first line "<count> <dim>", then "<token> <v1> ... <vd>"
    TextHeaderless,  // rows only, dimensionality inferred from the first row
};

/// A vocabulary-indexed dense vector matrix. Immutable after construction and
/// safe to share across threads for read-only access.
class EmbeddingSpace {
public:
    EmbeddingSpace() = default;

    // Takes ownership of vocab and matrix; throws parse_error on duplicate
    // tokens or a vocab/row-count mismatch.
    EmbeddingSpace(std::vector<std::string> vocab, MatF matrix, bool normalized = false);

    Eigen::Index size() const { return matrix_.rows(); }
    Eigen::Index dim() const { return matrix_.cols(); }
    const std::vector<std::string>& vocab() const { return vocab_; }
    const MatF& matrix() const { return matrix_; }
    bool normalized() const { return normalized_; }

    std::optional<Eigen::Index> find(std::string_view token) const;
    const std::string& token(Eigen::Index row) const { return vocab_[static_cast<std::size_t>(row)]; }

    // Frequency rank of a row, 1 = most frequent. Defaults to file order
    // (row 0 -> rank 1); word2vec output is conventionally frequency-sorted.
    int freq_rank(Eigen::Index row) const;
    std::optional<int> freq_rank_of(std::string_view token) const;
    void set_freq_ranks(std::unordered_map<std::string, int> ranks);

private:
    std::vector<std::string> vocab_;
    MatF matrix_;
    std::unordered_map<std::string, Eigen::Index> index_;
    std::unordered_map<std::string, int> explicit_ranks_;
    bool normalized_ = false;
};

EmbeddingSpace load_embeddings(const std::string& path,
                               EmbeddingFormat format = EmbeddingFormat::TextHeader);

// Writes the text format back at 9 significant digits, which round-trips
// 32-bit floats exactly.
void save_embeddings(const EmbeddingSpace& space, const std::string& path,
                     EmbeddingFormat format = EmbeddingFormat::TextHeader);

// Returns a copy with every row scaled to unit Euclidean norm.
// Throws numeric_error naming the token of any all-zero row.
EmbeddingSpace unit_normalize(const EmbeddingSpace& space);

struct SubsetResult {
    MatF rows;                            // found tokens, in request order
    std::vector<Eigen::Index> indices;    // vocab row of each found token
    std::vector<std::string> found;       // tokens of `rows`, request order
    std::vector<std::string> missing;     // requested tokens absent from the vocab
};

// Missing tokens are reported, never thrown; the caller decides whether they
// are fatal.
SubsetResult subset(const EmbeddingSpace& space, std::span<const std::string> tokens);

// Averages rows sharing a label into one row per label (labels ordered by
// first appearance in vocab order). Tokens absent from the label map are
// dropped.
EmbeddingSpace group_average(const EmbeddingSpace& space,
                             const std::unordered_map<std::string, std::string>& label_of);

}  // namespace zsmap

#endif  // ZSMAP_EMBEDDING_HPP
