/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#ifndef ZSMAP_RETRIEVAL_HPP
#define ZSMAP_RETRIEVAL_HPP

#include "zsmap/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace zsmap {

enum class Method { NN, NNnrm, GC };

const char* method_name(Method m);         // "nn", "nn_nrm", "gc"
Method method_from_name(const std::string& name);  // accepts nn, nrm/nn_nrm, gc

/// Dense pivot x target cosine scores; the shared substrate of all three
/// query methods. Row i is pivot_ids[i], column j is target_ids[j]; id lists
/// may be empty, in which case emitters fall back to numeric indices.
struct SimilarityMatrix {
    MatF scores;
    std::vector<std::string> pivot_ids;
    std::vector<std::string> target_ids;

    Eigen::Index pivots() const { return scores.rows(); }
    Eigen::Index targets() const { return scores.cols(); }
};

struct Neighbor {
    std::int32_t target = 0;  // column index into the similarity matrix
    double score = 0.0;       // the method's ordering score (see NeighborResult)
};

/// Per-pivot ranked target lists. Entry ranks are positional (1-based, no
/// gaps). The score field holds the method's ordering key: the raw cosine for
/// nn (non-increasing), the pivot-normalized similarity for nn_nrm
/// (non-increasing), and Rank_{y,P}(x) - cos(x,y) for gc (non-decreasing).
struct NeighborResult {
    Method method = Method::NN;
    int k = 0;
    std::vector<std::vector<Neighbor>> lists;

    Eigen::Index pivots() const { return static_cast<Eigen::Index>(lists.size()); }
};

// scores[i][j] = cos(P_i, T_j). Throws numeric_error naming the first all-zero
// row of either matrix. Tiled so nothing larger than the output matrix plus
// one tile is materialized; entries are identical for any thread count.
SimilarityMatrix cosine_matrix(const MatF& P, const MatF& T,
                               std::vector<std::string> pivot_ids = {},
                               std::vector<std::string> target_ids = {});

// rank[i][j] = 1-based position of target j when row i is sorted by
// decreasing score, exact ties broken by ascending target index.
MatI rank_targets(const SimilarityMatrix& sim);

// Standard nearest neighbours: per pivot, the k targets of highest cosine.
NeighborResult nn_query(const SimilarityMatrix& sim, int k);

// Each target's column of similarities to the pivots is scaled to unit
// Euclidean norm before the per-pivot top-k; targets similar to everything
// are penalized. Throws numeric_error on an all-zero column.
NeighborResult nrm_query(const SimilarityMatrix& sim, int k);

struct GcOptions {
    // Upper bound on the transient per-tile rank storage. Column ranks are
    // computed in |T|-pass tiles instead of materializing the full |T| x |P|
    // rank matrix, which exceeds casual memory budgets at vocabulary scale.
    std::size_t rank_tile_bytes = std::size_t{64} << 20;
};

// Globally-corrected retrieval: targets ordered by ascending
// Rank_{y,P}(x) - cos(x,y), where Rank_{y,P}(x) is the rank of pivot x within
// target y's similarity column. With a single pivot every rank is 1 and the
// ordering reduces to a standard nn query.
NeighborResult gc_query(const SimilarityMatrix& sim, int k, const GcOptions& opt = {});

// Returns the result restricted to the first n_pivots lists (e.g. scoring
// hubness over labeled pivots only while auxiliary pivots still shaped the
// ranks).
NeighborResult head(const NeighborResult& result, std::size_t n_pivots);

// One line per pivot and rank: "pivot<TAB>rank<TAB>target<TAB>score" with the
// score at 6 decimal places, preceded by a "# method=<m> k=<k>" comment.
void write_retrieval_tsv(std::ostream& out, const SimilarityMatrix& sim,
                         const NeighborResult& result);

}  // namespace zsmap

#endif  // ZSMAP_RETRIEVAL_HPP
