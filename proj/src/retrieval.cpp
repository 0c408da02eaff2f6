/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "zsmap/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace zsmap {

namespace {

// Strict total orders; exact ties always fall back to the ascending target
// index so results are reproducible across runs, platforms and thread counts.
struct ByScoreDesc {
    bool operator()(const Neighbor& a, const Neighbor& b) const {
        if (a.score != b.score) return a.score > b.score;
        return a.target < b.target;
    }
};

struct ByKeyAsc {
    bool operator()(const Neighbor& a, const Neighbor& b) const {
        if (a.score != b.score) return a.score < b.score;
        return a.target < b.target;
    }
};

// nrm candidates keep the raw cosine: exact ties in the normalized score fall
// back to it (a whole column of ties appears whenever |P| = 1), then to the
// index.
struct NrmCandidate {
    Neighbor entry;
    double raw = 0.0;
};

struct ByNrmScoreDesc {
    bool operator()(const NrmCandidate& a, const NrmCandidate& b) const {
        if (a.entry.score != b.entry.score) return a.entry.score > b.entry.score;
        if (a.raw != b.raw) return a.raw > b.raw;
        return a.entry.target < b.entry.target;
    }
};

// Fixed-capacity top-k selection. `Better` is a strict total order, so the
// selected set is independent of offer order.
template <typename T, typename Better>
class TopK {
public:
    explicit TopK(int k) : k_(static_cast<std::size_t>(k)) { heap_.reserve(k_ + 1); }

    void offer(const T& cand) {
        if (heap_.size() < k_) {
            heap_.push_back(cand);
            std::push_heap(heap_.begin(), heap_.end(), better_);
        } else if (better_(cand, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), better_);
            heap_.back() = cand;
            std::push_heap(heap_.begin(), heap_.end(), better_);
        }
    }

    std::vector<T> sorted() && {
        std::sort(heap_.begin(), heap_.end(), better_);
        return std::move(heap_);
    }

    const std::vector<T>& entries() const { return heap_; }

private:
    std::size_t k_;
    Better better_;
    std::vector<T> heap_;  // max-heap under Better: worst kept on top
};

using TopKScore = TopK<Neighbor, ByScoreDesc>;
using TopKKey = TopK<Neighbor, ByKeyAsc>;
using TopKNrm = TopK<NrmCandidate, ByNrmScoreDesc>;

void check_k(int k, Eigen::Index targets) {
    if (k < 1) throw config_error("k must be positive");
    if (static_cast<Eigen::Index>(k) > targets)
        throw config_error("k = " + std::to_string(k) + " exceeds the target count " +
                           std::to_string(targets));
}

MatF normalized_rows(const MatF& M, const char* which) {
    MatF N = M;
    for (Eigen::Index i = 0; i < N.rows(); ++i) {
        double norm = N.row(i).cast<double>().norm();
        if (norm == 0.0)
            throw numeric_error(std::string("cosine_matrix: ") + which + " row " +
                                std::to_string(i) + " is all-zero");
        N.row(i) *= static_cast<float>(1.0 / norm);
    }
    return N;
}

}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::NN: return "nn";
        case Method::NNnrm: return "nn_nrm";
        case Method::GC: return "gc";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "nn") return Method::NN;
    if (name == "nrm" || name == "nn_nrm") return Method::NNnrm;
    if (name == "gc") return Method::GC;
    throw config_error("unknown retrieval method '" + name + "' (expected nn, nrm or gc)");
}

SimilarityMatrix cosine_matrix(const MatF& P, const MatF& T, std::vector<std::string> pivot_ids,
                               std::vector<std::string> target_ids) {
    if (P.cols() != T.cols())
        throw numeric_error("cosine_matrix: dimensionality mismatch (" + std::to_string(P.cols()) +
                            " vs " + std::to_string(T.cols()) + ")");
    if (!pivot_ids.empty() && static_cast<Eigen::Index>(pivot_ids.size()) != P.rows())
        throw numeric_error("cosine_matrix: pivot id count mismatch");
    if (!target_ids.empty() && static_cast<Eigen::Index>(target_ids.size()) != T.rows())
        throw numeric_error("cosine_matrix: target id count mismatch");

    MatF Pn = normalized_rows(P, "pivot");
    MatF Tn = normalized_rows(T, "target");

    SimilarityMatrix sim;
    sim.pivot_ids = std::move(pivot_ids);
    sim.target_ids = std::move(target_ids);
    sim.scores.resize(P.rows(), T.rows());

    // Each pivot-row block is one sequential GEMM, so every entry is computed
    // in a fixed reduction order no matter how many threads run the blocks.
    const Eigen::Index block = 256;
    const Eigen::Index nblocks = (P.rows() + block - 1) / block;
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index b = 0; b < nblocks; ++b) {
        Eigen::Index i0 = b * block;
        Eigen::Index h = std::min(block, P.rows() - i0);
        sim.scores.middleRows(i0, h).noalias() = Pn.middleRows(i0, h) * Tn.transpose();
    }
    return sim;
}

MatI rank_targets(const SimilarityMatrix& sim) {
    const Eigen::Index np = sim.pivots();
    const Eigen::Index nt = sim.targets();
    MatI ranks(np, nt);

#pragma omp parallel
    {
        std::vector<std::int32_t> idx(static_cast<std::size_t>(nt));
#pragma omp for schedule(static)
        for (Eigen::Index i = 0; i < np; ++i) {
            std::iota(idx.begin(), idx.end(), 0);
            const float* row = sim.scores.data() + i * nt;
            std::sort(idx.begin(), idx.end(), [row](std::int32_t a, std::int32_t b) {
                if (row[a] != row[b]) return row[a] > row[b];
                return a < b;
            });
            for (Eigen::Index r = 0; r < nt; ++r) ranks(i, idx[static_cast<std::size_t>(r)]) =
                static_cast<std::int32_t>(r) + 1;
        }
    }
    return ranks;
}

NeighborResult nn_query(const SimilarityMatrix& sim, int k) {
    check_k(k, sim.targets());
    NeighborResult result;
    result.method = Method::NN;
    result.k = k;
    result.lists.resize(static_cast<std::size_t>(sim.pivots()));

    const Eigen::Index nt = sim.targets();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < sim.pivots(); ++i) {
        TopKScore top(k);
        const float* row = sim.scores.data() + i * nt;
        for (Eigen::Index j = 0; j < nt; ++j)
            top.offer({static_cast<std::int32_t>(j), static_cast<double>(row[j])});
        result.lists[static_cast<std::size_t>(i)] = std::move(top).sorted();
    }
    return result;
}

NeighborResult nrm_query(const SimilarityMatrix& sim, int k) {
    check_k(k, sim.targets());
    const Eigen::Index np = sim.pivots();
    const Eigen::Index nt = sim.targets();

    // Column norms over the full pivot set, accumulated in ascending pivot
    // order per column (thread count only partitions columns).
    std::vector<double> col_norm(static_cast<std::size_t>(nt), 0.0);
    const Eigen::Index chunk = 4096;
    const Eigen::Index nchunks = (nt + chunk - 1) / chunk;
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < nchunks; ++c) {
        Eigen::Index j0 = c * chunk;
        Eigen::Index j1 = std::min(nt, j0 + chunk);
        for (Eigen::Index i = 0; i < np; ++i) {
            const float* row = sim.scores.data() + i * nt;
            for (Eigen::Index j = j0; j < j1; ++j) {
                double s = static_cast<double>(row[j]);
                col_norm[static_cast<std::size_t>(j)] += s * s;
            }
        }
    }
    for (Eigen::Index j = 0; j < nt; ++j) {
        if (col_norm[static_cast<std::size_t>(j)] == 0.0)
            throw numeric_error("nrm_query: similarity column " + std::to_string(j) +
                                " is all-zero");
        col_norm[static_cast<std::size_t>(j)] =
            std::sqrt(col_norm[static_cast<std::size_t>(j)]);
    }

    NeighborResult result;
    result.method = Method::NNnrm;
    result.k = k;
    result.lists.resize(static_cast<std::size_t>(np));

#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < np; ++i) {
        TopKNrm top(k);
        const float* row = sim.scores.data() + i * nt;
        for (Eigen::Index j = 0; j < nt; ++j) {
            double raw = static_cast<double>(row[j]);
            top.offer({{static_cast<std::int32_t>(j),
                        raw / col_norm[static_cast<std::size_t>(j)]},
                       raw});
        }
        auto selected = std::move(top).sorted();
        auto& list = result.lists[static_cast<std::size_t>(i)];
        list.reserve(selected.size());
        for (const NrmCandidate& c : selected) list.push_back(c.entry);
    }
    return result;
}

NeighborResult gc_query(const SimilarityMatrix& sim, int k, const GcOptions& opt) {
    check_k(k, sim.targets());
    const Eigen::Index np = sim.pivots();
    const Eigen::Index nt = sim.targets();
    if (np < 1) throw config_error("gc_query needs at least one pivot");

    // Rank_{y,P}(x) needs the full order of each target column. Columns are
    // processed in fixed-width blocks: a block transposes its slice of the
    // score matrix, ranks each column, and keeps a local top-k per pivot.
    // Block results only depend on the block bounds, so the merge is
    // deterministic for any thread count.
    Eigen::Index tile = static_cast<Eigen::Index>(
        opt.rank_tile_bytes / (static_cast<std::size_t>(np) * sizeof(float)));
    tile = std::clamp<Eigen::Index>(tile, 1, nt);
    const Eigen::Index nblocks = (nt + tile - 1) / tile;

    std::vector<std::vector<TopKKey>> block_tops(static_cast<std::size_t>(nblocks));

#pragma omp parallel
    {
        std::vector<float> scratch;
        std::vector<std::int32_t> idx(static_cast<std::size_t>(np));
#pragma omp for schedule(dynamic)
        for (Eigen::Index b = 0; b < nblocks; ++b) {
            const Eigen::Index j0 = b * tile;
            const Eigen::Index w = std::min(tile, nt - j0);
            scratch.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(np), 0.0f);

            // Blocked transpose: scratch[c*np + i] = scores(i, j0+c).
            const Eigen::Index B = 64;
            for (Eigen::Index ib = 0; ib < np; ib += B) {
                Eigen::Index imax = std::min(np, ib + B);
                for (Eigen::Index cb = 0; cb < w; cb += B) {
                    Eigen::Index cmax = std::min(w, cb + B);
                    for (Eigen::Index i = ib; i < imax; ++i) {
                        const float* row = sim.scores.data() + i * nt + j0;
                        for (Eigen::Index c = cb; c < cmax; ++c)
                            scratch[static_cast<std::size_t>(c * np + i)] = row[c];
                    }
                }
            }

            std::vector<TopKKey> tops(static_cast<std::size_t>(np), TopKKey(k));
            for (Eigen::Index c = 0; c < w; ++c) {
                const float* col = scratch.data() + c * np;
                std::iota(idx.begin(), idx.end(), 0);
                std::sort(idx.begin(), idx.end(), [col](std::int32_t a, std::int32_t b) {
                    if (col[a] != col[b]) return col[a] > col[b];
                    return a < b;
                });
                const auto target = static_cast<std::int32_t>(j0 + c);
                for (Eigen::Index r = 0; r < np; ++r) {
                    std::int32_t i = idx[static_cast<std::size_t>(r)];
                    double key = static_cast<double>(r + 1) - static_cast<double>(col[i]);
                    tops[static_cast<std::size_t>(i)].offer({target, key});
                }
            }
            block_tops[static_cast<std::size_t>(b)] = std::move(tops);
        }
    }

    NeighborResult result;
    result.method = Method::GC;
    result.k = k;
    result.lists.resize(static_cast<std::size_t>(np));

#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < np; ++i) {
        TopKKey merged(k);
        for (const auto& tops : block_tops)
            for (const Neighbor& n : tops[static_cast<std::size_t>(i)].entries()) merged.offer(n);
        result.lists[static_cast<std::size_t>(i)] = std::move(merged).sorted();
    }
    return result;
}

NeighborResult head(const NeighborResult& result, std::size_t n_pivots) {
    NeighborResult out;
    out.method = result.method;
    out.k = result.k;
    out.lists.assign(result.lists.begin(),
                     result.lists.begin() +
                         static_cast<std::ptrdiff_t>(std::min(n_pivots, result.lists.size())));
    return out;
}

void write_retrieval_tsv(std::ostream& out, const SimilarityMatrix& sim,
                         const NeighborResult& result) {
    out << "# method=" << method_name(result.method) << " k=" << result.k << '\n';
    char buf[32];
    for (std::size_t i = 0; i < result.lists.size(); ++i) {
        const std::string pivot =
            sim.pivot_ids.empty() ? std::to_string(i) : sim.pivot_ids[i];
        int rank = 1;
        for (const Neighbor& n : result.lists[i]) {
            const std::string& target = sim.target_ids.empty()
                                            ? std::to_string(n.target)
                                            : sim.target_ids[static_cast<std::size_t>(n.target)];
            std::snprintf(buf, sizeof(buf), "%.6f", n.score);
            out << pivot << '\t' << rank << '\t' << target << '\t' << buf << '\n';
            ++rank;
        }
    }
}

}  // namespace zsmap
