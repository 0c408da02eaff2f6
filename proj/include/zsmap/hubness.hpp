/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#ifndef ZSMAP_HUBNESS_HPP
#define ZSMAP_HUBNESS_HPP

#include "zsmap/retrieval.hpp"
#include "zsmap/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace zsmap {

/// Per-target N_k scores: how often each target appears in the pivots'
/// k-nearest-neighbour lists. Sum over targets is always k * |P|.
struct HubnessReport {
    int k = 0;
    Method method = Method::NN;
    std::vector<std::string> target_ids;
    std::vector<std::int64_t> counts;  // N_k, aligned with target_ids
    std::map<std::int64_t, std::int64_t> histogram;
    std::int64_t max_nk = 0;
    double skewness = 0.0;  // population third standardized moment
    std::vector<std::pair<std::string, std::int64_t>> top_hubs;  // N_k desc, id asc
};

struct HubDistribution {
    std::map<std::int64_t, std::int64_t> histogram;
    std::int64_t max_nk = 0;
    double skewness = 0.0;
};

// Counts, per target, the pivots whose k-list contains it; targets never
// retrieved get N_k = 0 and land in the histogram's zero bucket. Throws
// numeric_error if the result references a target outside target_ids.
HubnessReport hub_scores(const NeighborResult& result,
                         const std::vector<std::string>& target_ids,
                         std::size_t top_n = 10);

// Histogram over integer N_k values plus max and sample skewness
// g1 = m3 / m2^(3/2); fewer than 2 distinct values yields skewness 0.
HubDistribution hub_distribution(std::span<const std::int64_t> counts);
inline HubDistribution hub_distribution(const HubnessReport& report) {
    return hub_distribution(std::span<const std::int64_t>(report.counts));
}

struct SpearmanResult {
    double rho = 0.0;
    double t_stat = 0.0;  // large-sample t approximation, not an exact p-value
};

// Spearman rank correlation between each target's cosine to the pivot mean
// vector and its N_k score, with average ranks for ties. A constant input on
// either side yields rho = 0 by convention. Throws numeric_error if the pivot
// mean vector is zero.
SpearmanResult cosine_to_mean_correlation(const MatF& targets, const MatF& pivots,
                                          std::span<const std::int64_t> counts);

// Spearman on two plain value vectors; the cosine-to-mean entry point above
// is a thin wrapper over this.
SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys);

// "target,n_k" rows in target order.
void write_hubness_csv(std::ostream& out, const HubnessReport& report);
// "value,count" rows, ascending value; suitable for external plotting.
void write_histogram_csv(std::ostream& out, const HubnessReport& report);
// JSON sidecar with k, method, max, skewness and optionally the correlation.
void write_hubness_json(std::ostream& out, const HubnessReport& report,
                        const std::optional<SpearmanResult>& correlation = std::nullopt);

}  // namespace zsmap

#endif  // ZSMAP_HUBNESS_HPP
