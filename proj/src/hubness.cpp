/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "zsmap/hubness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace zsmap {

namespace {

// Average-rank ("fractional") ranking with ties sharing the mean position.
std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[idx[j]] == values[idx[i]]) ++j;
        double mean_rank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
        for (std::size_t t = i; t < j; ++t) ranks[idx[t]] = mean_rank;
        i = j;
    }
    return ranks;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

}  // namespace

HubDistribution hub_distribution(std::span<const std::int64_t> counts) {
    HubDistribution dist;
    if (counts.empty()) return dist;

    double mean = 0.0;
    for (std::int64_t c : counts) {
        ++dist.histogram[c];
        dist.max_nk = std::max(dist.max_nk, c);
        mean += static_cast<double>(c);
    }
    mean /= static_cast<double>(counts.size());

    double m2 = 0.0, m3 = 0.0;
    for (std::int64_t c : counts) {
        double d = static_cast<double>(c) - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(counts.size());
    m3 /= static_cast<double>(counts.size());
    dist.skewness = (dist.histogram.size() < 2 || m2 == 0.0) ? 0.0 : m3 / std::pow(m2, 1.5);
    return dist;
}

HubnessReport hub_scores(const NeighborResult& result, const std::vector<std::string>& target_ids,
                         std::size_t top_n) {
    HubnessReport report;
    report.k = result.k;
    report.method = result.method;
    report.target_ids = target_ids;
    report.counts.assign(target_ids.size(), 0);

    for (std::size_t p = 0; p < result.lists.size(); ++p) {
        const auto& list = result.lists[p];
        if (static_cast<int>(list.size()) != result.k)
            throw numeric_error("hub_scores: pivot " + std::to_string(p) + " has " +
                                std::to_string(list.size()) + " neighbours, expected k = " +
                                std::to_string(result.k));
        for (const Neighbor& n : list) {
            if (n.target < 0 || static_cast<std::size_t>(n.target) >= target_ids.size())
                throw numeric_error("hub_scores: target index " + std::to_string(n.target) +
                                    " is not in the target list");
            ++report.counts[static_cast<std::size_t>(n.target)];
        }
    }

    HubDistribution dist = hub_distribution(std::span<const std::int64_t>(report.counts));
    report.histogram = std::move(dist.histogram);
    report.max_nk = dist.max_nk;
    report.skewness = dist.skewness;

    // Top hubs: N_k descending, ties by ascending target id.
    std::vector<std::size_t> order(target_ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t keep = std::min(top_n, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                      order.end(), [&](std::size_t a, std::size_t b) {
                          if (report.counts[a] != report.counts[b])
                              return report.counts[a] > report.counts[b];
                          return target_ids[a] < target_ids[b];
                      });
    for (std::size_t i = 0; i < keep; ++i)
        report.top_hubs.emplace_back(target_ids[order[i]], report.counts[order[i]]);
    return report;
}

SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw numeric_error("spearman: length mismatch");
    const std::size_t n = xs.size();
    if (n < 3) throw numeric_error("spearman needs at least 3 observations");

    std::vector<double> rx = average_ranks(xs);
    std::vector<double> ry = average_ranks(ys);

    double mean = 0.5 * static_cast<double>(n + 1);  // both rank vectors share it
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = rx[i] - mean;
        double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }

    SpearmanResult result;
    if (sxx == 0.0 || syy == 0.0) return result;  // a constant side: rho 0 by convention
    result.rho = sxy / std::sqrt(sxx * syy);
    result.rho = std::clamp(result.rho, -1.0, 1.0);
    double denom = std::max(1.0 - result.rho * result.rho, 1e-15);
    result.t_stat = result.rho * std::sqrt(static_cast<double>(n - 2) / denom);
    return result;
}

SpearmanResult cosine_to_mean_correlation(const MatF& targets, const MatF& pivots,
                                          std::span<const std::int64_t> counts) {
    if (targets.rows() < 3) throw numeric_error("cosine_to_mean_correlation needs |T| >= 3");
    if (static_cast<std::size_t>(targets.rows()) != counts.size())
        throw numeric_error("cosine_to_mean_correlation: one N_k value per target required");
    if (pivots.rows() < 1 || pivots.cols() != targets.cols())
        throw numeric_error("cosine_to_mean_correlation: bad pivot matrix");

    Eigen::VectorXd mean = pivots.cast<double>().colwise().mean();
    double mean_norm = mean.norm();
    if (mean_norm == 0.0) throw numeric_error("pivot mean vector is zero");

    std::vector<double> cosines(static_cast<std::size_t>(targets.rows()));
    for (Eigen::Index i = 0; i < targets.rows(); ++i) {
        Eigen::VectorXd row = targets.row(i).cast<double>();
        double nrm = row.norm();
        cosines[static_cast<std::size_t>(i)] =
            (nrm == 0.0) ? 0.0 : row.dot(mean) / (nrm * mean_norm);
    }

    std::vector<double> nk(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) nk[i] = static_cast<double>(counts[i]);
    return spearman(cosines, nk);
}

void write_hubness_csv(std::ostream& out, const HubnessReport& report) {
    out << "target,n_k\n";
    for (std::size_t i = 0; i < report.counts.size(); ++i)
        out << csv_field(report.target_ids[i]) << ',' << report.counts[i] << '\n';
}

void write_histogram_csv(std::ostream& out, const HubnessReport& report) {
    out << "value,count\n";
    for (const auto& [value, count] : report.histogram) out << value << ',' << count << '\n';
}

void write_hubness_json(std::ostream& out, const HubnessReport& report,
                        const std::optional<SpearmanResult>& correlation) {
    nlohmann::ordered_json j;
    j["k"] = report.k;
    j["method"] = method_name(report.method);
    j["targets"] = report.counts.size();
    j["sum_nk"] = std::accumulate(report.counts.begin(), report.counts.end(), std::int64_t{0});
    j["max_nk"] = report.max_nk;
    j["skewness"] = report.skewness;
    if (correlation) {
        j["spearman_rho"] = correlation->rho;
        j["spearman_t"] = correlation->t_stat;
    }
    nlohmann::ordered_json hubs = nlohmann::ordered_json::array();
    for (const auto& [id, count] : report.top_hubs) hubs.push_back({{"target", id}, {"n_k", count}});
    j["top_hubs"] = hubs;
    out << j.dump(2) << '\n';
}

}  // namespace zsmap
