/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "zsmap/hubness.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

using namespace zsmap;
using testutil::matf;

namespace {

SimilarityMatrix sim_of(MatF scores) {
    SimilarityMatrix sim;
    sim.scores = std::move(scores);
    return sim;
}

std::vector<std::string> ids(int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back("t" + std::to_string(i));
    return out;
}

std::int64_t count_sum(const HubnessReport& report) {
    return std::accumulate(report.counts.begin(), report.counts.end(), std::int64_t{0});
}

}  // namespace

TEST_CASE("hub_scores on the worked 2x3 nn instance") {
    SimilarityMatrix sim = sim_of(matf({{0.9f, 0.8f, 0.1f}, {0.85f, 0.2f, 0.7f}}));
    HubnessReport report = hub_scores(nn_query(sim, 1), ids(3));
    CHECK(report.counts == std::vector<std::int64_t>{2, 0, 0});
    CHECK(report.max_nk == 2);
    CHECK(count_sum(report) == 2);  // k * |P|
    CHECK(report.histogram.at(0) == 2);
    CHECK(report.histogram.at(2) == 1);
}

TEST_CASE("k = |T| gives every target N_k = |P|") {
    SimilarityMatrix sim = sim_of(testutil::random_matf(6, 9, 2001));
    HubnessReport report = hub_scores(nn_query(sim, 9), ids(9));
    for (std::int64_t c : report.counts) CHECK(c == 6);
}

TEST_CASE("single pivot, k = 1 yields one count of one") {
    SimilarityMatrix sim = sim_of(testutil::random_matf(1, 7, 2011));
    HubnessReport report = hub_scores(nn_query(sim, 1), ids(7));
    CHECK(report.max_nk == 1);
    CHECK(count_sum(report) == 1);
}

TEST_CASE("conservation: counts always sum to k * |P|") {
    for (std::uint32_t seed : {1u, 2u, 3u, 4u}) {
        SimilarityMatrix sim = sim_of(testutil::random_matf(11, 31, 2020 + seed));
        for (int k : {1, 4, 17}) {
            HubnessReport nn = hub_scores(nn_query(sim, k), ids(31));
            CHECK(count_sum(nn) == std::int64_t{k} * 11);
            HubnessReport gc = hub_scores(gc_query(sim, k), ids(31));
            CHECK(count_sum(gc) == std::int64_t{k} * 11);
        }
    }
}

TEST_CASE("N_k grows monotonically in k for nn") {
    SimilarityMatrix sim = sim_of(testutil::random_matf(9, 23, 2031));
    HubnessReport small = hub_scores(nn_query(sim, 5), ids(23));
    HubnessReport large = hub_scores(nn_query(sim, 6), ids(23));
    for (std::size_t i = 0; i < small.counts.size(); ++i)
        CHECK(large.counts[i] >= small.counts[i]);
}

TEST_CASE("hub_scores rejects inconsistent input") {
    SimilarityMatrix sim = sim_of(testutil::random_matf(2, 5, 2041));
    NeighborResult result = nn_query(sim, 2);
    SUBCASE("target index outside the id list") {
        CHECK_THROWS_AS(hub_scores(result, ids(1)), numeric_error);
    }
    SUBCASE("ragged lists") {
        result.lists[0].pop_back();
        CHECK_THROWS_AS(hub_scores(result, ids(5)), numeric_error);
    }
}

TEST_CASE("hub_distribution") {
    SUBCASE("worked histogram") {
        HubDistribution d = hub_distribution(std::vector<std::int64_t>{2, 0, 0});
        CHECK(d.histogram == std::map<std::int64_t, std::int64_t>{{0, 2}, {2, 1}});
        CHECK(d.max_nk == 2);
        CHECK(d.skewness > 0.0);
    }
    SUBCASE("uniform counts have zero skewness") {
        HubDistribution d = hub_distribution(std::vector<std::int64_t>{3, 3, 3, 3});
        CHECK(d.skewness == 0.0);
    }
    SUBCASE("a single heavy hub forces right skew") {
        HubDistribution d = hub_distribution(std::vector<std::int64_t>{0, 0, 0, 9});
        CHECK(d.skewness > 0.0);
    }
}

TEST_CASE("top hubs are ordered by count then id") {
    SimilarityMatrix sim = sim_of(matf({{0.9f, 0.8f, 0.1f}, {0.85f, 0.2f, 0.7f}}));
    HubnessReport report = hub_scores(nn_query(sim, 1), {"tb", "ta", "tc"}, 3);
    REQUIRE(report.top_hubs.size() == 3);
    CHECK(report.top_hubs[0] == std::pair<std::string, std::int64_t>{"tb", 2});
    CHECK(report.top_hubs[1].first == "ta");  // zero-count tie broken by id
    CHECK(report.top_hubs[2].first == "tc");
}

TEST_CASE("spearman analytic fixtures") {
    SUBCASE("monotone increasing relation gives rho 1") {
        std::vector<double> xs{0.1, 0.5, 0.2, 0.9, 0.7};
        std::vector<double> ys{1.0, 3.0, 2.0, 5.0, 4.0};
        SpearmanResult r = spearman(xs, ys);
        CHECK(r.rho == doctest::Approx(1.0));
    }
    SUBCASE("monotone decreasing relation gives rho -1") {
        std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
        std::vector<double> ys{9.0, 7.0, 5.0, 3.0};
        CHECK(spearman(xs, ys).rho == doctest::Approx(-1.0));
    }
    SUBCASE("a constant side gives rho 0 by convention") {
        std::vector<double> xs{1.0, 2.0, 3.0};
        std::vector<double> ys{5.0, 5.0, 5.0};
        SpearmanResult r = spearman(xs, ys);
        CHECK(r.rho == 0.0);
        CHECK(r.t_stat == 0.0);
    }
    SUBCASE("tied values use average ranks") {
        // xs ranks: {1.5, 1.5, 3}; ys perfectly aligned with those ranks.
        std::vector<double> xs{2.0, 2.0, 7.0};
        std::vector<double> ys{1.0, 1.0, 2.0};
        CHECK(spearman(xs, ys).rho == doctest::Approx(1.0));
    }
}

TEST_CASE("spearman of independent data stays near zero") {
    // |rho| < 0.1 at n = 1000 in at least 95 of 100 seeded trials.
    std::vector<double> base(1000);
    std::iota(base.begin(), base.end(), 0.0);
    int within = 0;
    for (std::uint32_t seed = 0; seed < 100; ++seed) {
        std::vector<double> xs = base, ys = base;
        std::mt19937 rng(3000 + seed);
        std::shuffle(ys.begin(), ys.end(), rng);
        if (std::abs(spearman(xs, ys).rho) < 0.1) ++within;
    }
    CHECK(within >= 95);
}

TEST_CASE("cosine_to_mean_correlation") {
    SUBCASE("counts that follow cosine-to-mean give rho 1") {
        // Targets fan out from the x axis; pivots average to the x axis.
        MatF targets(5, 2);
        std::vector<std::int64_t> counts(5);
        for (int i = 0; i < 5; ++i) {
            double angle = 0.25 * i;
            targets(i, 0) = static_cast<float>(std::cos(angle));
            targets(i, 1) = static_cast<float>(std::sin(angle));
            counts[static_cast<std::size_t>(i)] = 10 - i;  // decreasing with angle
        }
        MatF pivots = matf({{2.0f, 0.0f}, {1.0f, 0.0f}});
        SpearmanResult r = cosine_to_mean_correlation(targets, pivots,
                                                      std::span<const std::int64_t>(counts));
        CHECK(r.rho == doctest::Approx(1.0));
        CHECK(r.t_stat > 10.0);
    }
    SUBCASE("constant counts give rho 0") {
        MatF targets = testutil::random_matf(10, 4, 2051);
        MatF pivots = testutil::random_matf(3, 4, 2052);
        std::vector<std::int64_t> counts(10, 7);
        CHECK(cosine_to_mean_correlation(targets, pivots,
                                         std::span<const std::int64_t>(counts))
                  .rho == 0.0);
    }
    SUBCASE("zero mean vector is an error") {
        MatF pivots = matf({{1.0f, 0.0f}, {-1.0f, 0.0f}});
        MatF targets = testutil::random_matf(4, 2, 2053);
        std::vector<std::int64_t> counts(4, 1);
        CHECK_THROWS_AS(
            cosine_to_mean_correlation(targets, pivots, std::span<const std::int64_t>(counts)),
            numeric_error);
    }
    SUBCASE("fewer than 3 targets is an error") {
        MatF targets = testutil::random_matf(2, 3, 2054);
        MatF pivots = testutil::random_matf(2, 3, 2055);
        std::vector<std::int64_t> counts(2, 1);
        CHECK_THROWS_AS(
            cosine_to_mean_correlation(targets, pivots, std::span<const std::int64_t>(counts)),
            numeric_error);
    }
}

TEST_CASE("hubness emitters") {
    SimilarityMatrix sim = sim_of(matf({{0.9f, 0.8f, 0.1f}, {0.85f, 0.2f, 0.7f}}));
    HubnessReport report = hub_scores(nn_query(sim, 1), {"t1", "t2", "t3"});

    std::stringstream csv;
    write_hubness_csv(csv, report);
    CHECK(csv.str() == "target,n_k\nt1,2\nt2,0\nt3,0\n");

    std::stringstream hist;
    write_histogram_csv(hist, report);
    CHECK(hist.str() == "value,count\n0,2\n2,1\n");

    std::stringstream json;
    write_hubness_json(json, report, SpearmanResult{0.5, 2.0});
    CHECK(json.str().find("\"max_nk\": 2") != std::string::npos);
    CHECK(json.str().find("\"spearman_rho\": 0.5") != std::string::npos);

    SUBCASE("csv quotes ids containing commas") {
        HubnessReport odd = hub_scores(nn_query(sim, 1), {"a,b", "t2", "t3"});
        std::stringstream out;
        write_hubness_csv(out, odd);
        CHECK(out.str().find("\"a,b\",2") != std::string::npos);
    }
}
