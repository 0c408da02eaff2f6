/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#ifndef ZSMAP_EVALUATION_HPP
#define ZSMAP_EVALUATION_HPP

#include "zsmap/embedding.hpp"
#include "zsmap/hubness.hpp"
#include "zsmap/retrieval.hpp"
#include "zsmap/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace zsmap {

using TokenPair = std::pair<std::string, std::string>;

/// Multi-gold dictionary: a source token may carry several acceptable targets
/// ("car" -> {auto, macchina}); a prediction is correct if it hits any.
struct GoldDictionary {
    std::map<std::string, std::set<std::string>> entries;
    std::string direction;

    double average_gold_size() const;
    bool contains(const std::string& source) const { return entries.count(source) > 0; }
};

// TSV lines "source<TAB>target"; repeated sources aggregate, duplicate lines
// deduplicate. Throws parse_error with the line number on malformed input.
GoldDictionary load_dictionary(const std::string& path, std::string direction = {});

// Same file format, kept as an ordered pair list (file order = frequency
// order for training slices). Exact duplicate lines are dropped.
std::vector<TokenPair> load_pairs(const std::string& path);

GoldDictionary gold_from_pairs(const std::vector<TokenPair>& pairs, std::string direction = {});

// 100 x (predictions whose target is in the gold set) / (evaluated sources).
// Every prediction's source must exist in gold.
double accuracy_at_1(const std::vector<TokenPair>& predictions, const GoldDictionary& gold);

/// Half-open frequency-rank interval [lo, hi).
struct RankInterval {
    int lo = 0;
    int hi = 0;
    bool contains(int rank) const { return rank >= lo && rank < hi; }
};

std::vector<RankInterval> default_bins();  // [1,5K) [5K,20K) [20K,50K) [50K,100K) [100K,200K)

struct BinAccuracy {
    RankInterval interval;
    std::optional<double> accuracy;  // empty when the bin holds no test items
    int count = 0;
};

struct BinnedAccuracy {
    std::vector<BinAccuracy> bins;
    std::optional<double> unbinned_accuracy;  // items whose rank falls outside all bins
    int unbinned_count = 0;
};

// Accuracy restricted to each bin's test items; every evaluated source token
// must have a frequency rank.
BinnedAccuracy bin_accuracy(const std::vector<TokenPair>& predictions, const GoldDictionary& gold,
                            const std::map<std::string, int>& freq_rank,
                            const std::vector<RankInterval>& bins);

struct SyntheticData {
    EmbeddingSpace source;
    EmbeddingSpace target;
    std::vector<TokenPair> train_pairs;
    std::vector<TokenPair> test_pairs;
};

// Desk-scale stand-in for a paired bilingual setup: targets are isotropic
// Gaussian draws, paired sources are a random linear transform of their
// targets plus Gaussian noise of scale noise_sigma, and unpaired distractor
// targets fill out the search space. Deterministic per seed.
SyntheticData generate_synthetic_pair_spaces(std::uint64_t seed, int d, int n_train, int n_test,
                                             int n_targets, double noise_sigma);

enum class LambdaMode { None, Gcv, Fixed };

struct ExperimentConfig {
    std::string source_path;
    std::string target_path;
    std::string train_dict_path;
    std::string test_dict_path;
    int aux_pivots = 0;
    std::vector<int> train_sizes;
    LambdaMode lambda_mode = LambdaMode::None;
    double fixed_lambda = 0.0;
    std::vector<Method> methods = {Method::NN, Method::NNnrm, Method::GC};
    int hubness_k = 20;
    std::vector<RankInterval> bins = default_bins();
    std::uint64_t seed = 0;
};

// Flat "key = value" text file; '#' starts a comment. Unknown keys and invalid
// values throw config_error.
ExperimentConfig load_experiment_config(const std::string& path);

struct HubnessSummary {
    int k = 0;
    std::int64_t sum = 0;
    std::int64_t max_nk = 0;
    double skewness = 0.0;
    double rho = 0.0;     // Spearman N_k vs cosine-to-pivot-mean
    double rho_t = 0.0;
};

struct MethodResult {
    Method method = Method::NN;
    double accuracy = 0.0;
    BinnedAccuracy bins;
    HubnessSummary hubness;  // over the labeled test pivots
    // For pivot-set-dependent methods run with auxiliary pivots, the same
    // query using solely the test pivots; nn is pivot-independent and skips it.
    std::optional<double> accuracy_test_pivots_only;
};

struct RunResult {
    int train_size = 0;            // requested slice
    int train_pairs_used = 0;      // after dropping pairs with missing vectors
    int dropped_train_pairs = 0;
    double lambda = 0.0;
    std::vector<MethodResult> methods;
    // Hubness of the original target-space vectors of the test pairs, the
    // baseline the mapped-pivot numbers are compared against.
    std::optional<HubnessSummary> hubness_original;
    // Wall-clock seconds; emitted to a separate sidecar so the report proper
    // stays byte-identical across runs.
    double fit_seconds = 0.0;
    double query_seconds = 0.0;
};

struct ExperimentReport {
    std::string lambda_mode;
    int n_test = 0;
    int aux_pivots = 0;
    std::uint64_t seed = 0;
    double gold_avg_targets = 0.0;  // mean gold-set size of the test dictionary
    std::vector<std::string> methods;
    std::vector<RunResult> runs;
};

// Full protocol: per train size, fit the map, map test plus auxiliary pivots,
// query the entire target space with each configured method, and score
// overall, per-bin, and hubness diagnostics. Deterministic per seed.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const EmbeddingSpace& source,
                                const EmbeddingSpace& target,
                                const std::vector<TokenPair>& train_pairs,
                                const std::vector<TokenPair>& test_pairs);

// File-backed variant: loads spaces and dictionaries from the config paths.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Canonical JSON report (no timings; byte-identical for a fixed config+seed).
void write_report_json(std::ostream& out, const ExperimentReport& report);
// Accuracy table mirroring the per-method layout: rows = train sizes.
void write_accuracy_csv(std::ostream& out, const ExperimentReport& report);
// Volatile wall-clock sidecar.
void write_timings_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace zsmap

#endif  // ZSMAP_EVALUATION_HPP
