/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "zsmap/evaluation.hpp"

#include "zsmap/linear_map.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

namespace zsmap {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(trim(item));
    return parts;
}

}  // namespace

double GoldDictionary::average_gold_size() const {
    if (entries.empty()) return 0.0;
    std::size_t total = 0;
    for (const auto& [src, golds] : entries) total += golds.size();
    return static_cast<double>(total) / static_cast<double>(entries.size());
}

std::vector<TokenPair> load_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open dictionary file '" + path + "'");

    std::vector<TokenPair> pairs;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw parse_error(path + ":" + std::to_string(line_no) +
                              ": expected exactly one tab separating source and target");
        std::string source = line.substr(0, tab);
        std::string target = line.substr(tab + 1);
        if (source.empty() || target.empty())
            throw parse_error(path + ":" + std::to_string(line_no) + ": empty token");
        if (seen.insert(source + '\t' + target).second) pairs.emplace_back(source, target);
    }
    return pairs;
}

GoldDictionary gold_from_pairs(const std::vector<TokenPair>& pairs, std::string direction) {
    GoldDictionary gold;
    gold.direction = std::move(direction);
    for (const auto& [source, target] : pairs) gold.entries[source].insert(target);
    return gold;
}

GoldDictionary load_dictionary(const std::string& path, std::string direction) {
    return gold_from_pairs(load_pairs(path), std::move(direction));
}

double accuracy_at_1(const std::vector<TokenPair>& predictions, const GoldDictionary& gold) {
    if (predictions.empty()) throw numeric_error("accuracy_at_1: no predictions to evaluate");
    long correct = 0;
    for (const auto& [source, predicted] : predictions) {
        auto it = gold.entries.find(source);
        if (it == gold.entries.end())
            throw numeric_error("accuracy_at_1: prediction for '" + source +
                                "' which is absent from the gold dictionary");
        if (it->second.count(predicted)) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(predictions.size());
}

std::vector<RankInterval> default_bins() {
    return {{1, 5000}, {5000, 20000}, {20000, 50000}, {50000, 100000}, {100000, 200000}};
}

BinnedAccuracy bin_accuracy(const std::vector<TokenPair>& predictions, const GoldDictionary& gold,
                            const std::map<std::string, int>& freq_rank,
                            const std::vector<RankInterval>& bins) {
    BinnedAccuracy out;
    std::vector<long> correct(bins.size(), 0), total(bins.size(), 0);
    long unbinned_correct = 0;

    for (const auto& [source, predicted] : predictions) {
        auto gold_it = gold.entries.find(source);
        if (gold_it == gold.entries.end())
            throw numeric_error("bin_accuracy: prediction for '" + source +
                                "' which is absent from the gold dictionary");
        auto rank_it = freq_rank.find(source);
        if (rank_it == freq_rank.end())
            throw numeric_error("bin_accuracy: no frequency rank for '" + source + "'");
        bool is_correct = gold_it->second.count(predicted) > 0;

        bool binned = false;
        for (std::size_t b = 0; b < bins.size(); ++b) {
            if (bins[b].contains(rank_it->second)) {
                ++total[b];
                if (is_correct) ++correct[b];
                binned = true;
                break;
            }
        }
        if (!binned) {
            ++out.unbinned_count;
            if (is_correct) ++unbinned_correct;
        }
    }

    for (std::size_t b = 0; b < bins.size(); ++b) {
        BinAccuracy bin;
        bin.interval = bins[b];
        bin.count = static_cast<int>(total[b]);
        if (total[b] > 0)
            bin.accuracy = 100.0 * static_cast<double>(correct[b]) / static_cast<double>(total[b]);
        out.bins.push_back(bin);
    }
    if (out.unbinned_count > 0)
        out.unbinned_accuracy =
            100.0 * static_cast<double>(unbinned_correct) / static_cast<double>(out.unbinned_count);
    return out;
}

SyntheticData generate_synthetic_pair_spaces(std::uint64_t seed, int d, int n_train, int n_test,
                                             int n_targets, double noise_sigma) {
    if (d < 2) throw config_error("synthetic spaces need d >= 2");
    if (n_train < 1 || n_test < 1 || n_targets < 1)
        throw config_error("synthetic sizes must be positive");
    if (n_train + n_test > n_targets)
        throw config_error("n_train + n_test must not exceed n_targets");
    if (noise_sigma < 0.0) throw config_error("noise_sigma must be non-negative");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    MatF targets(n_targets, d);
    for (int i = 0; i < n_targets; ++i)
        for (int j = 0; j < d; ++j) targets(i, j) = static_cast<float>(gauss(rng));

    // Random transform scaled so paired source rows match the target scale;
    // noise_sigma = 1 then means noise on the order of the signal.
    MatD transform(d, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) transform(a, b) = gauss(rng) * scale;

    // Every target gets a source-side image; only the first n_train + n_test
    // become dictionary pairs. The rest are unlabeled source vectors, the pool
    // auxiliary pivots are sampled from.
    const int n_paired = n_train + n_test;
    MatF source(n_targets, d);
    for (int i = 0; i < n_targets; ++i) {
        Eigen::RowVectorXd mapped = targets.row(i).cast<double>() * transform;
        for (int j = 0; j < d; ++j)
            source(i, j) = static_cast<float>(mapped(j) + noise_sigma * gauss(rng));
    }

    std::vector<std::string> source_vocab(static_cast<std::size_t>(n_targets));
    std::vector<std::string> target_vocab(static_cast<std::size_t>(n_targets));
    for (int i = 0; i < n_targets; ++i) source_vocab[static_cast<std::size_t>(i)] = "s" + std::to_string(i);
    for (int i = 0; i < n_targets; ++i) target_vocab[static_cast<std::size_t>(i)] = "t" + std::to_string(i);

    SyntheticData data;
    data.source = EmbeddingSpace(std::move(source_vocab), std::move(source));
    data.target = EmbeddingSpace(std::move(target_vocab), std::move(targets));
    for (int i = 0; i < n_train; ++i)
        data.train_pairs.emplace_back("s" + std::to_string(i), "t" + std::to_string(i));
    for (int i = n_train; i < n_paired; ++i)
        data.test_pairs.emplace_back("s" + std::to_string(i), "t" + std::to_string(i));
    return data;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file '" + path + "'");

    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.empty())
            throw config_error(path + ":" + std::to_string(line_no) + ": empty value for '" + key +
                               "'");

        try {
            if (key == "source_embeddings") {
                cfg.source_path = value;
            } else if (key == "target_embeddings") {
                cfg.target_path = value;
            } else if (key == "train_dict") {
                cfg.train_dict_path = value;
            } else if (key == "test_dict") {
                cfg.test_dict_path = value;
            } else if (key == "aux_pivots") {
                cfg.aux_pivots = std::stoi(value);
                if (cfg.aux_pivots < 0) throw config_error("aux_pivots must be >= 0");
            } else if (key == "train_sizes") {
                cfg.train_sizes.clear();
                for (const auto& part : split_on(value, ','))
                    cfg.train_sizes.push_back(std::stoi(part));
            } else if (key == "lambda") {
                if (value == "none") {
                    cfg.lambda_mode = LambdaMode::None;
                } else if (value == "gcv") {
                    cfg.lambda_mode = LambdaMode::Gcv;
                } else {
                    cfg.lambda_mode = LambdaMode::Fixed;
                    cfg.fixed_lambda = std::stod(value);
                    if (cfg.fixed_lambda < 0.0) throw config_error("lambda must be >= 0");
                }
            } else if (key == "methods") {
                cfg.methods.clear();
                for (const auto& part : split_on(value, ','))
                    cfg.methods.push_back(method_from_name(part));
            } else if (key == "hubness_k") {
                cfg.hubness_k = std::stoi(value);
                if (cfg.hubness_k < 1) throw config_error("hubness_k must be positive");
            } else if (key == "bins") {
                cfg.bins.clear();
                for (const auto& part : split_on(value, ',')) {
                    auto colon = part.find(':');
                    if (colon == std::string::npos)
                        throw config_error("bin '" + part + "' must be 'lo:hi'");
                    RankInterval iv{std::stoi(part.substr(0, colon)),
                                    std::stoi(part.substr(colon + 1))};
                    if (iv.lo < 1 || iv.hi <= iv.lo)
                        throw config_error("bin '" + part + "' must satisfy 1 <= lo < hi");
                    cfg.bins.push_back(iv);
                }
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else {
                throw config_error("unknown key '" + key + "'");
            }
        } catch (const config_error&) {
            throw;
        } catch (const std::exception&) {
            throw config_error(path + ":" + std::to_string(line_no) + ": bad value '" + value +
                               "' for key '" + key + "'");
        }
    }

    if (cfg.source_path.empty() || cfg.target_path.empty() || cfg.train_dict_path.empty() ||
        cfg.test_dict_path.empty())
        throw config_error(path + ": source_embeddings, target_embeddings, train_dict and "
                           "test_dict are all required");
    if (cfg.train_sizes.empty())
        throw config_error(path + ": train_sizes is required");
    return cfg;
}

namespace {

const char* lambda_mode_name(LambdaMode mode) {
    switch (mode) {
        case LambdaMode::None: return "none";
        case LambdaMode::Gcv: return "gcv";
        case LambdaMode::Fixed: return "fixed";
    }
    return "?";
}

HubnessSummary summarize_hubness(const HubnessReport& report, const MatF& targets,
                                 const MatF& pivots) {
    HubnessSummary s;
    s.k = report.k;
    s.sum = std::accumulate(report.counts.begin(), report.counts.end(), std::int64_t{0});
    s.max_nk = report.max_nk;
    s.skewness = report.skewness;
    SpearmanResult rho =
        cosine_to_mean_correlation(targets, pivots, std::span<const std::int64_t>(report.counts));
    s.rho = rho.rho;
    s.rho_t = rho.t_stat;
    return s;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, const EmbeddingSpace& source,
                                const EmbeddingSpace& target,
                                const std::vector<TokenPair>& train_pairs,
                                const std::vector<TokenPair>& test_pairs) {
    if (test_pairs.empty()) throw numeric_error("run_experiment: empty test set");
    if (train_pairs.empty()) throw numeric_error("run_experiment: empty training set");
    if (cfg.train_sizes.empty()) throw config_error("run_experiment: no train sizes configured");
    if (cfg.methods.empty()) throw config_error("run_experiment: no retrieval methods configured");
    if (cfg.hubness_k < 1 || static_cast<Eigen::Index>(cfg.hubness_k) > target.size())
        throw config_error("run_experiment: hubness_k must lie in [1, |targets|]");

    // Train/test sources must be disjoint.
    std::unordered_set<std::string> test_sources;
    for (const auto& [s, t] : test_pairs) test_sources.insert(s);
    for (const auto& [s, t] : train_pairs)
        if (test_sources.count(s))
            throw config_error("run_experiment: train source '" + s + "' overlaps the test set");

    // Unique test sources in file order; every one must have a source vector.
    std::vector<std::string> test_order;
    std::map<std::string, std::string> first_gold;  // source -> first gold in file order
    {
        std::unordered_set<std::string> seen;
        for (const auto& [s, t] : test_pairs) {
            if (seen.insert(s).second) test_order.push_back(s);
            first_gold.emplace(s, t);  // keeps the first occurrence
        }
    }
    SubsetResult test_rows = subset(source, test_order);
    if (!test_rows.missing.empty())
        throw numeric_error("run_experiment: test source '" + test_rows.missing.front() +
                            "' has no embedding (test pairs must all resolve)");
    const auto n_test = static_cast<Eigen::Index>(test_order.size());
    GoldDictionary gold = gold_from_pairs(test_pairs);

    // Auxiliary pivots: seeded sample from the source vocabulary, excluding
    // train and test tokens.
    std::vector<std::string> aux_tokens;
    if (cfg.aux_pivots > 0) {
        std::unordered_set<std::string> excluded(test_sources);
        for (const auto& [s, t] : train_pairs) excluded.insert(s);
        std::vector<std::string> candidates;
        for (const auto& token : source.vocab())
            if (!excluded.count(token)) candidates.push_back(token);
        if (static_cast<int>(candidates.size()) < cfg.aux_pivots)
            throw config_error("run_experiment: only " + std::to_string(candidates.size()) +
                               " source tokens available for " + std::to_string(cfg.aux_pivots) +
                               " auxiliary pivots");
        std::mt19937_64 rng(detail::mix_seed(cfg.seed, 0xA0Bu));
        std::sample(candidates.begin(), candidates.end(), std::back_inserter(aux_tokens),
                    cfg.aux_pivots, rng);
    }
    SubsetResult aux_rows = subset(source, aux_tokens);

    MatF pivots_src(n_test + aux_rows.rows.rows(), source.dim());
    pivots_src.topRows(n_test) = test_rows.rows;
    if (aux_rows.rows.rows() > 0) pivots_src.bottomRows(aux_rows.rows.rows()) = aux_rows.rows;
    std::vector<std::string> pivot_ids = test_order;
    pivot_ids.insert(pivot_ids.end(), aux_tokens.begin(), aux_tokens.end());

    std::map<std::string, int> test_freq_rank;
    for (const auto& token : test_order)
        test_freq_rank[token] = *source.freq_rank_of(token);

    // Hubness baseline: the original target-space vectors of the test pairs
    // (each source's first-listed gold; instances whose gold lacks a vector
    // are skipped). Independent of any fitted map.
    std::optional<HubnessSummary> original_summary;
    {
        std::vector<std::string> original_tokens;
        for (const auto& s : test_order) {
            const std::string& g = first_gold.at(s);
            if (target.find(g)) original_tokens.push_back(g);
        }
        if (static_cast<int>(original_tokens.size()) >= 1) {
            SubsetResult orig = subset(target, original_tokens);
            SimilarityMatrix sim = cosine_matrix(orig.rows, target.matrix());
            NeighborResult nn = nn_query(sim, cfg.hubness_k);
            HubnessReport report = hub_scores(nn, target.vocab());
            original_summary = summarize_hubness(report, target.matrix(), orig.rows);
        }
    }

    ExperimentReport report;
    report.lambda_mode = lambda_mode_name(cfg.lambda_mode);
    report.n_test = static_cast<int>(n_test);
    report.aux_pivots = static_cast<int>(aux_tokens.size());
    report.seed = cfg.seed;
    report.gold_avg_targets = gold.average_gold_size();
    for (Method m : cfg.methods) report.methods.emplace_back(method_name(m));

    for (int requested : cfg.train_sizes) {
        if (requested < 1) throw config_error("run_experiment: train size must be positive");
        RunResult run;
        run.train_size = requested;
        run.hubness_original = original_summary;

        auto fit_start = Clock::now();

        // Slice the ordered pair list, then drop pairs lacking embeddings.
        std::size_t slice = std::min<std::size_t>(static_cast<std::size_t>(requested),
                                                  train_pairs.size());
        std::vector<Eigen::Index> x_rows, y_rows;
        for (std::size_t i = 0; i < slice; ++i) {
            auto sx = source.find(train_pairs[i].first);
            auto ty = target.find(train_pairs[i].second);
            if (sx && ty) {
                x_rows.push_back(*sx);
                y_rows.push_back(*ty);
            } else {
                ++run.dropped_train_pairs;
                std::cerr << "[zsmap] warning: dropping train pair '" << train_pairs[i].first
                          << "' -> '" << train_pairs[i].second << "' (missing embedding)\n";
            }
        }
        run.train_pairs_used = static_cast<int>(x_rows.size());
        if (x_rows.empty())
            throw numeric_error("run_experiment: no usable train pairs at size " +
                                std::to_string(requested));

        MatD X(static_cast<Eigen::Index>(x_rows.size()), source.dim());
        MatD Y(static_cast<Eigen::Index>(y_rows.size()), target.dim());
        for (std::size_t i = 0; i < x_rows.size(); ++i) {
            X.row(static_cast<Eigen::Index>(i)) = source.matrix().row(x_rows[i]).cast<double>();
            Y.row(static_cast<Eigen::Index>(i)) = target.matrix().row(y_rows[i]).cast<double>();
        }

        double lambda = 0.0;
        if (cfg.lambda_mode == LambdaMode::Fixed) lambda = cfg.fixed_lambda;
        else if (cfg.lambda_mode == LambdaMode::Gcv) lambda = select_lambda_gcv(X, Y).best_lambda;
        LinearMap map = fit_ridge(X, Y, lambda);
        run.lambda = lambda;
        run.fit_seconds = seconds_since(fit_start);

        auto query_start = Clock::now();
        MatF mapped = apply_map(map, pivots_src);
        SimilarityMatrix sim = cosine_matrix(mapped, target.matrix(), pivot_ids, target.vocab());
        MatF mapped_test = mapped.topRows(n_test);

        // The same scores restricted to the labeled pivots, for the
        // test-pivots-only variant of the pivot-set-dependent methods.
        SimilarityMatrix sim_test;
        if (!aux_tokens.empty()) {
            sim_test.scores = sim.scores.topRows(n_test);
            sim_test.pivot_ids = test_order;
            sim_test.target_ids = target.vocab();
        }

        auto top1_predictions = [&](const NeighborResult& result) {
            std::vector<TokenPair> predictions;
            predictions.reserve(static_cast<std::size_t>(n_test));
            for (Eigen::Index i = 0; i < n_test; ++i)
                predictions.emplace_back(
                    test_order[static_cast<std::size_t>(i)],
                    target.token(result.lists[static_cast<std::size_t>(i)].front().target));
            return predictions;
        };

        for (Method m : cfg.methods) {
            NeighborResult result;
            switch (m) {
                case Method::NN: result = nn_query(sim, cfg.hubness_k); break;
                case Method::NNnrm: result = nrm_query(sim, cfg.hubness_k); break;
                case Method::GC: result = gc_query(sim, cfg.hubness_k); break;
            }

            std::vector<TokenPair> predictions = top1_predictions(result);

            MethodResult mr;
            mr.method = m;
            mr.accuracy = accuracy_at_1(predictions, gold);
            mr.bins = bin_accuracy(predictions, gold, test_freq_rank, cfg.bins);
            HubnessReport hub =
                hub_scores(head(result, static_cast<std::size_t>(n_test)), target.vocab());
            mr.hubness = summarize_hubness(hub, target.matrix(), mapped_test);

            if (!aux_tokens.empty() && m != Method::NN) {
                NeighborResult solo = m == Method::NNnrm ? nrm_query(sim_test, cfg.hubness_k)
                                                         : gc_query(sim_test, cfg.hubness_k);
                mr.accuracy_test_pivots_only = accuracy_at_1(top1_predictions(solo), gold);
            }
            run.methods.push_back(std::move(mr));
        }
        run.query_seconds = seconds_since(query_start);
        report.runs.push_back(std::move(run));
    }
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    EmbeddingSpace source = load_embeddings(cfg.source_path);
    EmbeddingSpace target = load_embeddings(cfg.target_path);
    std::vector<TokenPair> train_pairs = load_pairs(cfg.train_dict_path);
    std::vector<TokenPair> test_pairs = load_pairs(cfg.test_dict_path);
    return run_experiment(cfg, source, target, train_pairs, test_pairs);
}

namespace {

nlohmann::ordered_json hubness_json(const HubnessSummary& s) {
    return nlohmann::ordered_json{{"k", s.k},         {"sum_nk", s.sum},
                                  {"max_nk", s.max_nk}, {"skewness", s.skewness},
                                  {"rho", s.rho},     {"rho_t", s.rho_t}};
}

}  // namespace

void write_report_json(std::ostream& out, const ExperimentReport& report) {
    nlohmann::ordered_json j;
    j["lambda_mode"] = report.lambda_mode;
    j["seed"] = report.seed;
    j["n_test"] = report.n_test;
    j["aux_pivots"] = report.aux_pivots;
    j["gold_avg_targets"] = report.gold_avg_targets;
    j["methods"] = report.methods;

    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const RunResult& run : report.runs) {
        nlohmann::ordered_json rj;
        rj["train_size"] = run.train_size;
        rj["train_pairs_used"] = run.train_pairs_used;
        rj["dropped_train_pairs"] = run.dropped_train_pairs;
        rj["lambda"] = run.lambda;
        if (run.hubness_original) rj["hubness_original"] = hubness_json(*run.hubness_original);

        nlohmann::ordered_json methods = nlohmann::ordered_json::array();
        for (const MethodResult& mr : run.methods) {
            nlohmann::ordered_json mj;
            mj["method"] = method_name(mr.method);
            mj["accuracy"] = mr.accuracy;
            nlohmann::ordered_json bins = nlohmann::ordered_json::array();
            for (const BinAccuracy& bin : mr.bins.bins) {
                nlohmann::ordered_json bj;
                bj["lo"] = bin.interval.lo;
                bj["hi"] = bin.interval.hi;
                bj["count"] = bin.count;
                if (bin.accuracy) bj["accuracy"] = *bin.accuracy;
                else bj["accuracy"] = nullptr;
                bins.push_back(bj);
            }
            mj["bins"] = bins;
            mj["unbinned_count"] = mr.bins.unbinned_count;
            if (mr.bins.unbinned_accuracy) mj["unbinned_accuracy"] = *mr.bins.unbinned_accuracy;
            else mj["unbinned_accuracy"] = nullptr;
            if (mr.accuracy_test_pivots_only)
                mj["accuracy_test_pivots_only"] = *mr.accuracy_test_pivots_only;
            else mj["accuracy_test_pivots_only"] = nullptr;
            mj["hubness"] = hubness_json(mr.hubness);
            methods.push_back(mj);
        }
        rj["methods"] = methods;
        runs.push_back(rj);
    }
    j["runs"] = runs;
    out << j.dump(2) << '\n';
}

void write_accuracy_csv(std::ostream& out, const ExperimentReport& report) {
    out << "train_size,lambda";
    for (const auto& m : report.methods) out << ',' << m;
    out << '\n';
    char buf[64];
    for (const RunResult& run : report.runs) {
        std::snprintf(buf, sizeof(buf), "%.17g", run.lambda);
        out << run.train_size << ',' << buf;
        for (const MethodResult& mr : run.methods) {
            std::snprintf(buf, sizeof(buf), "%.3f", mr.accuracy);
            out << ',' << buf;
        }
        out << '\n';
    }
}

void write_timings_csv(std::ostream& out, const ExperimentReport& report) {
    out << "train_size,fit_seconds,query_seconds\n";
    char buf[64];
    for (const RunResult& run : report.runs) {
        std::snprintf(buf, sizeof(buf), "%.3f,%.3f", run.fit_seconds, run.query_seconds);
        out << run.train_size << ',' << buf << '\n';
    }
}

}  // namespace zsmap
