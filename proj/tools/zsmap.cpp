/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "zsmap/embedding.hpp"
#include "zsmap/evaluation.hpp"
#include "zsmap/hubness.hpp"
#include "zsmap/linear_map.hpp"
#include "zsmap/retrieval.hpp"

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

namespace fs = std::filesystem;
using namespace zsmap;

namespace {

// Exit-code contract: 0 success, 1 usage error, 2 data/numeric error.
constexpr int kUsageError = 1;
constexpr int kDataError = 2;

void log_line(const std::string& msg) { std::cerr << "[zsmap] " << msg << '\n'; }

void apply_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

std::vector<std::string> read_token_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open pivots file '" + path + "'");
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) tokens.push_back(line);
    }
    if (tokens.empty()) throw parse_error(path + ": no pivot tokens");
    return tokens;
}

struct LambdaChoice {
    LambdaMode mode = LambdaMode::None;
    double value = 0.0;
};

EmbeddingFormat parse_format(const std::string& text) {
    return text == "headerless" ? EmbeddingFormat::TextHeaderless : EmbeddingFormat::TextHeader;
}

LambdaChoice parse_lambda(const std::string& text) {
    LambdaChoice choice;
    if (text == "none") return choice;
    if (text == "gcv") {
        choice.mode = LambdaMode::Gcv;
        return choice;
    }
    try {
        std::size_t pos = 0;
        choice.value = std::stod(text, &pos);
        if (pos != text.size() || choice.value < 0.0) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        throw config_error("--lambda expects 'none', 'gcv' or a non-negative number, got '" +
                           text + "'");
    }
    choice.mode = LambdaMode::Fixed;
    return choice;
}

// Shared by retrieve/hubness: map the named pivots (plus optional auxiliary
// pivots sampled from the rest of the source vocabulary) into the target
// space and build the similarity matrix.
struct PivotQuery {
    SimilarityMatrix sim;
    std::size_t named = 0;  // leading pivots that came from the pivots file
};

PivotQuery build_pivot_query(const LinearMap& map, const EmbeddingSpace& source,
                             const EmbeddingSpace& target,
                             const std::vector<std::string>& pivot_tokens, int aux_count,
                             std::uint64_t seed) {
    SubsetResult named = subset(source, pivot_tokens);
    if (!named.missing.empty())
        throw numeric_error("pivot token '" + named.missing.front() +
                            "' has no source embedding");

    std::vector<std::string> aux_tokens;
    if (aux_count > 0) {
        std::unordered_set<std::string> excluded(pivot_tokens.begin(), pivot_tokens.end());
        std::vector<std::string> candidates;
        for (const auto& token : source.vocab())
            if (!excluded.count(token)) candidates.push_back(token);
        if (static_cast<int>(candidates.size()) < aux_count)
            throw config_error("not enough source tokens for " + std::to_string(aux_count) +
                               " auxiliary pivots");
        std::mt19937_64 rng(detail::mix_seed(seed, 0xA0Bu));
        std::sample(candidates.begin(), candidates.end(), std::back_inserter(aux_tokens),
                    aux_count, rng);
    }
    SubsetResult aux = subset(source, aux_tokens);

    MatF pivots(named.rows.rows() + aux.rows.rows(), source.dim());
    pivots.topRows(named.rows.rows()) = named.rows;
    if (aux.rows.rows() > 0) pivots.bottomRows(aux.rows.rows()) = aux.rows;
    std::vector<std::string> ids = named.found;
    ids.insert(ids.end(), aux_tokens.begin(), aux_tokens.end());

    PivotQuery query;
    query.named = named.found.size();
    MatF mapped = apply_map(map, pivots);
    query.sim = cosine_matrix(mapped, target.matrix(), std::move(ids), target.vocab());
    return query;
}

NeighborResult run_method(const SimilarityMatrix& sim, Method method, int k) {
    switch (method) {
        case Method::NN: return nn_query(sim, k);
        case Method::NNnrm: return nrm_query(sim, k);
        case Method::GC: return gc_query(sim, k);
    }
    throw config_error("unreachable method");
}

// ---------------------------------------------------------------------------
//  subcommands
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string source_path, target_path, dict_path, out_path;
    std::string format = "header";
    std::string lambda_text = "none";
    std::string objective = "ridge";
    std::string gcv_grid_text;
    double gamma = 0.3;
    int negatives = 5;
    int epochs = 10;
    double heldout = 0.25;
    bool tune = false;
    std::uint64_t seed = 0;
    int threads = 0;
};

int cmd_train(const TrainArgs& args) {
    apply_threads(args.threads);
    log_line("train: source=" + args.source_path + " target=" + args.target_path +
             " dict=" + args.dict_path + " lambda=" + args.lambda_text +
             " objective=" + args.objective + " seed=" + std::to_string(args.seed));

    EmbeddingSpace source = load_embeddings(args.source_path, parse_format(args.format));
    EmbeddingSpace target = load_embeddings(args.target_path, parse_format(args.format));
    std::vector<TokenPair> pairs = load_pairs(args.dict_path);
    if (pairs.empty()) throw parse_error(args.dict_path + ": no training pairs");

    std::vector<Eigen::Index> x_rows, y_rows;
    int dropped = 0;
    for (const auto& [s, t] : pairs) {
        auto sx = source.find(s);
        auto ty = target.find(t);
        if (sx && ty) {
            x_rows.push_back(*sx);
            y_rows.push_back(*ty);
        } else {
            ++dropped;
        }
    }
    if (dropped > 0) log_line("dropped " + std::to_string(dropped) + " pairs without embeddings");
    if (x_rows.empty()) throw numeric_error("no usable training pairs");

    MatD X(static_cast<Eigen::Index>(x_rows.size()), source.dim());
    MatD Y(static_cast<Eigen::Index>(y_rows.size()), target.dim());
    for (std::size_t i = 0; i < x_rows.size(); ++i) {
        X.row(static_cast<Eigen::Index>(i)) = source.matrix().row(x_rows[i]).cast<double>();
        Y.row(static_cast<Eigen::Index>(i)) = target.matrix().row(y_rows[i]).cast<double>();
    }

    LambdaChoice choice = parse_lambda(args.lambda_text);
    LinearMap map;
    if (args.objective == "ridge") {
        double lambda = choice.value;
        if (choice.mode == LambdaMode::Gcv) {
            std::vector<double> grid = default_lambda_grid();
            if (!args.gcv_grid_text.empty()) {
                grid.clear();
                std::stringstream ss(args.gcv_grid_text);
                std::string item;
                while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
            }
            GcvResult gcv = select_lambda_gcv(X, Y, grid);
            for (std::size_t i = 0; i < gcv.grid.size(); ++i)
                log_line("gcv lambda=" + std::to_string(gcv.grid[i]) +
                         " score=" + std::to_string(gcv.scores[i]));
            lambda = gcv.best_lambda;
        }
        map = fit_ridge(X, Y, lambda);
    } else if (args.objective == "margin") {
        if (choice.mode != LambdaMode::None)
            throw config_error("the margin objective takes no lambda (use --lambda none)");
        MarginConfig cfg;
        cfg.gamma = args.gamma;
        cfg.negatives = args.negatives;
        cfg.epochs = args.epochs;
        cfg.heldout_frac = args.heldout;
        cfg.seed = args.seed;
        cfg.tune = args.tune;
        MarginFit fit = fit_margin(X, Y, cfg);
        log_line("margin: gamma=" + std::to_string(fit.chosen_gamma) +
                 " negatives=" + std::to_string(fit.chosen_negatives));
        map = std::move(fit.map);
    } else {
        throw config_error("--objective must be ridge or margin");
    }

    double residual = (X * map.weights - Y).norm();
    log_line("selected lambda = " + std::to_string(map.lambda));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", residual);
    log_line(std::string("training residual = ") + buf);

    save_linear_map(map, args.out_path);
    log_line("wrote map to " + args.out_path);
    return 0;
}

struct MapArgs {
    std::string map_path, emb_path, out_path;
    std::string format = "header";
    int threads = 0;
};

int cmd_map(const MapArgs& args) {
    apply_threads(args.threads);
    log_line("map: map=" + args.map_path + " embeddings=" + args.emb_path);
    LinearMap map = load_linear_map(args.map_path);
    EmbeddingSpace space = load_embeddings(args.emb_path, parse_format(args.format));
    MatF mapped = apply_map(map, space.matrix());
    EmbeddingSpace out(space.vocab(), std::move(mapped));
    save_embeddings(out, args.out_path, parse_format(args.format));
    log_line("wrote mapped embeddings to " + args.out_path);
    return 0;
}

struct RetrieveArgs {
    std::string map_path, source_path, target_path, pivots_path;
    std::string format = "header";
    std::string method = "nn";
    int k = 1;
    int aux_pivots = 0;
    std::uint64_t seed = 0;
    int threads = 0;
};

int cmd_retrieve(const RetrieveArgs& args) {
    apply_threads(args.threads);
    log_line("retrieve: method=" + args.method + " k=" + std::to_string(args.k) +
             " aux_pivots=" + std::to_string(args.aux_pivots) +
             " seed=" + std::to_string(args.seed));

    LinearMap map = load_linear_map(args.map_path);
    EmbeddingSpace source = load_embeddings(args.source_path, parse_format(args.format));
    EmbeddingSpace target = load_embeddings(args.target_path, parse_format(args.format));
    std::vector<std::string> pivots = read_token_lines(args.pivots_path);

    PivotQuery query = build_pivot_query(map, source, target, pivots, args.aux_pivots, args.seed);
    NeighborResult result = run_method(query.sim, method_from_name(args.method), args.k);
    write_retrieval_tsv(std::cout, query.sim, head(result, query.named));
    return 0;
}

struct HubnessArgs {
    std::string map_path, source_path, target_path, pivots_path;
    std::string format = "header";
    std::string method = "nn";
    std::string out_prefix;
    std::string group_targets_path;
    int k = 20;
    int aux_pivots = 0;
    std::uint64_t seed = 0;
    int threads = 0;
};

int cmd_hubness(const HubnessArgs& args) {
    apply_threads(args.threads);
    log_line("hubness: method=" + args.method + " k=" + std::to_string(args.k) +
             " aux_pivots=" + std::to_string(args.aux_pivots) +
             " seed=" + std::to_string(args.seed));

    LinearMap map = load_linear_map(args.map_path);
    EmbeddingSpace source = load_embeddings(args.source_path, parse_format(args.format));
    EmbeddingSpace target = load_embeddings(args.target_path, parse_format(args.format));

    if (!args.group_targets_path.empty()) {
        std::unordered_map<std::string, std::string> label_of;
        for (const auto& [token, label] : load_pairs(args.group_targets_path))
            label_of[token] = label;
        target = group_average(target, label_of);
        log_line("grouped targets into " + std::to_string(target.size()) + " labels");
    }

    std::vector<std::string> pivots = read_token_lines(args.pivots_path);
    PivotQuery query = build_pivot_query(map, source, target, pivots, args.aux_pivots, args.seed);
    NeighborResult result = run_method(query.sim, method_from_name(args.method), args.k);

    // N_k is scored over the named pivots; auxiliary pivots only shape the
    // normalization/ranks.
    HubnessReport report = hub_scores(head(result, query.named), target.vocab());
    SubsetResult named_rows = subset(source, pivots);
    MatF mapped_named = apply_map(map, named_rows.rows);
    SpearmanResult rho = cosine_to_mean_correlation(
        target.matrix(), mapped_named, std::span<const std::int64_t>(report.counts));

    std::ofstream csv(args.out_prefix + ".csv");
    if (!csv) throw io_error("cannot write '" + args.out_prefix + ".csv'");
    write_hubness_csv(csv, report);
    std::ofstream hist(args.out_prefix + "_hist.csv");
    if (!hist) throw io_error("cannot write '" + args.out_prefix + "_hist.csv'");
    write_histogram_csv(hist, report);
    std::ofstream json(args.out_prefix + ".json");
    if (!json) throw io_error("cannot write '" + args.out_prefix + ".json'");
    write_hubness_json(json, report, rho);

    log_line("max N_k = " + std::to_string(report.max_nk) +
             ", spearman rho = " + std::to_string(rho.rho));
    return 0;
}

struct EvalArgs {
    std::string config_path, out_dir;
    int threads = 0;
};

int cmd_eval(const EvalArgs& args) {
    apply_threads(args.threads);
    ExperimentConfig cfg = load_experiment_config(args.config_path);
    log_line("eval: config=" + args.config_path + " seed=" + std::to_string(cfg.seed) +
             " aux_pivots=" + std::to_string(cfg.aux_pivots));

    ExperimentReport report = run_experiment(cfg);

    fs::create_directories(args.out_dir);
    auto open = [&](const std::string& name) {
        std::ofstream out(args.out_dir + "/" + name);
        if (!out) throw io_error("cannot write '" + args.out_dir + "/" + name + "'");
        return out;
    };
    {
        auto out = open("report.json");
        write_report_json(out, report);
    }
    {
        auto out = open("accuracy.csv");
        write_accuracy_csv(out, report);
    }
    {
        auto out = open("timings.csv");
        write_timings_csv(out, report);
    }
    log_line("wrote report to " + args.out_dir);
    return 0;
}

struct SynthArgs {
    std::string out_dir;
    std::uint64_t seed = 0;
    int dim = 50;
    int n_train = 500;
    int n_test = 200;
    int n_targets = 5000;
    double noise = 0.2;
};

int cmd_synth(const SynthArgs& args) {
    log_line("synth: seed=" + std::to_string(args.seed) + " dim=" + std::to_string(args.dim) +
             " train=" + std::to_string(args.n_train) + " test=" + std::to_string(args.n_test) +
             " targets=" + std::to_string(args.n_targets) +
             " noise=" + std::to_string(args.noise));

    SyntheticData data = generate_synthetic_pair_spaces(args.seed, args.dim, args.n_train,
                                                        args.n_test, args.n_targets, args.noise);
    fs::create_directories(args.out_dir);
    save_embeddings(data.source, args.out_dir + "/source.emb");
    save_embeddings(data.target, args.out_dir + "/target.emb");

    auto write_pairs = [](const std::string& path, const std::vector<TokenPair>& pairs) {
        std::ofstream out(path);
        if (!out) throw io_error("cannot write '" + path + "'");
        for (const auto& [s, t] : pairs) out << s << '\t' << t << '\n';
    };
    write_pairs(args.out_dir + "/train.tsv", data.train_pairs);
    write_pairs(args.out_dir + "/test.tsv", data.test_pairs);
    log_line("wrote synthetic spaces to " + args.out_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zsmap: linear vector-space mapping, hubness-corrected retrieval and "
                 "zero-shot evaluation"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "fit a linear map from paired embeddings");
    train->add_option("source-emb", train_args.source_path, "source embedding file")->required();
    train->add_option("target-emb", train_args.target_path, "target embedding file")->required();
    train->add_option("dict", train_args.dict_path, "training pair TSV")->required();
    train->add_option("--format", train_args.format, "embedding file format")
        ->check(CLI::IsMember({"header", "headerless"}));
    train->add_option("--lambda", train_args.lambda_text, "none, gcv or a fixed value");
    train->add_option("--objective", train_args.objective, "ridge or margin")
        ->check(CLI::IsMember({"ridge", "margin"}));
    train->add_option("--gcv-grid", train_args.gcv_grid_text, "comma-separated lambda grid");
    train->add_option("--gamma", train_args.gamma, "margin width");
    train->add_option("--negatives", train_args.negatives, "negative samples per example")
        ->check(CLI::PositiveNumber);
    train->add_option("--epochs", train_args.epochs, "margin SGD epochs")
        ->check(CLI::PositiveNumber);
    train->add_option("--heldout", train_args.heldout, "held-out fraction for margin tuning");
    train->add_flag("--tune", train_args.tune, "tune gamma and negatives on the held-out split");
    train->add_option("--seed", train_args.seed, "RNG seed");
    train->add_option("--threads", train_args.threads, "worker cap (results are unaffected)");
    train->add_option("--out", train_args.out_path, "output map file")->required();

    MapArgs map_args;
    auto* mapc = app.add_subcommand("map", "apply a linear map to an embedding file");
    mapc->add_option("map-file", map_args.map_path)->required();
    mapc->add_option("embeddings", map_args.emb_path)->required();
    mapc->add_option("--format", map_args.format, "embedding file format")
        ->check(CLI::IsMember({"header", "headerless"}));
    mapc->add_option("--out", map_args.out_path, "output embedding file")->required();
    mapc->add_option("--threads", map_args.threads, "worker cap (results are unaffected)");

    RetrieveArgs retrieve_args;
    auto* retrieve = app.add_subcommand("retrieve", "query the target space for mapped pivots");
    retrieve->add_option("map-file", retrieve_args.map_path)->required();
    retrieve->add_option("source-emb", retrieve_args.source_path)->required();
    retrieve->add_option("target-emb", retrieve_args.target_path)->required();
    retrieve->add_option("pivots-file", retrieve_args.pivots_path, "one pivot token per line")
        ->required();
    retrieve->add_option("--format", retrieve_args.format, "embedding file format")
        ->check(CLI::IsMember({"header", "headerless"}));
    retrieve->add_option("--method", retrieve_args.method, "nn, nrm or gc")
        ->check(CLI::IsMember({"nn", "nrm", "nn_nrm", "gc"}));
    retrieve->add_option("--k", retrieve_args.k, "neighbours per pivot")
        ->check(CLI::PositiveNumber);
    retrieve->add_option("--aux-pivots", retrieve_args.aux_pivots,
                         "auxiliary unlabeled pivots sampled from the source vocabulary")
        ->check(CLI::NonNegativeNumber);
    retrieve->add_option("--seed", retrieve_args.seed, "RNG seed");
    retrieve->add_option("--threads", retrieve_args.threads,
                         "worker cap (results are unaffected)");

    HubnessArgs hubness_args;
    auto* hubness = app.add_subcommand("hubness", "score target hubness for mapped pivots");
    hubness->add_option("map-file", hubness_args.map_path)->required();
    hubness->add_option("source-emb", hubness_args.source_path)->required();
    hubness->add_option("target-emb", hubness_args.target_path)->required();
    hubness->add_option("pivots-file", hubness_args.pivots_path)->required();
    hubness->add_option("--format", hubness_args.format, "embedding file format")
        ->check(CLI::IsMember({"header", "headerless"}));
    hubness->add_option("--method", hubness_args.method, "nn, nrm or gc")
        ->check(CLI::IsMember({"nn", "nrm", "nn_nrm", "gc"}));
    hubness->add_option("--k", hubness_args.k, "neighbourhood size")->check(CLI::PositiveNumber);
    hubness->add_option("--aux-pivots", hubness_args.aux_pivots, "auxiliary pivot count")
        ->check(CLI::NonNegativeNumber);
    hubness->add_option("--group-targets", hubness_args.group_targets_path,
                        "TSV token->label map; targets are group-averaged before analysis");
    hubness->add_option("--seed", hubness_args.seed, "RNG seed");
    hubness->add_option("--threads", hubness_args.threads, "worker cap (results are unaffected)");
    hubness->add_option("--out-prefix", hubness_args.out_prefix, "output path prefix")->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "run a full zero-shot experiment from a config file");
    eval->add_option("config", eval_args.config_path, "flat key=value config file")->required();
    eval->add_option("--out-dir", eval_args.out_dir, "report directory")->required();
    eval->add_option("--threads", eval_args.threads, "worker cap (results are unaffected)");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate paired synthetic embedding spaces");
    synth->add_option("--out-dir", synth_args.out_dir)->required();
    synth->add_option("--seed", synth_args.seed, "RNG seed");
    synth->add_option("--dim", synth_args.dim)->check(CLI::Range(2, 1 << 20));
    synth->add_option("--train", synth_args.n_train)->check(CLI::PositiveNumber);
    synth->add_option("--test", synth_args.n_test)->check(CLI::PositiveNumber);
    synth->add_option("--targets", synth_args.n_targets)->check(CLI::PositiveNumber);
    synth->add_option("--noise", synth_args.noise)->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (train->parsed()) return cmd_train(train_args);
        if (mapc->parsed()) return cmd_map(map_args);
        if (retrieve->parsed()) return cmd_retrieve(retrieve_args);
        if (hubness->parsed()) return cmd_hubness(hubness_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (synth->parsed()) return cmd_synth(synth_args);
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    }
    return 0;
}
