/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "zsmap/linear_map.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace zsmap {

namespace {

void check_shapes(const MatD& X, const MatD& Y) {
    if (X.rows() != Y.rows())
        throw numeric_error("X has " + std::to_string(X.rows()) + " rows but Y has " +
                            std::to_string(Y.rows()));
    if (X.rows() < 1) throw numeric_error("need at least one training row");
}

}  // namespace

LinearMap fit_ridge(const MatD& X, const MatD& Y, double lambda) {
    check_shapes(X, Y);
    if (lambda < 0.0) throw numeric_error("lambda must be non-negative");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& d = svd.singularValues();

    if (lambda == 0.0) {
        double tol = static_cast<double>(std::max(X.rows(), X.cols())) *
                     std::numeric_limits<double>::epsilon() * (d.size() > 0 ? d(0) : 0.0);
        Eigen::Index rank = 0;
        for (Eigen::Index j = 0; j < d.size(); ++j)
            if (d(j) > tol) ++rank;
        if (rank < X.cols())
            throw numeric_error("X^T X is singular (rank " + std::to_string(rank) + " < " +
                                std::to_string(X.cols()) + "); refit with lambda > 0");
    }

    // W = V diag(d_j/(d_j^2+lambda)) U^T Y; zero singular values contribute
    // nothing when lambda > 0 (minimum-norm solution).
    Eigen::VectorXd shrink(d.size());
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        double dj = d(j);
        shrink(j) = (dj == 0.0) ? 0.0 : dj / (dj * dj + lambda);
    }
    MatD W = svd.matrixV() * shrink.asDiagonal() * (svd.matrixU().transpose() * Y);

    LinearMap map;
    map.weights = std::move(W);
    map.lambda = lambda;
    map.objective = Objective::Ridge;
    map.meta.train_rows = X.rows();
    return map;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid{0.0};
    for (int e = -4; e <= 6; ++e) grid.push_back(std::pow(10.0, e));
    return grid;
}

GcvResult select_lambda_gcv(const MatD& X, const MatD& Y, const std::vector<double>& grid) {
    check_shapes(X, Y);
    if (grid.empty()) throw config_error("GCV grid must be non-empty");
    if (X.rows() < 2) throw numeric_error("GCV needs m > 1 training rows");
    for (double lambda : grid)
        if (!(lambda >= 0.0)) throw config_error("GCV grid contains a negative lambda");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU);
    const Eigen::VectorXd& d = svd.singularValues();
    const double m = static_cast<double>(X.rows());

    // Residuals through the SVD: ||Y - Yhat||^2 splits into the part of Y
    // outside the column space of X plus the per-direction shrinkage error.
    Eigen::MatrixXd A = svd.matrixU().transpose() * Y;  // r x v
    Eigen::VectorXd row_sq = A.rowwise().squaredNorm();
    double rss_null = std::max(0.0, Y.squaredNorm() - A.squaredNorm());

    GcvResult result;
    result.grid = grid;
    result.scores.reserve(grid.size());
    double best_score = std::numeric_limits<double>::infinity();
    double best_lambda = grid.front();

    for (double lambda : grid) {
        double df = 0.0;
        double rss = rss_null;
        for (Eigen::Index j = 0; j < d.size(); ++j) {
            double dsq = d(j) * d(j);
            if (dsq > 0.0) {
                df += dsq / (dsq + lambda);
                double f = lambda / (dsq + lambda);
                rss += f * f * row_sq(j);
            } else {
                rss += row_sq(j);  // a null direction predicts zero
            }
        }
        double denom = 1.0 - df / m;
        double score = (denom <= 0.0) ? std::numeric_limits<double>::infinity()
                                      : (rss / m) / (denom * denom);
        result.scores.push_back(score);
        if (score < best_score || (score == best_score && lambda > best_lambda)) {
            best_score = score;
            best_lambda = lambda;
        }
    }
    result.best_lambda = best_lambda;
    return result;
}

double margin_loss(const MatD& W, const MatD& X, const MatD& Y, double gamma,
                   const std::vector<std::vector<Eigen::Index>>& negatives, MatD* grad_out) {
    if (X.cols() != W.rows()) throw numeric_error("margin_loss: X/W shape mismatch");
    if (static_cast<Eigen::Index>(negatives.size()) != X.rows())
        throw numeric_error("margin_loss: one negative list per example required");
    if (grad_out) grad_out->setZero(W.rows(), W.cols());

    double loss = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        Eigen::RowVectorXd yhat = X.row(i) * W;
        double nrm = yhat.norm();
        if (nrm == 0.0) throw numeric_error("margin_loss: mapped vector is zero");
        Eigen::RowVectorXd yhat_u = yhat / nrm;

        double pos_nrm = Y.row(i).norm();
        if (pos_nrm == 0.0) throw numeric_error("margin_loss: zero target vector");
        Eigen::RowVectorXd pos_u = Y.row(i) / pos_nrm;
        double cos_pos = yhat_u.dot(pos_u);

        Eigen::RowVectorXd g_yhat = Eigen::RowVectorXd::Zero(W.cols());
        for (Eigen::Index j : negatives[i]) {
            double neg_nrm = Y.row(j).norm();
            if (neg_nrm == 0.0) throw numeric_error("margin_loss: zero target vector");
            Eigen::RowVectorXd neg_u = Y.row(j) / neg_nrm;
            double cos_neg = yhat_u.dot(neg_u);
            double term = gamma - cos_pos + cos_neg;
            if (term > 0.0) {
                loss += term;
                if (grad_out)
                    g_yhat += (-(pos_u - cos_pos * yhat_u) + (neg_u - cos_neg * yhat_u)) / nrm;
            }
        }
        if (grad_out && !g_yhat.isZero())
            grad_out->noalias() += X.row(i).transpose() * g_yhat;
    }
    return loss;
}

namespace {

// One SGD run over fixed hyperparameters. Sequential by construction; the
// determinism contract forbids data-parallel updates here.
struct SgdRun {
    MatD W;
    std::vector<double> heldout_loss;
    double train_loss = 0.0;
};

using detail::mix_seed;

SgdRun margin_sgd(const MatD& X, const MatD& Y, const std::vector<Eigen::Index>& train_idx,
                  const std::vector<Eigen::Index>& held_idx, double gamma, int k, int epochs,
                  double lr, double eps, std::uint64_t seed) {
    const Eigen::Index u = X.cols();
    const Eigen::Index v = Y.cols();
    const auto m_tr = static_cast<Eigen::Index>(train_idx.size());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> init(0.0, 1.0 / std::sqrt(static_cast<double>(u)));

    SgdRun run;
    run.W.resize(u, v);
    for (Eigen::Index a = 0; a < u; ++a)
        for (Eigen::Index b = 0; b < v; ++b) run.W(a, b) = init(rng);

    // Normalized target rows, shared by the positive and negative terms.
    MatD t_unit(Y.rows(), v);
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        double nrm = Y.row(i).norm();
        if (nrm == 0.0) throw numeric_error("margin training: zero target vector at row " +
                                            std::to_string(i));
        t_unit.row(i) = Y.row(i) / nrm;
    }

    // Fixed held-out negative lists so the per-epoch series is comparable.
    std::vector<std::vector<Eigen::Index>> held_negs;
    MatD Xh, Yh;
    if (!held_idx.empty() && held_idx.size() >= 2) {
        std::mt19937_64 eval_rng(mix_seed(seed, 0x9e3779b97f4a7c15ULL));
        auto n_held = static_cast<Eigen::Index>(held_idx.size());
        Xh.resize(n_held, u);
        Yh.resize(n_held, v);
        for (Eigen::Index i = 0; i < n_held; ++i) {
            Xh.row(i) = X.row(held_idx[static_cast<std::size_t>(i)]);
            Yh.row(i) = Y.row(held_idx[static_cast<std::size_t>(i)]);
        }
        int k_eval = std::min<int>(k, static_cast<int>(n_held) - 1);
        std::uniform_int_distribution<Eigen::Index> pick(0, n_held - 1);
        held_negs.resize(static_cast<std::size_t>(n_held));
        for (Eigen::Index i = 0; i < n_held; ++i) {
            auto& negs = held_negs[static_cast<std::size_t>(i)];
            while (static_cast<int>(negs.size()) < k_eval) {
                Eigen::Index j = pick(eval_rng);
                if (j == i || std::find(negs.begin(), negs.end(), j) != negs.end()) continue;
                negs.push_back(j);
            }
        }
    }

    MatD acc = MatD::Zero(u, v);  // Adagrad squared-gradient accumulator
    std::vector<Eigen::Index> order(train_idx);
    std::uniform_int_distribution<Eigen::Index> pick_tr(0, m_tr - 1);
    Eigen::RowVectorXd g_yhat(v);
    std::vector<Eigen::Index> negs;
    negs.reserve(static_cast<std::size_t>(k));

    for (int epoch = 1; epoch <= epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;

        for (Eigen::Index row : order) {
            Eigen::RowVectorXd yhat = X.row(row) * run.W;
            if (!yhat.allFinite())
                throw numeric_error("margin training diverged at epoch " +
                                    std::to_string(epoch));
            double nrm = yhat.norm();
            if (nrm == 0.0) continue;  // no direction, no gradient
            Eigen::RowVectorXd yhat_u = yhat / nrm;
            double cos_pos = yhat_u.dot(t_unit.row(row));

            negs.clear();
            while (static_cast<int>(negs.size()) < k) {
                Eigen::Index j = train_idx[static_cast<std::size_t>(pick_tr(rng))];
                if (j == row || std::find(negs.begin(), negs.end(), j) != negs.end()) continue;
                negs.push_back(j);
            }

            g_yhat.setZero();
            bool active = false;
            for (Eigen::Index j : negs) {
                double cos_neg = yhat_u.dot(t_unit.row(j));
                double term = gamma - cos_pos + cos_neg;
                if (term > 0.0) {
                    epoch_loss += term;
                    g_yhat += (-(t_unit.row(row) - cos_pos * yhat_u) +
                               (t_unit.row(j) - cos_neg * yhat_u)) /
                              nrm;
                    active = true;
                }
            }
            if (!active) continue;

            // Rank-1 gradient x_i (x) g_yhat with per-parameter Adagrad scaling.
            for (Eigen::Index a = 0; a < u; ++a) {
                double xa = X(row, a);
                if (xa == 0.0) continue;
                for (Eigen::Index b = 0; b < v; ++b) {
                    double g = xa * g_yhat(b);
                    acc(a, b) += g * g;
                    run.W(a, b) -= lr * g / (std::sqrt(acc(a, b)) + eps);
                }
            }
        }

        if (!std::isfinite(epoch_loss))
            throw numeric_error("margin training diverged at epoch " + std::to_string(epoch));
        run.train_loss = epoch_loss / (static_cast<double>(m_tr) * k);

        if (!held_negs.empty()) {
            double hl = margin_loss(run.W, Xh, Yh, gamma, held_negs);
            run.heldout_loss.push_back(hl / (static_cast<double>(Xh.rows()) *
                                             static_cast<double>(held_negs.front().size())));
        }
    }
    return run;
}

// Accuracy@1 of held-out rows against the full target pool; the tuning metric.
double heldout_accuracy(const MatD& W, const MatD& X, const MatD& Y,
                        const std::vector<Eigen::Index>& held_idx) {
    MatD t_unit(Y.rows(), Y.cols());
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        double nrm = Y.row(i).norm();
        t_unit.row(i) = (nrm == 0.0) ? Y.row(i) : Eigen::RowVectorXd(Y.row(i) / nrm);
    }
    long correct = 0;
    for (Eigen::Index i : held_idx) {
        Eigen::RowVectorXd yhat = X.row(i) * W;
        Eigen::Index best = 0;
        double best_cos = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < Y.rows(); ++j) {
            double c = yhat.dot(t_unit.row(j));
            if (c > best_cos) {
                best_cos = c;
                best = j;
            }
        }
        if (best == i) ++correct;
    }
    return held_idx.empty() ? 0.0 : static_cast<double>(correct) / held_idx.size();
}

}  // namespace

MarginFit fit_margin(const MatD& X, const MatD& Y, const MarginConfig& cfg) {
    check_shapes(X, Y);
    const Eigen::Index m = X.rows();
    if (m < 2) throw numeric_error("margin training needs m >= 2");
    if (cfg.epochs < 1) throw config_error("epochs must be positive");
    if (!(cfg.heldout_frac > 0.0 && cfg.heldout_frac < 1.0))
        throw config_error("heldout_frac must lie in (0,1)");
    if (!(cfg.learning_rate > 0.0)) throw config_error("learning rate must be positive");

    // Seeded split; the held portion carries the loss series and the tuning
    // metric, the rest feeds SGD.
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::mt19937_64 split_rng(mix_seed(cfg.seed, 1));
    std::shuffle(perm.begin(), perm.end(), split_rng);
    auto n_held = static_cast<Eigen::Index>(
        std::min<double>(m - 1, std::max(1.0, std::floor(cfg.heldout_frac * m))));
    std::vector<Eigen::Index> train_idx(perm.begin(), perm.end() - n_held);
    std::vector<Eigen::Index> held_idx(perm.end() - n_held, perm.end());

    auto validate_k = [&](int k, Eigen::Index pool) {
        return k >= 1 && k < pool;
    };

    double gamma = cfg.gamma;
    int k = cfg.negatives;

    if (cfg.tune) {
        if (cfg.gamma_grid.empty() || cfg.negative_grid.empty())
            throw config_error("tuning grids must be non-empty");
        double best_acc = -1.0;
        std::uint64_t combo = 0;
        for (double g : cfg.gamma_grid) {
            for (int kc : cfg.negative_grid) {
                ++combo;
                if (!(g > 0.0) || !validate_k(kc, static_cast<Eigen::Index>(train_idx.size())))
                    continue;
                SgdRun run = margin_sgd(X, Y, train_idx, held_idx, g, kc, cfg.epochs,
                                        cfg.learning_rate, cfg.adagrad_eps,
                                        mix_seed(cfg.seed, 100 + combo));
                double acc = heldout_accuracy(run.W, X, Y, held_idx);
                if (acc > best_acc) {
                    best_acc = acc;
                    gamma = g;
                    k = kc;
                }
            }
        }
        if (best_acc < 0.0) throw config_error("no valid (gamma, k) combination in the grids");
    }

    if (!(gamma > 0.0)) throw config_error("gamma must be positive");
    if (!validate_k(k, cfg.tune ? m : static_cast<Eigen::Index>(train_idx.size())))
        throw config_error("negative count k must satisfy 1 <= k < training rows");

    // Tuned fits use all rows with the selected hyperparameters; direct fits
    // keep the held split out so the loss series stays out-of-sample.
    std::vector<Eigen::Index> final_train = cfg.tune ? perm : train_idx;
    SgdRun run = margin_sgd(X, Y, final_train, held_idx, gamma, k, cfg.epochs, cfg.learning_rate,
                            cfg.adagrad_eps, mix_seed(cfg.seed, 2));

    MarginFit fit;
    fit.map.weights = std::move(run.W);
    fit.map.lambda = 0.0;
    fit.map.objective = Objective::Margin;
    fit.map.meta.train_rows = static_cast<Eigen::Index>(final_train.size());
    fit.map.meta.gamma = gamma;
    fit.map.meta.negatives = k;
    fit.map.meta.epochs = cfg.epochs;
    fit.map.meta.seed = cfg.seed;
    fit.heldout_loss = std::move(run.heldout_loss);
    fit.train_loss = run.train_loss;
    fit.chosen_gamma = gamma;
    fit.chosen_negatives = k;
    return fit;
}

MatD apply_map(const LinearMap& map, const MatD& X) {
    if (X.cols() != map.source_dim())
        throw numeric_error("apply_map: input has " + std::to_string(X.cols()) +
                            " columns, map expects " + std::to_string(map.source_dim()));
    return X * map.weights;
}

MatF apply_map(const LinearMap& map, const MatF& X) {
    if (X.cols() != map.source_dim())
        throw numeric_error("apply_map: input has " + std::to_string(X.cols()) +
                            " columns, map expects " + std::to_string(map.source_dim()));
    return (X.cast<double>() * map.weights).cast<float>();
}

void write_linear_map(const LinearMap& map, std::ostream& out) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", map.lambda);
    out << map.source_dim() << ' ' << map.target_dim() << ' ' << buf << ' '
        << (map.objective == Objective::Ridge ? "ridge" : "margin") << '\n';
    for (Eigen::Index i = 0; i < map.weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < map.weights.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", map.weights(i, j));
            if (j) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

void save_linear_map(const LinearMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write map file '" + path + "'");
    write_linear_map(map, out);
    if (!out) throw io_error("failed writing '" + path + "'");
}

LinearMap read_linear_map(std::istream& in, const std::string& name) {
    std::string header;
    if (!std::getline(in, header)) throw parse_error(name + ": empty map file");
    std::istringstream hs(header);
    Eigen::Index u = 0, v = 0;
    double lambda = 0.0;
    std::string objective;
    if (!(hs >> u >> v >> lambda >> objective) || u < 1 || v < 1)
        throw parse_error(name + ": bad map header '" + header + "'");
    if (objective != "ridge" && objective != "margin")
        throw parse_error(name + ": unknown objective '" + objective + "'");

    LinearMap map;
    map.weights.resize(u, v);
    map.lambda = lambda;
    map.objective = objective == "ridge" ? Objective::Ridge : Objective::Margin;
    for (Eigen::Index i = 0; i < u; ++i)
        for (Eigen::Index j = 0; j < v; ++j)
            if (!(in >> map.weights(i, j)))
                throw parse_error(name + ": truncated weight matrix at row " + std::to_string(i));
    return map;
}

LinearMap load_linear_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open map file '" + path + "'");
    return read_linear_map(in, path);
}

}  // namespace zsmap
