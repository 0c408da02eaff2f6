/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "zsmap/linear_map.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace zsmap;
using testutil::matd;

namespace {

MatD ridge_gradient(const MatD& X, const MatD& Y, const MatD& W, double lambda) {
    return 2.0 * (X.transpose() * (X * W - Y)) + 2.0 * lambda * W;
}

double ridge_objective(const MatD& X, const MatD& Y, const MatD& W, double lambda) {
    return (X * W - Y).squaredNorm() + lambda * W.squaredNorm();
}

}  // namespace

TEST_CASE("fit_ridge with an identity design matrix") {
    MatD I = MatD::Identity(2, 2);
    MatD Y = matd({{2.0, 0.0}, {0.0, 3.0}});

    SUBCASE("lambda 0 reproduces Y") {
        LinearMap map = fit_ridge(I, Y, 0.0);
        CHECK((map.weights - Y).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(map.lambda == 0.0);
        CHECK(map.objective == Objective::Ridge);
    }
    SUBCASE("lambda 1 halves Y") {
        MatD Yr = testutil::random_matd(2, 2, 5);
        LinearMap map = fit_ridge(I, Yr, 1.0);
        CHECK((map.weights - 0.5 * Yr).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("fit_ridge matches a gradient-descent minimizer") {
    MatD X = testutil::random_matd(10, 3, 11);
    MatD Y = testutil::random_matd(10, 2, 12);
    LinearMap map = fit_ridge(X, Y, 0.5);
    oracle::RowsD W_gd = oracle::ridge_gradient_descent(testutil::to_rows(X),
                                                        testutil::to_rows(Y), 0.5);
    for (Eigen::Index i = 0; i < map.weights.rows(); ++i)
        for (Eigen::Index j = 0; j < map.weights.cols(); ++j)
            CHECK(std::abs(map.weights(i, j) -
                           W_gd[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) < 1e-4);
}

TEST_CASE("fit_ridge error paths") {
    SUBCASE("rank-deficient X at lambda 0 advises regularization") {
        MatD X = matd({{1.0, 2.0}, {2.0, 4.0}, {3.0, 6.0}});  // rank 1
        MatD Y = testutil::random_matd(3, 2, 3);
        CHECK_THROWS_WITH_AS(fit_ridge(X, Y, 0.0), doctest::Contains("lambda > 0"), numeric_error);
        CHECK_NOTHROW(fit_ridge(X, Y, 0.1));
    }
    SUBCASE("more columns than rows is rank-deficient") {
        MatD X = testutil::random_matd(2, 5, 4);
        MatD Y = testutil::random_matd(2, 2, 5);
        CHECK_THROWS_AS(fit_ridge(X, Y, 0.0), numeric_error);
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(fit_ridge(testutil::random_matd(4, 2, 1), testutil::random_matd(5, 2, 2),
                                  0.0),
                        numeric_error);
    }
    SUBCASE("negative lambda") {
        CHECK_THROWS_AS(fit_ridge(MatD::Identity(2, 2), MatD::Identity(2, 2), -1.0),
                        numeric_error);
    }
}

TEST_CASE("ridge first-order optimality against finite differences") {
    MatD X = testutil::random_matd(12, 4, 21);
    MatD Y = testutil::random_matd(12, 3, 22);
    for (double lambda : {0.0, 0.3, 5.0}) {
        LinearMap map = fit_ridge(X, Y, lambda);
        MatD grad = ridge_gradient(X, Y, map.weights, lambda);
        double scale = 2.0 * (X.transpose() * Y).norm();
        CHECK(grad.norm() / scale < 1e-6);

        // The analytic gradient itself agrees with finite differences at a
        // perturbed point (away from the optimum, where it is non-trivial).
        MatD W = map.weights + MatD::Constant(map.weights.rows(), map.weights.cols(), 0.05);
        MatD g = ridge_gradient(X, Y, W, lambda);
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < W.rows(); ++i) {
            for (Eigen::Index j = 0; j < W.cols(); ++j) {
                MatD Wp = W, Wm = W;
                Wp(i, j) += h;
                Wm(i, j) -= h;
                double fd =
                    (ridge_objective(X, Y, Wp, lambda) - ridge_objective(X, Y, Wm, lambda)) /
                    (2.0 * h);
                CHECK(std::abs(g(i, j) - fd) < 1e-4 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST_CASE("larger lambda never grows the solution norm") {
    MatD X = testutil::random_matd(30, 6, 31);
    MatD Y = testutil::random_matd(30, 4, 32);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {0.0, 0.01, 0.1, 1.0, 10.0, 100.0}) {
        double norm = fit_ridge(X, Y, lambda).weights.norm();
        CHECK(norm <= prev + 1e-12);
        prev = norm;
    }
}

TEST_CASE("multivariate ridge equals per-column solves") {
    MatD X = testutil::random_matd(25, 5, 41);
    MatD Y = testutil::random_matd(25, 3, 42);
    double lambda = 0.7;
    LinearMap joint = fit_ridge(X, Y, lambda);
    oracle::RowsD W_ne = oracle::ridge_normal_equations(testutil::to_rows(X),
                                                        testutil::to_rows(Y), lambda);
    for (Eigen::Index c = 0; c < Y.cols(); ++c) {
        MatD Yc = Y.col(c);
        LinearMap single = fit_ridge(X, Yc, lambda);
        CHECK((joint.weights.col(c) - single.weights.col(0)).cwiseAbs().maxCoeff() < 1e-10);
        for (Eigen::Index i = 0; i < X.cols(); ++i)
            CHECK(std::abs(joint.weights(i, c) -
                           W_ne[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]) < 1e-8);
    }
}

TEST_CASE("GCV picks lambda 0 on noise-free data") {
    MatD X = testutil::random_matd(60, 5, 51);
    MatD W_true = testutil::random_matd(5, 3, 52);
    MatD Y = X * W_true;
    GcvResult gcv = select_lambda_gcv(X, Y, {0.0, 0.1, 1.0, 10.0});
    CHECK(gcv.best_lambda == 0.0);
    REQUIRE(gcv.scores.size() == 4);
    CHECK(gcv.scores[0] < gcv.scores[1]);
}

TEST_CASE("GCV singleton grid returns that lambda with its score") {
    MatD X = testutil::random_matd(20, 4, 61);
    MatD Y = testutil::random_matd(20, 2, 62);
    GcvResult gcv = select_lambda_gcv(X, Y, {5.0});
    CHECK(gcv.best_lambda == 5.0);
    REQUIRE(gcv.scores.size() == 1);
    CHECK(std::isfinite(gcv.scores[0]));
}

TEST_CASE("GCV scores df == m as +infinity rather than failing") {
    // Square full-rank X: df(0) = m, so lambda 0 must be scored +inf and the
    // selection falls to a positive lambda.
    MatD X = MatD::Identity(4, 4);
    MatD Y = testutil::random_matd(4, 2, 71);
    GcvResult gcv = select_lambda_gcv(X, Y, {0.0, 1.0});
    CHECK(std::isinf(gcv.scores[0]));
    CHECK(gcv.best_lambda == 1.0);
}

TEST_CASE("GCV tracks the held-out error minimizer on noisy data") {
    std::mt19937 rng(4007);
    std::normal_distribution<double> noise(0.0, 3.0);
    MatD X = testutil::random_matd(120, 30, 4107);
    MatD W_true = testutil::random_matd(30, 4, 4207);
    MatD Y = X * W_true;
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
        for (Eigen::Index j = 0; j < Y.cols(); ++j) Y(i, j) += noise(rng);

    std::vector<double> grid = default_lambda_grid();
    MatD Xt = X.topRows(80), Yt = Y.topRows(80);
    MatD Xh = X.bottomRows(40), Yh = Y.bottomRows(40);
    GcvResult gcv = select_lambda_gcv(Xt, Yt, grid);

    std::vector<double> held = oracle::heldout_error_curve(
        testutil::to_rows(Xt), testutil::to_rows(Yt), testutil::to_rows(Xh), testutil::to_rows(Yh),
        grid);
    std::size_t best_held =
        static_cast<std::size_t>(std::min_element(held.begin(), held.end()) - held.begin());
    std::size_t best_gcv = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] == gcv.best_lambda) best_gcv = i;
    CHECK(std::abs(static_cast<long>(best_held) - static_cast<long>(best_gcv)) <= 1);
}

TEST_CASE("GCV argument validation") {
    MatD X = testutil::random_matd(5, 2, 91);
    MatD Y = testutil::random_matd(5, 2, 92);
    CHECK_THROWS_AS(select_lambda_gcv(X, Y, {}), config_error);
    CHECK_THROWS_AS(select_lambda_gcv(X, Y, {-1.0}), config_error);
    CHECK_THROWS_AS(select_lambda_gcv(X.topRows(1), Y.topRows(1), {1.0}), numeric_error);
}

TEST_CASE("apply_map") {
    SUBCASE("identity map returns the input") {
        LinearMap map;
        map.weights = MatD::Identity(3, 3);
        MatF X = testutil::random_matf(4, 3, 13);
        CHECK((apply_map(map, X) - X).cwiseAbs().maxCoeff() == 0.0f);
    }
    SUBCASE("row combination through a fitted map") {
        MatD Y = matd({{1.0, 2.0}, {3.0, 4.0}});
        LinearMap map = fit_ridge(MatD::Identity(2, 2), Y, 0.0);
        MatD x = matd({{0.0, 1.0}});
        MatD mapped = apply_map(map, x);
        CHECK(mapped(0, 0) == doctest::Approx(3.0));
        CHECK(mapped(0, 1) == doctest::Approx(4.0));
    }
    SUBCASE("zero rows yield an empty result with target columns") {
        LinearMap map;
        map.weights = testutil::random_matd(3, 5, 14);
        MatD empty(0, 3);
        MatD out = apply_map(map, empty);
        CHECK(out.rows() == 0);
        CHECK(out.cols() == 5);
    }
    SUBCASE("shape mismatch") {
        LinearMap map;
        map.weights = MatD::Identity(3, 3);
        CHECK_THROWS_AS(apply_map(map, MatD(2, 4)), numeric_error);
    }
}

TEST_CASE("margin hinge is inactive beyond the margin") {
    // One pair plus one distractor; cos(yhat, pos) - cos(yhat, neg) > gamma.
    MatD W = MatD::Identity(2, 2);
    MatD X = matd({{1.0, 0.0}, {0.0, 1.0}});
    MatD Y = matd({{1.0, 0.0}, {0.0, 1.0}});  // yhat == pos, neg orthogonal
    std::vector<std::vector<Eigen::Index>> negatives{{1}, {}};
    MatD grad;
    double loss = margin_loss(W, X, Y, 0.5, negatives, &grad);
    CHECK(loss == 0.0);
    CHECK(grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("margin subgradient matches finite differences off the hinge") {
    MatD X = testutil::random_matd(6, 3, 101);
    MatD Y = testutil::random_matd(6, 4, 102);
    MatD W = testutil::random_matd(3, 4, 103);
    std::vector<std::vector<Eigen::Index>> negatives{{1, 2}, {0, 3}, {4}, {5, 0}, {2}, {1, 3}};
    double gamma = 0.4;

    MatD grad;
    margin_loss(W, X, Y, gamma, negatives, &grad);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            MatD Wp = W, Wm = W;
            Wp(i, j) += h;
            Wm(i, j) -= h;
            double fd = (margin_loss(Wp, X, Y, gamma, negatives) -
                         margin_loss(Wm, X, Y, gamma, negatives)) /
                        (2.0 * h);
            CHECK(std::abs(grad(i, j) - fd) < 1e-4 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("fit_margin is deterministic and improves on exact data") {
    MatD T = testutil::random_matd(40, 6, 111);
    MatD B = testutil::random_matd(6, 6, 112);
    MatD X = T * B;  // exact linear relation
    MarginConfig cfg;
    cfg.gamma = 0.1;
    cfg.negatives = 3;
    cfg.epochs = 5;
    cfg.seed = 9;

    MarginFit fit1 = fit_margin(X, T, cfg);
    MarginFit fit2 = fit_margin(X, T, cfg);
    CHECK(fit1.map.weights == fit2.map.weights);  // bit identical
    CHECK(fit1.map.objective == Objective::Margin);
    CHECK(fit1.map.lambda == 0.0);

    REQUIRE(fit1.heldout_loss.size() == 5);
    for (std::size_t e = 1; e < fit1.heldout_loss.size(); ++e)
        CHECK(fit1.heldout_loss[e] <= fit1.heldout_loss[e - 1] + 1e-12);
}

TEST_CASE("fit_margin tunes gamma and k on the held-out split") {
    MatD T = testutil::random_matd(32, 5, 121);
    MatD B = testutil::random_matd(5, 5, 122);
    MatD X = T * B;
    MarginConfig cfg;
    cfg.tune = true;
    cfg.gamma_grid = {0.1, 0.5};
    cfg.negative_grid = {2, 4};
    cfg.epochs = 3;
    cfg.seed = 77;
    MarginFit fit = fit_margin(X, T, cfg);
    CHECK((fit.chosen_gamma == 0.1 || fit.chosen_gamma == 0.5));
    CHECK((fit.chosen_negatives == 2 || fit.chosen_negatives == 4));
    CHECK(fit.map.meta.gamma == fit.chosen_gamma);

    MarginFit again = fit_margin(X, T, cfg);
    CHECK(fit.map.weights == again.map.weights);
}

TEST_CASE("fit_margin reports divergence with the epoch") {
    MatD X = testutil::random_matd(8, 3, 131);
    X(0, 0) = std::numeric_limits<double>::quiet_NaN();
    MatD Y = testutil::random_matd(8, 3, 132);
    MarginConfig cfg;
    cfg.negatives = 2;
    cfg.epochs = 3;
    CHECK_THROWS_WITH_AS(fit_margin(X, Y, cfg), doctest::Contains("epoch"), numeric_error);
}

TEST_CASE("linear map serialization round trips exactly") {
    MatD X = testutil::random_matd(12, 4, 141);
    MatD Y = testutil::random_matd(12, 3, 142);
    LinearMap map = fit_ridge(X, Y, 0.125);

    std::stringstream ss;
    write_linear_map(map, ss);
    LinearMap loaded = read_linear_map(ss, "stream");
    CHECK(loaded.weights == map.weights);  // 17 significant digits round trip
    CHECK(loaded.lambda == map.lambda);
    CHECK(loaded.objective == Objective::Ridge);

    SUBCASE("file round trip") {
        testutil::TempFile file("");
        save_linear_map(map, file.path());
        LinearMap from_file = load_linear_map(file.path());
        CHECK(from_file.weights == map.weights);
    }
    SUBCASE("bad header") {
        std::stringstream bad("3 x nope\n");
        CHECK_THROWS_AS(read_linear_map(bad, "bad"), parse_error);
    }
    SUBCASE("truncated body") {
        std::stringstream bad("2 2 0 ridge\n1 2\n3\n");
        CHECK_THROWS_AS(read_linear_map(bad, "bad"), parse_error);
    }
}
