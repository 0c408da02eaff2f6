/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#ifndef ZSMAP_LINEAR_MAP_HPP
#define ZSMAP_LINEAR_MAP_HPP

#include "zsmap/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace zsmap {

enum class Objective { Ridge, Margin };

struct TrainMeta {
    Eigen::Index train_rows = 0;
    // Margin-specific; zero/default for ridge fits.
    double gamma = 0.0;
    int negatives = 0;
    int epochs = 0;
    std::uint64_t seed = 0;
};

/// The learned source->target matrix. Rows map via x^T W, so weights are
/// (source dim) x (target dim). Immutable after fit.
struct LinearMap {
    MatD weights;
    double lambda = 0.0;  // 0 when objective is Margin
    Objective objective = Objective::Ridge;
    TrainMeta meta;

    Eigen::Index source_dim() const { return weights.rows(); }
    Eigen::Index target_dim() const { return weights.cols(); }
};

// Closed-form ridge solution through the SVD of X:
//   W = V diag(d_j / (d_j^2 + lambda)) U^T Y
// minimizing ||XW - Y||_F^2 + lambda ||W||_F^2. With lambda = 0 a
// rank-deficient X raises numeric_error advising lambda > 0.
LinearMap fit_ridge(const MatD& X, const MatD& Y, double lambda);

std::vector<double> default_lambda_grid();  // {0} plus 10^e for e in -4..6

struct GcvResult {
    double best_lambda = 0.0;
    std::vector<double> grid;
    std::vector<double> scores;  // GCV(lambda), aligned with grid
};

// GCV(lambda) = (1/m) sum_i ||Y_i - Yhat_i||^2 / (1 - df(lambda)/m)^2 with
// df(lambda) = sum_j d_j^2/(d_j^2 + lambda). One SVD of X is reused across the
// grid; a grid point with df == m scores +infinity. Ties break toward the
// larger lambda.
GcvResult select_lambda_gcv(const MatD& X, const MatD& Y,
                            const std::vector<double>& grid = default_lambda_grid());

struct MarginConfig {
    double gamma = 0.3;
    int negatives = 5;
    int epochs = 10;
    double heldout_frac = 0.25;
    std::uint64_t seed = 0;
    double learning_rate = 0.1;
    double adagrad_eps = 1e-8;
    // When tune is set, gamma/negatives are selected on the held-out split by
    // accuracy@1 over the candidate grids, then the map is refit on all data.
    bool tune = false;
    std::vector<double> gamma_grid = {0.1, 0.3, 0.5};
    std::vector<int> negative_grid = {5, 10, 25};
};

struct MarginFit {
    LinearMap map;
    std::vector<double> heldout_loss;  // mean hinge per (example, negative), per epoch
    double train_loss = 0.0;           // final-epoch mean hinge on the fitting rows
    double chosen_gamma = 0.0;
    int chosen_negatives = 0;
};

// Margin-based ranking objective: per example, sum over sampled negatives of
// max{0, gamma - cos(yhat, y_pos) + cos(yhat, y_neg)}, minimized by SGD with
// Adagrad per-parameter learning rates. Fully deterministic given cfg.seed.
// Throws numeric_error naming the epoch if the loss becomes non-finite.
MarginFit fit_margin(const MatD& X, const MatD& Y, const MarginConfig& cfg);

// Hinge loss and its dW gradient for fixed negative assignments; the SGD
// trainer and the finite-difference tests share this definition.
double margin_loss(const MatD& W, const MatD& X, const MatD& Y, double gamma,
                   const std::vector<std::vector<Eigen::Index>>& negatives,
                   MatD* grad_out = nullptr);

// Returns X W; rows are not re-normalized (normalization is a retrieval-side
// concern). n = 0 rows yields an empty matrix with target_dim columns.
MatD apply_map(const LinearMap& map, const MatD& X);
MatF apply_map(const LinearMap& map, const MatF& X);

// Text serialization: header "u v lambda objective", then u rows of v values
// at 17 significant digits (round-trip exact for 64-bit floats).
void save_linear_map(const LinearMap& map, const std::string& path);
LinearMap load_linear_map(const std::string& path);
void write_linear_map(const LinearMap& map, std::ostream& out);
LinearMap read_linear_map(std::istream& in, const std::string& name);

}  // namespace zsmap

#endif  // ZSMAP_LINEAR_MAP_HPP
