/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#ifndef ZSMAP_TYPES_HPP
#define ZSMAP_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace zsmap {

// Row-major throughout: embedding rows are the unit of access everywhere.
// 32-bit floats carry the similarity kernels, 64-bit the regression path.
using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatI = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Error taxonomy maps onto the CLI exit-code contract:
// io_error/config_error -> exit 1 (usage), parse_error/numeric_error -> exit 2.

// File missing or unopenable.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// File exists but its content violates the format contract.
struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerically invalid input or failed computation (singular solve, divergence,
// zero vectors where a direction is required).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration or argument combination.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

// Splits one user-facing seed into independent streams (LCG step + salt).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    return seed * 6364136223846793005ULL + 1442695040888963407ULL + salt;
}

}  // namespace detail

}  // namespace zsmap

#endif  // ZSMAP_TYPES_HPP
