/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#ifndef ZSMAP_TESTS_HELPERS_HPP
#define ZSMAP_TESTS_HELPERS_HPP

#include "zsmap/retrieval.hpp"
#include "zsmap/types.hpp"

#include "oracles.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testutil {

// Scratch file that cleans up after itself.
class TempFile {
public:
    explicit TempFile(const std::string& content, const std::string& suffix = ".txt") {
        static int counter = 0;
        path_ = (std::filesystem::temp_directory_path() /
                 ("zsmap_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) +
                  suffix))
                    .string();
        std::ofstream out(path_);
        out << content;
    }
    ~TempFile() { std::remove(path_.c_str()); }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline oracle::Rows to_rows(const zsmap::MatF& m) {
    oracle::Rows rows(static_cast<std::size_t>(m.rows()),
                      std::vector<float>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return rows;
}

inline oracle::RowsD to_rows(const zsmap::MatD& m) {
    oracle::RowsD rows(static_cast<std::size_t>(m.rows()),
                       std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return rows;
}

inline zsmap::MatF matf(std::initializer_list<std::initializer_list<float>> rows) {
    zsmap::MatF m(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (float v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

inline zsmap::MatD matd(std::initializer_list<std::initializer_list<double>> rows) {
    zsmap::MatD m(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

inline zsmap::MatF random_matf(Eigen::Index rows, Eigen::Index cols, std::uint32_t seed,
                               float lo = -1.0f, float hi = 1.0f) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(lo, hi);
    zsmap::MatF m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

inline zsmap::MatD random_matd(Eigen::Index rows, Eigen::Index cols, std::uint32_t seed,
                               double sigma = 1.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    zsmap::MatD m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

// (target, score) pairs of one result list, for oracle comparisons.
inline std::vector<std::pair<std::int32_t, double>> as_pairs(
    const std::vector<zsmap::Neighbor>& list) {
    std::vector<std::pair<std::int32_t, double>> out;
    out.reserve(list.size());
    for (const auto& n : list) out.emplace_back(n.target, n.score);
    return out;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testutil

#endif  // ZSMAP_TESTS_HELPERS_HPP
