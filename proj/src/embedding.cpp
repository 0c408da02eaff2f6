/**
 * zsmap - zero-shot vector-space mapping with hubness-corrected retrieval
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "zsmap/embedding.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

namespace zsmap {

namespace {

// Splits a line into whitespace-separated fields without copying.
std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

float parse_float(std::string_view s, const std::string& path, std::size_t line_no) {
    float value = 0.0f;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw parse_error(path + ":" + std::to_string(line_no) + ": bad numeric field '" +
                          std::string(s) + "'");
    return value;
}

long parse_count(std::string_view s, const std::string& path, std::size_t line_no) {
    long value = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end || value < 0)
        throw parse_error(path + ":" + std::to_string(line_no) + ": bad header field '" +
                          std::string(s) + "'");
    return value;
}

}  // namespace

EmbeddingSpace::EmbeddingSpace(std::vector<std::string> vocab, MatF matrix, bool normalized)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)), normalized_(normalized) {
    if (static_cast<Eigen::Index>(vocab_.size()) != matrix_.rows())
        throw parse_error("vocab size " + std::to_string(vocab_.size()) +
                          " does not match matrix rows " + std::to_string(matrix_.rows()));
    index_.reserve(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        auto [it, inserted] = index_.emplace(vocab_[i], static_cast<Eigen::Index>(i));
        if (!inserted) throw parse_error("duplicate token '" + vocab_[i] + "'");
    }
}

std::optional<Eigen::Index> EmbeddingSpace::find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int EmbeddingSpace::freq_rank(Eigen::Index row) const {
    if (!explicit_ranks_.empty()) {
        auto it = explicit_ranks_.find(vocab_[static_cast<std::size_t>(row)]);
        if (it != explicit_ranks_.end()) return it->second;
    }
    return static_cast<int>(row) + 1;
}

std::optional<int> EmbeddingSpace::freq_rank_of(std::string_view token) const {
    auto row = find(token);
    if (!row) return std::nullopt;
    return freq_rank(*row);
}

void EmbeddingSpace::set_freq_ranks(std::unordered_map<std::string, int> ranks) {
    for (const auto& [token, rank] : ranks)
        if (rank < 1) throw config_error("frequency rank for '" + token + "' must be positive");
    explicit_ranks_ = std::move(ranks);
}

EmbeddingSpace load_embeddings(const std::string& path, EmbeddingFormat format) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open embedding file '" + path + "'");

    std::string line;
    std::size_t line_no = 0;
    long declared_count = -1;
    long declared_dim = -1;

    if (format == EmbeddingFormat::TextHeader) {
        if (!std::getline(in, line)) throw parse_error(path + ": empty file");
        ++line_no;
        auto fields = split_fields(line);
        if (fields.size() != 2)
            throw parse_error(path + ":1: expected header '<count> <dim>', got '" + line + "'");
        declared_count = parse_count(fields[0], path, 1);
        declared_dim = parse_count(fields[1], path, 1);
    }

    std::vector<std::string> vocab;
    std::vector<float> values;
    long dim = declared_dim;
    if (declared_count > 0) {
        vocab.reserve(static_cast<std::size_t>(declared_count));
        if (declared_dim > 0)
            values.reserve(static_cast<std::size_t>(declared_count * declared_dim));
    }

    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_fields(line);
        if (fields.empty()) continue;  // tolerate trailing blank lines
        if (fields.size() < 2)
            throw parse_error(path + ":" + std::to_string(line_no) + ": row has no vector values");
        long row_dim = static_cast<long>(fields.size()) - 1;
        if (dim < 0) {
            dim = row_dim;
        } else if (row_dim != dim) {
            throw parse_error(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(dim) + " values, got " + std::to_string(row_dim));
        }
        vocab.emplace_back(fields[0]);
        for (long j = 0; j < dim; ++j)
            values.push_back(parse_float(fields[1 + static_cast<std::size_t>(j)], path, line_no));
    }

    if (vocab.empty()) throw parse_error(path + ": empty file");
    if (declared_count >= 0 && static_cast<long>(vocab.size()) != declared_count)
        throw parse_error(path + ": header declares " + std::to_string(declared_count) +
                          " rows but file has " + std::to_string(vocab.size()));

    MatF matrix(static_cast<Eigen::Index>(vocab.size()), static_cast<Eigen::Index>(dim));
    std::copy(values.begin(), values.end(), matrix.data());

    try {
        return EmbeddingSpace(std::move(vocab), std::move(matrix));
    } catch (const parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }
}

void save_embeddings(const EmbeddingSpace& space, const std::string& path,
                     EmbeddingFormat format) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write embedding file '" + path + "'");
    char buf[64];
    if (format == EmbeddingFormat::TextHeader)
        out << space.size() << ' ' << space.dim() << '\n';
    const MatF& m = space.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << space.token(i);
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(m(i, j)));
            out << ' ' << buf;
        }
        out << '\n';
    }
    if (!out) throw io_error("failed writing '" + path + "'");
}

EmbeddingSpace unit_normalize(const EmbeddingSpace& space) {
    if (space.normalized()) return space;  // re-scaling would only add float drift
    MatF scaled = space.matrix();
    for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
        double norm = scaled.row(i).cast<double>().norm();
        if (norm == 0.0)
            throw numeric_error("cannot normalize all-zero vector for token '" + space.token(i) +
                                "'");
        scaled.row(i) *= static_cast<float>(1.0 / norm);
    }
    EmbeddingSpace result(space.vocab(), std::move(scaled), /*normalized=*/true);
    return result;
}

SubsetResult subset(const EmbeddingSpace& space, std::span<const std::string> tokens) {
    SubsetResult result;
    result.indices.reserve(tokens.size());
    for (const auto& token : tokens) {
        if (auto row = space.find(token)) {
            result.indices.push_back(*row);
            result.found.push_back(token);
        } else {
            result.missing.push_back(token);
        }
    }
    result.rows.resize(static_cast<Eigen::Index>(result.indices.size()), space.dim());
    for (std::size_t i = 0; i < result.indices.size(); ++i)
        result.rows.row(static_cast<Eigen::Index>(i)) = space.matrix().row(result.indices[i]);
    return result;
}

EmbeddingSpace group_average(const EmbeddingSpace& space,
                             const std::unordered_map<std::string, std::string>& label_of) {
    std::vector<std::string> labels;                    // first-appearance order
    std::unordered_map<std::string, std::size_t> slot;  // label -> output row
    std::vector<Eigen::VectorXd> sums;
    std::vector<long> members;

    for (Eigen::Index i = 0; i < space.size(); ++i) {
        auto it = label_of.find(space.token(i));
        if (it == label_of.end()) continue;
        auto [pos, inserted] = slot.emplace(it->second, labels.size());
        if (inserted) {
            labels.push_back(it->second);
            sums.emplace_back(Eigen::VectorXd::Zero(space.dim()));
            members.push_back(0);
        }
        sums[pos->second] += space.matrix().row(i).cast<double>();
        ++members[pos->second];
    }
    if (labels.empty()) throw config_error("group_average: no token matched the label map");

    MatF averaged(static_cast<Eigen::Index>(labels.size()), space.dim());
    for (std::size_t g = 0; g < labels.size(); ++g)
        averaged.row(static_cast<Eigen::Index>(g)) =
            (sums[g] / static_cast<double>(members[g])).cast<float>().transpose();
    return EmbeddingSpace(std::move(labels), std::move(averaged));
}

}  // namespace zsmap
