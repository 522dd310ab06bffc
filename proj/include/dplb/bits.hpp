#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dplb/errors.hpp"

namespace dplb {

using BinaryWord = std::vector<std::uint8_t>;

// Dense row-major 0/1 matrix. One byte per bit: tracing reads columns out of
// order, so bit-packing would cost more than it saves at the sizes used here.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols, std::uint8_t fill = 0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::uint8_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::uint8_t& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<const std::uint8_t> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<std::uint8_t> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    BinaryWord row_word(std::size_t i) const {
        return BinaryWord(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                          data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    }

    std::size_t column_popcount(std::size_t j) const {
        std::size_t count = 0;
        for (std::size_t i = 0; i < rows_; ++i) count += (*this)(i, j);
        return count;
    }

    double column_mean(std::size_t j) const {
        if (rows_ == 0) throw ConfigError("BitMatrix::column_mean: empty matrix");
        return static_cast<double>(column_popcount(j)) / static_cast<double>(rows_);
    }

    bool operator==(const BitMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint8_t> data_;
};

}  // namespace dplb
