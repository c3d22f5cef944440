#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hcmm/error.hpp"
#include "hcmm/rational.hpp"

namespace hcmm {

// Half-open index range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return end == begin; }
    bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

// Dense row-major matrix. Instantiated for double (the working type) and
// Rational (exact decoding).
template <typename T>
class BasicMatrix {
public:
    using value_type = T;

    BasicMatrix() = default;
    BasicMatrix(std::size_t rows, std::size_t cols);
    // Throws DimensionError if data.size() != rows * cols and Error on
    // non-finite entries.
    BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data);

    static BasicMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const T> data() const noexcept { return data_; }
    std::span<T> data() noexcept { return data_; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    // this += weight * other, entry-wise.
    void add_scaled(const T& weight, const BasicMatrix& other);

    friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using RationalMatrix = BasicMatrix<Rational>;

template <typename T>
BasicMatrix<T> mat_mul(const BasicMatrix<T>& a, const BasicMatrix<T>& b);

template <typename T>
BasicMatrix<T> operator+(const BasicMatrix<T>& a, const BasicMatrix<T>& b);

template <typename T>
BasicMatrix<T> operator-(const BasicMatrix<T>& a, const BasicMatrix<T>& b);

// Copies the block rows x cols out of m.
template <typename T>
BasicMatrix<T> slice_block(const BasicMatrix<T>& m, IndexRange rows, IndexRange cols);

// Like slice_block, but the result is padded with zeros to out_rows x out_cols.
template <typename T>
BasicMatrix<T> slice_block_padded(const BasicMatrix<T>& m, IndexRange rows, IndexRange cols,
                                  std::size_t out_rows, std::size_t out_cols);

// Returns dest with the block at (row_offset, col_offset) replaced by src.
template <typename T>
BasicMatrix<T> place_block(BasicMatrix<T> dest, const BasicMatrix<T>& src,
                           std::size_t row_offset, std::size_t col_offset);

// In-place variant used by assembly loops.
template <typename T>
void place_block_into(BasicMatrix<T>& dest, const BasicMatrix<T>& src, std::size_t row_offset,
                      std::size_t col_offset);

RationalMatrix to_rational(const Matrix& m);
Matrix to_double(const RationalMatrix& m);
inline const Matrix& to_double(const Matrix& m) { return m; }

double frobenius_norm(const Matrix& m);
// ||a - b||_F / ||b||_F, or ||a - b||_F when b is zero.
double relative_error(const Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace hcmm
