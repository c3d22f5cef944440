#include "hcmm/matrix.hpp"

#include <cmath>
#include <string>

namespace hcmm {

namespace {

bool is_finite(double v) { return std::isfinite(v); }
bool is_finite(const Rational&) { return true; }

std::string shape(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

void check_block(std::size_t rows, std::size_t cols, IndexRange r, IndexRange c) {
    if (r.begin > r.end || c.begin > c.end || r.end > rows || c.end > cols) {
        throw DimensionError("block [" + std::to_string(r.begin) + "," + std::to_string(r.end) +
                             ") x [" + std::to_string(c.begin) + "," + std::to_string(c.end) +
                             ") out of range for " + shape(rows, cols) + " matrix");
    }
}

}  // namespace

template <typename T>
BasicMatrix<T>::BasicMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

template <typename T>
BasicMatrix<T>::BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionError("matrix " + shape(rows_, cols_) + " given " +
                             std::to_string(data_.size()) + " entries");
    }
    for (const auto& v : data_) {
        if (!is_finite(v)) throw Error("matrix entries must be finite");
    }
}

template <typename T>
BasicMatrix<T> BasicMatrix<T>::identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
}

template <typename T>
void BasicMatrix<T>::add_scaled(const T& weight, const BasicMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw DimensionError("add_scaled: " + shape(rows_, cols_) + " vs " +
                             shape(other.rows_, other.cols_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += weight * other.data_[i];
}

template <typename T>
BasicMatrix<T> mat_mul(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("mat_mul: " + shape(a.rows(), a.cols()) + " times " +
                             shape(b.rows(), b.cols()));
    }
    const std::size_t n = a.rows();
    const std::size_t inner = a.cols();
    const std::size_t m = b.cols();
    BasicMatrix<T> c(n, m);
    // i-k-j order: each output entry still accumulates over k in ascending
    // order, so results match the textbook triple loop exactly.
    for (std::size_t i = 0; i < n; ++i) {
        T* out = c.data().data() + i * m;
        for (std::size_t k = 0; k < inner; ++k) {
            const T aik = a(i, k);
            const T* brow = b.data().data() + k * m;
            for (std::size_t j = 0; j < m; ++j) out[j] += aik * brow[j];
        }
    }
    return c;
}

template <typename T>
BasicMatrix<T> operator+(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
    BasicMatrix<T> out = a;
    out.add_scaled(T(1), b);
    return out;
}

template <typename T>
BasicMatrix<T> operator-(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
    BasicMatrix<T> out = a;
    out.add_scaled(T(-1), b);
    return out;
}

template <typename T>
BasicMatrix<T> slice_block(const BasicMatrix<T>& m, IndexRange rows, IndexRange cols) {
    return slice_block_padded(m, rows, cols, rows.size(), cols.size());
}

template <typename T>
BasicMatrix<T> slice_block_padded(const BasicMatrix<T>& m, IndexRange rows, IndexRange cols,
                                  std::size_t out_rows, std::size_t out_cols) {
    check_block(m.rows(), m.cols(), rows, cols);
    if (out_rows < rows.size() || out_cols < cols.size()) {
        throw DimensionError("padded block smaller than the slice");
    }
    BasicMatrix<T> out(out_rows, out_cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows.begin + r, cols.begin + c);
    }
    return out;
}

template <typename T>
void place_block_into(BasicMatrix<T>& dest, const BasicMatrix<T>& src, std::size_t row_offset,
                      std::size_t col_offset) {
    check_block(dest.rows(), dest.cols(), {row_offset, row_offset + src.rows()},
                {col_offset, col_offset + src.cols()});
    for (std::size_t r = 0; r < src.rows(); ++r) {
        for (std::size_t c = 0; c < src.cols(); ++c) dest(row_offset + r, col_offset + c) = src(r, c);
    }
}

template <typename T>
BasicMatrix<T> place_block(BasicMatrix<T> dest, const BasicMatrix<T>& src, std::size_t row_offset,
                           std::size_t col_offset) {
    place_block_into(dest, src, row_offset, col_offset);
    return dest;
}

RationalMatrix to_rational(const Matrix& m) {
    std::vector<Rational> data;
    data.reserve(m.size());
    for (double v : m.data()) data.emplace_back(v);
    return RationalMatrix(m.rows(), m.cols(), std::move(data));
}

Matrix to_double(const RationalMatrix& m) {
    std::vector<double> data;
    data.reserve(m.size());
    for (const auto& v : m.data()) data.push_back(v.convert_to<double>());
    return Matrix(m.rows(), m.cols(), std::move(data));
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

double relative_error(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("relative_error: shape mismatch");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        num += d * d;
        den += b.data()[i] * b.data()[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("max_abs_diff: shape mismatch");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    }
    return worst;
}

#define HCMM_INSTANTIATE_MATRIX(T)                                                              \
    template class BasicMatrix<T>;                                                              \
    template BasicMatrix<T> mat_mul(const BasicMatrix<T>&, const BasicMatrix<T>&);              \
    template BasicMatrix<T> operator+(const BasicMatrix<T>&, const BasicMatrix<T>&);            \
    template BasicMatrix<T> operator-(const BasicMatrix<T>&, const BasicMatrix<T>&);            \
    template BasicMatrix<T> slice_block(const BasicMatrix<T>&, IndexRange, IndexRange);         \
    template BasicMatrix<T> slice_block_padded(const BasicMatrix<T>&, IndexRange, IndexRange,   \
                                               std::size_t, std::size_t);                       \
    template BasicMatrix<T> place_block(BasicMatrix<T>, const BasicMatrix<T>&, std::size_t,     \
                                        std::size_t);                                           \
    template void place_block_into(BasicMatrix<T>&, const BasicMatrix<T>&, std::size_t,         \
                                   std::size_t);

HCMM_INSTANTIATE_MATRIX(double)
HCMM_INSTANTIATE_MATRIX(Rational)

#undef HCMM_INSTANTIATE_MATRIX

}  // namespace hcmm
