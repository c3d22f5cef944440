#include "hcmm/interpolation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace hcmm {

namespace {

// Type the Vandermonde system is factored in.
template <typename T>
struct Working {
    using type = T;
};
template <>
struct Working<double> {
    using type = long double;
};

template <typename W>
W magnitude(const W& v) {
    return v < W(0) ? W(-v) : v;
}

template <typename T>
void require_distinct(std::span<const T> points) {
    std::vector<T> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw Error("interpolation points must be pairwise distinct");
    }
}

}  // namespace

template <typename T>
BasicMatrix<T> interpolation_weights(std::span<const T> points) {
    using W = typename Working<T>::type;
    const std::size_t k = points.size();
    if (k == 0) throw Error("interpolation needs at least one point");
    require_distinct(points);

    // Gauss-Jordan on [V | I] with partial pivoting.
    std::vector<std::vector<W>> aug(k, std::vector<W>(2 * k, W(0)));
    for (std::size_t s = 0; s < k; ++s) {
        W power(1);
        const W x(points[s]);
        for (std::size_t m = 0; m < k; ++m) {
            aug[s][m] = power;
            power *= x;
        }
        aug[s][k + s] = W(1);
    }
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (magnitude(aug[r][col]) > magnitude(aug[pivot][col])) pivot = r;
        }
        if (aug[pivot][col] == W(0)) throw Error("singular Vandermonde system");
        std::swap(aug[pivot], aug[col]);
        const W inv = W(1) / aug[col][col];
        for (auto& v : aug[col]) v *= inv;
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col || aug[r][col] == W(0)) continue;
            const W factor = aug[r][col];
            for (std::size_t c = col; c < 2 * k; ++c) aug[r][c] -= factor * aug[col][c];
        }
    }

    BasicMatrix<T> weights(k, k);
    for (std::size_t m = 0; m < k; ++m) {
        for (std::size_t s = 0; s < k; ++s) weights(m, s) = static_cast<T>(aug[m][k + s]);
    }
    return weights;
}

template <typename T>
std::vector<BasicMatrix<T>> interpolate_matrix_poly(std::span<const PolyEvaluation<T>> evals,
                                                    std::size_t coefficient_count) {
    if (coefficient_count == 0) throw Error("polynomial must have at least one coefficient");
    if (evals.size() < coefficient_count) {
        throw NotEnoughResults(evals.size(), coefficient_count);
    }
    std::vector<std::size_t> order(evals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return evals[l].point < evals[r].point; });
    order.resize(coefficient_count);

    std::vector<T> points;
    points.reserve(coefficient_count);
    for (auto idx : order) points.push_back(evals[idx].point);
    const BasicMatrix<T> weights = interpolation_weights<T>(points);

    const auto& first = evals[order.front()].value.get();
    for (auto idx : order) {
        const auto& v = evals[idx].value.get();
        if (v.rows() != first.rows() || v.cols() != first.cols()) {
            throw DimensionError("polynomial samples differ in shape");
        }
    }

    std::vector<BasicMatrix<T>> coeffs;
    coeffs.reserve(coefficient_count);
    for (std::size_t m = 0; m < coefficient_count; ++m) {
        BasicMatrix<T> c(first.rows(), first.cols());
        for (std::size_t s = 0; s < coefficient_count; ++s) {
            if (weights(m, s) != T(0)) c.add_scaled(weights(m, s), evals[order[s]].value.get());
        }
        coeffs.push_back(std::move(c));
    }
    return coeffs;
}

template BasicMatrix<double> interpolation_weights(std::span<const double>);
template BasicMatrix<Rational> interpolation_weights(std::span<const Rational>);
template std::vector<BasicMatrix<double>> interpolate_matrix_poly(
    std::span<const PolyEvaluation<double>>, std::size_t);
template std::vector<BasicMatrix<Rational>> interpolate_matrix_poly(
    std::span<const PolyEvaluation<Rational>>, std::size_t);

}  // namespace hcmm
