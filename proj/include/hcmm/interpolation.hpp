#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hcmm/matrix.hpp"

namespace hcmm {

// Inverse of the Vandermonde matrix V[s][m] = points[s]^m. For a polynomial
// with coefficient vector c and values v at the points, c = W * v.
//
// The double instantiation factors V in extended precision; the Rational
// instantiation is exact. Throws Error on duplicate points or an empty set.
template <typename T>
BasicMatrix<T> interpolation_weights(std::span<const T> points);

// One sample of a matrix-valued polynomial.
template <typename T>
struct PolyEvaluation {
    T point;
    std::reference_wrapper<const BasicMatrix<T>> value;
};

// Recovers the coefficient matrices C_0..C_{k-1} of P(x) = sum_m C_m x^m from
// at least k samples. With more than k samples the k smallest points are used.
// Throws NotEnoughResults when fewer than k samples are given.
template <typename T>
std::vector<BasicMatrix<T>> interpolate_matrix_poly(std::span<const PolyEvaluation<T>> evals,
                                                    std::size_t coefficient_count);

}  // namespace hcmm
