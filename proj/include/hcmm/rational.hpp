#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace hcmm {

using Rational = boost::multiprecision::cpp_rational;

// Conversions between the scalar types the codec is instantiated for.
template <typename T>
T scalar_from_double(double v) {
    return T(v);
}

inline double scalar_to_double(double v) { return v; }
inline double scalar_to_double(const Rational& v) { return v.convert_to<double>(); }

}  // namespace hcmm
