#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "hcmm/rational.hpp"

namespace hcmm {

enum class PointMode { Integer, Chebyshev };

PointMode parse_point_mode(std::string_view name);
std::string_view to_string(PointMode mode);

// Distinct evaluation points, one per worker (or per subtask for sum-rate
// codes). Index i (0-based) belongs to worker i + 1.
class EvalPointSet {
public:
    // Integer mode: points 1, 2, ..., count.
    // Chebyshev mode: cos((2k - 1) pi / (2 count)) for k = 1..count.
    static EvalPointSet make(PointMode mode, std::size_t count);

    // Throws Error if any two points coincide.
    EvalPointSet(std::vector<double> points, PointMode mode);

    std::size_t size() const noexcept { return points_.size(); }
    PointMode mode() const noexcept { return mode_; }
    std::span<const double> points() const noexcept { return points_; }
    double at(std::size_t index) const { return points_.at(index); }

    template <typename T>
    T point_as(std::size_t index) const {
        return T(points_.at(index));
    }

private:
    std::vector<double> points_;
    PointMode mode_;
};

}  // namespace hcmm
