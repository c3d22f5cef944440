#include "hcmm/eval_points.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hcmm/error.hpp"

namespace hcmm {

PointMode parse_point_mode(std::string_view name) {
    if (name == "integer") return PointMode::Integer;
    if (name == "chebyshev") return PointMode::Chebyshev;
    throw Error("unknown point mode '" + std::string(name) + "' (expected integer|chebyshev)");
}

std::string_view to_string(PointMode mode) {
    return mode == PointMode::Integer ? "integer" : "chebyshev";
}

EvalPointSet EvalPointSet::make(PointMode mode, std::size_t count) {
    std::vector<double> points(count);
    for (std::size_t k = 0; k < count; ++k) {
        if (mode == PointMode::Integer) {
            points[k] = static_cast<double>(k + 1);
        } else {
            points[k] = std::cos((2.0 * static_cast<double>(k) + 1.0) * std::numbers::pi /
                                 (2.0 * static_cast<double>(count)));
        }
    }
    return EvalPointSet(std::move(points), mode);
}

EvalPointSet::EvalPointSet(std::vector<double> points, PointMode mode)
    : points_(std::move(points)), mode_(mode) {
    std::vector<double> sorted = points_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw Error("evaluation points must be pairwise distinct");
    }
}

}  // namespace hcmm
