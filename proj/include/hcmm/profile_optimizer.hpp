#pragma once

#include <cstddef>
#include <span>

#include "hcmm/runtime_model.hpp"
#include "hcmm/tiling.hpp"

namespace hcmm {

// Choose K_1 >= ... >= K_L >= 1 with sum K minimizing
// z = max_l (l / K) * bracket(K_l).
struct OptimizerSpec {
    std::size_t layers = 1;
    std::size_t total_threshold = 1;
    RuntimeParams params;
    ExpectationMode mode = ExpectationMode::Exact;

    // Largest admissible K_l: N, or N - 1 under the log approximation.
    std::size_t max_layer_threshold() const;
    // Throws Error naming the violated bound.
    void validate() const;
};

struct OptimizedProfile {
    Profile profile;
    double objective = 0.0;
};

double profile_objective(std::span<const std::size_t> thresholds, const OptimizerSpec& spec);

// Bisection over z with per-layer threshold inversion, then trimming of the
// surplus from the last layers.
OptimizedProfile optimize_profile(const OptimizerSpec& spec);

// Enumerates every admissible profile. Throws Error once more than
// `max_candidates` profiles have been visited.
OptimizedProfile exhaustive_profile_search(const OptimizerSpec& spec,
                                           std::size_t max_candidates = 2'000'000);

}  // namespace hcmm
