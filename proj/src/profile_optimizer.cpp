#include "hcmm/profile_optimizer.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace hcmm {

std::size_t OptimizerSpec::max_layer_threshold() const {
    return mode == ExpectationMode::LogApprox ? params.n_workers - 1 : params.n_workers;
}

void OptimizerSpec::validate() const {
    params.validate();
    if (layers == 0) throw Error("optimizer needs L >= 1");
    if (total_threshold < layers) {
        throw Error("total threshold K=" + std::to_string(total_threshold) +
                    " is below L=" + std::to_string(layers) + " (every K_l >= 1)");
    }
    const std::size_t cap = max_layer_threshold();
    if (cap == 0 || total_threshold > layers * cap) {
        throw Error("total threshold K=" + std::to_string(total_threshold) + " exceeds L*" +
                    (mode == ExpectationMode::LogApprox ? std::string("(N-1)") : std::string("N")) +
                    "=" + std::to_string(layers * cap));
    }
}

namespace {

// Per-layer objective term (l / K) * g(k); the same arithmetic as
// expected_finishing_time so objectives compare exactly.
class ObjectiveTable {
public:
    explicit ObjectiveTable(const OptimizerSpec& spec)
        : spec_(spec), cap_(spec.max_layer_threshold()), g_(cap_ + 1, 0.0) {
        for (std::size_t k = 1; k <= cap_; ++k) g_[k] = order_stat_bracket(k, spec.params, spec.mode);
    }

    double term(std::size_t layer, std::size_t k) const {
        return static_cast<double>(layer + 1) * g_[k] / static_cast<double>(spec_.total_threshold);
    }

    std::size_t cap() const noexcept { return cap_; }

    // Largest k in [1, cap] with term(layer, k) <= z, or 0 if none.
    std::size_t max_feasible(std::size_t layer, double z) const {
        std::size_t lo = 0;
        std::size_t hi = cap_;
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (term(layer, mid) <= z) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        return lo;
    }

private:
    const OptimizerSpec& spec_;
    std::size_t cap_;
    std::vector<double> g_;
};

}  // namespace

double profile_objective(std::span<const std::size_t> thresholds, const OptimizerSpec& spec) {
    double z = 0.0;
    for (std::size_t l = 0; l < thresholds.size(); ++l) {
        z = std::max(z, static_cast<double>(l + 1) *
                            order_stat_bracket(thresholds[l], spec.params, spec.mode) /
                            static_cast<double>(spec.total_threshold));
    }
    return z;
}

OptimizedProfile optimize_profile(const OptimizerSpec& spec) {
    spec.validate();
    const ObjectiveTable table(spec);
    const std::size_t layers = spec.layers;

    auto capacities = [&](double z) {
        std::vector<std::size_t> ks(layers);
        for (std::size_t l = 0; l < layers; ++l) ks[l] = table.max_feasible(l, z);
        return ks;
    };
    auto feasible = [&](double z) {
        std::size_t sum = 0;
        for (auto k : capacities(z)) {
            if (k == 0) return false;
            sum += k;
        }
        return sum >= spec.total_threshold;
    };

    // The optimum equals one of the finitely many terms, so bisection runs
    // over their sorted set and terminates exactly.
    std::vector<double> candidates;
    candidates.reserve(layers * table.cap());
    for (std::size_t l = 0; l < layers; ++l) {
        for (std::size_t k = 1; k <= table.cap(); ++k) candidates.push_back(table.term(l, k));
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::size_t lo = 0;
    std::size_t hi = candidates.size() - 1;  // feasible: K <= L * cap
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (feasible(candidates[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }

    auto ks = capacities(candidates[lo]);
    std::size_t surplus = 0;
    for (auto k : ks) surplus += k;
    surplus -= spec.total_threshold;
    for (std::size_t l = layers; l-- > 0 && surplus > 0;) {
        const std::size_t cut = std::min(surplus, ks[l] - 1);
        ks[l] -= cut;
        surplus -= cut;
    }
    const double z = profile_objective(ks, spec);
    return {Profile(std::move(ks)), z};
}

OptimizedProfile exhaustive_profile_search(const OptimizerSpec& spec, std::size_t max_candidates) {
    spec.validate();
    const std::size_t layers = spec.layers;
    const std::size_t cap = spec.max_layer_threshold();

    std::vector<std::size_t> current(layers);
    std::vector<std::size_t> best;
    double best_z = std::numeric_limits<double>::infinity();
    std::size_t visited = 0;

    // Fill layer l with values <= upper, leaving `remaining` to distribute.
    std::function<void(std::size_t, std::size_t, std::size_t)> fill =
        [&](std::size_t l, std::size_t upper, std::size_t remaining) {
            const std::size_t left = layers - l - 1;  // layers after this one
            if (l + 1 == layers) {
                if (remaining < 1 || remaining > upper) return;
                current[l] = remaining;
                if (++visited > max_candidates) {
                    throw Error("exhaustive profile search exceeded its budget of " +
                                std::to_string(max_candidates) + " candidates");
                }
                const double z = profile_objective(current, spec);
                if (z < best_z) {
                    best_z = z;
                    best = current;
                }
                return;
            }
            for (std::size_t k = std::min(upper, remaining - left); k >= 1; --k) {
                // The rest must fit in `left` layers each at most k.
                if (remaining - k > left * k) break;
                current[l] = k;
                fill(l + 1, k, remaining - k);
            }
        };
    fill(0, cap, spec.total_threshold);
    if (best.empty()) throw Error("no admissible profile");
    return {Profile(std::move(best)), best_z};
}

}  // namespace hcmm
