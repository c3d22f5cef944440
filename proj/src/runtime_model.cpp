#include "hcmm/runtime_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hcmm {

void RuntimeParams::validate() const {
    if (n_workers == 0) throw Error("runtime model needs at least one worker");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw Error("mu must be positive");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("alpha must be non-negative");
}

WorkerTimeline::WorkerTimeline(std::vector<double> total_times)
    : total_times_(std::move(total_times)), sorted_(total_times_) {
    if (total_times_.empty()) throw Error("timeline needs at least one worker");
    std::sort(sorted_.begin(), sorted_.end());
}

double WorkerTimeline::order_stat(std::size_t k) const {
    if (k == 0 || k > sorted_.size()) {
        throw InfeasibleCode("order statistic " + std::to_string(k) + " out of range for " +
                             std::to_string(sorted_.size()) + " workers");
    }
    return sorted_[k - 1];
}

std::uint64_t substream_seed(std::uint64_t base_seed, std::uint64_t stream) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(base_seed) ^ (stream * 0xd1342543de82ef95ULL + 1));
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

WorkerTimeline sample_worker_times(const RuntimeParams& params, std::uint64_t seed) {
    params.validate();
    std::mt19937_64 rng(seed);
    std::vector<double> times(params.n_workers);
    for (auto& t : times) t = params.alpha - params.mu * std::log1p(-uniform01(rng));
    return WorkerTimeline(std::move(times));
}

FinishingTime hier_finishing_time(const Profile& profile, const WorkerTimeline& timeline) {
    profile.validate_for(timeline.workers());
    const auto k_sum = static_cast<double>(profile.k_sum());
    FinishingTime out;
    out.per_layer_times.reserve(profile.layers());
    for (std::size_t l = 0; l < profile.layers(); ++l) {
        const double t = static_cast<double>(l + 1) * timeline.order_stat(profile.threshold(l)) / k_sum;
        out.per_layer_times.push_back(t);
        out.tau = std::max(out.tau, t);
    }
    return out;
}

double plain_finishing_time(std::size_t threshold, const WorkerTimeline& timeline) {
    return 1.0 * timeline.order_stat(threshold) / static_cast<double>(threshold);
}

double sumrate_finishing_time(std::size_t k_s, std::size_t layers, const WorkerTimeline& timeline) {
    const auto times = timeline.total_times();
    if (k_s == 0 || k_s > times.size() * layers) {
        throw InfeasibleCode("sum-rate threshold " + std::to_string(k_s) + " exceeds " +
                             std::to_string(times.size() * layers) + " subtasks");
    }
    const auto div = static_cast<double>(k_s);
    std::vector<double> events;
    events.reserve(times.size() * layers);
    for (double t : times) {
        for (std::size_t j = 1; j <= layers; ++j) events.push_back(static_cast<double>(j) * t / div);
    }
    std::nth_element(events.begin(), events.begin() + static_cast<std::ptrdiff_t>(k_s - 1),
                     events.end());
    return events[k_s - 1];
}

ExpectationMode parse_expectation_mode(std::string_view name) {
    if (name == "exact") return ExpectationMode::Exact;
    if (name == "log" || name == "logapprox") return ExpectationMode::LogApprox;
    throw Error("unknown expectation mode '" + std::string(name) + "' (expected exact|log)");
}

std::string_view to_string(ExpectationMode mode) {
    return mode == ExpectationMode::Exact ? "exact" : "log";
}

double expected_order_stat(std::size_t k, const RuntimeParams& params) {
    params.validate();
    const std::size_t n = params.n_workers;
    if (k == 0 || k > n) {
        throw InfeasibleCode("order statistic " + std::to_string(k) + " out of range for " +
                             std::to_string(n) + " workers");
    }
    // Smallest terms first.
    double h = 0.0;
    for (std::size_t i = n; i > n - k; --i) h += 1.0 / static_cast<double>(i);
    return params.alpha + params.mu * h;
}

double order_stat_bracket(std::size_t k, const RuntimeParams& params, ExpectationMode mode) {
    if (mode == ExpectationMode::Exact) return expected_order_stat(k, params);
    params.validate();
    const std::size_t n = params.n_workers;
    if (k == 0 || k >= n) {
        throw InfeasibleCode("log approximation needs 1 <= K < N; got K=" + std::to_string(k) +
                             ", N=" + std::to_string(n));
    }
    return params.alpha +
           params.mu * std::log(static_cast<double>(n) / static_cast<double>(n - k));
}

ExpectedFinish expected_finishing_time(const Profile& profile, const RuntimeParams& params,
                                       ExpectationMode mode) {
    profile.validate_for(params.n_workers);
    const auto k_sum = static_cast<double>(profile.k_sum());
    ExpectedFinish best;
    for (std::size_t l = 0; l < profile.layers(); ++l) {
        const double v =
            static_cast<double>(l + 1) * order_stat_bracket(profile.threshold(l), params, mode) / k_sum;
        if (l == 0 || v > best.value) best = {v, l};
    }
    return best;
}

std::string_view to_string(DecodeMode mode) {
    switch (mode) {
        case DecodeMode::SerialHier: return "serial_hier";
        case DecodeMode::ParallelHier: return "parallel_hier";
        case DecodeMode::SumRate: return "sumrate";
        case DecodeMode::Plain: return "plain";
    }
    return "?";
}

double polynomial_decode_cost(std::size_t k) {
    if (k == 0) throw Error("decode cost needs a threshold >= 1");
    const double lg = std::log2(static_cast<double>(std::max<std::size_t>(k, 2)));
    return static_cast<double>(k) * lg * lg;
}

double decode_cost(std::span<const std::size_t> thresholds, DecodeMode mode,
                   double polys_per_layer) {
    if (thresholds.empty()) throw Error("decode cost needs at least one threshold");
    if ((mode == DecodeMode::SumRate || mode == DecodeMode::Plain) && thresholds.size() != 1) {
        throw Error("single-code decode cost takes exactly one threshold");
    }
    double total = 0.0;
    double worst = 0.0;
    for (auto k : thresholds) {
        const double c = polys_per_layer * polynomial_decode_cost(k);
        total += c;
        worst = std::max(worst, c);
    }
    return mode == DecodeMode::ParallelHier ? worst : total;
}

}  // namespace hcmm
