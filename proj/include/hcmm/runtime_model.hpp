#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "hcmm/tiling.hpp"

namespace hcmm {

// Shifted-exponential worker speeds: P(T < t) = 1 - exp(-(t - alpha) / mu).
struct RuntimeParams {
    std::size_t n_workers = 1;
    double mu = 1.0;
    double alpha = 0.0;

    void validate() const;
};

// T_n: time worker n would take to compute all of AB alone.
class WorkerTimeline {
public:
    explicit WorkerTimeline(std::vector<double> total_times);

    std::size_t workers() const noexcept { return total_times_.size(); }
    std::span<const double> total_times() const noexcept { return total_times_; }
    // k-th smallest total time, k in [1, N].
    double order_stat(std::size_t k) const;

private:
    std::vector<double> total_times_;
    std::vector<double> sorted_;
};

struct FinishingTime {
    double tau = 0.0;
    std::vector<double> per_layer_times;
};

// Seed of trial `stream` derived from a base seed (splitmix64 of both), so each
// Monte Carlo trial owns an independent generator.
std::uint64_t substream_seed(std::uint64_t base_seed, std::uint64_t stream);

// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);

WorkerTimeline sample_worker_times(const RuntimeParams& params, std::uint64_t seed);

// Layer l (1-based) completes at l * T_(K_l) / k_sum.
FinishingTime hier_finishing_time(const Profile& profile, const WorkerTimeline& timeline);

// Plain polynomial code with threshold k: T_(k) / k.
double plain_finishing_time(std::size_t threshold, const WorkerTimeline& timeline);

// k_s-th smallest of the events j * T_n / k_s, j = 1..L.
double sumrate_finishing_time(std::size_t k_s, std::size_t layers, const WorkerTimeline& timeline);

enum class ExpectationMode { Exact, LogApprox };

ExpectationMode parse_expectation_mode(std::string_view name);
std::string_view to_string(ExpectationMode mode);

// E[T_(k:N)] = alpha + mu * sum_{i=N-k+1}^{N} 1/i.
double expected_order_stat(std::size_t k, const RuntimeParams& params);

// Exact: expected_order_stat. LogApprox: alpha + mu * ln(N / (N - k)),
// which requires k < N.
double order_stat_bracket(std::size_t k, const RuntimeParams& params, ExpectationMode mode);

struct ExpectedFinish {
    double value = 0.0;
    std::size_t argmax_layer = 0;  // 0-based
};

// max_l (l / k_sum) * bracket(K_l).
ExpectedFinish expected_finishing_time(const Profile& profile, const RuntimeParams& params,
                                       ExpectationMode mode);

enum class DecodeMode { SerialHier, ParallelHier, SumRate, Plain };

std::string_view to_string(DecodeMode mode);

// Interpolation cost model k * log2(max(k, 2))^2.
double polynomial_decode_cost(std::size_t k);

// SerialHier sums and ParallelHier maximizes polys * c(K_l) over layers.
// SumRate and Plain take exactly one threshold.
double decode_cost(std::span<const std::size_t> thresholds, DecodeMode mode,
                   double polys_per_layer);

}  // namespace hcmm
