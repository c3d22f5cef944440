#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "hcmm/runtime_model.hpp"

using namespace hcmm;

namespace {

// Walks every worker's subtask schedule j * T_n / k_sum and records when layer
// l first has K_l finishers. Independent of the order-statistic shortcut.
double simulate_hier(const std::vector<std::size_t>& ks, const std::vector<double>& t) {
    std::size_t k_sum = 0;
    for (auto k : ks) k_sum += k;
    double tau = 0.0;
    for (std::size_t l = 0; l < ks.size(); ++l) {
        std::vector<double> done;
        for (double tn : t) done.push_back(static_cast<double>(l + 1) * tn / static_cast<double>(k_sum));
        std::sort(done.begin(), done.end());
        tau = std::max(tau, done[ks[l] - 1]);
    }
    return tau;
}

double harmonic(std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t i = from; i <= to; ++i) s += 1.0 / static_cast<double>(i);
    return s;
}

}  // namespace

TEST_CASE("params validation") {
    CHECK_THROWS_AS((RuntimeParams{0, 1.0, 0.0}.validate()), Error);
    CHECK_THROWS_AS((RuntimeParams{4, 0.0, 0.0}.validate()), Error);
    CHECK_THROWS_AS((RuntimeParams{4, 1.0, -1.0}.validate()), Error);
    CHECK_NOTHROW((RuntimeParams{4, 1.0, 0.0}.validate()));
}

TEST_CASE("sampling") {
    const RuntimeParams tiny{50, 1e-12, 5.0};
    const auto degenerate = sample_worker_times(tiny, 3);
    for (double t : degenerate.total_times()) CHECK(std::abs(t - 5.0) <= 1e-6);

    const RuntimeParams p{100000, 2.0, 0.5};
    const auto tl = sample_worker_times(p, 17);
    double mean = 0.0;
    for (double t : tl.total_times()) {
        CHECK(t >= 0.5);
        mean += t;
    }
    mean /= 100000.0;
    // exponential standard deviation equals its mean
    CHECK(std::abs(mean - 2.5) <= 3.0 * 2.0 / std::sqrt(100000.0));

    const auto again = sample_worker_times(p, 17);
    CHECK(std::equal(tl.total_times().begin(), tl.total_times().end(), again.total_times().begin()));
    CHECK(substream_seed(1, 0) != substream_seed(1, 1));
    CHECK(substream_seed(1, 0) != substream_seed(2, 0));
}

TEST_CASE("hand-simulated finishing times") {
    const WorkerTimeline tl({4, 8, 12, 16});
    const auto f = hier_finishing_time(Profile({2, 1}), tl);
    CHECK(f.tau == doctest::Approx(8.0 / 3.0));
    REQUIRE(f.per_layer_times.size() == 2);
    CHECK(f.per_layer_times[0] == doctest::Approx(8.0 / 3.0));
    CHECK(f.per_layer_times[1] == doctest::Approx(8.0 / 3.0));

    CHECK(sumrate_finishing_time(3, 2, tl) == doctest::Approx(8.0 / 3.0));
    CHECK(plain_finishing_time(3, tl) == doctest::Approx(4.0));
    CHECK(hier_finishing_time(Profile({3}), tl).tau == plain_finishing_time(3, tl));
    CHECK(sumrate_finishing_time(3, 1, tl) == plain_finishing_time(3, tl));
}

TEST_CASE("equal speeds") {
    const WorkerTimeline tl(std::vector<double>(6, 3.0));
    const Profile p({4, 4, 2});
    CHECK(hier_finishing_time(p, tl).tau == doctest::Approx(3.0 * 3.0 / 10.0));
    for (std::size_t k = 1; k <= 18; ++k) {
        const double want = std::ceil(static_cast<double>(k) / 6.0) * 3.0 / static_cast<double>(k);
        CHECK(sumrate_finishing_time(k, 3, tl) == doctest::Approx(want));
    }
}

TEST_CASE("threshold errors") {
    const WorkerTimeline tl({1, 2, 3});
    CHECK_THROWS_AS(hier_finishing_time(Profile({4}), tl), Error);
    CHECK_THROWS_AS(plain_finishing_time(4, tl), Error);
    CHECK_THROWS_AS(sumrate_finishing_time(7, 2, tl), Error);
    CHECK_THROWS_AS(tl.order_stat(0), Error);
}

TEST_CASE("hier finishing time against event simulation, dominance, monotonicity") {
    std::mt19937_64 rng(5);
    const RuntimeParams params{12, 1.0, 0.1};
    for (int trial = 0; trial < 300; ++trial) {
        const auto tl = sample_worker_times(params, rng());
        const std::vector<double> t(tl.total_times().begin(), tl.total_times().end());
        std::vector<std::size_t> ks;
        std::size_t prev = 1 + rng() % 12;
        const std::size_t layers = 1 + rng() % 5;
        for (std::size_t l = 0; l < layers; ++l) {
            ks.push_back(prev);
            prev = 1 + rng() % prev;
        }
        const Profile p(ks);
        const double tau = hier_finishing_time(p, tl).tau;
        CHECK(tau == doctest::Approx(simulate_hier(ks, t)).epsilon(1e-14));
        CHECK(sumrate_finishing_time(p.k_sum(), layers, tl) <= tau);

        // slowing one worker cannot help
        auto slower = t;
        slower[rng() % slower.size()] *= 1.5;
        CHECK(hier_finishing_time(p, WorkerTimeline(slower)).tau >= tau);
    }
}

TEST_CASE("layer completion is monotone in its threshold at a fixed subtask period") {
    std::mt19937_64 rng(6);
    const RuntimeParams params{10, 1.0, 0.2};
    for (int trial = 0; trial < 200; ++trial) {
        const auto tl = sample_worker_times(params, rng());
        const Profile p({6, 4, 2});
        const auto base = hier_finishing_time(p, tl);
        for (std::size_t l = 0; l < 3; ++l) {
            std::vector<std::size_t> ks(p.thresholds().begin(), p.thresholds().end());
            if (l > 0 && ks[l] + 1 > ks[l - 1]) continue;
            ++ks[l];
            const Profile raised(ks);
            // undo the k_sum change so both schedules share the same period
            const auto r = hier_finishing_time(raised, tl);
            const double scale = static_cast<double>(raised.k_sum()) / static_cast<double>(p.k_sum());
            CHECK(r.per_layer_times[l] * scale >= base.per_layer_times[l]);
        }
    }
}

TEST_CASE("scale equivariance") {
    const RuntimeParams p{20, 0.7, 0.05};
    const RuntimeParams scaled{20, 0.7 * 4.0, 0.05 * 4.0};
    const auto a = sample_worker_times(p, 9);
    const auto b = sample_worker_times(scaled, 9);
    const Profile prof({9, 5, 2});
    CHECK(hier_finishing_time(prof, b).tau == doctest::Approx(4.0 * hier_finishing_time(prof, a).tau));
    CHECK(sumrate_finishing_time(16, 3, b) == doctest::Approx(4.0 * sumrate_finishing_time(16, 3, a)));
    CHECK(expected_finishing_time(prof, scaled, ExpectationMode::Exact).value ==
          doctest::Approx(4.0 * expected_finishing_time(prof, p, ExpectationMode::Exact).value));
}

TEST_CASE("expected order statistics") {
    const RuntimeParams p{200, 1.0, 0.01};
    CHECK(expected_order_stat(1, p) == doctest::Approx(0.01 + 1.0 / 200.0));
    CHECK(expected_order_stat(200, p) == doctest::Approx(0.01 + harmonic(1, 200)));
    CHECK(expected_order_stat(29, p) == doctest::Approx(0.01 + harmonic(172, 200)));
    CHECK(expected_order_stat(29, p) == doctest::Approx(0.1662).epsilon(1e-3));
    CHECK_THROWS_AS(expected_order_stat(0, p), Error);
    CHECK_THROWS_AS(expected_order_stat(201, p), Error);
}

TEST_CASE("expected finishing time") {
    const RuntimeParams p{200, 1.0, 0.01};
    const auto log1 = expected_finishing_time(Profile({29}), p, ExpectationMode::LogApprox);
    CHECK(log1.value == doctest::Approx((0.01 + std::log(200.0 / 171.0)) / 29.0).epsilon(1e-12));
    CHECK(log1.value == doctest::Approx(5.747e-3).epsilon(1e-3));
    CHECK(log1.argmax_layer == 0);

    const auto eq = expected_finishing_time(Profile({7, 7, 7}), p, ExpectationMode::Exact);
    CHECK(eq.argmax_layer == 2);

    const RuntimeParams small{5, 1.0, 0.0};
    CHECK_THROWS_AS(expected_finishing_time(Profile({5}), small, ExpectationMode::LogApprox), Error);
    CHECK_NOTHROW(expected_finishing_time(Profile({5}), small, ExpectationMode::Exact));

    for (std::size_t k = 1; k <= 180; ++k) {
        const double exact = order_stat_bracket(k, p, ExpectationMode::Exact);
        const double approx = order_stat_bracket(k, p, ExpectationMode::LogApprox);
        CHECK(std::abs(approx / exact - 1.0) < 0.02);
    }
}

TEST_CASE("expectation mode parsing") {
    CHECK(parse_expectation_mode("exact") == ExpectationMode::Exact);
    CHECK(parse_expectation_mode("log") == ExpectationMode::LogApprox);
    CHECK_THROWS_AS(parse_expectation_mode("bound"), Error);
}

TEST_CASE("decode cost model") {
    auto c = [](double k) { return k * std::pow(std::log2(std::max(k, 2.0)), 2); };
    CHECK(polynomial_decode_cost(1) == doctest::Approx(1.0));
    CHECK(polynomial_decode_cost(16) == doctest::Approx(16.0 * 16.0));

    const std::vector<std::size_t> single{12};
    const double serial = decode_cost(single, DecodeMode::SerialHier, 3.0);
    CHECK(serial == decode_cost(single, DecodeMode::ParallelHier, 3.0));
    CHECK(serial == decode_cost(single, DecodeMode::Plain, 3.0));
    CHECK(serial == doctest::Approx(3.0 * c(12)));

    const std::vector<std::size_t> prof{8, 4, 3, 1};
    const std::vector<std::size_t> ks{16};
    const double s = decode_cost(prof, DecodeMode::SerialHier, 1.0);
    const double par = decode_cost(prof, DecodeMode::ParallelHier, 1.0);
    const double sr = decode_cost(ks, DecodeMode::SumRate, 1.0);
    CHECK(s == doctest::Approx(c(8) + c(4) + c(3) + c(1)));
    CHECK(par == doctest::Approx(c(8)));
    CHECK(s < sr);
    CHECK(par < s);
    CHECK_THROWS_AS(decode_cost(prof, DecodeMode::SumRate, 1.0), Error);
}
