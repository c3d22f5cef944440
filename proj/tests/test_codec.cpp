#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hcmm/codec.hpp"

using namespace hcmm;

namespace {

RationalMatrix int_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
    RationalMatrix m(r, c);
    for (auto& v : m.data()) v = Rational(static_cast<int>(rng() % 7) - 3);
    return m;
}

Matrix real_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(r, c);
    for (auto& v : m.data()) v = u(rng);
    return m;
}

// sum_k chunks[k] * x^(k * stride), evaluated directly.
RationalMatrix poly_at(const std::vector<RationalMatrix>& chunks, std::size_t stride, const Rational& x) {
    RationalMatrix acc(chunks.front().rows(), chunks.front().cols());
    for (std::size_t k = 0; k < chunks.size(); ++k) {
        Rational p(1);
        for (std::size_t e = 0; e < k * stride; ++e) p *= x;
        acc.add_scaled(p, chunks[k]);
    }
    return acc;
}

template <typename T>
std::vector<CompletedResult<T>> layer_results(const std::vector<WorkerTasks<T>>& tasks, std::size_t layer,
                                              const std::vector<std::size_t>& workers) {
    std::vector<CompletedResult<T>> out;
    for (auto w : workers) out.push_back(execute_task(tasks[w][layer]));
    return out;
}

std::vector<std::size_t> all_workers(std::size_t n) {
    std::vector<std::size_t> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = i;
    return w;
}

}  // namespace

TEST_CASE("backend parsing") {
    CHECK(parse_backend("exact") == Backend::Exact);
    CHECK(parse_backend("float") == Backend::Float);
    CHECK_THROWS_AS(parse_backend("fixed"), Error);
}

TEST_CASE("coefficient positions are a bijection onto 0..K-1") {
    for (std::size_t mx = 1; mx <= 6; ++mx) {
        for (std::size_t my = 1; my <= 6; ++my) {
            std::set<std::size_t> seen;
            for (std::size_t i = 0; i < mx; ++i) {
                for (std::size_t j = 0; j < my; ++j) seen.insert(coefficient_index(i, j, mx));
            }
            CHECK(seen.size() == mx * my);
            CHECK(*seen.rbegin() == mx * my - 1);
        }
    }
}

TEST_CASE("3x4 grid encodes A with stride 1 and B with stride 3") {
    std::mt19937_64 rng(1);
    const auto a = int_matrix(6, 3, rng);
    const auto b = int_matrix(3, 12, rng);
    const auto plan = build_tile_plan(6, 3, 12, Profile({12}), std::vector<LayerGrid>{{3, 4}});
    const auto pts = EvalPointSet::make(PointMode::Integer, 12);
    const auto tasks = encode_hier(a, b, plan, pts, 12);
    std::vector<RationalMatrix> ac;
    std::vector<RationalMatrix> bc;
    for (int i = 0; i < 3; ++i) ac.push_back(slice_block(a, {2u * i, 2u * i + 2}, {0, 3}));
    for (int j = 0; j < 4; ++j) bc.push_back(slice_block(b, {0, 3}, {3u * j, 3u * j + 3}));
    for (std::size_t n = 0; n < 12; ++n) {
        const Rational x(static_cast<int>(n) + 1);
        CHECK(tasks[n][0].point == x);
        CHECK(tasks[n][0].a_hat == poly_at(ac, 1, x));
        CHECK(tasks[n][0].b_hat == poly_at(bc, 3, x));
    }
}

TEST_CASE("(8,4,3,1) encoder listing") {
    std::mt19937_64 rng(2);
    const auto a = int_matrix(16, 4, rng);
    const auto b = int_matrix(4, 16, rng);
    const auto plan = build_tile_plan(16, 4, 16, Profile({8, 4, 3, 1}),
                                      std::vector<LayerGrid>{{4, 2}, {4, 1}, {3, 1}, {1, 1}});
    const auto tasks = encode_hier(a, b, plan, EvalPointSet::make(PointMode::Integer, 8), 8);
    REQUIRE(tasks.size() == 8);
    for (const auto& w : tasks) REQUIRE(w.size() == 4);

    std::vector<RationalMatrix> a1;
    for (std::size_t i = 0; i < 4; ++i) a1.push_back(slice_block(a, {4 * i, 4 * i + 4}, {0, 4}));
    std::vector<RationalMatrix> b1{slice_block(b, {0, 4}, {0, 4}), slice_block(b, {0, 4}, {4, 8})};
    for (std::size_t n = 0; n < 8; ++n) {
        const Rational x(static_cast<int>(n) + 1);
        CHECK(tasks[n][0].a_hat == poly_at(a1, 1, x));
        CHECK(tasks[n][0].b_hat == poly_at(b1, 4, x));
        // K_4 = 1: raw chunks, the same for every worker
        CHECK(tasks[n][3].a_hat == a);
        CHECK(tasks[n][3].b_hat == slice_block(b, {0, 4}, {15, 16}));
    }
}

TEST_CASE("layer decoding from different worker sets") {
    std::mt19937_64 rng(3);
    const auto a = int_matrix(16, 5, rng);
    const auto b = int_matrix(5, 16, rng);
    const auto plan = build_tile_plan(16, 5, 16, Profile({8, 4, 3, 1}),
                                      std::vector<LayerGrid>{{4, 2}, {4, 1}, {3, 1}, {1, 1}});
    const auto tasks = encode_hier(a, b, plan, EvalPointSet::make(PointMode::Integer, 16), 16);
    const auto first = decode_layer<Rational>(layer_results(tasks, 0, {0, 1, 2, 3, 4, 5, 6, 7}), plan, 0);
    const auto spread = decode_layer<Rational>(layer_results(tasks, 0, {1, 2, 4, 6, 7, 10, 12, 15}), plan, 0);
    CHECK(first.tiles == spread.tiles);
    const auto& t = plan.layer(0);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(first.at(i, j) == mat_mul(slice_block(a, t.row_chunks[i], {0, 5}),
                                            slice_block(b, {0, 5}, t.col_chunks[j])));
        }
    }
    // degree 7 product: seven values are not enough
    CHECK_THROWS_AS(decode_layer<Rational>(layer_results(tasks, 0, {0, 1, 2, 3, 4, 5, 6}), plan, 0),
                    NotEnoughResults);
    // K_l = 1: any single product is the tile
    const auto last = decode_layer<Rational>(layer_results(tasks, 3, {9}), plan, 3);
    CHECK(last.at(0, 0) == mat_mul(a, slice_block(b, {0, 5}, {15, 16})));
}

TEST_CASE("MDS: every threshold subset decodes the same tiles") {
    std::mt19937_64 rng(4);
    const auto a = int_matrix(16, 3, rng);
    const auto b = int_matrix(3, 16, rng);
    const auto plan = build_tile_plan(16, 3, 16, Profile({8, 4, 3, 1}),
                                      choose_grids(Profile({8, 4, 3, 1}), 16, 3, 16).grids);
    const auto tasks = encode_hier(a, b, plan, EvalPointSet::make(PointMode::Integer, 8), 8);
    for (std::size_t l = 1; l < 4; ++l) {
        const std::size_t k = plan.profile().threshold(l);
        std::optional<TileGrid<Rational>> reference;
        std::vector<bool> mask(8, false);
        std::fill(mask.begin(), mask.begin() + static_cast<long>(k), true);
        std::size_t subsets = 0;
        do {
            std::vector<std::size_t> ws;
            for (std::size_t w = 0; w < 8; ++w) {
                if (mask[w]) ws.push_back(w);
            }
            auto grid = decode_layer<Rational>(layer_results(tasks, l, ws), plan, l);
            if (!reference) reference = grid;
            CHECK(grid.tiles == reference->tiles);
            ++subsets;
        } while (std::prev_permutation(mask.begin(), mask.end()));
        CHECK(subsets == (l == 1 ? 70u : l == 2 ? 56u : 8u));
    }
}

TEST_CASE("earliest results are used and duplicates are rejected") {
    std::mt19937_64 rng(5);
    const auto a = int_matrix(4, 2, rng);
    const auto b = int_matrix(2, 4, rng);
    const auto plan = build_tile_plan(4, 2, 4, Profile({2}), std::vector<LayerGrid>{{2, 1}});
    const auto tasks = encode_hier(a, b, plan, EvalPointSet::make(PointMode::Integer, 4), 4);
    auto results = layer_results(tasks, 0, {0, 1, 2, 3});
    results[0].finish_time = 9.0;
    results[1].finish_time = 8.0;
    results[2].finish_time = 1.0;
    results[3].finish_time = 2.0;
    results[0].product(0, 0) += Rational(1);  // late result, corrupted
    results[1].product(0, 0) += Rational(1);
    const auto grid = decode_layer<Rational>(results, plan, 0);
    CHECK(grid.at(0, 0) == mat_mul(slice_block(a, {0, 2}, {0, 2}), b));

    auto dup = layer_results(tasks, 0, {0, 0});
    CHECK_THROWS_AS(decode_layer<Rational>(dup, plan, 0), Error);
}

TEST_CASE("assembly reproduces the product") {
    std::mt19937_64 rng(6);
    for (std::size_t n_y : {16u, 103u}) {
        const auto a = int_matrix(16, 4, rng);
        const auto b = int_matrix(4, n_y, rng);
        const Profile p({8, 4, 3, 1});
        const auto plan = build_tile_plan(16, 4, n_y, p,
                                          std::vector<LayerGrid>{{4, 2}, {4, 1}, {3, 1}, {1, 1}});
        const auto tasks = encode_hier(a, b, plan, EvalPointSet::make(PointMode::Integer, 8), 8);
        std::vector<std::optional<TileGrid<Rational>>> grids;
        for (std::size_t l = 0; l < 4; ++l) {
            grids.push_back(decode_layer<Rational>(layer_results(tasks, l, all_workers(8)), plan, l));
        }
        std::optional<RationalMatrix> residual;
        if (!plan.residual_cols().empty()) residual = residual_product(a, b, plan);
        CHECK(assemble<Rational>(grids, residual, plan) == mat_mul(a, b));

        grids[2].reset();
        CHECK_THROWS_AS(assemble<Rational>(grids, residual, plan), Error);
    }
}

TEST_CASE("encoding is additive in A") {
    std::mt19937_64 rng(7);
    const auto a = int_matrix(8, 3, rng);
    const auto a2 = int_matrix(8, 3, rng);
    const auto b = int_matrix(3, 8, rng);
    const auto plan = build_tile_plan(8, 3, 8, Profile({4, 2}), choose_grids(Profile({4, 2}), 8, 3, 8).grids);
    const auto pts = EvalPointSet::make(PointMode::Integer, 5);
    const auto t1 = encode_hier(a, b, plan, pts, 5);
    const auto t2 = encode_hier(a2, b, plan, pts, 5);
    const auto ts = encode_hier(a + a2, b, plan, pts, 5);
    for (std::size_t n = 0; n < 5; ++n) {
        for (std::size_t l = 0; l < 2; ++l) CHECK(ts[n][l].a_hat == t1[n][l].a_hat + t2[n][l].a_hat);
    }
}

TEST_CASE("encode_hier needs enough workers and points") {
    std::mt19937_64 rng(8);
    const auto a = int_matrix(8, 2, rng);
    const auto b = int_matrix(2, 8, rng);
    const auto plan = build_tile_plan(8, 2, 8, Profile({4, 2}), choose_grids(Profile({4, 2}), 8, 2, 8).grids);
    CHECK_THROWS_AS(encode_hier(a, b, plan, EvalPointSet::make(PointMode::Integer, 3), 3), InfeasibleCode);
    CHECK_THROWS_AS(encode_hier(a, b, plan, EvalPointSet::make(PointMode::Integer, 4), 6), InfeasibleCode);
}

TEST_CASE("plain code with a 2x2 grid") {
    std::mt19937_64 rng(9);
    const auto a = int_matrix(4, 3, rng);
    const auto b = int_matrix(3, 6, rng);
    const auto layout = make_poly_layout(4, 3, 6, {2, 2});
    CHECK(layout.threshold() == 4);
    const auto tasks = encode_plain(a, b, layout, EvalPointSet::make(PointMode::Integer, 8), 8);
    REQUIRE(tasks.size() == 8);
    const std::vector<RationalMatrix> ac{slice_block(a, {0, 2}, {0, 3}), slice_block(a, {2, 4}, {0, 3})};
    const std::vector<RationalMatrix> bc{slice_block(b, {0, 3}, {0, 3}), slice_block(b, {0, 3}, {3, 6})};
    for (std::size_t n = 0; n < 8; ++n) {
        const Rational x(static_cast<int>(n) + 1);
        CHECK(tasks[n].a_hat == poly_at(ac, 1, x));
        CHECK(tasks[n].b_hat == poly_at(bc, 2, x));
    }

    std::vector<bool> mask(8, false);
    std::fill(mask.begin(), mask.begin() + 4, true);
    std::size_t subsets = 0;
    do {
        std::vector<CompletedResult<Rational>> rs;
        for (std::size_t w = 0; w < 8; ++w) {
            if (mask[w]) rs.push_back(execute_task(tasks[w]));
        }
        CHECK(decode_plain<Rational>(rs, layout) == mat_mul(a, b));
        ++subsets;
    } while (std::prev_permutation(mask.begin(), mask.end()));
    CHECK(subsets == 70);
}

TEST_CASE("plain equals hierarchical with one layer") {
    std::mt19937_64 rng(10);
    const auto a = int_matrix(6, 3, rng);
    const auto b = int_matrix(3, 12, rng);
    const auto pts = EvalPointSet::make(PointMode::Integer, 7);
    const auto plain = encode_plain(a, b, make_poly_layout(6, 3, 12, {3, 2}), pts, 7);
    const auto plan = build_tile_plan(6, 3, 12, Profile({6}), std::vector<LayerGrid>{{3, 2}});
    const auto hier = encode_hier(a, b, plan, pts, 7);
    for (std::size_t n = 0; n < 7; ++n) {
        CHECK(plain[n].point == hier[n][0].point);
        CHECK(plain[n].a_hat == hier[n][0].a_hat);
        CHECK(plain[n].b_hat == hier[n][0].b_hat);
    }
}

TEST_CASE("sum-rate code") {
    std::mt19937_64 rng(11);
    const auto a = int_matrix(8, 2, rng);
    const auto b = int_matrix(2, 8, rng);
    const auto layout = make_poly_layout(8, 2, 8, {4, 4});
    CHECK(layout.threshold() == 16);
    const std::size_t n_workers = 8;
    const std::size_t layers = 4;
    const auto pts = EvalPointSet::make(PointMode::Integer, n_workers * layers);
    const auto tasks = encode_sumrate(a, b, layout, layers, pts, n_workers);
    std::vector<RationalMatrix> ac;
    std::vector<RationalMatrix> bc;
    for (std::size_t i = 0; i < 4; ++i) ac.push_back(slice_block(a, {2 * i, 2 * i + 2}, {0, 2}));
    for (std::size_t j = 0; j < 4; ++j) bc.push_back(slice_block(b, {0, 2}, {2 * j, 2 * j + 2}));
    std::vector<CompletedResult<Rational>> pool;
    for (std::size_t n = 0; n < n_workers; ++n) {
        REQUIRE(tasks[n].size() == layers);
        for (std::size_t i = 0; i < layers; ++i) {
            const Rational x(static_cast<int>(n * layers + i) + 1);
            CHECK(tasks[n][i].point == x);
            CHECK(tasks[n][i].layer == i);
            CHECK(tasks[n][i].a_hat == poly_at(ac, 1, x));
            CHECK(tasks[n][i].b_hat == poly_at(bc, 4, x));
            pool.push_back(execute_task(tasks[n][i]));
        }
    }
    const auto want = mat_mul(a, b);
    for (int s = 0; s < 50; ++s) {
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<CompletedResult<Rational>> pick(pool.begin(), pool.begin() + 16);
        CHECK(decode_sumrate<Rational>(pick, layout) == want);
    }
    std::vector<CompletedResult<Rational>> short_pool(pool.begin(), pool.begin() + 15);
    CHECK_THROWS_AS(decode_sumrate<Rational>(short_pool, layout), NotEnoughResults);
}

TEST_CASE("sum-rate with one layer is the plain code") {
    std::mt19937_64 rng(12);
    const auto a = int_matrix(4, 2, rng);
    const auto b = int_matrix(2, 4, rng);
    const auto layout = make_poly_layout(4, 2, 4, {2, 2});
    const auto pts = EvalPointSet::make(PointMode::Integer, 6);
    const auto plain = encode_plain(a, b, layout, pts, 6);
    const auto sr = encode_sumrate(a, b, layout, 1, pts, 6);
    for (std::size_t n = 0; n < 6; ++n) {
        CHECK(sr[n].size() == 1);
        CHECK(sr[n][0].a_hat == plain[n].a_hat);
        CHECK(sr[n][0].b_hat == plain[n].b_hat);
    }
    // K_S = 1 degenerate: the single product is AB
    const auto one = make_poly_layout(4, 2, 4, {1, 1});
    const auto t = encode_sumrate(a, b, one, 2, EvalPointSet::make(PointMode::Integer, 12), 6);
    std::vector<CompletedResult<Rational>> r{execute_task(t[3][1])};
    CHECK(decode_sumrate<Rational>(r, one) == mat_mul(a, b));
}

TEST_CASE("float backend with Chebyshev points") {
    std::mt19937_64 rng(13);
    const auto a = real_matrix(32, 20, rng);
    const auto b = real_matrix(20, 48, rng);
    const auto want = mat_mul(a, b);
    const std::size_t n = 16;

    const Profile p({10, 6});
    const auto plan = build_tile_plan(32, 20, 48, p, choose_grids(p, 32, 20, 48).grids);
    const auto tasks = encode_hier(a, b, plan, EvalPointSet::make(PointMode::Chebyshev, n), n);
    std::vector<std::optional<TileGrid<double>>> grids;
    grids.push_back(decode_layer<double>(layer_results(tasks, 0, {0, 2, 3, 5, 7, 8, 10, 11, 13, 15}), plan, 0));
    grids.push_back(decode_layer<double>(layer_results(tasks, 1, {1, 4, 6, 9, 12, 14}), plan, 1));
    std::optional<Matrix> residual;
    if (!plan.residual_cols().empty()) residual = residual_product(a, b, plan);
    CHECK(relative_error(assemble<double>(grids, residual, plan), want) <= 1e-6);

    const auto layout = make_poly_layout(32, 20, 48, {4, 4});
    const auto plain = encode_plain(a, b, layout, EvalPointSet::make(PointMode::Chebyshev, n), n);
    std::vector<CompletedResult<double>> rs;
    for (const auto& t : plain) rs.push_back(execute_task(t));
    CHECK(relative_error(decode_plain<double>(rs, layout), want) <= 1e-6);
}

TEST_CASE("task serialization round-trips") {
    std::mt19937_64 rng(14);
    EncodedTask<double> t{3, 1, -0.25, real_matrix(2, 3, rng), real_matrix(3, 4, rng)};
    std::stringstream s;
    write_task(s, t);
    const auto back = read_task(s);
    CHECK(back.worker == 3);
    CHECK(back.layer == 1);
    CHECK(back.point == -0.25);
    CHECK(back.a_hat == t.a_hat);
    CHECK(back.b_hat == t.b_hat);
}
