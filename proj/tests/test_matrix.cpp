#include <random>
#include <sstream>

#include "doctest.h"
#include "hcmm/matrix.hpp"
#include "hcmm/matrix_io.hpp"

using namespace hcmm;

namespace {

Matrix random_int_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, int span = 5) {
    Matrix m(r, c);
    for (auto& v : m.data()) v = static_cast<double>(static_cast<int>(rng() % (2 * span + 1)) - span);
    return m;
}

Matrix random_real_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(r, c);
    for (auto& v : m.data()) v = u(rng);
    return m;
}

// Textbook triple loop, written independently of mat_mul.
Matrix naive_product(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    }
    return c;
}

}  // namespace

TEST_CASE("mat_mul small cases") {
    Matrix a(1, 1, {2.0});
    Matrix b(1, 1, {3.0});
    CHECK(mat_mul(a, b)(0, 0) == 6.0);

    std::mt19937_64 rng(7);
    const auto m = random_int_matrix(4, 6, rng);
    CHECK(mat_mul(Matrix::identity(4), m) == m);
    CHECK(mat_mul(m, Matrix::identity(6)) == m);
}

TEST_CASE("mat_mul matches the naive triple loop") {
    std::mt19937_64 rng(11);
    const auto a = random_int_matrix(7, 5, rng);
    const auto b = random_int_matrix(5, 3, rng);
    CHECK(mat_mul(a, b) == naive_product(a, b));

    for (auto [r, k, c] : {std::tuple{1, 9, 4}, {13, 1, 6}, {17, 23, 11}, {32, 32, 32}}) {
        const auto x = random_real_matrix(r, k, rng);
        const auto y = random_real_matrix(k, c, rng);
        CHECK(relative_error(mat_mul(x, y), naive_product(x, y)) <= 1e-12);
    }
}

TEST_CASE("mat_mul rejects mismatched shapes") {
    CHECK_THROWS_AS(mat_mul(Matrix(2, 3), Matrix(4, 2)), DimensionError);
}

TEST_CASE("constructor validates data") {
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
    CHECK_THROWS_AS(Matrix(1, 1, std::vector<double>{std::nan("")}), Error);
}

TEST_CASE("slice_block") {
    Matrix m(4, 4);
    for (std::size_t i = 0; i < 16; ++i) m.data()[i] = static_cast<double>(i);
    CHECK(slice_block(m, {0, 4}, {0, 4}) == m);
    const auto tr = slice_block(m, {0, 2}, {2, 4});
    CHECK(tr == Matrix(2, 2, {2, 3, 6, 7}));
    CHECK_THROWS_AS(slice_block(m, {0, 5}, {0, 1}), DimensionError);

    const auto padded = slice_block_padded(m, {3, 4}, {1, 3}, 2, 3);
    CHECK(padded == Matrix(2, 3, {13, 14, 0, 0, 0, 0}));
}

TEST_CASE("place_block") {
    std::mt19937_64 rng(3);
    const auto src = random_int_matrix(2, 3, rng);
    const auto placed = place_block(Matrix(5, 6), src, 1, 2);
    CHECK(slice_block(placed, {1, 3}, {2, 5}) == src);

    const auto other = random_int_matrix(2, 2, rng);
    const auto ab = place_block(place_block(Matrix(5, 6), src, 0, 0), other, 3, 4);
    const auto ba = place_block(place_block(Matrix(5, 6), other, 3, 4), src, 0, 0);
    CHECK(ab == ba);
    CHECK_THROWS_AS(place_block(Matrix(2, 2), src, 0, 0), DimensionError);
}

TEST_CASE("grid slicing and reassembly round-trips") {
    std::mt19937_64 rng(5);
    const auto m = random_real_matrix(11, 9, rng);
    const std::vector<IndexRange> rows{{0, 4}, {4, 8}, {8, 11}};
    const std::vector<IndexRange> cols{{0, 5}, {5, 9}};
    Matrix out(11, 9);
    for (auto r : rows) {
        for (auto c : cols) place_block_into(out, slice_block(m, r, c), r.begin, c.begin);
    }
    CHECK(out == m);
}

TEST_CASE("rational conversion is exact for integers") {
    std::mt19937_64 rng(9);
    const auto a = random_int_matrix(3, 4, rng);
    const auto b = random_int_matrix(4, 2, rng);
    const auto exact = mat_mul(to_rational(a), to_rational(b));
    CHECK(to_double(exact) == mat_mul(a, b));
}

TEST_CASE("binary layout") {
    std::mt19937_64 rng(1);
    const auto m = random_real_matrix(3, 5, rng);
    std::stringstream s;
    write_binary(s, m);
    const auto bytes = s.str();
    REQUIRE(bytes.size() == 16 + 15 * 8);
    // little-endian u64 header
    CHECK(static_cast<unsigned char>(bytes[0]) == 3);
    CHECK(static_cast<unsigned char>(bytes[8]) == 5);
    for (int i = 1; i < 8; ++i) CHECK(bytes[i] == 0);
    CHECK(read_binary(s) == m);

    std::stringstream truncated(bytes.substr(0, 30));
    CHECK_THROWS_AS(read_binary(truncated), Error);
}

TEST_CASE("csv output") {
    std::ostringstream s;
    write_csv(s, Matrix(2, 2, {1.5, -2, 0.1, 4}));
    CHECK(s.str() == "1.5,-2\n0.10000000000000001,4\n");
}

TEST_CASE("relative_error") {
    const Matrix b(1, 2, {3, 4});
    const Matrix a(1, 2, {3, 4.5});
    CHECK(relative_error(a, b) == doctest::Approx(0.1));
    CHECK(relative_error(b, b) == 0.0);
    CHECK(max_abs_diff(a, b) == 0.5);
}
