#include "hcmm/matrix_io.hpp"

#include <bit>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

namespace hcmm {

namespace detail {

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error("truncated binary matrix stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace detail

void write_binary(std::ostream& out, const Matrix& m) {
    detail::put_u64(out, m.rows());
    detail::put_u64(out, m.cols());
    for (double v : m.data()) detail::put_f64(out, v);
}

Matrix read_binary(std::istream& in) {
    const auto rows = detail::get_u64(in);
    const auto cols = detail::get_u64(in);
    if (cols != 0 && rows > std::numeric_limits<std::uint32_t>::max() / cols) {
        throw Error("binary matrix header too large");
    }
    std::vector<double> data(rows * cols);
    for (auto& v : data) v = detail::get_f64(in);
    return Matrix(rows, cols, std::move(data));
}

void save_binary(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_binary(out, m);
}

Matrix load_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return read_binary(in);
}

void write_csv(std::ostream& out, const Matrix& m) {
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << m(r, c);
        }
        out << '\n';
    }
    out.precision(old_precision);
}

}  // namespace hcmm
