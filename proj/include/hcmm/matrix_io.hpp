#pragma once

#include <filesystem>
#include <iosfwd>

#include "hcmm/matrix.hpp"

namespace hcmm {

// Binary layout: rows and cols as little-endian u64, then rows*cols
// little-endian IEEE-754 doubles in row-major order.
void write_binary(std::ostream& out, const Matrix& m);
Matrix read_binary(std::istream& in);

void save_binary(const std::filesystem::path& path, const Matrix& m);
Matrix load_binary(const std::filesystem::path& path);

void write_csv(std::ostream& out, const Matrix& m);

namespace detail {
void put_u64(std::ostream& out, std::uint64_t v);
void put_f64(std::ostream& out, double v);
std::uint64_t get_u64(std::istream& in);
double get_f64(std::istream& in);
}  // namespace detail

}  // namespace hcmm
