#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hcmm/eval_points.hpp"
#include "hcmm/matrix.hpp"
#include "hcmm/tiling.hpp"

namespace hcmm {

// Scalar field the codec runs over: double with extended-precision weights,
// or exact rationals.
enum class Backend { Float, Exact };

Backend parse_backend(std::string_view name);
std::string_view to_string(Backend backend);

// Worker and layer indices are 0-based. For sum-rate codes `layer` is the
// worker's subtask index.
template <typename T>
struct EncodedTask {
    std::size_t worker = 0;
    std::size_t layer = 0;
    T point{};
    BasicMatrix<T> a_hat;
    BasicMatrix<T> b_hat;
};

template <typename T>
struct CompletedResult {
    std::size_t worker = 0;
    std::size_t layer = 0;
    T point{};
    BasicMatrix<T> product;
    double finish_time = 0.0;
};

template <typename T>
using WorkerTasks = std::vector<EncodedTask<T>>;

template <typename T>
CompletedResult<T> execute_task(const EncodedTask<T>& task, double finish_time = 0.0);

// Decoded information tiles of one polynomial code, tile (i, j) = A_i * B_j.
template <typename T>
struct TileGrid {
    std::size_t m_x = 0;
    std::size_t m_y = 0;
    std::vector<BasicMatrix<T>> tiles;  // index i + j * m_x

    const BasicMatrix<T>& at(std::size_t i, std::size_t j) const { return tiles.at(i + j * m_x); }
};

// Exponent of x holding tile (i, j) in A_hat(x) * B_hat(x).
constexpr std::size_t coefficient_index(std::size_t i, std::size_t j, std::size_t m_x) {
    return i + j * m_x;
}

// ---- hierarchical codes ---------------------------------------------------

// Worker n's task list, in layer order. Layer l encodes
// A_hat_l(x) = sum_i A_{l,i} x^i and B_hat_l(x) = sum_j B_{l,j} x^(j M_xl) at
// the worker's point. Throws InfeasibleCode when n_workers < max K_l.
template <typename T>
std::vector<WorkerTasks<T>> encode_hier(const BasicMatrix<T>& a, const BasicMatrix<T>& b,
                                        const TilePlan& plan, const EvalPointSet& points,
                                        std::size_t n_workers);

// Decodes layer `layer` from the K_l earliest results (ties by worker).
template <typename T>
TileGrid<T> decode_layer(std::span<const CompletedResult<T>> results, const TilePlan& plan,
                         std::size_t layer);

// Product of A with the residual columns of B; empty when there are none.
template <typename T>
BasicMatrix<T> residual_product(const BasicMatrix<T>& a, const BasicMatrix<T>& b,
                                const TilePlan& plan);

template <typename T>
BasicMatrix<T> assemble(std::span<const std::optional<TileGrid<T>>> layers,
                        const std::optional<BasicMatrix<T>>& residual, const TilePlan& plan);

// ---- plain and sum-rate polynomial codes -------------------------------------

// Single polynomial code over all of AB: rows of A split into m_x chunks,
// columns of B into m_y chunks, threshold m_x * m_y.
struct PolyLayout {
    std::size_t n_x = 0;
    std::size_t n_z = 0;
    std::size_t n_y = 0;
    LayerGrid grid;
    std::vector<IndexRange> row_chunks;
    std::vector<IndexRange> col_chunks;

    std::size_t threshold() const noexcept { return grid.tiles(); }
};

PolyLayout make_poly_layout(std::size_t n_x, std::size_t n_z, std::size_t n_y, LayerGrid grid);

template <typename T>
std::vector<EncodedTask<T>> encode_plain(const BasicMatrix<T>& a, const BasicMatrix<T>& b,
                                         const PolyLayout& layout, const EvalPointSet& points,
                                         std::size_t n_workers);

template <typename T>
BasicMatrix<T> decode_plain(std::span<const CompletedResult<T>> results, const PolyLayout& layout);

// Worker n's subtask i evaluates the single code at point index n * L + i, so
// `points` needs n_workers * L entries.
template <typename T>
std::vector<WorkerTasks<T>> encode_sumrate(const BasicMatrix<T>& a, const BasicMatrix<T>& b,
                                           const PolyLayout& layout, std::size_t layers,
                                           const EvalPointSet& points, std::size_t n_workers);

template <typename T>
BasicMatrix<T> decode_sumrate(std::span<const CompletedResult<T>> results,
                              const PolyLayout& layout);

// Task wire format: worker and layer as little-endian u64, point as f64, then
// a_hat and b_hat in the binary matrix layout.
void write_task(std::ostream& out, const EncodedTask<double>& task);
EncodedTask<double> read_task(std::istream& in);

}  // namespace hcmm
