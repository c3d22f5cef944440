#include "hcmm/codec.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "hcmm/interpolation.hpp"
#include "hcmm/matrix_io.hpp"

namespace hcmm {

Backend parse_backend(std::string_view name) {
    if (name == "float") return Backend::Float;
    if (name == "exact") return Backend::Exact;
    throw Error("unknown backend '" + std::string(name) + "' (expected exact|float)");
}

std::string_view to_string(Backend backend) {
    return backend == Backend::Float ? "float" : "exact";
}

namespace {

std::size_t max_size(std::span<const IndexRange> ranges) {
    std::size_t m = 0;
    for (auto r : ranges) m = std::max(m, r.size());
    return m;
}

// Data chunks of one polynomial code, zero-padded to a common shape.
template <typename T>
struct ChunkSet {
    std::vector<BasicMatrix<T>> a_chunks;
    std::vector<BasicMatrix<T>> b_chunks;
};

template <typename T>
ChunkSet<T> make_chunks(const BasicMatrix<T>& a, const BasicMatrix<T>& b,
                        std::span<const IndexRange> row_chunks,
                        std::span<const IndexRange> col_chunks) {
    ChunkSet<T> set;
    const std::size_t pad_rows = max_size(row_chunks);
    const std::size_t pad_cols = max_size(col_chunks);
    for (auto r : row_chunks) {
        set.a_chunks.push_back(slice_block_padded(a, r, {0, a.cols()}, pad_rows, a.cols()));
    }
    for (auto c : col_chunks) {
        set.b_chunks.push_back(slice_block_padded(b, {0, b.rows()}, c, b.rows(), pad_cols));
    }
    return set;
}

// A_hat(x) = sum_i A_i x^i,  B_hat(x) = sum_j B_j x^(j m_x).
template <typename T>
std::pair<BasicMatrix<T>, BasicMatrix<T>> evaluate_pair(const ChunkSet<T>& chunks, const T& x) {
    BasicMatrix<T> a_hat(chunks.a_chunks.front().rows(), chunks.a_chunks.front().cols());
    T power(1);
    for (const auto& c : chunks.a_chunks) {
        a_hat.add_scaled(power, c);
        power *= x;
    }
    // power == x^m_x here.
    const T stride = power;
    BasicMatrix<T> b_hat(chunks.b_chunks.front().rows(), chunks.b_chunks.front().cols());
    T bpower(1);
    for (const auto& c : chunks.b_chunks) {
        b_hat.add_scaled(bpower, c);
        bpower *= stride;
    }
    return {std::move(a_hat), std::move(b_hat)};
}

template <typename T>
void require_points(const EvalPointSet& points, std::size_t needed) {
    if (points.size() < needed) {
        throw InfeasibleCode("need " + std::to_string(needed) + " distinct evaluation points, have " +
                             std::to_string(points.size()));
    }
}

// Earliest `need` results by (finish_time, worker, layer).
template <typename T>
std::vector<const CompletedResult<T>*> earliest(std::span<const CompletedResult<T>> results,
                                                std::size_t need) {
    std::vector<const CompletedResult<T>*> sel;
    sel.reserve(results.size());
    for (const auto& r : results) sel.push_back(&r);
    std::vector<T> pts;
    for (const auto* r : sel) pts.push_back(r->point);
    std::sort(pts.begin(), pts.end());
    if (std::adjacent_find(pts.begin(), pts.end()) != pts.end()) {
        throw Error("results contain duplicate evaluation points");
    }
    if (sel.size() < need) throw NotEnoughResults(sel.size(), need);
    std::stable_sort(sel.begin(), sel.end(), [](const auto* l, const auto* r) {
        if (l->finish_time != r->finish_time) return l->finish_time < r->finish_time;
        if (l->worker != r->worker) return l->worker < r->worker;
        return l->layer < r->layer;
    });
    sel.resize(need);
    return sel;
}

// Interpolates the product polynomial and crops each coefficient back to the
// unpadded chunk shape.
template <typename T>
TileGrid<T> decode_tiles(const std::vector<const CompletedResult<T>*>& chosen, LayerGrid grid,
                         std::span<const IndexRange> row_chunks,
                         std::span<const IndexRange> col_chunks) {
    const std::size_t pad_rows = max_size(row_chunks);
    const std::size_t pad_cols = max_size(col_chunks);
    std::vector<PolyEvaluation<T>> evals;
    evals.reserve(chosen.size());
    for (const auto* r : chosen) {
        if (r->product.rows() != pad_rows || r->product.cols() != pad_cols) {
            throw DimensionError("result from worker " + std::to_string(r->worker) + " has shape " +
                                 std::to_string(r->product.rows()) + "x" +
                                 std::to_string(r->product.cols()) + ", expected " +
                                 std::to_string(pad_rows) + "x" + std::to_string(pad_cols));
        }
        evals.push_back({r->point, std::cref(r->product)});
    }
    auto coeffs = interpolate_matrix_poly<T>(evals, grid.tiles());

    TileGrid<T> out;
    out.m_x = grid.m_x;
    out.m_y = grid.m_y;
    out.tiles.resize(grid.tiles());
    for (std::size_t j = 0; j < grid.m_y; ++j) {
        for (std::size_t i = 0; i < grid.m_x; ++i) {
            auto& c = coeffs[coefficient_index(i, j, grid.m_x)];
            const IndexRange rr{0, row_chunks[i].size()};
            const IndexRange cr{0, col_chunks[j].size()};
            out.tiles[coefficient_index(i, j, grid.m_x)] =
                (rr.size() == c.rows() && cr.size() == c.cols()) ? std::move(c)
                                                                 : slice_block(c, rr, cr);
        }
    }
    return out;
}

template <typename T>
void place_grid(BasicMatrix<T>& dest, const TileGrid<T>& grid,
                std::span<const IndexRange> row_chunks, std::span<const IndexRange> col_chunks) {
    for (std::size_t j = 0; j < grid.m_y; ++j) {
        for (std::size_t i = 0; i < grid.m_x; ++i) {
            place_block_into(dest, grid.at(i, j), row_chunks[i].begin, col_chunks[j].begin);
        }
    }
}

void check_dims(std::size_t a_rows, std::size_t a_cols, std::size_t b_rows, std::size_t b_cols,
                std::size_t n_x, std::size_t n_z, std::size_t n_y) {
    if (a_rows != n_x || a_cols != n_z || b_rows != n_z || b_cols != n_y) {
        throw DimensionError("inputs " + std::to_string(a_rows) + "x" + std::to_string(a_cols) +
                             " and " + std::to_string(b_rows) + "x" + std::to_string(b_cols) +
                             " do not match layout " + std::to_string(n_x) + "x" +
                             std::to_string(n_z) + "x" + std::to_string(n_y));
    }
}

}  // namespace

template <typename T>
CompletedResult<T> execute_task(const EncodedTask<T>& task, double finish_time) {
    return {task.worker, task.layer, task.point, mat_mul(task.a_hat, task.b_hat), finish_time};
}

template <typename T>
std::vector<WorkerTasks<T>> encode_hier(const BasicMatrix<T>& a, const BasicMatrix<T>& b,
                                        const TilePlan& plan, const EvalPointSet& points,
                                        std::size_t n_workers) {
    check_dims(a.rows(), a.cols(), b.rows(), b.cols(), plan.n_x(), plan.n_z(), plan.n_y());
    if (n_workers < plan.profile().max_threshold()) {
        throw InfeasibleCode("layer 1 threshold " + std::to_string(plan.profile().max_threshold()) +
                             " exceeds " + std::to_string(n_workers) + " workers");
    }
    require_points<T>(points, n_workers);

    std::vector<WorkerTasks<T>> tasks(n_workers);
    for (auto& t : tasks) t.reserve(plan.layer_count());
    for (std::size_t l = 0; l < plan.layer_count(); ++l) {
        const auto& tile = plan.layer(l);
        const auto chunks = make_chunks(a, b, tile.row_chunks, tile.col_chunks);
        for (std::size_t n = 0; n < n_workers; ++n) {
            const T x = points.point_as<T>(n);
            auto [a_hat, b_hat] = evaluate_pair(chunks, x);
            tasks[n].push_back({n, l, x, std::move(a_hat), std::move(b_hat)});
        }
    }
    return tasks;
}

template <typename T>
TileGrid<T> decode_layer(std::span<const CompletedResult<T>> results, const TilePlan& plan,
                         std::size_t layer) {
    const auto& tile = plan.layer(layer);
    for (const auto& r : results) {
        if (r.layer != layer) {
            throw Error("decode_layer(" + std::to_string(layer) + ") given a layer-" +
                        std::to_string(r.layer) + " result");
        }
    }
    const auto chosen = earliest(results, tile.threshold);
    return decode_tiles(chosen, tile.grid, tile.row_chunks, tile.col_chunks);
}

template <typename T>
BasicMatrix<T> residual_product(const BasicMatrix<T>& a, const BasicMatrix<T>& b,
                                const TilePlan& plan) {
    const auto cols = plan.residual_cols();
    if (cols.empty()) return BasicMatrix<T>(a.rows(), 0);
    return mat_mul(a, slice_block(b, {0, b.rows()}, cols));
}

template <typename T>
BasicMatrix<T> assemble(std::span<const std::optional<TileGrid<T>>> layers,
                        const std::optional<BasicMatrix<T>>& residual, const TilePlan& plan) {
    std::string missing;
    for (std::size_t l = 0; l < plan.layer_count(); ++l) {
        if (l >= layers.size() || !layers[l]) {
            missing += (missing.empty() ? "" : ",") + std::to_string(l + 1);
        }
    }
    if (!missing.empty()) throw Error("cannot assemble: missing layers " + missing);
    const auto rcols = plan.residual_cols();
    if (!rcols.empty() && !residual) throw Error("cannot assemble: missing residual product");

    BasicMatrix<T> out(plan.n_x(), plan.n_y());
    for (std::size_t l = 0; l < plan.layer_count(); ++l) {
        const auto& tile = plan.layer(l);
        place_grid(out, *layers[l], tile.row_chunks, tile.col_chunks);
    }
    if (!rcols.empty()) {
        if (residual->rows() != plan.n_x() || residual->cols() != rcols.size()) {
            throw DimensionError("residual product has the wrong shape");
        }
        place_block_into(out, *residual, 0, rcols.begin);
    }
    return out;
}

PolyLayout make_poly_layout(std::size_t n_x, std::size_t n_z, std::size_t n_y, LayerGrid grid) {
    if (n_x == 0 || n_z == 0 || n_y == 0) throw DimensionError("matrix dimensions must be positive");
    if (grid.m_x == 0 || grid.m_y == 0 || grid.m_x > n_x || grid.m_y > n_y) {
        throw Error("grid " + std::to_string(grid.m_x) + "x" + std::to_string(grid.m_y) +
                    " infeasible for a " + std::to_string(n_x) + "x" + std::to_string(n_y) +
                    " product");
    }
    PolyLayout layout;
    layout.n_x = n_x;
    layout.n_z = n_z;
    layout.n_y = n_y;
    layout.grid = grid;
    layout.row_chunks = split_evenly({0, n_x}, grid.m_x);
    layout.col_chunks = split_evenly({0, n_y}, grid.m_y);
    return layout;
}

template <typename T>
std::vector<EncodedTask<T>> encode_plain(const BasicMatrix<T>& a, const BasicMatrix<T>& b,
                                         const PolyLayout& layout, const EvalPointSet& points,
                                         std::size_t n_workers) {
    auto per_worker = encode_sumrate(a, b, layout, 1, points, n_workers);
    std::vector<EncodedTask<T>> out;
    out.reserve(n_workers);
    for (auto& tasks : per_worker) out.push_back(std::move(tasks.front()));
    return out;
}

template <typename T>
BasicMatrix<T> decode_plain(std::span<const CompletedResult<T>> results, const PolyLayout& layout) {
    return decode_sumrate(results, layout);
}

template <typename T>
std::vector<WorkerTasks<T>> encode_sumrate(const BasicMatrix<T>& a, const BasicMatrix<T>& b,
                                           const PolyLayout& layout, std::size_t layers,
                                           const EvalPointSet& points, std::size_t n_workers) {
    check_dims(a.rows(), a.cols(), b.rows(), b.cols(), layout.n_x, layout.n_z, layout.n_y);
    if (layers == 0) throw Error("sum-rate code needs at least one subtask per worker");
    if (n_workers * layers < layout.threshold()) {
        throw InfeasibleCode("threshold " + std::to_string(layout.threshold()) + " exceeds " +
                             std::to_string(n_workers * layers) + " subtasks");
    }
    require_points<T>(points, n_workers * layers);

    const auto chunks = make_chunks(a, b, layout.row_chunks, layout.col_chunks);
    std::vector<WorkerTasks<T>> tasks(n_workers);
    for (std::size_t n = 0; n < n_workers; ++n) {
        for (std::size_t i = 0; i < layers; ++i) {
            const T x = points.point_as<T>(n * layers + i);
            auto [a_hat, b_hat] = evaluate_pair(chunks, x);
            tasks[n].push_back({n, i, x, std::move(a_hat), std::move(b_hat)});
        }
    }
    return tasks;
}

template <typename T>
BasicMatrix<T> decode_sumrate(std::span<const CompletedResult<T>> results,
                              const PolyLayout& layout) {
    const auto chosen = earliest(results, layout.threshold());
    const auto grid = decode_tiles(chosen, layout.grid, layout.row_chunks, layout.col_chunks);
    BasicMatrix<T> out(layout.n_x, layout.n_y);
    place_grid(out, grid, layout.row_chunks, layout.col_chunks);
    return out;
}

void write_task(std::ostream& out, const EncodedTask<double>& task) {
    detail::put_u64(out, task.worker);
    detail::put_u64(out, task.layer);
    detail::put_f64(out, task.point);
    write_binary(out, task.a_hat);
    write_binary(out, task.b_hat);
}

EncodedTask<double> read_task(std::istream& in) {
    EncodedTask<double> task;
    task.worker = detail::get_u64(in);
    task.layer = detail::get_u64(in);
    task.point = detail::get_f64(in);
    task.a_hat = read_binary(in);
    task.b_hat = read_binary(in);
    return task;
}

#define HCMM_INSTANTIATE_CODEC(T)                                                               \
    template CompletedResult<T> execute_task(const EncodedTask<T>&, double);                    \
    template std::vector<WorkerTasks<T>> encode_hier(const BasicMatrix<T>&, const BasicMatrix<T>&, \
                                                     const TilePlan&, const EvalPointSet&,      \
                                                     std::size_t);                              \
    template TileGrid<T> decode_layer(std::span<const CompletedResult<T>>, const TilePlan&,     \
                                      std::size_t);                                             \
    template BasicMatrix<T> residual_product(const BasicMatrix<T>&, const BasicMatrix<T>&,      \
                                             const TilePlan&);                                  \
    template BasicMatrix<T> assemble(std::span<const std::optional<TileGrid<T>>>,               \
                                     const std::optional<BasicMatrix<T>>&, const TilePlan&);    \
    template std::vector<EncodedTask<T>> encode_plain(const BasicMatrix<T>&,                    \
                                                      const BasicMatrix<T>&, const PolyLayout&, \
                                                      const EvalPointSet&, std::size_t);        \
    template BasicMatrix<T> decode_plain(std::span<const CompletedResult<T>>, const PolyLayout&); \
    template std::vector<WorkerTasks<T>> encode_sumrate(                                        \
        const BasicMatrix<T>&, const BasicMatrix<T>&, const PolyLayout&, std::size_t,           \
        const EvalPointSet&, std::size_t);                                                      \
    template BasicMatrix<T> decode_sumrate(std::span<const CompletedResult<T>>, const PolyLayout&);

HCMM_INSTANTIATE_CODEC(double)
HCMM_INSTANTIATE_CODEC(Rational)

#undef HCMM_INSTANTIATE_CODEC

}  // namespace hcmm
