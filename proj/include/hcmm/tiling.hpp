#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hcmm/matrix.hpp"

namespace hcmm {

// Per-layer recovery thresholds K_1 >= K_2 >= ... >= K_L >= 1.
class Profile {
public:
    // Throws Error when empty, when a threshold is zero, or when the
    // thresholds increase from one layer to the next.
    explicit Profile(std::vector<std::size_t> thresholds);

    std::size_t layers() const noexcept { return thresholds_.size(); }
    std::size_t threshold(std::size_t layer) const { return thresholds_.at(layer); }
    std::span<const std::size_t> thresholds() const noexcept { return thresholds_; }
    std::size_t k_sum() const noexcept { return k_sum_; }
    std::size_t max_threshold() const noexcept { return thresholds_.front(); }

    // Throws InfeasibleCode if some K_l exceeds the worker count.
    void validate_for(std::size_t n_workers) const;

    friend bool operator==(const Profile&, const Profile&) = default;

private:
    std::vector<std::size_t> thresholds_;
    std::size_t k_sum_ = 0;
};

std::string to_string(const Profile& profile);  // "(8,4,3,1)"
Profile parse_profile(const std::string& text);  // "8,4,3,1" or "(8,4,3,1)"

// Row and column split counts of one layer's task tile.
struct LayerGrid {
    std::size_t m_x = 1;
    std::size_t m_y = 1;

    std::size_t tiles() const noexcept { return m_x * m_y; }
    friend bool operator==(const LayerGrid&, const LayerGrid&) = default;
};

std::vector<LayerGrid> parse_grids(const std::string& text);  // "4x2,4x1,3x1,1x1"

// Splits r into `parts` contiguous ranges; the first (size % parts) ranges get
// one extra index.
std::vector<IndexRange> split_evenly(IndexRange r, std::size_t parts);

struct LayerTile {
    std::size_t threshold = 0;
    IndexRange rows;  // rows of A (and of AB)
    IndexRange cols;  // columns of B (and of AB)
    LayerGrid grid;
    std::vector<IndexRange> row_chunks;  // m_x ranges partitioning rows
    std::vector<IndexRange> col_chunks;  // m_y ranges partitioning cols

    std::size_t area() const noexcept { return rows.size() * cols.size(); }
    std::size_t chunk_rows() const noexcept { return row_chunks.front().size(); }
    std::size_t chunk_cols() const noexcept { return col_chunks.front().size(); }
};

// Column-sliced decomposition of the n_x x n_y product into task tiles plus
// the residual columns handled directly by the master.
class TilePlan {
public:
    TilePlan(std::size_t n_x, std::size_t n_z, std::size_t n_y, Profile profile,
             std::vector<LayerTile> layers, IndexRange residual_cols);

    std::size_t n_x() const noexcept { return n_x_; }
    std::size_t n_z() const noexcept { return n_z_; }
    std::size_t n_y() const noexcept { return n_y_; }
    const Profile& profile() const noexcept { return profile_; }
    std::size_t layer_count() const noexcept { return layers_.size(); }
    const LayerTile& layer(std::size_t l) const { return layers_.at(l); }
    std::span<const LayerTile> layers() const noexcept { return layers_; }
    IndexRange residual_cols() const noexcept { return residual_cols_; }
    // floor(n_y / k_sum): the column width of one information tile.
    std::size_t unit_width() const noexcept { return n_y_ / profile_.k_sum(); }

private:
    std::size_t n_x_;
    std::size_t n_z_;
    std::size_t n_y_;
    Profile profile_;
    std::vector<LayerTile> layers_;
    IndexRange residual_cols_;
};

// Layers take all n_x rows and consume floor(n_y / k_sum) * K_l columns each,
// left to right. Throws Error on an infeasible grid or when k_sum > n_y.
TilePlan build_tile_plan(std::size_t n_x, std::size_t n_z, std::size_t n_y, const Profile& profile,
                         std::span<const LayerGrid> grids);

struct GridChoice {
    std::vector<LayerGrid> grids;
    // Set for a layer whose proxy-optimal factorization did not fit the tile
    // and was replaced by the best feasible one.
    std::vector<bool> fallback;
};

// Per-worker communication proxy for a layer of width `width`:
// (n_x / m_x) * n_z + n_z * (width / m_y).
double communication_proxy(LayerGrid grid, std::size_t n_x, std::size_t n_z, std::size_t width);

// For every layer, the factor pair m_x * m_y = K_l minimizing the
// communication proxy, ties broken toward larger m_x.
GridChoice choose_grids(const Profile& profile, std::size_t n_x, std::size_t n_z, std::size_t n_y);

struct ResidualWork {
    IndexRange rows;
    IndexRange cols;
    std::size_t op_count = 0;  // multiply-accumulates
};

ResidualWork residual_work(const TilePlan& plan);

// JSON document describing the plan, for experiment logs.
std::string to_text(const TilePlan& plan);

}  // namespace hcmm
