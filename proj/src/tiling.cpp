#include "hcmm/tiling.hpp"

#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace hcmm {

Profile::Profile(std::vector<std::size_t> thresholds) : thresholds_(std::move(thresholds)) {
    if (thresholds_.empty()) throw Error("profile needs at least one layer");
    for (std::size_t l = 0; l < thresholds_.size(); ++l) {
        if (thresholds_[l] == 0) throw Error("profile thresholds must be >= 1");
        if (l > 0 && thresholds_[l] > thresholds_[l - 1]) {
            throw Error("profile " + to_string(*this) + " is not non-increasing at layer " +
                        std::to_string(l + 1));
        }
    }
    k_sum_ = std::accumulate(thresholds_.begin(), thresholds_.end(), std::size_t{0});
}

void Profile::validate_for(std::size_t n_workers) const {
    if (max_threshold() > n_workers) {
        throw InfeasibleCode("threshold " + std::to_string(max_threshold()) + " exceeds " +
                             std::to_string(n_workers) + " workers");
    }
}

std::string to_string(const Profile& profile) {
    std::string out = "(";
    for (std::size_t l = 0; l < profile.layers(); ++l) {
        if (l) out += ",";
        out += std::to_string(profile.threshold(l));
    }
    return out + ")";
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else if (ch != ' ' && ch != '(' && ch != ')' && ch != '[' && ch != ']') {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::size_t parse_count(const std::string& s, const std::string& context) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (s.empty() || pos != s.size()) throw Error("bad integer '" + s + "' in " + context);
    return static_cast<std::size_t>(v);
}

}  // namespace

Profile parse_profile(const std::string& text) {
    std::vector<std::size_t> ks;
    for (const auto& p : split(text, ',')) ks.push_back(parse_count(p, "profile '" + text + "'"));
    return Profile(std::move(ks));
}

std::vector<LayerGrid> parse_grids(const std::string& text) {
    std::vector<LayerGrid> grids;
    for (const auto& p : split(text, ',')) {
        const auto x = p.find('x');
        if (x == std::string::npos) throw Error("grid '" + p + "' must look like MxN");
        grids.push_back({parse_count(p.substr(0, x), "grid '" + p + "'"),
                         parse_count(p.substr(x + 1), "grid '" + p + "'")});
    }
    return grids;
}

std::vector<IndexRange> split_evenly(IndexRange r, std::size_t parts) {
    if (parts == 0) throw Error("cannot split into zero parts");
    const std::size_t base = r.size() / parts;
    const std::size_t extra = r.size() % parts;
    std::vector<IndexRange> out;
    out.reserve(parts);
    std::size_t at = r.begin;
    for (std::size_t i = 0; i < parts; ++i) {
        const std::size_t len = base + (i < extra ? 1 : 0);
        out.push_back({at, at + len});
        at += len;
    }
    return out;
}

TilePlan::TilePlan(std::size_t n_x, std::size_t n_z, std::size_t n_y, Profile profile,
                   std::vector<LayerTile> layers, IndexRange residual_cols)
    : n_x_(n_x),
      n_z_(n_z),
      n_y_(n_y),
      profile_(std::move(profile)),
      layers_(std::move(layers)),
      residual_cols_(residual_cols) {}

TilePlan build_tile_plan(std::size_t n_x, std::size_t n_z, std::size_t n_y, const Profile& profile,
                         std::span<const LayerGrid> grids) {
    if (n_x == 0 || n_z == 0 || n_y == 0) throw DimensionError("matrix dimensions must be positive");
    if (grids.size() != profile.layers()) {
        throw Error("expected " + std::to_string(profile.layers()) + " grids, got " +
                    std::to_string(grids.size()));
    }
    if (profile.k_sum() > n_y) {
        throw Error("k_sum " + std::to_string(profile.k_sum()) + " exceeds n_y " +
                    std::to_string(n_y));
    }
    const std::size_t unit = n_y / profile.k_sum();

    std::vector<LayerTile> layers;
    std::size_t next_col = 0;
    for (std::size_t l = 0; l < profile.layers(); ++l) {
        const auto k = profile.threshold(l);
        const auto g = grids[l];
        if (g.tiles() != k) {
            throw Error("layer " + std::to_string(l + 1) + ": grid " + std::to_string(g.m_x) + "x" +
                        std::to_string(g.m_y) + " does not have " + std::to_string(k) + " tiles");
        }
        const std::size_t width = unit * k;
        if (g.m_x > n_x || g.m_y > width) {
            throw Error("layer " + std::to_string(l + 1) + ": grid " + std::to_string(g.m_x) + "x" +
                        std::to_string(g.m_y) + " infeasible for a " + std::to_string(n_x) + "x" +
                        std::to_string(width) + " task tile");
        }
        LayerTile tile;
        tile.threshold = k;
        tile.rows = {0, n_x};
        tile.cols = {next_col, next_col + width};
        tile.grid = g;
        tile.row_chunks = split_evenly(tile.rows, g.m_x);
        tile.col_chunks = split_evenly(tile.cols, g.m_y);
        layers.push_back(std::move(tile));
        next_col += width;
    }
    return TilePlan(n_x, n_z, n_y, profile, std::move(layers), IndexRange{next_col, n_y});
}

double communication_proxy(LayerGrid grid, std::size_t n_x, std::size_t n_z, std::size_t width) {
    return static_cast<double>(n_x) / static_cast<double>(grid.m_x) * static_cast<double>(n_z) +
           static_cast<double>(n_z) * (static_cast<double>(width) / static_cast<double>(grid.m_y));
}

GridChoice choose_grids(const Profile& profile, std::size_t n_x, std::size_t n_z, std::size_t n_y) {
    if (profile.k_sum() > n_y) {
        throw Error("k_sum " + std::to_string(profile.k_sum()) + " exceeds n_y " +
                    std::to_string(n_y));
    }
    const std::size_t unit = n_y / profile.k_sum();
    GridChoice choice;
    for (std::size_t l = 0; l < profile.layers(); ++l) {
        const auto k = profile.threshold(l);
        const std::size_t width = unit * k;
        LayerGrid best_any{};
        LayerGrid best_feasible{};
        double proxy_any = std::numeric_limits<double>::infinity();
        double proxy_feasible = std::numeric_limits<double>::infinity();
        bool have_feasible = false;
        // Ascending m_x with <= keeps the larger m_x on ties.
        for (std::size_t m_x = 1; m_x <= k; ++m_x) {
            if (k % m_x != 0) continue;
            const LayerGrid g{m_x, k / m_x};
            const double p = communication_proxy(g, n_x, n_z, width);
            if (p <= proxy_any) {
                proxy_any = p;
                best_any = g;
            }
            if (g.m_x <= n_x && g.m_y <= width && p <= proxy_feasible) {
                proxy_feasible = p;
                best_feasible = g;
                have_feasible = true;
            }
        }
        if (!have_feasible) {
            throw Error("layer " + std::to_string(l + 1) + ": no factorization of " +
                        std::to_string(k) + " fits a " + std::to_string(n_x) + "x" +
                        std::to_string(width) + " task tile");
        }
        choice.grids.push_back(best_feasible);
        choice.fallback.push_back(!(best_feasible == best_any));
    }
    return choice;
}

ResidualWork residual_work(const TilePlan& plan) {
    ResidualWork w;
    w.rows = {0, plan.n_x()};
    w.cols = plan.residual_cols();
    w.op_count = plan.n_x() * plan.n_z() * w.cols.size();
    return w;
}

std::string to_text(const TilePlan& plan) {
    using nlohmann::json;
    auto range = [](IndexRange r) { return json::array({r.begin, r.end}); };
    json doc;
    doc["dims"] = {{"n_x", plan.n_x()}, {"n_z", plan.n_z()}, {"n_y", plan.n_y()}};
    doc["profile"] = json(std::vector<std::size_t>(plan.profile().thresholds().begin(),
                                                   plan.profile().thresholds().end()));
    doc["k_sum"] = plan.profile().k_sum();
    json layers = json::array();
    for (std::size_t l = 0; l < plan.layer_count(); ++l) {
        const auto& t = plan.layer(l);
        json chunks_r = json::array();
        json chunks_c = json::array();
        for (auto r : t.row_chunks) chunks_r.push_back(range(r));
        for (auto c : t.col_chunks) chunks_c.push_back(range(c));
        layers.push_back({{"layer", l + 1},
                          {"threshold", t.threshold},
                          {"rows", range(t.rows)},
                          {"cols", range(t.cols)},
                          {"grid", {t.grid.m_x, t.grid.m_y}},
                          {"row_chunks", chunks_r},
                          {"col_chunks", chunks_c}});
    }
    doc["layers"] = layers;
    doc["residual_cols"] = range(plan.residual_cols());
    return doc.dump(2);
}

}  // namespace hcmm
