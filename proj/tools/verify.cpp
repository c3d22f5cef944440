#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "hcmm/codec.hpp"
#include "hcmm/report_io.hpp"
#include "json.hpp"

namespace hcmm::cli {

namespace {

struct Counterexample {
    std::string check;
    std::size_t layer = 0;  // 1-based; 0 for whole-product checks
    std::vector<std::size_t> workers;
    std::size_t tile_row = 0;
    std::size_t tile_col = 0;
    double error = 0.0;
    std::string detail;
};

Matrix small_integer_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = static_cast<double>(static_cast<int>(rng() % 9) - 4);
    return m;
}

double binomial(std::size_t n, std::size_t k) {
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return c;
}

template <typename T>
double mismatch(const BasicMatrix<T>& got, const BasicMatrix<T>& want, Backend backend) {
    if (got.rows() != want.rows() || got.cols() != want.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    if constexpr (std::is_same_v<T, Rational>) {
        (void)backend;
        return got == want ? 0.0 : std::max(relative_error(to_double(got), to_double(want)), 1e-300);
    } else {
        (void)backend;
        return relative_error(got, want);
    }
}

template <typename T>
class Auditor {
public:
    Auditor(const VerifyConfig& config, std::optional<InjectedFault> fault, std::ostream& out)
        : config_(config), fault_(fault), out_(out) {}

    std::optional<Counterexample> run() {
        std::mt19937_64 rng(config_.seed);
        const Matrix a_d = small_integer_matrix(config_.n_x, config_.n_z, rng);
        const Matrix b_d = small_integer_matrix(config_.n_z, config_.n_y, rng);
        BasicMatrix<T> a;
        BasicMatrix<T> b;
        if constexpr (std::is_same_v<T, Rational>) {
            a = to_rational(a_d);
            b = to_rational(b_d);
        } else {
            a = a_d;
            b = b_d;
        }
        const auto grids = config_.grids
                               ? *config_.grids
                               : choose_grids(config_.profile, config_.n_x, config_.n_z, config_.n_y).grids;
        const auto plan = build_tile_plan(config_.n_x, config_.n_z, config_.n_y, config_.profile, grids);
        const auto points = EvalPointSet::make(config_.points, config_.workers);
        const auto tasks = encode_hier(a, b, plan, points, config_.workers);
        const auto oracle = mat_mul(a, b);

        if (auto cx = check_partition(plan)) return cx;

        std::vector<std::vector<CompletedResult<T>>> by_layer(plan.layer_count());
        for (const auto& worker : tasks) {
            for (const auto& task : worker) by_layer[task.layer].push_back(execute_task(task));
        }
        if (fault_) {
            if (fault_->layer == 0 || fault_->layer > plan.layer_count() || fault_->worker == 0 ||
                fault_->worker > config_.workers) {
                throw Error("inject-fault: layer:worker out of range");
            }
            auto& product = by_layer[fault_->layer - 1][fault_->worker - 1].product;
            product(0, 0) += T(1);
            out_ << "injected fault: layer " << fault_->layer << " worker " << fault_->worker << "\n";
        }

        std::vector<std::optional<TileGrid<T>>> first(plan.layer_count());
        for (std::size_t l = 0; l < plan.layer_count(); ++l) {
            if (auto cx = check_layer(plan, oracle, by_layer[l], l, rng, first[l])) return cx;
        }

        std::optional<BasicMatrix<T>> residual;
        if (!plan.residual_cols().empty()) residual = residual_product(a, b, plan);
        const auto assembled = assemble<T>(first, residual, plan);
        const double err = mismatch(assembled, oracle, config_.backend);
        if (!passes(err)) {
            return Counterexample{"assembled_product", 0, {}, 0, 0, err,
                                  "layers decoded from their first subsets plus the residual"};
        }
        out_ << "assembled product: ok\n";
        return std::nullopt;
    }

private:
    bool passes(double err) const {
        return config_.backend == Backend::Exact ? err == 0.0 : err <= config_.verify_tolerance;
    }

    // Every product entry must be covered by exactly one information tile or
    // by the residual block.
    std::optional<Counterexample> check_partition(const TilePlan& plan) {
        std::vector<unsigned> cover(plan.n_x() * plan.n_y(), 0);
        auto mark = [&](IndexRange rows, IndexRange cols) {
            for (auto r = rows.begin; r < rows.end; ++r) {
                for (auto c = cols.begin; c < cols.end; ++c) ++cover[r * plan.n_y() + c];
            }
        };
        for (const auto& tile : plan.layers()) {
            for (auto rr : tile.row_chunks) {
                for (auto cc : tile.col_chunks) mark(rr, cc);
            }
        }
        mark({0, plan.n_x()}, plan.residual_cols());
        for (std::size_t i = 0; i < cover.size(); ++i) {
            if (cover[i] != 1) {
                return Counterexample{"partition", 0, {}, i / plan.n_y(), i % plan.n_y(),
                                      static_cast<double>(cover[i]),
                                      "product entry covered " + std::to_string(cover[i]) + " times"};
            }
        }
        out_ << "partition: every entry covered once (" << plan.layer_count() << " layers, "
             << plan.residual_cols().size() << " residual columns)\n";
        return std::nullopt;
    }

    std::optional<Counterexample> check_subset(const TilePlan& plan, const BasicMatrix<T>& oracle,
                                               const std::vector<CompletedResult<T>>& results,
                                               const std::vector<std::size_t>& subset, std::size_t l,
                                               std::optional<TileGrid<T>>& keep) {
        std::vector<CompletedResult<T>> chosen;
        for (auto w : subset) chosen.push_back(results[w]);
        auto grid = decode_layer<T>(chosen, plan, l);
        const auto& tile = plan.layer(l);
        for (std::size_t j = 0; j < tile.col_chunks.size(); ++j) {
            for (std::size_t i = 0; i < tile.row_chunks.size(); ++i) {
                const auto want = slice_block(oracle, tile.row_chunks[i], tile.col_chunks[j]);
                const double err = mismatch(grid.at(i, j), want, config_.backend);
                if (!passes(err)) {
                    std::vector<std::size_t> workers;
                    for (auto w : subset) workers.push_back(w + 1);
                    return Counterexample{"subset_decode", l + 1, workers, i, j, err,
                                          "decoded tile differs from the direct product"};
                }
            }
        }
        if (!keep) keep = std::move(grid);
        return std::nullopt;
    }

    std::optional<Counterexample> check_layer(const TilePlan& plan, const BasicMatrix<T>& oracle,
                                              const std::vector<CompletedResult<T>>& results,
                                              std::size_t l, std::mt19937_64& rng,
                                              std::optional<TileGrid<T>>& keep) {
        const std::size_t n = results.size();
        const std::size_t k = plan.profile().threshold(l);
        const double total = binomial(n, k);
        const bool exhaustive = config_.samples == 0 || total <= static_cast<double>(config_.samples);
        std::size_t checked = 0;
        if (exhaustive) {
            std::vector<bool> mask(n, false);
            std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
            do {
                std::vector<std::size_t> subset;
                for (std::size_t w = 0; w < n; ++w) {
                    if (mask[w]) subset.push_back(w);
                }
                if (auto cx = check_subset(plan, oracle, results, subset, l, keep)) return cx;
                ++checked;
            } while (std::prev_permutation(mask.begin(), mask.end()));
        } else {
            std::vector<std::size_t> idx(n);
            for (std::size_t w = 0; w < n; ++w) idx[w] = w;
            for (std::size_t s = 0; s < config_.samples; ++s) {
                std::shuffle(idx.begin(), idx.end(), rng);
                std::vector<std::size_t> subset(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
                std::sort(subset.begin(), subset.end());
                if (auto cx = check_subset(plan, oracle, results, subset, l, keep)) return cx;
                ++checked;
            }
        }
        out_ << "layer " << l + 1 << ": K=" << k << ", " << checked << " subsets "
             << (exhaustive ? "(exhaustive)" : "(sampled)") << ": ok\n";
        return std::nullopt;
    }

    const VerifyConfig& config_;
    std::optional<InjectedFault> fault_;
    std::ostream& out_;
};

}  // namespace

InjectedFault parse_fault(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) throw Error("missing ':'");
        std::size_t used = 0;
        InjectedFault f;
        f.layer = std::stoul(text.substr(0, colon), &used);
        f.worker = std::stoul(text.substr(colon + 1), &used);
        return f;
    } catch (const std::exception&) {
        throw Error("inject-fault: expected layer:worker, got '" + text + "'");
    }
}

int run_verify(const VerifyConfig& config, std::optional<InjectedFault> fault,
               const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
    std::optional<Counterexample> cx;
    if (config.backend == Backend::Exact) {
        cx = Auditor<Rational>(config, fault, out).run();
    } else {
        cx = Auditor<double>(config, fault, out).run();
    }
    if (!cx) {
        out << "VERIFY_OK\n";
        return 0;
    }
    nlohmann::json j{{"check", cx->check},     {"layer", cx->layer},
                     {"workers", cx->workers}, {"tile", {cx->tile_row, cx->tile_col}},
                     {"error", std::isfinite(cx->error) ? nlohmann::json(cx->error) : nlohmann::json("inf")},
                     {"detail", cx->detail},   {"seed", config.seed},
                     {"profile", to_string(config.profile)}};
    err << "VERIFY_FAIL counterexample: " << j.dump() << "\n";
    try {
        std::filesystem::create_directories(out_dir);
        write_file_atomic(out_dir / "counterexample.json", j.dump(2) + "\n");
    } catch (const std::exception& e) {
        err << "could not write counterexample: " << e.what() << "\n";
    }
    return 1;
}

}  // namespace hcmm::cli
