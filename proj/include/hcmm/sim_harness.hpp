#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hcmm/codec.hpp"
#include "hcmm/eval_points.hpp"
#include "hcmm/matrix.hpp"
#include "hcmm/runtime_model.hpp"
#include "hcmm/tiling.hpp"

namespace hcmm {

enum class Scheme { Plain, Hier, SumRate };
enum class RunMode { Analytic, MonteCarlo, RealExec };
// Which profile the decode-cost columns are evaluated on.
enum class DecodeProfile { Optimized, Fig2Preset };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme scheme);
std::string_view to_string(RunMode mode);
DecodeProfile parse_decode_profile(std::string_view name);
std::string_view to_string(DecodeProfile profile);

struct ExperimentConfig {
    std::vector<Scheme> schemes{Scheme::Plain, Scheme::Hier, Scheme::SumRate};
    std::size_t n_x = 1000;
    std::size_t n_z = 1000;
    std::size_t n_y = 1000;
    std::vector<std::size_t> layer_sweep{1};
    std::size_t load = 29;  // per-worker load k_sum / L
    RuntimeParams params{200, 1.0, 0.01};
    std::size_t trials = 1;
    std::uint64_t seed = 1;
    RunMode mode = RunMode::Analytic;
    ExpectationMode optimizer_mode = ExpectationMode::Exact;
    DecodeProfile decode_profile = DecodeProfile::Optimized;
    bool per_trial = false;

    // Explicit hierarchical profile (and grids); otherwise optimized per L.
    std::optional<Profile> profile;
    std::optional<std::vector<LayerGrid>> grids;

    // Real execution.
    double straggler_probability = 0.5;
    double slowdown = 2.0;
    double kill_probability = 0.0;
    Backend backend = Backend::Float;
    PointMode points = PointMode::Chebyshev;
    double verify_tolerance = 1e-6;

    void validate() const;
};

// Canonical key=value rendering of the resolved configuration.
std::string describe(const ExperimentConfig& config);
// FNV-1a of describe(config), as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// K_1..K_3 = 3L + 1 and K_j = 1 beyond, for an average of 10 per layer; (10)
// for L = 1. Throws Error for L = 2, 3.
Profile fig2_decode_profile(std::size_t layers);

// Statistics of one scheme at one layer count. Statistic names are stable
// keys of the CSV/JSON reports.
struct SchemeSummary {
    Scheme scheme = Scheme::Hier;
    std::size_t layers = 1;
    std::vector<std::size_t> thresholds;
    std::map<std::string, double> stats;
};

struct SkippedLayer {
    std::size_t layers = 0;
    std::string reason;
};

// Paired finishing times of one trial; absent schemes are NaN.
struct TrialDetail {
    std::size_t trial = 0;
    std::size_t layers = 0;
    double plain = 0.0;
    double hier = 0.0;
    double sumrate = 0.0;
    std::vector<bool> stragglers;  // real execution only
    std::string failure;           // real execution decode/verify failure
};

struct ExperimentReport {
    RunMode mode = RunMode::Analytic;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::string config_hash;
    std::vector<SchemeSummary> rows;
    std::vector<SkippedLayer> skipped;
    std::vector<TrialDetail> trial_rows;
    std::vector<std::string> notes;

    const SchemeSummary* find(Scheme scheme, std::size_t layers) const;
};

// Per L: optimized profile, expected finishing times (exact and log), and
// decode-cost model values for every scheme.
ExperimentReport run_analytic_sweep(const ExperimentConfig& config);

// Per trial one sampled timeline evaluated under every scheme and every L.
ExperimentReport run_monte_carlo(const ExperimentConfig& config);

struct RealExecOutcome {
    ExperimentReport report;
    Matrix recovered;  // last trial of the first scheme that decoded
};

// N worker threads run their encoded subtasks in order; stragglers idle for
// (slowdown - 1) times each measured compute duration. The master records
// arrivals, stops workers once every threshold is met, then decodes.
RealExecOutcome run_real_exec(const ExperimentConfig& config, const Matrix& a, const Matrix& b);

// Shapes used by real execution for each scheme at the configured load.
struct RealExecSetup {
    Profile hier_profile;
    std::vector<LayerGrid> hier_grids;
    LayerGrid plain_grid;
    LayerGrid sumrate_grid;
};

RealExecSetup plan_real_exec(const ExperimentConfig& config);

}  // namespace hcmm
