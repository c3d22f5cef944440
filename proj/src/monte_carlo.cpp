#include "hcmm/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "hcmm/profile_optimizer.hpp"

namespace hcmm {

Scheme parse_scheme(std::string_view name) {
    if (name == "plain") return Scheme::Plain;
    if (name == "hier") return Scheme::Hier;
    if (name == "sumrate") return Scheme::SumRate;
    throw Error("unknown scheme '" + std::string(name) + "' (expected plain|hier|sumrate)");
}

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::Plain: return "plain";
        case Scheme::Hier: return "hier";
        case Scheme::SumRate: return "sumrate";
    }
    return "?";
}

std::string_view to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Analytic: return "analytic";
        case RunMode::MonteCarlo: return "montecarlo";
        case RunMode::RealExec: return "realexec";
    }
    return "?";
}

DecodeProfile parse_decode_profile(std::string_view name) {
    if (name == "optimized") return DecodeProfile::Optimized;
    if (name == "fig2") return DecodeProfile::Fig2Preset;
    throw Error("unknown decode profile '" + std::string(name) + "' (expected optimized|fig2)");
}

std::string_view to_string(DecodeProfile profile) {
    return profile == DecodeProfile::Optimized ? "optimized" : "fig2";
}

void ExperimentConfig::validate() const {
    if (schemes.empty()) throw Error("schemes: empty scheme set");
    if (n_x == 0 || n_z == 0 || n_y == 0) throw Error("dims: matrix dimensions must be positive");
    if (layer_sweep.empty()) throw Error("layers: empty layer sweep");
    for (auto l : layer_sweep) {
        if (l == 0) throw Error("layers: layer counts must be >= 1");
    }
    if (load == 0) throw Error("load: per-worker load must be >= 1");
    params.validate();
    if (trials == 0) throw Error("trials: need at least one trial");
    if (!(straggler_probability >= 0.0 && straggler_probability <= 1.0)) {
        throw Error("straggler_probability: must lie in [0, 1]");
    }
    if (!(slowdown >= 1.0)) throw Error("slowdown: must be >= 1");
    if (!(kill_probability >= 0.0 && kill_probability <= 1.0)) {
        throw Error("kill_probability: must lie in [0, 1]");
    }
    if (!(verify_tolerance > 0.0)) throw Error("verify_tolerance: must be positive");
    if (profile && grids && grids->size() != profile->layers()) {
        throw Error("grids: need one grid per profile layer");
    }
}

std::string describe(const ExperimentConfig& c) {
    std::ostringstream out;
    out.precision(17);
    out << "mode=" << to_string(c.mode) << "\nschemes=";
    for (std::size_t i = 0; i < c.schemes.size(); ++i) out << (i ? "," : "") << to_string(c.schemes[i]);
    out << "\ndims=" << c.n_x << "," << c.n_z << "," << c.n_y << "\nlayers=";
    for (std::size_t i = 0; i < c.layer_sweep.size(); ++i) out << (i ? "," : "") << c.layer_sweep[i];
    out << "\nload=" << c.load << "\nworkers=" << c.params.n_workers << "\nmu=" << c.params.mu
        << "\nalpha=" << c.params.alpha << "\ntrials=" << c.trials << "\nseed=" << c.seed
        << "\noptimizer_mode=" << to_string(c.optimizer_mode)
        << "\ndecode_profile=" << to_string(c.decode_profile)
        << "\nprofile=" << (c.profile ? to_string(*c.profile) : "optimized") << "\ngrids=";
    if (c.grids) {
        for (std::size_t i = 0; i < c.grids->size(); ++i) {
            out << (i ? "," : "") << (*c.grids)[i].m_x << "x" << (*c.grids)[i].m_y;
        }
    } else {
        out << "auto";
    }
    out << "\nstraggler_probability=" << c.straggler_probability << "\nslowdown=" << c.slowdown
        << "\nkill_probability=" << c.kill_probability << "\nbackend=" << to_string(c.backend)
        << "\npoints=" << to_string(c.points) << "\nverify_tolerance=" << c.verify_tolerance << "\n";
    return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : describe(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Profile fig2_decode_profile(std::size_t layers) {
    if (layers == 1) return Profile({10});
    if (layers < 4) {
        throw Error("the Fig. 2 decode preset is defined for L = 1 and L > 3, not L = " +
                    std::to_string(layers));
    }
    std::vector<std::size_t> ks(layers, 1);
    for (std::size_t i = 0; i < 3; ++i) ks[i] = 3 * layers + 1;
    return Profile(std::move(ks));
}

const SchemeSummary* ExperimentReport::find(Scheme scheme, std::size_t layers) const {
    for (const auto& r : rows) {
        if (r.scheme == scheme && r.layers == layers) return &r;
    }
    return nullptr;
}

namespace {

bool wants(const ExperimentConfig& c, Scheme s) {
    return std::find(c.schemes.begin(), c.schemes.end(), s) != c.schemes.end();
}

struct LayerSetup {
    std::size_t layers = 0;
    Profile hier{std::vector<std::size_t>{1}};
    double objective = 0.0;
};

// Hierarchical profile for every requested L, or the reason it is skipped.
std::vector<LayerSetup> resolve_layers(const ExperimentConfig& config, ExperimentReport& report) {
    std::vector<LayerSetup> out;
    if (config.profile) {
        config.profile->validate_for(config.params.n_workers);
        LayerSetup s;
        s.layers = config.profile->layers();
        s.hier = *config.profile;
        s.objective = expected_finishing_time(s.hier, config.params, ExpectationMode::Exact).value;
        out.push_back(std::move(s));
        return out;
    }
    for (auto layers : config.layer_sweep) {
        OptimizerSpec spec;
        spec.layers = layers;
        spec.total_threshold = config.load * layers;
        spec.params = config.params;
        spec.mode = config.optimizer_mode;
        try {
            auto opt = optimize_profile(spec);
            out.push_back({layers, std::move(opt.profile), opt.objective});
        } catch (const Error& e) {
            report.skipped.push_back({layers, e.what()});
        }
    }
    return out;
}

std::size_t plain_threshold(const LayerSetup& s) {
    return s.hier.k_sum() / s.layers;
}

double polys_for(const ExperimentConfig& c, std::size_t k_sum) {
    return static_cast<double>(c.n_x) * static_cast<double>(c.n_y) / static_cast<double>(k_sum);
}

// Decode-cost columns for the three schemes at one L.
struct DecodeCosts {
    bool valid = false;
    std::vector<std::size_t> hier;
    double hier_serial = 0.0;
    double hier_parallel = 0.0;
    double plain = 0.0;
    double sumrate = 0.0;
};

DecodeCosts decode_costs(const ExperimentConfig& config, const LayerSetup& s,
                         ExperimentReport& report) {
    DecodeCosts d;
    std::optional<Profile> p;
    if (config.decode_profile == DecodeProfile::Fig2Preset) {
        try {
            p = fig2_decode_profile(s.layers);
        } catch (const Error& e) {
            report.notes.push_back("L=" + std::to_string(s.layers) + ": " + e.what());
            return d;
        }
    } else {
        p = s.hier;
    }
    d.valid = true;
    d.hier.assign(p->thresholds().begin(), p->thresholds().end());
    const std::size_t k_sum = p->k_sum();
    const double polys = polys_for(config, k_sum);
    d.hier_serial = decode_cost(p->thresholds(), DecodeMode::SerialHier, polys);
    d.hier_parallel = decode_cost(p->thresholds(), DecodeMode::ParallelHier, polys);
    const std::size_t k_plain = std::max<std::size_t>(1, k_sum / s.layers);
    const std::size_t kp[] = {k_plain};
    d.plain = decode_cost(kp, DecodeMode::Plain, polys_for(config, k_plain));
    const std::size_t ks[] = {k_sum};
    d.sumrate = decode_cost(ks, DecodeMode::SumRate, polys);
    return d;
}

void put_decode(SchemeSummary& row, const DecodeCosts& d) {
    if (!d.valid) return;
    switch (row.scheme) {
        case Scheme::Hier:
            row.stats["decode_cost_serial"] = d.hier_serial;
            row.stats["decode_cost_parallel"] = d.hier_parallel;
            break;
        case Scheme::Plain:
            row.stats["decode_cost_serial"] = d.plain;
            row.stats["decode_cost_parallel"] = d.plain;
            break;
        case Scheme::SumRate:
            row.stats["decode_cost_serial"] = d.sumrate;
            row.stats["decode_cost_parallel"] = d.sumrate;
            break;
    }
}

void put_expectations(SchemeSummary& row, const Profile& p, const RuntimeParams& params) {
    const auto exact = expected_finishing_time(p, params, ExpectationMode::Exact);
    row.stats["expected_exact"] = exact.value;
    row.stats["argmax_layer"] = static_cast<double>(exact.argmax_layer + 1);
    if (p.max_threshold() < params.n_workers) {
        row.stats["expected_log"] =
            expected_finishing_time(p, params, ExpectationMode::LogApprox).value;
    }
}

struct MeanStd {
    double mean = 0.0;
    double stderr_ = 0.0;
};

MeanStd mean_stderr(const std::vector<double>& xs) {
    MeanStd m;
    if (xs.empty()) return m;
    double sum = 0.0;
    for (double x : xs) sum += x;
    m.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                              static_cast<double>(xs.size()));
    }
    return m;
}

}  // namespace

ExperimentReport run_analytic_sweep(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport report;
    report.mode = RunMode::Analytic;
    report.seed = config.seed;
    report.trials = 0;
    report.config_hash = config_hash(config);

    for (const auto& s : resolve_layers(config, report)) {
        const auto costs = decode_costs(config, s, report);
        const std::size_t k_plain = plain_threshold(s);
        const bool plain_ok = k_plain >= 1 && k_plain <= config.params.n_workers;

        std::optional<double> plain_exact;
        if (wants(config, Scheme::Plain)) {
            if (plain_ok) {
                SchemeSummary row{Scheme::Plain, s.layers, {k_plain}, {}};
                put_expectations(row, Profile({k_plain}), config.params);
                plain_exact = row.stats["expected_exact"];
                put_decode(row, costs);
                report.rows.push_back(std::move(row));
            } else {
                report.skipped.push_back({s.layers, "plain threshold exceeds worker count"});
            }
        }
        if (wants(config, Scheme::Hier)) {
            SchemeSummary row{Scheme::Hier, s.layers,
                              {s.hier.thresholds().begin(), s.hier.thresholds().end()}, {}};
            put_expectations(row, s.hier, config.params);
            row.stats["objective"] = s.objective;
            if (plain_ok) {
                const double base =
                    plain_exact ? *plain_exact
                                : expected_finishing_time(Profile({k_plain}), config.params,
                                                          ExpectationMode::Exact)
                                      .value;
                row.stats["improvement_vs_plain"] = 1.0 - row.stats["expected_exact"] / base;
            }
            put_decode(row, costs);
            report.rows.push_back(std::move(row));
        }
        if (wants(config, Scheme::SumRate)) {
            SchemeSummary row{Scheme::SumRate, s.layers, {s.hier.k_sum()}, {}};
            put_decode(row, costs);
            report.rows.push_back(std::move(row));
        }
    }
    report.notes.push_back(
        "sum-rate has no closed-form expectation; use simulate for its finishing time");
    return report;
}

ExperimentReport run_monte_carlo(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport report;
    report.mode = RunMode::MonteCarlo;
    report.seed = config.seed;
    report.trials = config.trials;
    report.config_hash = config_hash(config);

    const auto setups = resolve_layers(config, report);
    const std::size_t n_l = setups.size();
    const std::size_t trials = config.trials;
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    const bool do_plain = wants(config, Scheme::Plain);
    const bool do_hier = wants(config, Scheme::Hier);
    const bool do_sum = wants(config, Scheme::SumRate);

    std::vector<bool> plain_ok(n_l);
    for (std::size_t i = 0; i < n_l; ++i) {
        plain_ok[i] = plain_threshold(setups[i]) <= config.params.n_workers;
        if (do_plain && !plain_ok[i]) {
            report.skipped.push_back({setups[i].layers, "plain threshold exceeds worker count"});
        }
    }

    // [layer setup][trial]
    std::vector<std::vector<double>> plain(n_l, std::vector<double>(trials, nan));
    std::vector<std::vector<double>> hier(n_l, std::vector<double>(trials, nan));
    std::vector<std::vector<double>> sumrate(n_l, std::vector<double>(trials, nan));

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            const auto timeline = sample_worker_times(config.params, substream_seed(config.seed, t));
            for (std::size_t i = 0; i < n_l; ++i) {
                const auto& s = setups[i];
                if (do_plain && plain_ok[i]) {
                    plain[i][t] = plain_finishing_time(plain_threshold(s), timeline);
                }
                if (do_hier) hier[i][t] = hier_finishing_time(s.hier, timeline).tau;
                if (do_sum) sumrate[i][t] = sumrate_finishing_time(s.hier.k_sum(), s.layers, timeline);
            }
        }
    };
    const std::size_t threads =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), trials));
    if (threads == 1) {
        run_range(0, trials);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (trials + threads - 1) / threads;
        for (std::size_t w = 0; w < threads; ++w) {
            const std::size_t b = w * chunk;
            const std::size_t e = std::min(trials, b + chunk);
            if (b < e) pool.emplace_back(run_range, b, e);
        }
    }

    for (std::size_t i = 0; i < n_l; ++i) {
        const auto& s = setups[i];
        const auto costs = decode_costs(config, s, report);
        auto summarize = [&](Scheme scheme, std::vector<std::size_t> ks,
                             const std::vector<double>& xs) {
            SchemeSummary row{scheme, s.layers, std::move(ks), {}};
            const auto ms = mean_stderr(xs);
            row.stats["mean_finish"] = ms.mean;
            row.stats["stderr_finish"] = ms.stderr_;
            row.stats["trials"] = static_cast<double>(xs.size());
            put_decode(row, costs);
            return row;
        };
        if (do_plain && plain_ok[i]) {
            const std::size_t k = plain_threshold(s);
            auto row = summarize(Scheme::Plain, {k}, plain[i]);
            row.stats["expected_exact"] =
                expected_finishing_time(Profile({k}), config.params, ExpectationMode::Exact).value;
            report.rows.push_back(std::move(row));
        }
        if (do_hier) {
            auto row = summarize(Scheme::Hier, {s.hier.thresholds().begin(), s.hier.thresholds().end()},
                                 hier[i]);
            row.stats["expected_exact"] =
                expected_finishing_time(s.hier, config.params, ExpectationMode::Exact).value;
            report.rows.push_back(std::move(row));
        }
        if (do_sum) {
            auto row = summarize(Scheme::SumRate, {s.hier.k_sum()}, sumrate[i]);
            if (do_hier) {
                std::size_t violations = 0;
                double gap = 0.0;
                for (std::size_t t = 0; t < trials; ++t) {
                    if (sumrate[i][t] > hier[i][t]) ++violations;
                    gap += hier[i][t] - sumrate[i][t];
                }
                row.stats["paired_dominance_violations"] = static_cast<double>(violations);
                row.stats["paired_mean_gap_vs_hier"] = gap / static_cast<double>(trials);
            }
            report.rows.push_back(std::move(row));
        }
        if (trials == 1 || config.per_trial) {
            for (std::size_t t = 0; t < trials; ++t) {
                report.trial_rows.push_back({t, s.layers, plain[i][t], hier[i][t], sumrate[i][t], {}, {}});
            }
        }
    }
    return report;
}

}  // namespace hcmm
