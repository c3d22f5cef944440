#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <latch>
#include <limits>
#include <memory>
#include <random>
#include <stop_token>
#include <thread>

#include "hcmm/channel.hpp"
#include "hcmm/profile_optimizer.hpp"
#include "hcmm/sim_harness.hpp"

namespace hcmm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct WorkerFlags {
    bool straggler = false;
    bool killed = false;
};

void idle_for(const std::stop_token& st, Clock::duration d) {
    std::mutex m;
    std::condition_variable_any cv;
    std::unique_lock lock(m);
    cv.wait_for(lock, st, d, [] { return false; });
}

template <typename T>
struct Collected {
    std::vector<CompletedResult<T>> results;
    std::vector<std::size_t> counts;  // per layer (or subtask index)
    bool satisfied = false;
};

// Launches one thread per worker and collects results until `satisfied`
// holds, then stops the remaining workers.
template <typename T>
Collected<T> run_workers(const std::vector<WorkerTasks<T>>& tasks,
                         const std::vector<WorkerFlags>& flags, double slowdown, std::size_t slots,
                         const std::function<bool(const std::vector<std::size_t>&)>& satisfied) {
    Channel<CompletedResult<T>> channel;
    std::atomic<std::size_t> live{tasks.size()};
    std::latch go(1);
    Clock::time_point start;

    std::vector<std::jthread> workers;
    workers.reserve(tasks.size());
    for (std::size_t n = 0; n < tasks.size(); ++n) {
        workers.emplace_back([&, n](std::stop_token st) {
            go.wait();
            if (!flags[n].killed) {
                for (const auto& task : tasks[n]) {
                    if (st.stop_requested()) break;
                    const auto t0 = Clock::now();
                    auto product = mat_mul(task.a_hat, task.b_hat);
                    const auto busy = Clock::now() - t0;
                    if (flags[n].straggler && slowdown > 1.0) {
                        idle_for(st, std::chrono::duration_cast<Clock::duration>(busy * (slowdown - 1.0)));
                    }
                    if (st.stop_requested()) break;
                    channel.push({task.worker, task.layer, task.point, std::move(product),
                                  seconds_since(start)});
                }
            }
            if (live.fetch_sub(1) == 1) channel.close();
        });
    }
    start = Clock::now();
    go.count_down();

    Collected<T> out;
    out.counts.assign(slots, 0);
    while (auto r = channel.pop()) {
        ++out.counts.at(r->layer);
        out.results.push_back(std::move(*r));
        if (satisfied(out.counts)) {
            out.satisfied = true;
            break;
        }
    }
    for (auto& w : workers) w.request_stop();
    workers.clear();
    return out;
}

// k-th smallest finish time among the given results.
template <typename T>
double kth_finish(const std::vector<const CompletedResult<T>*>& rs, std::size_t k) {
    std::vector<double> t;
    for (const auto* r : rs) t.push_back(r->finish_time);
    std::sort(t.begin(), t.end());
    return t.at(k - 1);
}

struct TrialOutcome {
    bool decoded = false;
    std::string failure;
    double finish = 0.0;
    double decode_serial = 0.0;
    double decode_parallel = 0.0;
    double residual_time = 0.0;
    double relative_error = std::numeric_limits<double>::quiet_NaN();
    Matrix recovered;
};

template <typename T>
BasicMatrix<T> convert_input(const Matrix& m) {
    if constexpr (std::is_same_v<T, double>) {
        return m;
    } else {
        return to_rational(m);
    }
}

template <typename T>
class SchemeRunner {
public:
    virtual ~SchemeRunner() = default;
    virtual TrialOutcome run(const std::vector<WorkerFlags>& flags, double slowdown) = 0;
};

template <typename T>
class HierRunner final : public SchemeRunner<T> {
public:
    HierRunner(const BasicMatrix<T>& a, const BasicMatrix<T>& b, TilePlan plan,
               const EvalPointSet& points, std::size_t n_workers)
        : a_(a), b_(b), plan_(std::move(plan)), tasks_(encode_hier(a, b, plan_, points, n_workers)) {}

    TrialOutcome run(const std::vector<WorkerFlags>& flags, double slowdown) override {
        const auto& profile = plan_.profile();
        auto c = run_workers<T>(tasks_, flags, slowdown, plan_.layer_count(), [&](const auto& counts) {
            for (std::size_t l = 0; l < counts.size(); ++l) {
                if (counts[l] < profile.threshold(l)) return false;
            }
            return true;
        });
        TrialOutcome out;
        if (!c.satisfied) {
            for (std::size_t l = 0; l < plan_.layer_count(); ++l) {
                if (c.counts[l] < profile.threshold(l)) {
                    out.failure = "layer " + std::to_string(l + 1) + " received " +
                                  std::to_string(c.counts[l]) + " of " +
                                  std::to_string(profile.threshold(l)) + " results";
                    break;
                }
            }
            return out;
        }
        std::vector<std::vector<CompletedResult<T>>> by_layer(plan_.layer_count());
        for (auto& r : c.results) by_layer[r.layer].push_back(std::move(r));
        for (std::size_t l = 0; l < plan_.layer_count(); ++l) {
            std::vector<const CompletedResult<T>*> ptrs;
            for (const auto& r : by_layer[l]) ptrs.push_back(&r);
            out.finish = std::max(out.finish, kth_finish(ptrs, profile.threshold(l)));
        }

        std::vector<std::optional<TileGrid<T>>> grids(plan_.layer_count());
        auto t0 = Clock::now();
        for (std::size_t l = 0; l < plan_.layer_count(); ++l) {
            grids[l] = decode_layer<T>(by_layer[l], plan_, l);
        }
        out.decode_serial = seconds_since(t0);

        t0 = Clock::now();
        {
            std::vector<std::future<TileGrid<T>>> futures;
            for (std::size_t l = 0; l < plan_.layer_count(); ++l) {
                futures.push_back(std::async(std::launch::async, [&, l] {
                    return decode_layer<T>(by_layer[l], plan_, l);
                }));
            }
            for (auto& f : futures) f.get();
        }
        out.decode_parallel = seconds_since(t0);

        t0 = Clock::now();
        std::optional<BasicMatrix<T>> residual;
        if (!plan_.residual_cols().empty()) residual = residual_product(a_, b_, plan_);
        out.residual_time = seconds_since(t0);
        out.recovered = to_double(assemble<T>(grids, residual, plan_));
        out.decoded = true;
        return out;
    }

private:
    const BasicMatrix<T>& a_;
    const BasicMatrix<T>& b_;
    TilePlan plan_;
    std::vector<WorkerTasks<T>> tasks_;
};

// Plain (layers == 1) and sum-rate polynomial codes.
template <typename T>
class SingleCodeRunner final : public SchemeRunner<T> {
public:
    SingleCodeRunner(const BasicMatrix<T>& a, const BasicMatrix<T>& b, PolyLayout layout,
                     std::size_t layers, const EvalPointSet& points, std::size_t n_workers)
        : layout_(std::move(layout)),
          layers_(layers),
          tasks_(encode_sumrate(a, b, layout_, layers, points, n_workers)) {}

    TrialOutcome run(const std::vector<WorkerFlags>& flags, double slowdown) override {
        const std::size_t need = layout_.threshold();
        auto c = run_workers<T>(tasks_, flags, slowdown, layers_, [&](const auto& counts) {
            std::size_t total = 0;
            for (auto v : counts) total += v;
            return total >= need;
        });
        TrialOutcome out;
        if (!c.satisfied) {
            out.failure = "received " + std::to_string(c.results.size()) + " of " +
                          std::to_string(need) + " results";
            return out;
        }
        std::vector<const CompletedResult<T>*> ptrs;
        for (const auto& r : c.results) ptrs.push_back(&r);
        out.finish = kth_finish(ptrs, need);
        const auto t0 = Clock::now();
        auto recovered = decode_sumrate<T>(c.results, layout_);
        out.decode_serial = seconds_since(t0);
        out.decode_parallel = out.decode_serial;
        out.recovered = to_double(recovered);
        out.decoded = true;
        return out;
    }

private:
    PolyLayout layout_;
    std::size_t layers_;
    std::vector<WorkerTasks<T>> tasks_;
};

struct SchemeTrace {
    Scheme scheme;
    std::vector<std::size_t> thresholds;
    std::vector<TrialOutcome> trials;  // recovered matrices dropped after checking
    std::optional<Matrix> last_recovered;
};

template <typename T>
RealExecOutcome run_real_exec_impl(const ExperimentConfig& config, const Matrix& a_in,
                                   const Matrix& b_in) {
    const auto setup = plan_real_exec(config);
    const std::size_t n_workers = config.params.n_workers;
    const std::size_t layers = setup.hier_profile.layers();
    const std::size_t k_sum = setup.hier_profile.k_sum();

    const BasicMatrix<T> a = convert_input<T>(a_in);
    const BasicMatrix<T> b = convert_input<T>(b_in);
    const Matrix oracle = mat_mul(a_in, b_in);

    std::vector<SchemeTrace> traces;
    std::vector<std::unique_ptr<SchemeRunner<T>>> runners;
    for (auto scheme : config.schemes) {
        switch (scheme) {
            case Scheme::Hier: {
                auto plan = build_tile_plan(a_in.rows(), a_in.cols(), b_in.cols(), setup.hier_profile,
                                            setup.hier_grids);
                runners.push_back(std::make_unique<HierRunner<T>>(
                    a, b, std::move(plan), EvalPointSet::make(config.points, n_workers), n_workers));
                traces.push_back({scheme,
                                  {setup.hier_profile.thresholds().begin(),
                                   setup.hier_profile.thresholds().end()},
                                  {},
                                  {}});
                break;
            }
            case Scheme::Plain: {
                auto layout = make_poly_layout(a_in.rows(), a_in.cols(), b_in.cols(), setup.plain_grid);
                runners.push_back(std::make_unique<SingleCodeRunner<T>>(
                    a, b, std::move(layout), 1, EvalPointSet::make(config.points, n_workers),
                    n_workers));
                traces.push_back({scheme, {setup.plain_grid.tiles()}, {}, {}});
                break;
            }
            case Scheme::SumRate: {
                auto layout =
                    make_poly_layout(a_in.rows(), a_in.cols(), b_in.cols(), setup.sumrate_grid);
                runners.push_back(std::make_unique<SingleCodeRunner<T>>(
                    a, b, std::move(layout), layers,
                    EvalPointSet::make(config.points, n_workers * layers), n_workers));
                traces.push_back({scheme, {k_sum}, {}, {}});
                break;
            }
        }
    }

    RealExecOutcome outcome;
    auto& report = outcome.report;
    report.mode = RunMode::RealExec;
    report.seed = config.seed;
    report.trials = config.trials;
    report.config_hash = config_hash(config);

    for (std::size_t t = 0; t < config.trials; ++t) {
        std::mt19937_64 rng(substream_seed(config.seed, t));
        std::vector<WorkerFlags> flags(n_workers);
        for (auto& f : flags) {
            f.straggler = uniform01(rng) < config.straggler_probability;
            f.killed = uniform01(rng) < config.kill_probability;
        }
        TrialDetail detail;
        detail.trial = t;
        detail.layers = layers;
        detail.plain = detail.hier = detail.sumrate = std::numeric_limits<double>::quiet_NaN();
        for (const auto& f : flags) detail.stragglers.push_back(f.straggler);

        for (std::size_t s = 0; s < runners.size(); ++s) {
            auto o = runners[s]->run(flags, config.slowdown);
            if (o.decoded) {
                o.relative_error = relative_error(o.recovered, oracle);
                if (!(o.relative_error <= config.verify_tolerance)) {
                    o.failure = "relative error " + std::to_string(o.relative_error) +
                                " exceeds tolerance";
                }
                switch (traces[s].scheme) {
                    case Scheme::Plain: detail.plain = o.finish; break;
                    case Scheme::Hier: detail.hier = o.finish; break;
                    case Scheme::SumRate: detail.sumrate = o.finish; break;
                }
            }
            if (o.decoded) {
                traces[s].last_recovered = std::move(o.recovered);
                o.recovered = Matrix();
            }
            if (!o.failure.empty()) {
                detail.failure += std::string(detail.failure.empty() ? "" : "; ") +
                                  std::string(to_string(traces[s].scheme)) + ": " + o.failure;
            }
            traces[s].trials.push_back(std::move(o));
        }
        report.trial_rows.push_back(std::move(detail));
    }

    bool have_recovered = false;
    for (auto& tr : traces) {
        SchemeSummary row{tr.scheme, layers, tr.thresholds, {}};
        std::vector<double> finish;
        double dec_s = 0.0;
        double dec_p = 0.0;
        double resid = 0.0;
        double worst = 0.0;
        std::size_t decode_failures = 0;
        std::size_t verify_failures = 0;
        for (auto& o : tr.trials) {
            if (!o.decoded) {
                ++decode_failures;
                continue;
            }
            finish.push_back(o.finish);
            dec_s += o.decode_serial;
            dec_p += o.decode_parallel;
            resid += o.residual_time;
            worst = std::max(worst, o.relative_error);
            if (!o.failure.empty()) ++verify_failures;
        }
        const double n = static_cast<double>(std::max<std::size_t>(1, finish.size()));
        double mean = 0.0;
        for (double f : finish) mean += f;
        mean /= n;
        double ss = 0.0;
        for (double f : finish) ss += (f - mean) * (f - mean);
        row.stats["mean_finish"] = mean;
        row.stats["stderr_finish"] =
            finish.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        row.stats["mean_decode_serial"] = dec_s / n;
        row.stats["mean_decode_parallel"] = dec_p / n;
        if (tr.scheme == Scheme::Hier) row.stats["mean_residual_time"] = resid / n;
        row.stats["max_relative_error"] = worst;
        row.stats["decode_failures"] = static_cast<double>(decode_failures);
        row.stats["verify_failures"] = static_cast<double>(verify_failures);
        row.stats["trials"] = static_cast<double>(tr.trials.size());
        report.rows.push_back(std::move(row));

        if (!have_recovered && tr.last_recovered) {
            outcome.recovered = std::move(*tr.last_recovered);
            have_recovered = true;
        }
    }
    const auto* hier = report.find(Scheme::Hier, layers);
    const auto* plain = report.find(Scheme::Plain, layers);
    if (hier && plain && plain->stats.at("mean_finish") > 0.0) {
        for (auto& r : report.rows) {
            if (r.scheme == Scheme::Hier) {
                r.stats["improvement_vs_plain"] =
                    1.0 - hier->stats.at("mean_finish") / plain->stats.at("mean_finish");
            }
        }
    }
    report.notes.push_back("real execution over " + std::to_string(config.trials) +
                           " trials with local worker threads; finishing times are wall-clock seconds");
    return outcome;
}

}  // namespace

RealExecSetup plan_real_exec(const ExperimentConfig& config) {
    config.validate();
    std::optional<Profile> profile = config.profile;
    if (!profile) {
        OptimizerSpec spec;
        spec.layers = config.layer_sweep.front();
        spec.total_threshold = config.load * spec.layers;
        spec.params = config.params;
        spec.mode = config.optimizer_mode;
        profile = optimize_profile(spec).profile;
    }
    const std::size_t layers = profile->layers();
    const std::size_t k_sum = profile->k_sum();
    if (k_sum % layers != 0) {
        throw Error("profile " + to_string(*profile) + ": k_sum " + std::to_string(k_sum) +
                    " is not a multiple of L, so plain codes cannot match its load");
    }
    RealExecSetup setup{*profile, {}, {}, {}};
    setup.hier_grids = config.grids ? *config.grids
                                    : choose_grids(*profile, config.n_x, config.n_z, config.n_y).grids;
    setup.plain_grid =
        choose_grids(Profile({k_sum / layers}), config.n_x, config.n_z, config.n_y).grids.front();
    setup.sumrate_grid = choose_grids(Profile({k_sum}), config.n_x, config.n_z, config.n_y).grids.front();
    return setup;
}

RealExecOutcome run_real_exec(const ExperimentConfig& config, const Matrix& a, const Matrix& b) {
    config.validate();
    if (a.rows() != config.n_x || a.cols() != config.n_z || b.rows() != config.n_z ||
        b.cols() != config.n_y) {
        throw DimensionError("input matrices do not match the configured dims");
    }
    if (config.backend == Backend::Exact) return run_real_exec_impl<Rational>(config, a, b);
    return run_real_exec_impl<double>(config, a, b);
}

}  // namespace hcmm
