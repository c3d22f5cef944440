#include "cli.hpp"

#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "cli_config.hpp"
#include "hcmm/matrix_io.hpp"
#include "hcmm/report_io.hpp"
#include "json.hpp"
#include "verify.hpp"

namespace hcmm::cli {

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

// Flags shared by the subcommands; empty optionals were not given.
struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> backend;
    std::optional<std::string> points;
    std::optional<std::size_t> trials;
    std::vector<std::string> sets;
};

void add_common(CLI::App* sub, CommonFlags& f, bool experiment) {
    sub->add_option("--config", f.config, "Config file (INI: top-level keys and per-command sections)");
    sub->add_option("--seed", f.seed, "Base seed (overrides the config)");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--backend", f.backend, "Codec scalar field")->check(CLI::IsMember({"exact", "float"}));
    sub->add_option("--points", f.points, "Evaluation points")
        ->check(CLI::IsMember({"integer", "chebyshev"}));
    if (experiment) sub->add_option("--trials", f.trials, "Trial count");
    sub->add_option("--set", f.sets, "Override any config key, KEY=VALUE (repeatable)");
}

KeyValues resolve_keys(Command command, const CommonFlags& f) {
    KeyValues kv;
    if (!f.config.empty()) kv = load_config_file(f.config, command);
    for (const auto& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + s + "'");
        apply_override(kv, command, s.substr(0, eq), s.substr(eq + 1));
    }
    if (f.seed) apply_override(kv, command, "seed", std::to_string(*f.seed));
    if (f.out) apply_override(kv, command, "out", *f.out);
    if (f.backend) apply_override(kv, command, "backend", *f.backend);
    if (f.points) apply_override(kv, command, "points", *f.points);
    if (f.trials) apply_override(kv, command, "trials", std::to_string(*f.trials));
    return kv;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void print_rows(const ExperimentReport& report, std::ostream& out) {
    out << "config_hash " << report.config_hash << " seed " << report.seed << " mode "
        << to_string(report.mode) << "\n";
    for (const auto& row : report.rows) {
        out << to_string(row.scheme) << " L=" << row.layers << " profile=";
        for (std::size_t i = 0; i < row.thresholds.size(); ++i) out << (i ? "," : "") << row.thresholds[i];
        for (const char* key : {"expected_exact", "mean_finish", "stderr_finish", "improvement_vs_plain",
                                "max_relative_error"}) {
            if (auto it = row.stats.find(key); it != row.stats.end()) {
                out << " " << key << "=" << fmt(it->second);
            }
        }
        out << "\n";
    }
    for (const auto& s : report.skipped) out << "skipped L=" << s.layers << ": " << s.reason << "\n";
}

int cmd_experiment(Command command, const CommonFlags& flags, std::ostream& out) {
    const auto kv = resolve_keys(command, flags);
    const auto config = build_experiment_config(kv, command);
    const auto report =
        command == Command::Analyze ? run_analytic_sweep(config) : run_monte_carlo(config);
    const auto dir = output_dir(kv);
    write_report(dir, report, config);
    print_rows(report, out);
    out << "wrote " << (dir / "summary.csv").string() << "\n";
    return kOk;
}

struct RunInputs {
    std::vector<std::size_t> random_dims;
    std::string a_path;
    std::string b_path;
};

int cmd_run(const CommonFlags& flags, const RunInputs& inputs, std::ostream& out, std::ostream& err) {
    auto kv = resolve_keys(Command::Run, flags);
    Matrix a;
    Matrix b;
    if (!inputs.random_dims.empty()) {
        if (!inputs.a_path.empty() || !inputs.b_path.empty()) {
            throw ConfigError("run: give either --random or --a/--b, not both");
        }
        const auto& d = inputs.random_dims;
        kv["n_x"] = std::to_string(d[0]);
        kv["n_z"] = std::to_string(d[1]);
        kv["n_y"] = std::to_string(d[2]);
        const auto seed_probe = build_experiment_config(kv, Command::Run);
        std::mt19937_64 rng(substream_seed(seed_probe.seed, 0xA11CEULL));
        auto fill = [&](std::size_t r, std::size_t c) {
            Matrix m(r, c);
            for (auto& v : m.data()) v = 2.0 * uniform01(rng) - 1.0;
            return m;
        };
        a = fill(d[0], d[1]);
        b = fill(d[1], d[2]);
    } else if (!inputs.a_path.empty() && !inputs.b_path.empty()) {
        a = load_binary(inputs.a_path);
        b = load_binary(inputs.b_path);
        kv["n_x"] = std::to_string(a.rows());
        kv["n_z"] = std::to_string(a.cols());
        kv["n_y"] = std::to_string(b.cols());
    } else {
        throw ConfigError("run: need --random NX NZ NY or both --a and --b");
    }
    const auto config = build_experiment_config(kv, Command::Run);
    const auto outcome = run_real_exec(config, a, b);
    const auto dir = output_dir(kv);
    write_report(dir, outcome.report, config);
    print_rows(outcome.report, out);

    double verify_failures = 0.0;
    double decode_failures = 0.0;
    for (const auto& row : outcome.report.rows) {
        verify_failures += row.stats.at("verify_failures");
        decode_failures += row.stats.at("decode_failures");
    }
    if (!outcome.recovered.empty()) {
        const auto tmp = dir / "recovered.bin.tmp";
        save_binary(tmp, outcome.recovered);
        std::filesystem::rename(tmp, dir / "recovered.bin");
        out << "wrote " << (dir / "recovered.bin").string() << "\n";
    }
    if (verify_failures > 0.0) {
        err << "VERIFY_FAIL: " << verify_failures
            << " decoded results differ from the direct product beyond tolerance\n";
        return kCheckFailed;
    }
    if (decode_failures > 0.0) {
        err << "DECODE_FAIL: " << decode_failures << " scheme-trials lacked enough results\n";
        return kCheckFailed;
    }
    out << "VERIFY_OK\n";
    return kOk;
}

struct OptimizeFlags {
    std::string config;
    std::optional<std::size_t> workers;
    std::optional<std::size_t> layers;
    std::optional<std::size_t> total;
    std::optional<std::size_t> load;
    std::optional<double> mu;
    std::optional<double> alpha;
    std::optional<std::string> mode;
};

int cmd_optimize(const OptimizeFlags& f, std::ostream& out) {
    KeyValues kv;
    const auto cmd = Command::Optimize;
    if (!f.config.empty()) kv = load_config_file(f.config, cmd);
    auto put = [&](const char* key, const auto& v) {
        if (v) {
            std::ostringstream s;
            s.precision(17);
            s << *v;
            apply_override(kv, cmd, key, s.str());
        }
    };
    put("workers", f.workers);
    put("layers", f.layers);
    put("total_threshold", f.total);
    put("load", f.load);
    put("mu", f.mu);
    put("alpha", f.alpha);
    put("mode", f.mode);
    const auto spec = build_optimizer_spec(kv);
    const auto result = optimize_profile(spec);
    nlohmann::json j;
    j["profile"] = std::vector<std::size_t>(result.profile.thresholds().begin(),
                                            result.profile.thresholds().end());
    j["z"] = result.objective;
    out << j.dump() << "\n";
    return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hierarchical coded matrix multiplication toolkit", "hcmm"};
    app.require_subcommand(1);

    CommonFlags analyze_flags;
    CommonFlags simulate_flags;
    CommonFlags run_flags;
    CommonFlags verify_flags;
    RunInputs run_inputs;
    OptimizeFlags opt;
    std::string fault_text;
    std::optional<std::size_t> samples;

    auto* analyze = app.add_subcommand("analyze", "Expected finishing times and decode costs per L");
    add_common(analyze, analyze_flags, true);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo finishing times on shared timelines");
    add_common(simulate, simulate_flags, true);
    auto* run = app.add_subcommand("run", "Threaded execution with injected stragglers");
    add_common(run, run_flags, true);
    run->add_option("--random", run_inputs.random_dims, "Random inputs of shape NX NZ NY")->expected(3);
    run->add_option("--a", run_inputs.a_path, "Left matrix (binary layout)");
    run->add_option("--b", run_inputs.b_path, "Right matrix (binary layout)");
    auto* optimize = app.add_subcommand("optimize", "Print the optimized profile as JSON");
    optimize->add_option("--config", opt.config, "Config file");
    optimize->add_option("--workers,-N", opt.workers, "Worker count N");
    optimize->add_option("--layers,-L", opt.layers, "Layer count L");
    optimize->add_option("--total,-K", opt.total, "Total threshold K");
    optimize->add_option("--load", opt.load, "Per-worker load; K = load * L");
    optimize->add_option("--mu", opt.mu, "Exponential scale");
    optimize->add_option("--alpha", opt.alpha, "Shift");
    optimize->add_option("--mode", opt.mode, "exact or log")->check(CLI::IsMember({"exact", "log", "logapprox"}));
    auto* verify = app.add_subcommand("verify", "Subset-decode and partition audit");
    add_common(verify, verify_flags, false);
    verify->add_option("--samples", samples, "Subsets per layer when exhaustive is too many (0 = all)");
    verify->add_option("--inject-fault", fault_text, "Corrupt one result, LAYER:WORKER (1-based)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    try {
        if (analyze->parsed()) return cmd_experiment(Command::Analyze, analyze_flags, out);
        if (simulate->parsed()) return cmd_experiment(Command::Simulate, simulate_flags, out);
        if (run->parsed()) return cmd_run(run_flags, run_inputs, out, err);
        if (optimize->parsed()) return cmd_optimize(opt, out);
        if (verify->parsed()) {
            auto kv = resolve_keys(Command::Verify, verify_flags);
            if (samples) apply_override(kv, Command::Verify, "samples", std::to_string(*samples));
            const auto config = build_verify_config(kv);
            std::optional<InjectedFault> fault;
            if (!fault_text.empty()) fault = parse_fault(fault_text);
            return run_verify(config, fault, output_dir(kv), out, err);
        }
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
    return kUsage;
}

}  // namespace hcmm::cli
