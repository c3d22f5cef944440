#include "cli_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "CLI11.hpp"

namespace hcmm::cli {

namespace {

const std::vector<std::string> kExperimentKeys{
    "schemes",   "n_x",           "n_z",
    "n_y",       "workers",       "mu",
    "alpha",     "layers",        "load",
    "trials",    "seed",          "optimizer_mode",
    "decode_profile", "per_trial", "profile",
    "grids",     "straggler_probability", "slowdown",
    "kill_probability", "backend", "points",
    "verify_tolerance", "out"};

const std::vector<std::string> kOptimizeKeys{"workers", "layers", "total_threshold", "load",
                                             "mu",      "alpha",  "mode"};

const std::vector<std::string> kVerifyKeys{"n_x",     "n_z",    "n_y",    "workers",
                                           "profile", "grids",  "backend", "points",
                                           "seed",    "samples", "verify_tolerance", "out"};

std::optional<Command> command_from_section(const std::string& name) {
    for (auto c : {Command::Analyze, Command::Simulate, Command::Run, Command::Optimize,
                   Command::Verify}) {
        if (name == to_string(c)) return c;
    }
    return std::nullopt;
}

bool accepts(Command command, const std::string& key) {
    const auto& keys = allowed_keys(command);
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

bool accepted_anywhere(const std::string& key) {
    for (auto c : {Command::Analyze, Command::Simulate, Command::Run, Command::Optimize,
                   Command::Verify}) {
        if (accepts(c, key)) return true;
    }
    return false;
}

const std::string& require(const KeyValues& kv, const std::string& key, Command command) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        throw ConfigError("config key '" + key + "' is required by " + std::string(to_string(command)));
    }
    return it->second;
}

std::string trim(std::string s) {
    const auto ws = " \t\r\n";
    s.erase(0, s.find_first_not_of(ws));
    const auto last = s.find_last_not_of(ws);
    s.erase(last == std::string::npos ? 0 : last + 1);
    return s;
}

std::vector<std::string> split_list(const std::string& key, std::string text) {
    text = trim(text);
    if (!text.empty() && (text.front() == '[' || text.front() == '(')) {
        if (text.size() < 2 || (text.back() != ']' && text.back() != ')')) {
            throw ConfigError("config key '" + key + "': unbalanced brackets in '" + text + "'");
        }
        text = text.substr(1, text.size() - 2);
    }
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

template <typename U>
U parse_unsigned(const std::string& key, const std::string& text) {
    const auto t = trim(text);
    U v{};
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size() || t.empty()) {
        throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + text + "'");
    }
    return v;
}

double parse_double(const std::string& key, const std::string& text) {
    const auto t = trim(text);
    try {
        std::size_t used = 0;
        double v = std::stod(t, &used);
        if (used == t.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
}

bool parse_bool(const std::string& key, const std::string& text) {
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + text + "'");
}

// Runs a library parser and re-labels its error with the key.
template <typename F>
auto keyed(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

template <typename F>
void if_set(const KeyValues& kv, const std::string& key, F&& f) {
    if (auto it = kv.find(key); it != kv.end()) keyed(key, [&] { f(it->second); });
}

}  // namespace

std::string_view to_string(Command command) {
    switch (command) {
        case Command::Analyze: return "analyze";
        case Command::Simulate: return "simulate";
        case Command::Run: return "run";
        case Command::Optimize: return "optimize";
        case Command::Verify: return "verify";
    }
    return "?";
}

const std::vector<std::string>& allowed_keys(Command command) {
    switch (command) {
        case Command::Optimize: return kOptimizeKeys;
        case Command::Verify: return kVerifyKeys;
        default: return kExperimentKeys;
    }
}

KeyValues load_config_file(const std::filesystem::path& path, Command command) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read '" + path.string() + "'");
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_config(in);
    } catch (const std::exception& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    KeyValues globals;
    KeyValues section;
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue;
        std::string value;
        for (std::size_t i = 0; i < item.inputs.size(); ++i) {
            if (i) value += ',';
            value += item.inputs[i];
        }
        if (item.parents.empty()) {
            if (!accepted_anywhere(item.name)) {
                throw ConfigError("config: unknown key '" + item.name + "'");
            }
            if (accepts(command, item.name)) globals[item.name] = value;
            continue;
        }
        if (item.parents.size() != 1) {
            throw ConfigError("config: unknown key '" + item.fullname() + "'");
        }
        const auto owner = command_from_section(item.parents.front());
        if (!owner) throw ConfigError("config: unknown section [" + item.parents.front() + "]");
        if (!accepts(*owner, item.name)) {
            throw ConfigError("config: unknown key '" + item.name + "' in section [" +
                              item.parents.front() + "]");
        }
        if (*owner == command) section[item.name] = value;
    }
    for (auto& [k, v] : section) globals[k] = v;
    return globals;
}

void apply_override(KeyValues& kv, Command command, const std::string& key, const std::string& value) {
    if (!accepts(command, key)) {
        throw ConfigError("unknown key '" + key + "' for " + std::string(to_string(command)));
    }
    kv[key] = value;
}

ExperimentConfig build_experiment_config(const KeyValues& kv, Command command) {
    ExperimentConfig c;
    c.mode = command == Command::Simulate ? RunMode::MonteCarlo
             : command == Command::Run    ? RunMode::RealExec
                                          : RunMode::Analytic;

    c.params.n_workers = parse_unsigned<std::size_t>("workers", require(kv, "workers", command));
    if (command != Command::Run || !kv.contains("profile")) {
        for (const char* key : {"mu", "alpha", "layers", "load"}) require(kv, key, command);
    }
    if (command == Command::Simulate) require(kv, "trials", command);

    if_set(kv, "schemes", [&](const std::string& v) {
        c.schemes.clear();
        for (const auto& s : split_list("schemes", v)) c.schemes.push_back(parse_scheme(s));
    });
    if_set(kv, "n_x", [&](const std::string& v) { c.n_x = parse_unsigned<std::size_t>("n_x", v); });
    if_set(kv, "n_z", [&](const std::string& v) { c.n_z = parse_unsigned<std::size_t>("n_z", v); });
    if_set(kv, "n_y", [&](const std::string& v) { c.n_y = parse_unsigned<std::size_t>("n_y", v); });
    if_set(kv, "mu", [&](const std::string& v) { c.params.mu = parse_double("mu", v); });
    if_set(kv, "alpha", [&](const std::string& v) { c.params.alpha = parse_double("alpha", v); });
    if_set(kv, "layers", [&](const std::string& v) {
        c.layer_sweep.clear();
        for (const auto& s : split_list("layers", v)) {
            c.layer_sweep.push_back(parse_unsigned<std::size_t>("layers", s));
        }
    });
    if_set(kv, "load", [&](const std::string& v) { c.load = parse_unsigned<std::size_t>("load", v); });
    if_set(kv, "trials", [&](const std::string& v) { c.trials = parse_unsigned<std::size_t>("trials", v); });
    if_set(kv, "seed", [&](const std::string& v) { c.seed = parse_unsigned<std::uint64_t>("seed", v); });
    if_set(kv, "optimizer_mode",
           [&](const std::string& v) { c.optimizer_mode = parse_expectation_mode(trim(v)); });
    if_set(kv, "decode_profile",
           [&](const std::string& v) { c.decode_profile = parse_decode_profile(trim(v)); });
    if_set(kv, "per_trial", [&](const std::string& v) { c.per_trial = parse_bool("per_trial", v); });
    if_set(kv, "profile", [&](const std::string& v) { c.profile = parse_profile(trim(v)); });
    if_set(kv, "grids", [&](const std::string& v) { c.grids = parse_grids(trim(v)); });
    if_set(kv, "straggler_probability", [&](const std::string& v) {
        c.straggler_probability = parse_double("straggler_probability", v);
    });
    if_set(kv, "slowdown", [&](const std::string& v) { c.slowdown = parse_double("slowdown", v); });
    if_set(kv, "kill_probability",
           [&](const std::string& v) { c.kill_probability = parse_double("kill_probability", v); });
    if_set(kv, "backend", [&](const std::string& v) { c.backend = parse_backend(trim(v)); });
    if_set(kv, "points", [&](const std::string& v) { c.points = parse_point_mode(trim(v)); });
    if_set(kv, "verify_tolerance",
           [&](const std::string& v) { c.verify_tolerance = parse_double("verify_tolerance", v); });

    if (c.profile && !kv.contains("layers")) c.layer_sweep = {c.profile->layers()};
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return c;
}

OptimizerSpec build_optimizer_spec(const KeyValues& kv) {
    const auto cmd = Command::Optimize;
    OptimizerSpec spec;
    spec.params.n_workers = parse_unsigned<std::size_t>("workers", require(kv, "workers", cmd));
    spec.layers = parse_unsigned<std::size_t>("layers", require(kv, "layers", cmd));
    spec.params.mu = parse_double("mu", require(kv, "mu", cmd));
    spec.params.alpha = parse_double("alpha", require(kv, "alpha", cmd));
    if (kv.contains("total_threshold")) {
        spec.total_threshold = parse_unsigned<std::size_t>("total_threshold", kv.at("total_threshold"));
    } else if (kv.contains("load")) {
        spec.total_threshold = parse_unsigned<std::size_t>("load", kv.at("load")) * spec.layers;
    } else {
        throw ConfigError("config key 'total_threshold' (or 'load') is required by optimize");
    }
    if_set(kv, "mode", [&](const std::string& v) { spec.mode = parse_expectation_mode(trim(v)); });
    try {
        spec.params.validate();
        spec.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

VerifyConfig build_verify_config(const KeyValues& kv) {
    const auto cmd = Command::Verify;
    VerifyConfig v;
    v.n_x = parse_unsigned<std::size_t>("n_x", require(kv, "n_x", cmd));
    v.n_z = parse_unsigned<std::size_t>("n_z", require(kv, "n_z", cmd));
    v.n_y = parse_unsigned<std::size_t>("n_y", require(kv, "n_y", cmd));
    v.workers = parse_unsigned<std::size_t>("workers", require(kv, "workers", cmd));
    v.profile = keyed("profile", [&] { return parse_profile(trim(require(kv, "profile", cmd))); });
    if_set(kv, "grids", [&](const std::string& s) { v.grids = parse_grids(trim(s)); });
    if_set(kv, "backend", [&](const std::string& s) { v.backend = parse_backend(trim(s)); });
    if_set(kv, "points", [&](const std::string& s) { v.points = parse_point_mode(trim(s)); });
    if_set(kv, "seed", [&](const std::string& s) { v.seed = parse_unsigned<std::uint64_t>("seed", s); });
    if_set(kv, "samples", [&](const std::string& s) { v.samples = parse_unsigned<std::size_t>("samples", s); });
    if_set(kv, "verify_tolerance",
           [&](const std::string& s) { v.verify_tolerance = parse_double("verify_tolerance", s); });
    keyed("profile", [&] { v.profile.validate_for(v.workers); });
    return v;
}

std::filesystem::path output_dir(const KeyValues& kv) {
    if (auto it = kv.find("out"); it != kv.end()) return trim(it->second);
    return "hcmm_out";
}

}  // namespace hcmm::cli
