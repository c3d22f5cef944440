#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hcmm/profile_optimizer.hpp"
#include "hcmm/sim_harness.hpp"

namespace hcmm::cli {

enum class Command { Analyze, Simulate, Run, Optimize, Verify };

std::string_view to_string(Command command);

// Raised for malformed or incomplete configuration; the message names the key.
class ConfigError : public Error {
public:
    using Error::Error;
};

using KeyValues = std::map<std::string, std::string>;

// Keys accepted by a subcommand, in the file and through --set.
const std::vector<std::string>& allowed_keys(Command command);

// Reads the flat INI-style file. Top-level keys apply to every subcommand that
// accepts them; a [section] named after a subcommand applies only to it.
// Unknown sections and keys are rejected.
KeyValues load_config_file(const std::filesystem::path& path, Command command);

// Applies `key=value` overrides after checking the key is accepted.
void apply_override(KeyValues& kv, Command command, const std::string& key, const std::string& value);

ExperimentConfig build_experiment_config(const KeyValues& kv, Command command);
OptimizerSpec build_optimizer_spec(const KeyValues& kv);

struct VerifyConfig {
    std::size_t n_x = 0;
    std::size_t n_z = 0;
    std::size_t n_y = 0;
    std::size_t workers = 0;
    Profile profile{{1}};
    std::optional<std::vector<LayerGrid>> grids;
    Backend backend = Backend::Exact;
    PointMode points = PointMode::Integer;
    std::uint64_t seed = 1;
    // Subsets checked per layer when C(N, K_l) exceeds it; 0 = always exhaustive.
    std::size_t samples = 0;
    double verify_tolerance = 1e-6;
};

VerifyConfig build_verify_config(const KeyValues& kv);

// Output directory from the `out` key, or the default.
std::filesystem::path output_dir(const KeyValues& kv);

}  // namespace hcmm::cli
