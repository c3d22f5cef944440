#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "cli_config.hpp"

namespace hcmm::cli {

// Corrupts one entry of worker `worker`'s result for layer `layer` (both
// 1-based) before decoding. Negative control for the audit.
struct InjectedFault {
    std::size_t layer = 0;
    std::size_t worker = 0;
};

InjectedFault parse_fault(const std::string& text);  // "layer:worker"

// Decodes every layer from all (or sampled) threshold-sized subsets of worker
// results and checks each against the direct product, then checks that the
// tile plan partitions the product. Returns the exit status; on failure a
// counterexample is printed and written to out_dir/counterexample.json.
int run_verify(const VerifyConfig& config, std::optional<InjectedFault> fault,
               const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

}  // namespace hcmm::cli
