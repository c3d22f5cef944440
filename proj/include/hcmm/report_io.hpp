#pragma once

#include <filesystem>
#include <string>

#include "hcmm/sim_harness.hpp"

namespace hcmm {

// Long format, one statistic per line:
// config_hash,seed,mode,scheme,layers,profile,statistic,value
std::string report_csv(const ExperimentReport& report);

// trial,layers,plain,hier,sumrate,stragglers,failure
std::string trials_csv(const ExperimentReport& report);

std::string report_json(const ExperimentReport& report, const ExperimentConfig& config);

// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Writes summary.csv, summary.json and (when present) trials.csv under dir.
void write_report(const std::filesystem::path& dir, const ExperimentReport& report,
                  const ExperimentConfig& config);

}  // namespace hcmm
