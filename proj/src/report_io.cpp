#include "hcmm/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hcmm {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_thresholds(const std::vector<std::size_t>& ks) {
    std::string s;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(ks[i]);
    }
    return s;
}

nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

std::string report_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "config_hash,seed,mode,scheme,layers,profile,statistic,value\n";
    for (const auto& row : report.rows) {
        for (const auto& [key, value] : row.stats) {
            out << report.config_hash << ',' << report.seed << ',' << to_string(report.mode) << ','
                << to_string(row.scheme) << ',' << row.layers << ','
                << join_thresholds(row.thresholds) << ',' << key << ',' << num(value) << '\n';
        }
    }
    return out.str();
}

std::string trials_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "trial,layers,plain,hier,sumrate,stragglers,failure\n";
    for (const auto& t : report.trial_rows) {
        std::string strag;
        for (bool s : t.stragglers) strag += s ? '1' : '0';
        std::string failure = t.failure;
        for (auto& c : failure) {
            if (c == ',' || c == '\n') c = ' ';
        }
        out << t.trial << ',' << t.layers << ',' << num(t.plain) << ',' << num(t.hier) << ','
            << num(t.sumrate) << ',' << strag << ',' << failure << '\n';
    }
    return out.str();
}

std::string report_json(const ExperimentReport& report, const ExperimentConfig& config) {
    nlohmann::json j;
    j["config_hash"] = report.config_hash;
    j["config"] = describe(config);
    j["seed"] = report.seed;
    j["mode"] = std::string(to_string(report.mode));
    j["trials"] = report.trials;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json r;
        r["scheme"] = std::string(to_string(row.scheme));
        r["layers"] = row.layers;
        r["profile"] = row.thresholds;
        for (const auto& [key, value] : row.stats) r["stats"][key] = json_number(value);
        j["rows"].push_back(std::move(r));
    }
    j["skipped"] = nlohmann::json::array();
    for (const auto& s : report.skipped) {
        j["skipped"].push_back({{"layers", s.layers}, {"reason", s.reason}});
    }
    j["notes"] = report.notes;
    return j.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) throw Error("write to " + tmp.string() + " failed");
    }
    std::filesystem::rename(tmp, path);
}

void write_report(const std::filesystem::path& dir, const ExperimentReport& report,
                  const ExperimentConfig& config) {
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "summary.csv", report_csv(report));
    write_file_atomic(dir / "summary.json", report_json(report, config));
    if (!report.trial_rows.empty()) write_file_atomic(dir / "trials.csv", trials_csv(report));
}

}  // namespace hcmm
